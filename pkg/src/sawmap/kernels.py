"""Kernel backend selection.

Imports the compiled extension when present, otherwise the pure-Python
twin.  SAWMAP_PURE_PYTHON=1 forces the fallback (used by the parity
tests and the benchmark).  Both backends expose the same functions with
bit-identical results.
"""

import os

if os.environ.get("SAWMAP_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND

OK = _impl.OK
BELOW = _impl.BELOW
ABOVE = _impl.ABOVE
TIMEOUT = _impl.TIMEOUT

locate_index = _impl.locate_index
map_eval = _impl.map_eval
orbit_fill = _impl.orbit_fill
escape_time = _impl.escape_time
converge_time = _impl.converge_time
entry_time = _impl.entry_time
absorb_time = _impl.absorb_time
stay_max_dist = _impl.stay_max_dist
coverage = _impl.coverage
first_hit_2d = _impl.first_hit_2d


def available_backends():
    """Return the importable backend modules keyed by name."""
    from . import _kernels_py

    out = {"python": _kernels_py}
    try:
        from . import _kernels  # type: ignore[attr-defined]

        out["compiled"] = _kernels
    except ImportError:
        pass
    return out
