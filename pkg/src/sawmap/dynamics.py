"""Orbit iteration and desk-scale numerical diagnostics.

Everything here substantiates the qualitative structure numerically:
absorption into the invariant segment family, escape from
non-invariant teeth, convergence to stable fixed points, coverage and
expansion proxies for chaotic segments, preimage trees approximating
the closure of the eventually-zero set, and an affine solver for
periodic points with a prescribed piece itinerary.

Diagnostics never claim chaos; they report numbers that are consistent
(or not) with the structural classification.  Membership in measure-
zero invariant sets is decided by distance thresholds, the only notion
available in floating point.

The long loops run through the selected kernel backend; closed-form
maps grow their tables automatically when an orbit dives toward the
accumulation point, while tabulated maps raise TruncationError there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import Interval, PieceIndex
from .errors import DomainError

ENTRY_CAP = 10**5
EVENT_CAP = 10**4


def _check_start(saw, x0):
    if not math.isfinite(x0):
        raise DomainError(f"x0={x0!r} is not finite")
    if not 0.0 <= x0 <= saw.r0:
        raise DomainError(f"x0={x0!r} outside [0, {saw.r0!r}]")


@dataclass
class OrbitRecord:
    points: np.ndarray
    pieces: list  # PieceIndex per point (None at 0), aligned with points
    events: dict


def orbit(saw, x0, n, *, attractor=None, tol=1e-12, with_pieces=True) -> OrbitRecord:
    """Iterate n steps from x0, recording points, pieces, and first-entry
    events against the map's interval family (and an attractor's bands
    when one is supplied)."""
    _check_start(saw, x0)
    if n < 0:
        raise ValueError("n must be >= 0")
    out = np.empty(n + 1)
    out[0] = x0
    i = 0
    while True:
        t = saw.piece_table()
        status, i = kernels.orbit_fill(t.bp, t.slope, t.anchor, t.nodeval, t.floor, out, i, n)
        if status == kernels.OK:
            break
        if status == kernels.ABOVE:
            raise DomainError(f"orbit left the domain at step {i}: {out[i]!r}")
        saw.ensure_floor(float(out[i]))

    pieces = None
    if with_pieces:
        floor = 0.0 if saw.seqs.extendable else saw.piece_table().floor
        pieces = [
            saw.locate_piece(float(x)) if x >= max(floor, 1e-300) else None for x in out
        ]

    fam = saw.intervals()
    events = {"Jstar": None, "J": {}, "below_e": {}, "Lambda": None}
    for idx, x in enumerate(out):
        if events["Jstar"] is None and x in fam.jstar:
            events["Jstar"] = idx
        for k, iv in fam.J.items():
            if k not in events["J"] and x in iv:
                events["J"][k] = idx
            if k not in events["below_e"] and x < iv.lo:
                events["below_e"][k] = idx
    if attractor is not None:
        los = [iv.lo for iv in attractor.A]
        his = [iv.hi for iv in attractor.A]
        for idx, x in enumerate(out):
            if _union_dist(los, his, float(x)) <= tol:
                events["Lambda"] = idx
                break
    return OrbitRecord(points=out, pieces=pieces, events=events)


def _union_dist(los, his, x):
    d = math.inf
    for lo, hi in zip(los, his):
        if x < lo:
            d = min(d, lo - x)
        elif x > hi:
            d = min(d, x - hi)
        else:
            return 0.0
    return d


def _interval_arrays(intervals):
    los = np.array([iv.lo for iv in intervals])
    his = np.array([iv.hi for iv in intervals])
    return los, his


def _drive(saw, run):
    """Re-run a kernel predicate loop across table extensions."""
    state = None
    while True:
        t = saw.piece_table()
        status, state = run(t, state)
        if status == kernels.OK:
            return state
        if status == kernels.TIMEOUT:
            return None
        if status == kernels.ABOVE:
            raise DomainError("orbit left the domain")
        saw.ensure_floor(state[1])  # (n, x)


def entry_time(saw, x0, cap=ENTRY_CAP):
    """Steps until the orbit first lies in the union of the invariant
    segments (Jstar and the J_k); None if the cap runs out first."""
    _check_start(saw, x0)
    fam = saw.intervals()
    ivs = [fam.jstar] + [fam.J[k] for k in sorted(fam.J)]
    los, his = _interval_arrays(ivs)

    def run(t, state):
        n, x = state if state is not None else (0, x0)
        status, n, x = kernels.entry_time(
            t.bp, t.slope, t.anchor, t.nodeval, t.floor, x, los, his, cap, n
        )
        return status, (n, x)

    res = _drive(saw, run)
    return None if res is None else res[0]


def escape_time_type3(saw, k, x0, cap=EVENT_CAP):
    """Steps until the orbit from x0 in a type-III tooth J_k drops below
    e_k; None (a report value, not a failure) when the cap runs out,
    which for random starts means x0 sat numerically on the repeller."""
    from .classify import classify_interval

    if not 1 <= k <= saw.k_star - 1:
        raise ValueError(f"escape requires 1 <= k <= k_star-1 = {saw.k_star - 1}")
    t = classify_interval(saw.alpha(k), saw.beta(k))
    if t.tag != "III":
        raise ValueError(f"tooth {k} is type {t}, need III")
    e = saw.e(k)
    if not e <= x0 <= saw.p(k):
        raise DomainError(f"x0={x0!r} outside J_{k}")

    def run(tab, state):
        n, x = state if state is not None else (0, x0)
        status, n, x = kernels.escape_time(
            tab.bp, tab.slope, tab.anchor, tab.nodeval, tab.floor, x, e, cap, n
        )
        return status, (n, x)

    res = _drive(saw, run)
    return None if res is None else res[0]


def converge_type1(saw, k, x0, tol=1e-8, cap=EVENT_CAP):
    """Steps until the orbit from x0 in a type-I tooth J_k is within tol
    of the stable fixed point ehat_k; None if the cap runs out."""
    from .classify import classify_interval

    t = classify_interval(saw.alpha(k), saw.beta(k))
    if t.tag != "I":
        raise ValueError(f"tooth {k} is type {t}, need I")
    e = saw.e(k)
    if not e <= x0 <= saw.p(k):
        raise DomainError(f"x0={x0!r} outside J_{k}")
    if x0 == e:
        raise DomainError("x0 = e_k is the excluded unstable point")
    target = saw.ehat(k)

    def run(tab, state):
        n, x = state if state is not None else (0, x0)
        status, n, x = kernels.converge_time(
            tab.bp, tab.slope, tab.anchor, tab.nodeval, tab.floor, x, target, tol, cap, n
        )
        return status, (n, x)

    res = _drive(saw, run)
    return None if res is None else res[0]


def absorb_into(saw, x0, intervals, enter_tol=1e-12, cap=EVENT_CAP):
    """Run until the orbit is within enter_tol of the interval union.

    Returns (steps, entry_point) so the caller can keep iterating from
    the entry (see :func:`max_dist_over`); None if the cap runs out.
    """
    _check_start(saw, x0)
    los, his = _interval_arrays(intervals)

    def run(t, state):
        n, x = state if state is not None else (0, x0)
        status, n, x = kernels.absorb_time(
            t.bp, t.slope, t.anchor, t.nodeval, t.floor, x, los, his, enter_tol, cap, n
        )
        return status, (n, x)

    res = _drive(saw, run)
    return None if res is None else res


def max_dist_over(saw, x0, intervals, nsteps):
    """Largest distance to the interval union over the next nsteps
    iterates of x0 (the 'stays absorbed' half of an absorption check)."""
    _check_start(saw, x0)
    los, his = _interval_arrays(intervals)

    def run(t, state):
        n, x, dmax = state if state is not None else (0, x0, 0.0)
        status, n, x, dmax = kernels.stay_max_dist(
            t.bp, t.slope, t.anchor, t.nodeval, t.floor, x, los, his, nsteps, n, dmax
        )
        return status, (n, x, dmax)

    res = _drive(saw, run)
    if res is None:
        raise RuntimeError("unreachable: stay loop has no timeout")
    return res[2]


@dataclass
class PreimageTree:
    depth: int
    nodes: list  # sorted points x with T^n(x) = 0 for some n <= depth
    levels: list = field(default_factory=list)  # nodes first found per level
    truncated: bool = False
    max_residual: float = 0.0


def preimage_tree(saw, depth, max_nodes=100_000, piece_cap=512) -> PreimageTree:
    """Finite approximation of the points eventually mapped to 0.

    Pulls 0 back through the affine pieces level by level, keeping
    preimages inside Jstar.  Each piece contributes at most one
    preimage per target and branch; enumeration stops at the node
    budget, the piece cap, or (for tabulated maps) the table floor,
    setting the truncated flag.  Every node's forward residual
    |T^n(node)| is verified below 1e-10.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    p_star = saw.p(saw.k_star)
    floor = saw.piece_table().floor if not saw.seqs.extendable else 0.0

    truncated = False
    seen = {0.0: 0}
    levels = [[0.0]]
    targets = [0.0]
    for level in range(1, depth + 1):
        new = []
        for tval in targets:
            pres, cut = _preimages(saw, tval, p_star, floor, piece_cap)
            truncated = truncated or cut
            for x in pres:
                if x not in seen:
                    seen[x] = level
                    new.append(x)
                    if len(seen) >= max_nodes:
                        truncated = True
                        break
            if len(seen) >= max_nodes:
                break
        new.sort()
        levels.append(new)
        targets = new
        if len(seen) >= max_nodes or not new:
            break

    tree = PreimageTree(
        depth=depth, nodes=sorted(seen), levels=levels, truncated=truncated
    )
    tree.max_residual = _verify_residuals(saw, seen)
    return tree


def _preimages(saw, tval, p_star, floor, piece_cap):
    """In-Jstar preimages of tval, one per branch of each usable piece."""
    from .errors import TruncationError

    out = []
    cut = False
    k = 0
    while k <= piece_cap:
        try:
            saw.seqs.ensure_depth(k + 1)
        except TruncationError:
            # Table ends while deeper teeth could still hold preimages.
            cut = True
            break
        qk1 = saw.q(k + 1)
        if k >= 1:
            pk = saw.p(k)
            rk = saw.r(k)
            qk = saw.q(k)
            if tval > pk:
                # Heights only decrease: no deeper piece reaches the target.
                break
            x = qk1 + tval / saw.alpha(k)
            if qk1 <= x <= rk and x <= p_star and x >= floor:
                out.append(x)
            x = qk - tval / saw.beta(k)
            if rk <= x <= qk and x <= p_star and x >= floor:
                out.append(x)
        else:
            if tval <= saw.p(0):
                x = qk1 + tval / saw.alpha(0)
                if qk1 <= x <= saw.r0 and x <= p_star and x >= floor:
                    out.append(x)
        if 0.0 < qk1 < floor:
            cut = True
            break
        k += 1
    else:
        cut = True
    return out, cut


def _verify_residuals(saw, seen, tol=1e-10):
    worst = 0.0
    for x, level in seen.items():
        v = x
        for _ in range(level):
            v = saw.eval(v)
        worst = max(worst, abs(v))
    if worst > tol:
        raise DomainError(f"preimage residual {worst!r} above {tol}")
    return worst


def write_preimage_csv(tree: PreimageTree, path):
    with open(path, "w") as fh:
        fh.write("n,x\n")
        for level, pts in enumerate(tree.levels):
            for x in pts:
                fh.write(f"{level},{x!r}\n")


def expansion_estimate(saw, x0, n):
    """Average log-slope along the orbit: (1/n) * sum log|T'|.

    Positive values are consistent with sensitive dependence, nothing
    more.  An orbit point landing exactly on a breakpoint contributes
    the rising-side slope; an orbit reaching the fixed point 0 has no
    defined slope and raises DomainError.
    """
    rec = orbit(saw, x0, n, with_pieces=False)
    total = 0.0
    for x in rec.points[:-1]:
        x = float(x)
        if x <= 0.0:
            raise DomainError("orbit reached 0; slope undefined there")
        total += math.log(abs(_slope_rising_side(saw, x)))
    return total / n


def _slope_rising_side(saw, x):
    piece = saw.locate_piece(x)
    if piece.branch == "falling" and x == saw.r(piece.k):
        # Breakpoint collision at a tooth peak: use the rising side.
        return saw.alpha(piece.k)
    return saw.piece_slope(piece)


def lemma1_check(alpha, beta, trials, rng=None, slack=1e-12):
    """Random-subinterval expansion test on a two-slope tent.

    For every [a, b] inside the tent's base, the image length must be at
    least (b-a) * alpha*beta/(alpha+beta) when 1/alpha + 1/beta < 1.
    Returns True iff all trials satisfy the bound within ``slack``.
    """
    import random as _random

    if not (1.0 / alpha + 1.0 / beta) < 1.0:
        raise ValueError("requires 1/alpha + 1/beta < 1")
    rng = rng or _random.Random(0)
    bound = alpha * beta / (alpha + beta)
    for _ in range(trials):
        c = 0.3 + 0.4 * rng.random()
        d = c - (0.05 + 0.3 * rng.random())
        e = c + (0.05 + 0.3 * rng.random())
        a = d + rng.random() * (e - d)
        b = a + rng.random() * (e - a)
        if b <= a:
            continue
        fc = alpha * (c - d)
        if b <= c:
            length = alpha * (b - a)
        elif a >= c:
            length = beta * (b - a)
        else:
            fa = alpha * (a - d)
            fb = fc - beta * (b - c)
            length = fc - min(fa, fb)
        if length < (b - a) * bound - slack:
            return False
    return True


def coverage_histogram(saw, region: Interval, x0, n, bins):
    """Fraction of uniform bins over ``region`` visited by the n-step
    orbit of x0 (a transitivity proxy; the region should be invariant)."""
    if x0 not in region:
        raise DomainError(f"x0={x0!r} outside region {region}")
    _check_start(saw, x0)
    visited = np.zeros(bins, dtype=np.uint8)

    def run(t, state):
        i, x = state if state is not None else (0, x0)
        status, i, x = kernels.coverage(
            t.bp, t.slope, t.anchor, t.nodeval, t.floor, x, n, region.lo, region.hi, visited, i
        )
        return status, (i, x)

    _drive(saw, run)
    return float(visited.sum()) / bins


def periodic_orbit_from_itinerary(saw, itinerary, residual_tol=1e-10, info=None):
    """Solve for a periodic point visiting the given pieces in order.

    Composes the affine branch maps along the itinerary and solves the
    fixed-point equation.  Returns the point iff it actually lies in the
    prescribed pieces and closes up within ``residual_tol``; None
    otherwise.  A slope product of exactly 1 is degenerate (flagged in
    ``info`` when a dict is passed).
    """
    if not itinerary:
        raise ValueError("itinerary must be non-empty")
    S = 1.0
    C = 0.0
    for piece in itinerary:
        a, c0 = _piece_affine(saw, piece)
        S = a * S
        C = a * C + c0
    if S == 1.0:
        if info is not None:
            info["degenerate"] = True
        return None
    x = C / (1.0 - S)
    # The candidate must traverse exactly the prescribed pieces.
    v = x
    pad = 1e-12
    for piece in itinerary:
        lo, hi = _piece_span(saw, piece)
        if not (lo - pad <= v <= hi + pad):
            return None
        a, c0 = _piece_affine(saw, piece)
        v = a * v + c0
    if abs(v - x) > residual_tol * max(1.0, abs(x)):
        return None
    return x


def _piece_affine(saw, piece: PieceIndex):
    if piece.branch == "rising":
        a = saw.alpha(piece.k)
        return a, -a * saw.q(piece.k + 1)
    b = saw.beta(piece.k)
    return -b, b * saw.q(piece.k)


def _piece_span(saw, piece: PieceIndex):
    if piece.branch == "rising":
        return saw.q(piece.k + 1), saw.r(piece.k)
    return saw.r(piece.k), saw.q(piece.k)
