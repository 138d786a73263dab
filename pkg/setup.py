"""Build script for the optional compiled kernel.

The package works without the extension (a pure-Python twin of the hot
loops is selected at import time), so a missing compiler or Cython only
costs speed.  Set SAWMAP_NO_EXT=1 to skip the build explicitly.

-ffp-contract=off keeps the C arithmetic bit-identical to CPython floats
(no fused multiply-add), which the kernel parity tests rely on.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("SAWMAP_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "sawmap._kernels",
                    ["src/sawmap/_kernels.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
