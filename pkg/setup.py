"""Builds the optional C extension with the hot kernels.

The package is fully functional without it (a pure-Python backend is
selected at import time), so compilation failures are non-fatal.
"""

import sys

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension(
            "robcov._accel",
            ["src/robcov/_accel.pyx", "src/robcov/_libm_shim.c"],
            include_dirs=["src/robcov"],
        )],
        language_level=3,
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"robcov: skipping C extension build ({exc}); "
          "the pure-Python backend will be used", file=sys.stderr)

setup(ext_modules=ext_modules)
