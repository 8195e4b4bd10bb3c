"""Kernel backend selection.

The compiled extension is preferred when importable; setting
``ROBCOV_BACKEND=python`` forces the pure-Python fallback and
``ROBCOV_BACKEND=compiled`` makes a missing extension a hard error.
"""

import os

_choice = os.environ.get("ROBCOV_BACKEND", "auto").lower()
if _choice not in ("auto", "compiled", "python"):
    raise ValueError(f"ROBCOV_BACKEND must be auto, compiled or python, got {_choice!r}")

if _choice == "python":
    from . import _pykernels as kernels
else:
    try:
        from . import _accel as kernels  # type: ignore[no-redef]
    except ImportError:
        if _choice == "compiled":
            raise
        from . import _pykernels as kernels  # type: ignore[no-redef]

ACTIVE = kernels.NAME


def available_backends():
    """Names of importable backends ('compiled' first when present)."""
    names = []
    try:
        from . import _accel  # noqa: F401
        names.append("compiled")
    except ImportError:
        pass
    names.append("python")
    return names


def get_kernels(name):
    """Fetch a backend module by name irrespective of the active choice."""
    if name == "python":
        from . import _pykernels
        return _pykernels
    if name == "compiled":
        from . import _accel
        return _accel
    raise ValueError(f"unknown backend {name!r}")
