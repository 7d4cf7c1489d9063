"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; the pure
Python kernels are the fallback and the behavioural reference.  Set the
environment variable ``NKSLAB_BACKEND=python`` to force the fallback.
"""

import os

from . import _kernels_py

try:
    from . import _kernels
    _HAVE_COMPILED = True
except ImportError:
    _kernels = None
    _HAVE_COMPILED = False


def available_backends() -> tuple:
    return ("compiled", "python") if _HAVE_COMPILED else ("python",)


def get_backend(name: str | None = None):
    """Return the kernel module for ``name`` (default: best available)."""
    if name is None:
        name = os.environ.get("NKSLAB_BACKEND")
    if name is None:
        return _kernels if _HAVE_COMPILED else _kernels_py
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if not _HAVE_COMPILED:
            raise ImportError("compiled kernels are not available; "
                              "build with `python setup.py build_ext --inplace`")
        return _kernels
    raise ValueError(f"unknown backend {name!r}")


def active_backend_name() -> str:
    return get_backend().BACKEND_NAME
