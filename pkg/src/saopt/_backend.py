"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
kernels are used. ``SAOPT_BACKEND=python`` forces the fallback and
``SAOPT_BACKEND=cython`` makes a missing extension an error.
"""

import importlib
import os

from . import _pykernels


def load(name: str):
    if name == "python":
        return _pykernels
    if name == "cython":
        return importlib.import_module("saopt._ckernels")
    raise ValueError(f"unknown backend {name!r}")


def _select():
    choice = os.environ.get("SAOPT_BACKEND", "auto").lower()
    if choice in ("python", "cython"):
        return load(choice)
    try:
        return load("cython")
    except ImportError:
        return _pykernels


kernels = _select()
BACKEND = kernels.NAME


def available() -> list[str]:
    names = ["python"]
    try:
        load("cython")
    except ImportError:
        pass
    else:
        names.append("cython")
    return names
