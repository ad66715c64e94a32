"""Kernel selection. The compiled extension is used when it imports; set
``LORENTZWIRE_BACKEND=python`` to force the pure-Python fallback."""
import os

from . import _kernel_py

try:
    from . import _kernel as _compiled
except ImportError:  # extension not built
    _compiled = None

ENV_VAR = "LORENTZWIRE_BACKEND"


def available():
    return ("compiled", "python") if _compiled is not None else ("python",)


def get(name=None):
    """Return the kernel module for ``name`` (``auto``, ``compiled`` or ``python``)."""
    name = name or os.environ.get(ENV_VAR, "auto")
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel is not built")
        return _compiled
    if name != "auto":
        raise ValueError(f"unknown backend {name!r}")
    return _compiled if _compiled is not None else _kernel_py


def name_of(mod):
    return "python" if mod is _kernel_py else "compiled"
