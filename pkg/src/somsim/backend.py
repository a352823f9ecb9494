"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback
is always available. `SOMSIM_BACKEND=python|compiled` forces a choice.
"""

import os

from . import _kernel_py
from .exceptions import ConfigurationError

try:
    from . import _kernel
except ImportError:
    _kernel = None

MODE_NONE = _kernel_py.MODE_NONE
MODE_OVER_STRENGTHEN = _kernel_py.MODE_OVER_STRENGTHEN
MODE_INCREASE_FACTOR = _kernel_py.MODE_INCREASE_FACTOR


def _select(name=None):
    name = name or os.environ.get("SOMSIM_BACKEND", "")
    if name in ("", "auto"):
        return _kernel if _kernel is not None else _kernel_py
    if name == "python":
        return _kernel_py
    if name == "compiled":
        if _kernel is None:
            raise ConfigurationError(
                "SOMSIM_BACKEND=compiled but the extension is not built")
        return _kernel
    raise ConfigurationError(f"unknown backend {name!r}")


_active = _select()


def active_backend():
    """Name of the backend in use: 'compiled' or 'python'."""
    return "compiled" if _active is _kernel else "python"


def get_kernel(name=None):
    """Return a kernel module; with no argument, the active one."""
    if name is None:
        return _active
    return _select(name)


def run_training(*args, **kwargs):
    return _active.run_training(*args, **kwargs)
