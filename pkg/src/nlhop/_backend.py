"""Kernel backend selection.

The compiled ``_core`` extension is preferred; the numpy module ``_core_py``
is used when the extension is missing or ``NLHOP_PURE_PYTHON`` is set to a
non-empty value other than ``0``.
"""
import os

if os.environ.get("NLHOP_PURE_PYTHON", "0") not in ("", "0"):
    from . import _core_py as core

    BACKEND = "python"
else:
    try:
        from . import _core as core

        BACKEND = "cython"
    except ImportError:  # extension not built
        from . import _core_py as core

        BACKEND = "python"

__all__ = ["core", "BACKEND"]
