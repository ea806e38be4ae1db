"""Rescaled selection-mutation lattice dynamics and their Hamilton-Jacobi limit."""

try:
    # Installed layout: the extension lives inside the package.
    from ._core import *  # noqa: F401,F403
    from . import _core as _impl
except ImportError:
    # Build-tree layout: the extension sits next to the package on sys.path.
    from _core import *  # noqa: F401,F403
    import _core as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
