"""Ginzburg-Landau finite element solver with neural-network initial values."""

try:
    from ._glenn import *  # noqa: F401,F403
    from ._glenn import __doc__  # noqa: F401
except ImportError:  # in-tree build: the extension sits next to the package
    from _glenn import *  # noqa: F401,F403
