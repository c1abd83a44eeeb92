"""Metaphor comprehension probing harness: Python face of the C++ core."""

try:
    from ._core import *  # noqa: F401,F403  (wheel layout: _core sits inside the package)
except ImportError:  # in-tree builds put _core on sys.path instead
    from _core import *  # noqa: F401,F403
