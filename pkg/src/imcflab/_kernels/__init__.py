"""Shortest-path kernel selection: compiled extension when built, else pure Python."""

from . import pure

try:
    from . import _dijkstra as _compiled
    dijkstra = _compiled.dijkstra
    BACKEND = "compiled"
except ImportError:  # extension not built
    _compiled = None
    dijkstra = pure.dijkstra
    BACKEND = "pure"

__all__ = ["dijkstra", "BACKEND", "pure"]
