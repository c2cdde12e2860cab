"""Benchmark problems hosted by the engine."""

from . import cluspt, trap

__all__ = ["cluspt", "trap"]
