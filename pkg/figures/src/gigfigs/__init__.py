"""Post-hoc figures for gig-market simulation runs.

Consumes only the simulator's persisted CSV tables; every figure comes
with a plain-text sidecar holding the fitted numbers so downstream checks
never have to diff images.
"""
from .render import FigureSpec, TableGroup, render
from .tables import SchemaError

__all__ = ["FigureSpec", "TableGroup", "render", "SchemaError"]
