"""Exact and numeric enumeration of k-connected chordal graphs of bounded tree-width."""
from .gfsystem import LevelSystem, assemble, clique_moments, count, counts, ktree_count
from .mps import Series, SeriesError
from .oracle import LabelledGraph, enumerate_count, validate_decomposition
from .singularity import BranchPoint, NonConvergence, branch_point, table

__version__ = "0.1.0"

__all__ = [
    "Series",
    "SeriesError",
    "LevelSystem",
    "assemble",
    "count",
    "counts",
    "clique_moments",
    "ktree_count",
    "LabelledGraph",
    "enumerate_count",
    "validate_decomposition",
    "BranchPoint",
    "NonConvergence",
    "branch_point",
    "table",
]
