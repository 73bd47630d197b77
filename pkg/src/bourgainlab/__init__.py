"""Additive combinatorics on explicit finite abelian groups."""

from bourgainlab.group import GroupSet, GroupSpec
from bourgainlab.kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["GroupSpec", "GroupSet", "BACKEND", "__version__"]
