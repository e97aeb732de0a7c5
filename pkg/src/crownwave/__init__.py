"""Boundary-value eigendistributions on de Sitter space and their wavefront sets."""

__version__ = "0.1.0"
