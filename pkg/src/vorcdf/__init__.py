"""Voronoi spherical CDF bounds for lattices and binary linear codes."""

__version__ = "0.1.0"
