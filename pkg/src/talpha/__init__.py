"""Potential theory of the weighted Laplacian T_alpha on the unit ball."""

__version__ = "0.1.0"
