"""Numerical laboratory for the Levi equation, its graph variants and hulls in C^2."""

__version__ = "0.1.0"
