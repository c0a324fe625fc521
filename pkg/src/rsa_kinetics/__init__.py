"""Numerical laboratory for one-dimensional random sequential adsorption."""

__version__ = "0.1.0"
