"""Exact logarithmic topological recursion on genus-zero spectral curves."""

__version__ = "0.1.0"
