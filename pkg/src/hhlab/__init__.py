"""Numerical laboratory for uniqueness and non-uniqueness of Hardy-Henon heat flows."""

__version__ = "0.1.0"
