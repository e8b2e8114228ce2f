"""Finite-dimensional free fermions, implementers and Connes fusion."""

__version__ = "0.1.0"
