"""Besov-type spaces with variable smoothness and integrability, sampled on periodic grids."""

__version__ = "0.1.0"
