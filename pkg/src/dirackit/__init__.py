"""Symbolic verification engine for Dirac and Poisson geometry on coordinate charts."""

__version__ = "0.1.0"
