"""Thin homotopy, tree factorization and holonomy of piecewise-C1 loops."""

__version__ = "0.1.0"
