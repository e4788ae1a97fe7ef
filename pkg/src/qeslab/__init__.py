"""Quasi-exactly-solvable matrix Schrödinger operators: exact algebra and numerics."""

__version__ = "0.1.0"
