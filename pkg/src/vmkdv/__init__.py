"""Symbolic-numeric workbench for the vector mKdV hierarchy."""

__version__ = "0.1.0"
