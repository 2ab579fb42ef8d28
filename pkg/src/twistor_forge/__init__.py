"""Numerical twistor correspondence for self-dual gauge fields on a flat 4-ball."""

__version__ = "0.1.0"
