"""Steady Euler flows in a periodic channel through a pair of stream functions."""

__version__ = "0.1.0"
