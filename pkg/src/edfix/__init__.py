"""Generalised-distance fixed-point theory on finite instances."""

__version__ = "0.1.0"
