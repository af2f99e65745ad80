"""Zeroth-order extragradient methods for min-max problems."""

__version__ = "0.1.0"
