"""Exact computer algebra for the spin chains of quantum affine type D."""

__version__ = "0.1.0"
