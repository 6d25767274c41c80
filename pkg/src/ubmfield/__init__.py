"""Unitary Brownian motion, its characteristic polynomial field and the Gaussian free field limit."""

__version__ = "0.1.0"
