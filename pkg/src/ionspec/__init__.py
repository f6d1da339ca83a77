"""Multidimensional spectroscopy of trapped-ion phonon and spin systems."""

__version__ = "0.1.0"
