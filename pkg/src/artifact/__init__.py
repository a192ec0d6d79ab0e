"""Finite-temperature correlation lengths and amplitudes of the 1D repulsive Bose gas."""
__version__ = "0.1.0"
