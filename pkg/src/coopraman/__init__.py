"""Cooperative Raman spectroscopy: scene simulation, power allocation and spectrum reconstruction."""

__version__ = "0.1.0"
