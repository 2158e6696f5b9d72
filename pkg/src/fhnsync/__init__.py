"""Identical synchronization in networks of FitzHugh-Nagumo reaction-diffusion systems."""

__version__ = "0.1.0"
