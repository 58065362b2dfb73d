"""Resonances of one-dimensional Schrödinger operators with compactly supported potentials."""

__version__ = "0.1.0"
