"""Dissipative dynamics of wedge disclinations in the unit disk."""
__version__ = "0.1.0"
