"""Generalized Cheeger constants of planar sets."""
