"""Hashing-based approximate model counting and almost-uniform sampling for CNF."""

__version__ = "0.1.0"
