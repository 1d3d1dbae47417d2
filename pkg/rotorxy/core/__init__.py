"""Lattice geometry, parameter models and the sweep engine."""
