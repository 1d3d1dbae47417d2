"""Toric-rotor code: phase noise, logical fidelity and resilience."""
