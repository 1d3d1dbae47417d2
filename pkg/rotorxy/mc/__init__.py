"""Markov-chain simulation of the XY model and stiffness estimators."""
