"""Binning, jackknife errors and the KT crossing."""
