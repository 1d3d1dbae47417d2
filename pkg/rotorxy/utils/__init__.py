"""Shared utilities: logging, configuration, result files."""
