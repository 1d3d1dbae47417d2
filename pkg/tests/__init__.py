"""Tests for MALS."""
