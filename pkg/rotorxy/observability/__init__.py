"""Run statistics of Monte Carlo sweeps, exported into meta.json."""

from rotorxy.observability.metrics import PointMetrics, SweepMetrics

__all__ = ["PointMetrics", "SweepMetrics"]
