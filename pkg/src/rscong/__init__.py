"""Congruence verification for ratios of critical Rankin-Selberg L-values."""

__version__ = "0.1.0"
