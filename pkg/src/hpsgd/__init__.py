"""Momentum SGD with adaptive step sizes: high-probability bound evaluators
and Monte Carlo checks."""

__version__ = "0.1.0"
