"""Survival models and a benchmark harness for right-censored
purchase-timing cohorts."""

__version__ = "0.1.0"
