"""Regression strategies for discrete lognormal citation counts, with a Monte Carlo test bench."""

__version__ = "0.1.0"
