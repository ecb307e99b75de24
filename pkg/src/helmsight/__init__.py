"""Surrogate-model transparency for autonomous vessel behaviour."""

__version__ = "0.1.0"
