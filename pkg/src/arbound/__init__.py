"""Generalization bounds and order selection for stationary autoregressive models."""

__version__ = "0.1.0"
