"""Transition probability tensors and their stationary probability vectors."""

__version__ = "1.0.0"
