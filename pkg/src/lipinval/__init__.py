"""Data-driven invalidation of black-box models via Lipschitz abstractions."""

__version__ = "0.1.0"
