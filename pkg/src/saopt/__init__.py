"""Surrogate-assisted evolutionary optimisation of stochastic plant simulators."""

from ._backend import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
