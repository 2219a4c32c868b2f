"""Desk-scale laboratory for functional calculus of nonnegative
self-adjoint operators on finite metric measure spaces."""

from .kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
