"""Approximate machine unlearning for regularized convex ERM models."""

from . import (  # noqa: F401
    bench,
    counterexample,
    data,
    errors,
    linalg,
    objectives,
    prox,
    trainer,
    unlearner,
)

__version__ = "0.1.0"
