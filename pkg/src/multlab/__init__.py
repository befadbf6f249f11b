"""Finite-dimensional multiplier laboratory.

Explicit matrix models of crossed products by finite group actions, Schur and
fiberwise multiplier maps on them, transference between the two, and
SDP-certified completely bounded norms.  Everything is dense numpy linear
algebra with deterministic, seeded randomness and checkable residuals.
"""

from . import (  # noqa: F401
    algebras,
    cbnorm,
    crossed,
    groups,
    herzschur,
    numerics,
    pontryagin,
    sampling,
    scenarios,
    schur,
    transference,
)
from .errors import MultlabError  # noqa: F401

__all__ = [
    "algebras",
    "cbnorm",
    "crossed",
    "groups",
    "herzschur",
    "numerics",
    "pontryagin",
    "sampling",
    "scenarios",
    "schur",
    "transference",
    "MultlabError",
]

__version__ = "0.1.0"
