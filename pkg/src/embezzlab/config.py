"""Numerical tolerances and size caps shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass

DENSE_CAP_ENV = "EMBEZZLE_DENSE_CAP"
DEFAULT_DENSE_CAP = 13


@dataclass(frozen=True)
class Tolerances:
    state_norm: float = 1e-10
    input_norm: float = 1e-8
    povm: float = 1e-9
    unitary: float = 1e-9
    distribution: float = 1e-9
    reconstruction: float = 1e-9
    prune: float = 1e-15
    pi_sum: float = 1e-12


TOL = Tolerances()


def dense_cap() -> int:
    """Maximum number of qubits per side for dense renderings."""
    raw = os.environ.get(DENSE_CAP_ENV)
    if raw is None:
        return DEFAULT_DENSE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise ValueError(f"{DENSE_CAP_ENV} must be an integer, got {raw!r}") from None
    if cap < 1:
        raise ValueError(f"{DENSE_CAP_ENV} must be positive, got {cap}")
    return cap


class CapExceeded(ValueError):
    """A requested dense object would exceed the configured size cap."""
