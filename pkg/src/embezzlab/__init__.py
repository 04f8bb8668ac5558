"""Entanglement embezzlement, entangled game values and programmable prover circuits."""

from . import embezzle, games, optimize, qlin, synth, transform
from .config import TOL, CapExceeded, dense_cap

__version__ = "0.1.0"

__all__ = ["embezzle", "games", "optimize", "qlin", "synth", "transform", "TOL", "CapExceeded", "dense_cap"]
