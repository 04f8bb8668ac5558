"""Circuit-model games: a unitary verifier exchanging registers with two provers.

Global register order is ``priv_V, com_X, com_Y, priv_X, priv_Y``. Verifier
gates index qubits of ``priv_V + com_X + com_Y``; prover unitaries act on
``com_X + priv_X`` (Alice) or ``com_Y + priv_Y`` (Bob), communication first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..config import TOL
from ..qlin import is_unitary, num_qubits
from .model import GameError


@dataclass(frozen=True)
class Gate:
    """A unitary on ``qubits``, given densely or as a basis permutation.

    ``perm[x]`` is the image of basis state ``x`` over the listed qubits.
    """

    qubits: tuple[int, ...]
    matrix: Optional[np.ndarray] = None
    perm: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if (self.matrix is None) == (self.perm is None):
            raise ValueError("a gate needs exactly one of matrix or perm")
        dim = 1 << len(self.qubits)
        if self.matrix is not None and self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} does not fit {len(self.qubits)} qubits")
        if self.perm is not None:
            perm = np.asarray(self.perm, dtype=np.int64)
            if perm.shape != (dim,) or not np.array_equal(np.sort(perm), np.arange(dim)):
                raise ValueError("perm is not a permutation of the register basis")
            object.__setattr__(self, "perm", perm)

    @classmethod
    def from_function(cls, qubits: Sequence[int], fn: Callable[[int], int]) -> "Gate":
        dim = 1 << len(qubits)
        return cls(tuple(qubits), perm=np.array([fn(x) for x in range(dim)]))

    def is_unitary(self, tol: float = TOL.unitary) -> bool:
        return self.perm is not None or is_unitary(self.matrix, tol)

    def to_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        dim = len(self.perm)
        mat = np.zeros((dim, dim), dtype=complex)
        mat[self.perm, np.arange(dim)] = 1.0
        return mat

    def apply(self, tensor: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return apply_matrix(tensor, self.matrix, self.qubits)
        return apply_permutation(tensor, self.perm, self.qubits)


def apply_matrix(tensor: np.ndarray, u: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    """Apply ``u`` to the listed axes of a (2, 2, ..., 2) state tensor."""
    w = len(qubits)
    ut = np.asarray(u, dtype=complex).reshape((2,) * (2 * w))
    out = np.tensordot(ut, tensor, axes=(list(range(w, 2 * w)), list(qubits)))
    return np.moveaxis(out, list(range(w)), list(qubits))


def apply_permutation(tensor: np.ndarray, perm: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    w = len(qubits)
    moved = np.moveaxis(tensor, list(qubits), list(range(w)))
    shape = moved.shape
    flat = moved.reshape(1 << w, -1)
    out = np.empty_like(flat)
    out[perm] = flat
    return np.moveaxis(out.reshape(shape), list(range(w)), list(qubits))


Circuit = list  # list[Gate]


@dataclass
class QuantumGame:
    priv_v: int
    com_x: int
    com_y: int
    verifier: list  # k + 1 circuits, each a list of Gates
    decision_qubit: int = 0
    name: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def rounds(self) -> int:
        return len(self.verifier) - 1

    @property
    def verifier_qubits(self) -> int:
        return self.priv_v + self.com_x + self.com_y

    def validate(self) -> None:
        if self.rounds < 1:
            raise GameError("a quantum game needs V_1 .. V_{k+1} with k >= 1")
        if not 0 <= self.decision_qubit < self.priv_v:
            raise GameError("decision qubit must lie in priv_V")
        for j, circ in enumerate(self.verifier):
            for gate in circ:
                if any(not 0 <= q < self.verifier_qubits for q in gate.qubits):
                    raise GameError(f"verifier circuit {j + 1} touches a prover register")
                if not gate.is_unitary():
                    raise GameError(f"verifier circuit {j + 1} is not unitary")


@dataclass
class CircuitStrategy:
    """Shared state on priv_X + priv_Y and per-round prover unitaries."""

    state: np.ndarray
    priv_x: int
    priv_y: int
    alice: list
    bob: list
    meta: dict = field(default_factory=dict)

    def validate(self, game: QuantumGame) -> None:
        if num_qubits(np.asarray(self.state).size) != self.priv_x + self.priv_y:
            raise GameError("shared state size does not match priv_X + priv_Y")
        if len(self.alice) != game.rounds or len(self.bob) != game.rounds:
            raise GameError("strategy round count differs from the game")
        for side, ops, width in (
            ("alice", self.alice, game.com_x + self.priv_x),
            ("bob", self.bob, game.com_y + self.priv_y),
        ):
            for j, u in enumerate(ops):
                if u.shape != (1 << width, 1 << width):
                    raise GameError(f"{side} circuit {j + 1} has the wrong register size")
                if not is_unitary(u):
                    raise GameError(f"{side} circuit {j + 1} is not unitary")


def _layout(game: QuantumGame, strat: CircuitStrategy):
    pv, cx, cy = game.priv_v, game.com_x, game.com_y
    base = pv + cx + cy
    alice = list(range(pv, pv + cx)) + list(range(base, base + strat.priv_x))
    bob = list(range(pv + cx, base)) + list(range(base + strat.priv_x, base + strat.priv_x + strat.priv_y))
    return base + strat.priv_x + strat.priv_y, alice, bob


def final_state(game: QuantumGame, strat: CircuitStrategy) -> np.ndarray:
    """Joint pure state just before the verifier's final measurement."""
    game.validate()
    strat.validate(game)
    total, alice_q, bob_q = _layout(game, strat)
    shared = np.asarray(strat.state, dtype=complex).reshape(-1)
    psi = np.zeros(1 << total, dtype=complex)
    psi[: shared.size] = shared
    tensor = psi.reshape((2,) * total)
    for j in range(game.rounds):
        for gate in game.verifier[j]:
            tensor = gate.apply(tensor)
        tensor = apply_matrix(tensor, strat.alice[j], alice_q)
        tensor = apply_matrix(tensor, strat.bob[j], bob_q)
    for gate in game.verifier[-1]:
        tensor = gate.apply(tensor)
    return tensor.reshape(-1)


def run_quantum_game(game: QuantumGame, strat: CircuitStrategy) -> float:
    """Probability that the decision qubit reads |1>."""
    psi = final_state(game, strat)
    total = num_qubits(psi.size)
    tensor = psi.reshape((2,) * total)
    accept = np.take(tensor, 1, axis=game.decision_qubit)
    return float(np.vdot(accept, accept).real)
