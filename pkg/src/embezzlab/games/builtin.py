"""Built-in games with their optimal entangled strategies."""

from __future__ import annotations

import itertools

import numpy as np

from .circuits import CircuitStrategy, QuantumGame
from .embed import embedded_verifier
from .model import ClassicalGame, PovmStrategy

I2 = np.eye(2, dtype=complex)
PX = np.array([[0, 1], [1, 0]], dtype=complex)
PY = np.array([[0, -1j], [1j, 0]], dtype=complex)
PZ = np.diag([1.0, -1.0]).astype(complex)

EPR = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


def _eigenprojectors(obs) -> list[np.ndarray]:
    """[P(+1), P(-1)] for a +-1-valued observable."""
    eye = np.eye(obs.shape[0])
    return [(eye + obs) / 2, (eye - obs) / 2]


def chsh_game() -> ClassicalGame:
    return ClassicalGame(
        S=(0, 1),
        T=(0, 1),
        A=(0, 1),
        B=(0, 1),
        predicate=lambda s, t, a, b: (a[0] ^ b[0]) == (s[0] & t[0]),
        pi=np.full((2, 2), 0.25),
        name="chsh",
    )


def chsh_strategy() -> PovmStrategy:
    """EPR pair; Alice measures Z or X, Bob (Z + X)/sqrt2 or (Z - X)/sqrt2."""
    alice = {0: _eigenprojectors(PZ), 1: _eigenprojectors(PX)}
    bob = {
        0: _eigenprojectors((PZ + PX) / np.sqrt(2)),
        1: _eigenprojectors((PZ - PX) / np.sqrt(2)),
    }
    return PovmStrategy.one_round(EPR, 1, alice, bob, name="chsh-optimal")


# Mermin-Peres square; row products are +I and column products are -I.
MAGIC_SQUARE = [
    [np.kron(I2, PZ), np.kron(PZ, I2), np.kron(PZ, PZ)],
    [np.kron(PX, I2), np.kron(I2, PX), np.kron(PX, PX)],
    [-np.kron(PX, PZ), -np.kron(PZ, PX), np.kron(PY, PY)],
]

ROW_ANSWERS = tuple(x for x in itertools.product((1, -1), repeat=3) if np.prod(x) == 1)
COL_ANSWERS = tuple(x for x in itertools.product((1, -1), repeat=3) if np.prod(x) == -1)


def magic_square_game() -> ClassicalGame:
    """Alice fills row s, Bob column t; they must agree on the shared cell."""
    return ClassicalGame(
        S=(0, 1, 2),
        T=(0, 1, 2),
        A=ROW_ANSWERS,
        B=COL_ANSWERS,
        predicate=lambda s, t, a, b: a[0][t[0]] == b[0][s[0]],
        pi=np.full((3, 3), 1 / 9),
        name="magic_square",
    )


def _joint_projector(observables, signs) -> np.ndarray:
    out = np.eye(observables[0].shape[0], dtype=complex)
    for obs, sign in zip(observables, signs):
        out = out @ (np.eye(obs.shape[0]) + sign * obs) / 2
    return out


def magic_square_strategy() -> PovmStrategy:
    # Bob measures transposes: (O (x) 1)|Phi> = (1 (x) O^T)|Phi> on maximally entangled states.
    phi = np.eye(4, dtype=complex).reshape(-1) / 2
    alice = {r: [_joint_projector(MAGIC_SQUARE[r], x) for x in ROW_ANSWERS] for r in range(3)}
    bob = {
        c: [_joint_projector([MAGIC_SQUARE[r][c].T for r in range(3)], y) for y in COL_ANSWERS]
        for c in range(3)
    }
    return PovmStrategy.one_round(phi, 2, alice, bob, name="magic-square-optimal")


BUILTINS = {
    "chsh": (chsh_game, chsh_strategy),
    "magic_square": (magic_square_game, magic_square_strategy),
}


def builtin(name: str) -> tuple[ClassicalGame, PovmStrategy]:
    try:
        game_fn, strat_fn = BUILTINS[name]
    except KeyError:
        raise ValueError(f"unknown game {name!r}; choose from {sorted(BUILTINS)}") from None
    return game_fn(), strat_fn()


# ------------------------------------------------------- circuit-form CHSH

# Dispatch programs (ring-adjacent SWAP/CNOT/H/T) on the working register
# (question, answer, shared qubit); they induce the two measurement pairs of
# an optimal CHSH strategy for the state below.
CHSH_ALICE_PROGRAM = "01011001110101100001"
CHSH_BOB_PROGRAM = "01010011111011010110"


def chsh_circuit() -> tuple[QuantumGame, CircuitStrategy]:
    """CHSH in circuit form, winning with probability cos^2(pi/8).

    Shared state (|01> + e^{-i pi/4}|10>)/sqrt2; the prover circuits are the
    dispatch realizations of the two programs above.
    """
    from ..synth import DispatchCircuit, ProgramRegister, evaluate

    qgame = embedded_verifier(chsh_game())
    psi = np.array([0, 1, np.exp(-1j * np.pi / 4), 0], dtype=complex) / np.sqrt(2)
    circuits = [
        evaluate(DispatchCircuit(len(p) // 2, 3), ProgramRegister(p))
        for p in (CHSH_ALICE_PROGRAM, CHSH_BOB_PROGRAM)
    ]
    strat = CircuitStrategy(psi, 1, 1, [circuits[0]], [circuits[1]], meta={"name": "chsh-clifford-t"})
    return qgame, strat
