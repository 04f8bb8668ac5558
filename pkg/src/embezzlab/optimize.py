"""See-saw ascent over projective strategies with m qubits per side.

Restricted to one-round games where every question has two answers, so each
half-step is an exact eigenproblem: with Bob and psi fixed, Alice's best
projector for question s is the non-negative eigenspace of K_0 - K_1, where
K_a is her effective payoff operator. Bob is symmetric, and psi becomes the
top eigenvector of the full payoff operator. Every step maximizes the value
over one block, so the trace never decreases. Results are lower bounds on the
fixed-dimension optimum, never certificates.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .games.model import ClassicalGame, GameError, PovmStrategy
from .qlin import random_state, random_unitary


@dataclass(frozen=True)
class SeesawConfig:
    m: int = 1
    max_iters: int = 200
    tol: float = 1e-10
    seed: Optional[int] = None
    restarts: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be at least 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0 or self.restarts < 1:
            raise ValueError("max_iters must be >= 0 and restarts >= 1")


@dataclass
class SeesawResult:
    strategy: PovmStrategy
    trace: list
    seed: Optional[int]

    @property
    def value(self) -> float:
        return self.trace[-1]

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1


def _payoff(game: ClassicalGame) -> np.ndarray:
    """w[s, t, a, b] = pi(s, t) V(s, t, a, b)."""
    if game.rounds != 1:
        raise GameError("see-saw supports one-round games only")
    if len(game.A) != 2 or len(game.B) != 2:
        raise GameError("see-saw needs exactly two answers per question")
    pi = game.distribution(0)
    w = np.zeros((len(game.S), len(game.T), 2, 2))
    for si, s in enumerate(game.S):
        for ti, t in enumerate(game.T):
            for ai, a in enumerate(game.A):
                for bi, b in enumerate(game.B):
                    if game.accepts((s,), (t,), (a,), (b,)):
                        w[si, ti, ai, bi] = pi[si, ti]
    return w


def _positive_projector(h: np.ndarray) -> np.ndarray:
    """Projector onto eigenvalues >= 0; the kernel is included."""
    h = (h + h.conj().T) / 2
    vals, vecs = np.linalg.eigh(h)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    keep = vecs[:, vals >= -1e-13 * scale]
    return keep @ keep.conj().T


def _random_projector(dim: int, rng) -> np.ndarray:
    # half rank; rank 0 or full would start from a deterministic answer
    cols = random_unitary(dim, rng)[:, : dim // 2]
    return cols @ cols.conj().T


class _State:
    """Alice projectors P[s] (answer 0), Bob projectors Q[t], amplitude matrix psi."""

    def __init__(self, w, p, q, psi):
        self.w = w
        self.p = p
        self.q = q
        self.psi = psi
        self.dim = psi.shape[0]

    def update_alice(self):
        psi = self.psi
        # <psi|P (x) Q|psi> = tr(P psi Q^T psi^dagger)
        for si in range(len(self.p)):
            k = [np.zeros((self.dim, self.dim), dtype=complex) for _ in range(2)]
            for ti, q0 in enumerate(self.q):
                qs = (q0, np.eye(self.dim) - q0)
                for a in range(2):
                    for b in range(2):
                        if self.w[si, ti, a, b]:
                            k[a] += self.w[si, ti, a, b] * (psi @ qs[b].T @ psi.conj().T)
            self.p[si] = _positive_projector(k[0] - k[1])

    def update_bob(self):
        psi = self.psi
        # <psi|P (x) Q|psi> = tr(Q (psi^dagger P psi)^T)
        for ti in range(len(self.q)):
            k = [np.zeros((self.dim, self.dim), dtype=complex) for _ in range(2)]
            for si, p0 in enumerate(self.p):
                ps = (p0, np.eye(self.dim) - p0)
                for a in range(2):
                    for b in range(2):
                        if self.w[si, ti, a, b]:
                            k[b] += self.w[si, ti, a, b] * (psi.conj().T @ ps[a] @ psi).T
            self.q[ti] = _positive_projector(k[0] - k[1])

    def operator(self) -> np.ndarray:
        eye = np.eye(self.dim)
        big = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for si, p0 in enumerate(self.p):
            for ti, q0 in enumerate(self.q):
                for a, pa in enumerate((p0, eye - p0)):
                    for b, qb in enumerate((q0, eye - q0)):
                        if self.w[si, ti, a, b]:
                            big += self.w[si, ti, a, b] * np.kron(pa, qb)
        return (big + big.conj().T) / 2

    def update_state(self):
        vals, vecs = np.linalg.eigh(self.operator())
        self.psi = vecs[:, -1].reshape(self.dim, self.dim)

    def value(self) -> float:
        vec = self.psi.reshape(-1)
        return float(np.vdot(vec, self.operator() @ vec).real)

    def strategy(self, game: ClassicalGame, **meta) -> PovmStrategy:
        eye = np.eye(self.dim)
        alice = {s: [p, eye - p] for s, p in zip(game.S, self.p)}
        bob = {t: [q, eye - q] for t, q in zip(game.T, self.q)}
        left = self.dim.bit_length() - 1
        return PovmStrategy.one_round(self.psi.reshape(-1), left, alice, bob, **meta)


def _initial(game, w, cfg, rng, initial: Optional[PovmStrategy]) -> _State:
    dim = 1 << cfg.m
    if initial is None:
        p = [_random_projector(dim, rng) for _ in game.S]
        q = [_random_projector(dim, rng) for _ in game.T]
        psi = random_state(2 * cfg.m, rng).reshape(dim, dim)
        return _State(w, p, q, psi)
    if initial.dims != (dim, dim):
        raise GameError("initial strategy does not have m qubits per side")
    p = [np.asarray(initial.alice[((s,), ())][0], dtype=complex) for s in game.S]
    q = [np.asarray(initial.bob[((t,), ())][0], dtype=complex) for t in game.T]
    return _State(w, p, q, np.asarray(initial.state, dtype=complex).reshape(dim, dim))


def seesaw(game: ClassicalGame, cfg: SeesawConfig, initial: Optional[PovmStrategy] = None):
    """Alternate Alice, Bob and state updates; return (strategy, value trace).

    ``initial`` must be projective with Alice's and Bob's answer-0 operators
    as projectors.
    """
    w = _payoff(game)
    rng = np.random.default_rng(cfg.seed)
    st = _initial(game, w, cfg, rng, initial)
    trace = [st.value()]
    for _ in range(cfg.max_iters):
        st.update_alice()
        st.update_bob()
        st.update_state()
        trace.append(st.value())
        if trace[-1] - trace[-2] < cfg.tol:
            break
    return st.strategy(game, name="seesaw", seed=cfg.seed), trace


def seesaw_restarts(game: ClassicalGame, cfg: SeesawConfig, workers: int = 1) -> tuple[SeesawResult, list]:
    """Run cfg.restarts independent restarts; return (best, all results).

    Restart seeds are spawned from cfg.seed, so results do not depend on
    ``workers``.
    """
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.restarts).tolist()

    def one(seed):
        sub = SeesawConfig(cfg.m, cfg.max_iters, cfg.tol, int(seed), 1)
        strat, trace = seesaw(game, sub)
        return SeesawResult(strat, trace, int(seed))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    best = max(results, key=lambda r: r.value)
    return best, results
