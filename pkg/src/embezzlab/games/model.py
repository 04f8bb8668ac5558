"""Classical-question games played with entangled POVM strategies."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Union

import numpy as np
import scipy.sparse as sp

from ..config import TOL
from ..qlin import completeness_residual, num_qubits

History = tuple[tuple, tuple, tuple, tuple]  # (s_1..s_i, t_1..t_i, a_1..a_i, b_1..b_i)
Predicate = Callable[[tuple, tuple, tuple, tuple], bool]
Distribution = Union[np.ndarray, Callable[[int, History], np.ndarray]]

EMPTY: History = ((), (), (), ())


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class ClassicalGame:
    """k-round game with question sets S, T and answer sets A, B.

    ``pi`` is either a fixed |S| x |T| table used in every round or a callable
    ``pi(i, history)`` returning the table for round ``i`` (0-based) given the
    transcript of rounds ``0..i-1``. ``predicate(s, t, a, b)`` receives
    k-tuples of labels.
    """

    S: tuple
    T: tuple
    A: tuple
    B: tuple
    predicate: Predicate
    pi: Distribution
    rounds: int = 1
    name: str = ""

    def __post_init__(self):
        for label in ("S", "T", "A", "B"):
            object.__setattr__(self, label, tuple(getattr(self, label)))
        if self.rounds < 1:
            raise GameError("a game needs at least one round")
        if not callable(self.pi):
            table = np.asarray(self.pi, dtype=float)
            if table.shape != (len(self.S), len(self.T)):
                raise GameError(f"pi has shape {table.shape}, expected {(len(self.S), len(self.T))}")
            object.__setattr__(self, "pi", table)

    def distribution(self, i: int, history: History = EMPTY) -> np.ndarray:
        table = self.pi(i, history) if callable(self.pi) else self.pi
        table = np.asarray(table, dtype=float)
        if table.shape != (len(self.S), len(self.T)):
            raise GameError(f"round {i} distribution has shape {table.shape}")
        if np.any(table < 0) or abs(table.sum() - 1.0) > TOL.pi_sum:
            raise GameError(f"round {i} distribution is not a probability table")
        return table

    def accepts(self, s, t, a, b) -> bool:
        return bool(self.predicate(tuple(s), tuple(t), tuple(a), tuple(b)))


# A prover's POVMs are keyed by its own view: (questions s_1..s_i, answers a_1..a_{i-1}).
View = tuple[tuple, tuple]


@dataclass
class PovmStrategy:
    """Shared pure state on left_qubits + right qubits and history-keyed POVMs.

    Each POVM is a sequence of operators indexed like the game's answer set.
    Operators may be dense arrays or scipy sparse matrices.
    """

    state: np.ndarray
    left_qubits: int
    alice: Mapping[View, Sequence]
    bob: Mapping[View, Sequence]
    meta: dict = field(default_factory=dict)

    @classmethod
    def one_round(cls, state, left_qubits, alice: Mapping, bob: Mapping, **meta):
        return cls(
            np.asarray(state, dtype=complex).reshape(-1),
            left_qubits,
            {((s,), ()): list(ops) for s, ops in alice.items()},
            {((t,), ()): list(ops) for t, ops in bob.items()},
            dict(meta),
        )

    @property
    def dims(self) -> tuple[int, int]:
        da = 1 << self.left_qubits
        return da, self.state.size // da

    @property
    def right_qubits(self) -> int:
        return num_qubits(self.dims[1])

    def state_matrix(self):
        da, db = self.dims
        mat = np.asarray(self.state, dtype=complex).reshape(da, db)
        if np.count_nonzero(mat) < 0.25 * mat.size and mat.size > 4096:
            return sp.csr_matrix(mat)
        return mat

    def povm_residual(self) -> float:
        worst = 0.0
        for table in (self.alice, self.bob):
            for ops in table.values():
                worst = max(worst, completeness_residual(list(ops)))
        return worst

    def validate(self, game: ClassicalGame | None = None) -> None:
        da, db = self.dims
        if da * db != self.state.size or db < 1:
            raise GameError("shared state does not split into the declared halves")
        if abs(np.linalg.norm(self.state) - 1.0) > TOL.input_norm:
            raise GameError("shared state is not normalized")
        for side, table, dim in (("alice", self.alice, da), ("bob", self.bob, db)):
            for view, ops in table.items():
                if any(op.shape != (dim, dim) for op in ops):
                    raise GameError(f"{side} POVM at {view} has the wrong dimension")
                res = completeness_residual(list(ops))
                if res >= TOL.povm:
                    raise GameError(f"{side} POVM at {view} is incomplete (residual {res:.3g})")
            if game is not None:
                n_out = len(game.A) if side == "alice" else len(game.B)
                if any(len(ops) != n_out for ops in table.values()):
                    raise GameError(f"{side} POVMs do not match the answer alphabet")


# ------------------------------------------------------------------ values


def _effect(op):
    return op.conj().T @ op


def _frobenius(g, f) -> float:
    if sp.issparse(g):
        return float(np.real(g.multiply(f).sum()))
    if sp.issparse(f):
        return float(np.real(f.multiply(g).sum()))
    return float(np.real(np.sum(g * f)))


def _local_gram(psi, effect):
    """G = Psi^dagger E Psi, so <psi|E (x) F|psi> = sum(G * F)."""
    return psi.conj().T @ (effect @ psi)


class _Evaluator:
    def __init__(self, game: ClassicalGame, strat: PovmStrategy, prune: float):
        self.game = game
        self.strat = strat
        self.prune = prune

    def lookup(self, table, view, side):
        try:
            return table[view]
        except KeyError:
            raise GameError(f"{side} has no POVM for view {view}") from None

    def run(self, i: int, hist: History, psi, weight: float) -> float:
        g = self.game
        s_h, t_h, a_h, b_h = hist
        dist = g.distribution(i, hist)
        last = i == g.rounds - 1
        total = 0.0
        grams: dict = {}
        effects: dict = {}
        for si, s in enumerate(g.S):
            if not np.any(dist[si] > 0):
                continue
            xs = self.lookup(self.strat.alice, (s_h + (s,), a_h), "alice")
            for ti, t in enumerate(g.T):
                p = dist[si, ti]
                if p <= 0:
                    continue
                ys = self.lookup(self.strat.bob, (t_h + (t,), b_h), "bob")
                if last:
                    total += weight * p * self._final_round(grams, effects, psi, xs, ys, si, ti, hist, s, t)
                    continue
                for (ai, a), (bi, b) in itertools.product(enumerate(g.A), enumerate(g.B)):
                    new = xs[ai] @ psi @ ys[bi].T
                    q = _norm2(new)
                    if q < self.prune:
                        continue
                    nxt = (s_h + (s,), t_h + (t,), a_h + (a,), b_h + (b,))
                    total += self.run(i + 1, nxt, new / np.sqrt(q), weight * p * q)
        return total

    def _final_round(self, grams, effects, psi, xs, ys, si, ti, hist, s, t) -> float:
        g = self.game
        s_h, t_h, a_h, b_h = hist
        acc = 0.0
        for ai, a in enumerate(g.A):
            for bi, b in enumerate(g.B):
                if not g.accepts(s_h + (s,), t_h + (t,), a_h + (a,), b_h + (b,)):
                    continue
                if (si, ai) not in grams:
                    grams[si, ai] = _local_gram(psi, _effect(xs[ai]))
                if (ti, bi) not in effects:
                    effects[ti, bi] = _effect(ys[bi])
                acc += _frobenius(grams[si, ai], effects[ti, bi])
        return acc


def _norm2(mat) -> float:
    if sp.issparse(mat):
        return float(np.real(mat.multiply(mat.conj()).sum()))
    return float(np.vdot(mat, mat).real)


def strategy_value(game: ClassicalGame, strat: PovmStrategy, *, prune: float = TOL.prune) -> float:
    """Winning probability by the round-by-round measurement recursion.

    Each round multiplies in the answer probability and moves to the
    renormalized post-measurement state; branches with probability below
    ``prune`` are dropped.
    """
    strat.validate(game)
    return _Evaluator(game, strat, prune).run(0, EMPTY, strat.state_matrix(), 1.0)


def strategy_value_product(game: ClassicalGame, strat: PovmStrategy) -> float:
    """Same value via full transcripts: sum V * prod(pi) * ||(X_k..X_1 (x) Y_k..Y_1) psi||^2.

    The last-round operator is applied last. Intended for small games only.
    """
    strat.validate(game)
    da, db = strat.dims
    psi = np.asarray(strat.state, dtype=complex).reshape(da, db)
    k = game.rounds
    total = 0.0
    per_round = list(itertools.product(game.S, game.T, game.A, game.B))
    for transcript in itertools.product(per_round, repeat=k):
        s, t, a, b = (tuple(x[c] for x in transcript) for c in range(4))
        if not game.accepts(s, t, a, b):
            continue
        weight = 1.0
        for i in range(k):
            dist = game.distribution(i, (s[:i], t[:i], a[:i], b[:i]))
            weight *= dist[game.S.index(s[i]), game.T.index(t[i])]
            if weight == 0:
                break
        if weight == 0:
            continue
        xa = np.eye(da, dtype=complex)
        yb = np.eye(db, dtype=complex)
        for i in range(k):
            xop = strat.alice[(s[: i + 1], a[:i])][game.A.index(a[i])]
            yop = strat.bob[(t[: i + 1], b[:i])][game.B.index(b[i])]
            xa = _dense(xop) @ xa
            yb = _dense(yop) @ yb
        total += weight * _norm2(xa @ psi @ yb.T)
    return total


def _dense(op):
    return op.toarray() if sp.issparse(op) else np.asarray(op)


def round_distributions(game: ClassicalGame, strat: PovmStrategy) -> dict:
    """Joint answer distribution p(a, b | s, t) for every first-round question pair."""
    strat.validate(game)
    psi = strat.state_matrix()
    out = {}
    dist = game.distribution(0)
    for (si, s), (ti, t) in itertools.product(enumerate(game.S), enumerate(game.T)):
        if dist[si, ti] <= 0:
            continue
        xs = strat.alice[((s,), ())]
        ys = strat.bob[((t,), ())]
        table = np.empty((len(game.A), len(game.B)))
        for ai, bi in itertools.product(range(len(game.A)), range(len(game.B))):
            table[ai, bi] = _frobenius(_local_gram(psi, _effect(xs[ai])), _effect(ys[bi]))
        out[s, t] = table
    return out


# ---------------------------------------------------------- classical value


DEFAULT_SEARCH_CAP = 1_000_000


def _views(questions: tuple, rounds: int) -> list[tuple]:
    views = []
    for i in range(1, rounds + 1):
        views.extend(itertools.product(questions, repeat=i))
    return views


def classical_value(game: ClassicalGame, *, cap: int = DEFAULT_SEARCH_CAP) -> float:
    """Best winning probability of deterministic provers.

    Alice's deterministic strategies are enumerated; Bob's best response to
    each is found by backward induction over his own question history.
    Shared randomness is a mixture of deterministic strategies and cannot
    beat the maximum.
    """
    views = _views(game.S, game.rounds)
    count = len(game.A) ** len(views)
    if count > cap:
        raise GameError(f"{count} deterministic strategies exceed the search cap {cap}")
    best = 0.0
    for answers in itertools.product(game.A, repeat=len(views)):
        alice = dict(zip(views, answers))
        best = max(best, _bob_response(game, alice))
    return best


def _bob_response(game: ClassicalGame, alice: dict) -> float:
    groups: dict = {}
    dist = game.distribution(0)
    for (si, s), (ti, t) in itertools.product(enumerate(game.S), enumerate(game.T)):
        if dist[si, ti] > 0:
            groups.setdefault(t, []).append((dist[si, ti], (s,), (t,), (alice[(s,)],), ()))
    return sum(_bob_best(game, alice, items, 0) for items in groups.values())


def _bob_best(game, alice, items, i) -> float:
    best = -np.inf
    last = i == game.rounds - 1
    for b in game.B:
        ext = [(w, s_h, t_h, a_h, b_h + (b,)) for (w, s_h, t_h, a_h, b_h) in items]
        if last:
            total = sum(w for (w, s_h, t_h, a_h, b_h) in ext if game.accepts(s_h, t_h, a_h, b_h))
        else:
            groups: dict = {}
            for w, s_h, t_h, a_h, b_h in ext:
                dist = game.distribution(i + 1, (s_h, t_h, a_h, b_h))
                for (si, s), (ti, t) in itertools.product(enumerate(game.S), enumerate(game.T)):
                    p = dist[si, ti]
                    if p > 0:
                        s2 = s_h + (s,)
                        groups.setdefault(t, []).append((w * p, s2, t_h + (t,), a_h + (alice[s2],), b_h))
            total = sum(_bob_best(game, alice, g, i + 1) for g in groups.values())
        best = max(best, total)
    return float(best)
