"""Move any finite strategy onto the universal embezzlement state.

A strategy (psi, X, Y) on m qubits per side is first lifted to share
mu_{2n} (x) psi, with every operator acting as identity on the mu half. The
compiled strategy then shares mu_{2n} (x) |1>|1> and uses X' = U_A Xbar U_A^dagger,
where U_A (x) U_B rotates the embezzled version E(psi) onto mu (x) |1>|1>.
Its value equals the lifted strategy run on E(psi), so it loses at most
sqrt(2 eps) whenever n >= m / eps.

Register layout per side is (embezzling n qubits, working m qubits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

import numpy as np
import scipy.sparse as sp

from .config import CapExceeded, dense_cap
from .embezzle import (
    embezzle_unitaries,
    embezzled_version,
    embezzlement_fidelity,
    harmonic_norm,
    mu_tensor_state,
    qubits_for,
)
from .games.circuits import CircuitStrategy, QuantumGame, run_quantum_game
from .games.model import ClassicalGame, PovmStrategy, round_distributions, strategy_value
from .qlin import schmidt_decompose, trace_distance_pure, tv_distance

Strategy = Union[PovmStrategy, CircuitStrategy]
Game = Union[ClassicalGame, QuantumGame]


# ------------------------------------------------------------------ helpers


def _side_qubits(strat: Strategy) -> tuple[int, int]:
    if isinstance(strat, PovmStrategy):
        return strat.left_qubits, strat.right_qubits
    return strat.priv_x, strat.priv_y


def _check_cap(n: int, strat: Strategy, com: tuple[int, int] = (0, 0)) -> None:
    ma, mb = _side_qubits(strat)
    need = n + max(ma + com[0], mb + com[1])
    if need > dense_cap():
        raise CapExceeded(f"{need} qubits per side exceeds the dense cap of {dense_cap()}")


def _lift_op(op, big_n: int):
    """I_N (x) X as a sparse matrix."""
    return sp.kron(sp.identity(big_n, format="csr"), sp.csr_matrix(op), format="csr")


def _lift_unitary(u: np.ndarray, com: int, n: int) -> np.ndarray:
    """Extend a unitary on (com, work) to (com, emb, work), identity on emb."""
    dc = 1 << com
    dw = u.shape[0] // dc
    big_n = 1 << n
    blocks = np.asarray(u, dtype=complex).reshape(dc, dw, dc, dw)
    out = np.einsum("awbv,ef->aewbfv", blocks, np.eye(big_n))
    return out.reshape(dc * big_n * dw, dc * big_n * dw)


def _conjugate(u, op):
    out = u @ op @ u.conj().T
    return out.tocsr() if sp.issparse(out) else out


def mu_product_state(n: int, left_qubits: int, right_qubits: int) -> np.ndarray:
    """mu_{2n} (x) |1>_m |1>_m in side-grouped order, with |1> = |0...0>."""
    big_n = 1 << n
    da, db = 1 << left_qubits, 1 << right_qubits
    c = harmonic_norm(n)
    j = np.arange(big_n)
    vec = np.zeros(big_n * da * big_n * db, dtype=complex)
    vec[(j * da) * (big_n * db) + j * db] = 1.0 / (c * np.sqrt(j + 1))
    return vec


# ------------------------------------------------------------------ lifting


def lift(strat: Strategy, n: int, *, game: Optional[QuantumGame] = None) -> Strategy:
    """Share mu_{2n} (x) psi and act as identity on the mu half.

    Circuit strategies need the quantum game for the communication widths.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return strat
    big_n = 1 << n
    if isinstance(strat, PovmStrategy):
        _check_cap(n, strat)
        state = mu_tensor_state(n, strat.state, strat.left_qubits)
        alice = {v: [_lift_op(x, big_n) for x in ops] for v, ops in strat.alice.items()}
        bob = {v: [_lift_op(y, big_n) for y in ops] for v, ops in strat.bob.items()}
        return PovmStrategy(state, n + strat.left_qubits, alice, bob, {**strat.meta, "lifted": n})
    if game is None:
        raise ValueError("lifting a circuit strategy needs its quantum game")
    _check_cap(n, strat, (game.com_x, game.com_y))
    state = mu_tensor_state(n, strat.state, strat.priv_x)
    return CircuitStrategy(
        state,
        n + strat.priv_x,
        n + strat.priv_y,
        [_lift_unitary(u, game.com_x, n) for u in strat.alice],
        [_lift_unitary(u, game.com_y, n) for u in strat.bob],
        {**strat.meta, "lifted": n},
    )


# ------------------------------------------------------------------ compiling


@dataclass
class TransformedStrategy:
    """Compiled strategy sharing mu_{2n} (x) |1>|1>, plus its provenance."""

    epsilon: float
    n: int
    m: int
    strategy: Strategy
    unitaries: tuple
    source: Strategy
    fidelity: float
    meta: dict = field(default_factory=dict)

    @property
    def shared_state(self) -> np.ndarray:
        return self.strategy.state

    @property
    def qubits_per_side(self) -> int:
        return self.n + self.m

    @property
    def stated_qubits(self) -> float:
        """The 2m(1 + 1/eps) total count from the theorem statement."""
        return 2 * self.m * (1 + 1 / self.epsilon)


def compile_n(strat: Strategy, n: int, *, game: Optional[QuantumGame] = None,
              epsilon: Optional[float] = None) -> TransformedStrategy:
    """Compile with an explicit embezzling size n.

    Without ``epsilon`` the tightest one, m / n, is recorded.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    ma, mb = _side_qubits(strat)
    if epsilon is None:
        epsilon = max(ma, mb) / n
    left = strat.left_qubits if isinstance(strat, PovmStrategy) else strat.priv_x
    source = schmidt_decompose(strat.state, left)
    fid = embezzlement_fidelity(source, n)
    big_n = 1 << n
    if isinstance(strat, PovmStrategy):
        _check_cap(n, strat)
        ua, ub = embezzle_unitaries(source, n, sparse=True)
        alice = {v: [_conjugate(ua, _lift_op(x, big_n)) for x in ops] for v, ops in strat.alice.items()}
        bob = {v: [_conjugate(ub, _lift_op(y, big_n)) for y in ops] for v, ops in strat.bob.items()}
        out = PovmStrategy(mu_product_state(n, ma, mb), n + ma, alice, bob, {**strat.meta, "compiled": n})
    else:
        if game is None:
            raise ValueError("compiling a circuit strategy needs its quantum game")
        _check_cap(n, strat, (game.com_x, game.com_y))
        ua, ub = embezzle_unitaries(source, n, sparse=True)
        wa = sp.kron(sp.identity(1 << game.com_x), ua, format="csr")
        wb = sp.kron(sp.identity(1 << game.com_y), ub, format="csr")
        out = CircuitStrategy(
            mu_product_state(n, ma, mb),
            n + ma,
            n + mb,
            [np.asarray(_conjugate(wa, _lift_unitary(u, game.com_x, n))) for u in strat.alice],
            [np.asarray(_conjugate(wb, _lift_unitary(u, game.com_y, n))) for u in strat.bob],
            {**strat.meta, "compiled": n},
        )
    return TransformedStrategy(epsilon, n, max(ma, mb), out, (ua, ub), strat, fid)


def compile(strat: Strategy, epsilon: float, *, game: Optional[QuantumGame] = None) -> TransformedStrategy:
    """Compile with n = ceil(m / epsilon), m the larger side of the shared state."""
    m = max(_side_qubits(strat))
    return compile_n(strat, qubits_for(m, epsilon), game=game, epsilon=epsilon)


# ------------------------------------------------------------------ verifying


def game_value(game: Game, strat: Strategy) -> float:
    if isinstance(game, QuantumGame):
        return float(run_quantum_game(game, strat))
    return float(strategy_value(game, strat))


@dataclass(frozen=True)
class BoundReport:
    omega: float
    omega_prime: float
    epsilon: float
    n: int
    qubits_per_side: int
    fidelity: float

    @property
    def bound(self) -> float:
        return self.omega - math.sqrt(2 * self.epsilon)

    @property
    def gap(self) -> float:
        """Observed value loss omega - omega'."""
        return self.omega - self.omega_prime

    @property
    def passed(self) -> bool:
        return bool(self.omega_prime >= self.bound - 1e-9)

    def as_dict(self) -> dict:
        return {
            "omega": self.omega,
            "omega_prime": self.omega_prime,
            "epsilon": self.epsilon,
            "n": self.n,
            "qubits_per_side": self.qubits_per_side,
            "fidelity": self.fidelity,
            "bound": self.bound,
            "pass": self.passed,
            "gap": self.gap,
        }


def verify_bound(original: Strategy, compiled: TransformedStrategy, game: Game) -> BoundReport:
    return BoundReport(
        omega=game_value(game, original),
        omega_prime=game_value(game, compiled.strategy),
        epsilon=compiled.epsilon,
        n=compiled.n,
        qubits_per_side=compiled.qubits_per_side,
        fidelity=compiled.fidelity,
    )


def embezzled_strategy(strat: PovmStrategy, n: int) -> PovmStrategy:
    """The lifted strategy run on the dense embezzled version E(psi).

    Its value must equal that of the compiled strategy.
    """
    lifted = lift(strat, n)
    source = schmidt_decompose(strat.state, strat.left_qubits)
    state = embezzled_version(source, n).to_dense()
    return PovmStrategy(state, lifted.left_qubits, lifted.alice, lifted.bob, dict(lifted.meta))


@dataclass(frozen=True)
class DistributionCheck:
    tv: float
    trace_distance: float
    limit: float

    @property
    def passed(self) -> bool:
        return self.tv <= self.trace_distance + 1e-9 and self.trace_distance <= self.limit + 1e-9


def distribution_check(game: ClassicalGame, strat: PovmStrategy, n: int, epsilon: float) -> DistributionCheck:
    """Verifier statistics of the compiled strategy against the lifted one.

    Per question pair the answer distributions differ in total variation by
    at most the trace distance between E(psi) and mu (x) psi.
    """
    lifted = lift(strat, n)
    compiled = compile_n(strat, n).strategy
    p = round_distributions(game, lifted)
    q = round_distributions(game, compiled)
    tv = max(tv_distance(p[key].ravel(), q[key].ravel()) for key in p)
    source = schmidt_decompose(strat.state, strat.left_qubits)
    dist = trace_distance_pure(embezzled_version(source, n).to_dense(), lifted.state)
    return DistributionCheck(tv, dist, math.sqrt(2 * epsilon))


# ------------------------------------------------------------------ sweeps

SWEEP_FIELDS = ("n", "epsilon", "fidelity", "omega", "omega_prime", "bound", "gap", "pass", "status")


def sweep(game: Game, strat: Strategy, *, ns: Iterable[int] = (), epsilons: Iterable[float] = ()) -> list[dict]:
    """One row per grid point; rows over the dense cap are marked skipped."""
    points = [(n, None) for n in ns]
    m = max(_side_qubits(strat))
    points += [(qubits_for(m, e), e) for e in epsilons]
    qgame = game if isinstance(game, QuantumGame) else None
    omega = game_value(game, strat)
    rows = []
    for n, eps in points:
        row = dict.fromkeys(SWEEP_FIELDS)
        row.update(n=n, epsilon=m / n if eps is None else eps, omega=omega)
        try:
            compiled = compile_n(strat, n, game=qgame, epsilon=eps)
        except CapExceeded:
            row["status"] = "skipped"
            rows.append(row)
            continue
        rep = verify_bound(strat, compiled, game)
        row.update(
            fidelity=rep.fidelity,
            omega_prime=rep.omega_prime,
            epsilon=rep.epsilon,
            bound=rep.bound,
            gap=rep.gap,
            status="ok",
        )
        row["pass"] = rep.passed
        rows.append(row)
    return rows
