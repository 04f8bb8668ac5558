"""Programmable prover circuits.

A dispatch circuit C_M ... C_1 on a d-qubit working register reads a 2M-bit
program: slot i (0-based) looks at program bits 2i, 2i+1 and applies SWAP,
CNOT, I(x)H or I(x)T (codes 00, 01, 10, 11) to the working qubits
(2i mod d, 2i+1 mod d), treating the register as a ring. The first listed
qubit is the CNOT control; H and T act on the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .config import CapExceeded
from .games.circuits import CircuitStrategy, QuantumGame, run_quantum_game

GATE_NAMES = ("SWAP", "CNOT", "IH", "IT")
MAX_SEARCH_WIDTH = 3
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_T = np.diag([1.0, np.exp(1j * np.pi / 4)])


class SynthesisError(RuntimeError):
    def __init__(self, message: str, best_distance: float = math.inf):
        super().__init__(message)
        self.best_distance = best_distance


def _pair_gate(code: int, x: int, y: int, d: int) -> np.ndarray:
    dim = 1 << d
    if code == 2 or code == 3:
        g = _H if code == 2 else _T
        return np.kron(np.kron(np.eye(1 << y), g), np.eye(1 << (d - y - 1)))
    out = np.zeros((dim, dim), dtype=complex)
    sx, sy = d - 1 - x, d - 1 - y
    for b in range(dim):
        bx, by = (b >> sx) & 1, (b >> sy) & 1
        if code == 0:
            img = (b & ~((1 << sx) | (1 << sy))) | (by << sx) | (bx << sy)
        else:
            img = b ^ (bx << sy)
        out[img, b] = 1.0
    return out


def menu_gate(name: str, width: int) -> np.ndarray:
    """Menu gate ``name`` (one of GATE_NAMES) on working qubits (0, 1)."""
    return _pair_gate(GATE_NAMES.index(name.upper()), 0, 1, width)


@dataclass(frozen=True)
class DispatchCircuit:
    slots: int
    width: int

    def __post_init__(self):
        if self.width < 2:
            raise ValueError("the working register needs at least two qubits")
        if self.slots < 0:
            raise ValueError("slot count must be nonnegative")

    @property
    def ancilla_bits(self) -> int:
        return 2 * self.slots

    def target(self, i: int) -> tuple[int, int]:
        return (2 * i) % self.width, (2 * i + 1) % self.width

    def slot_gates(self, i: int) -> np.ndarray:
        """The four menu gates of slot i as d-qubit matrices, in code order."""
        return _slot_gates((2 * i) % self.width, self.width)


_SLOT_CACHE: dict = {}


def _slot_gates(first: int, d: int) -> np.ndarray:
    if (first, d) not in _SLOT_CACHE:
        _SLOT_CACHE[first, d] = np.stack([_pair_gate(c, first, (first + 1) % d, d) for c in range(4)])
    return _SLOT_CACHE[first, d]


@dataclass(frozen=True)
class ProgramRegister:
    bits: str

    def __post_init__(self):
        if len(self.bits) % 2 or set(self.bits) - {"0", "1"}:
            raise ValueError(f"program must be an even-length bit string, got {self.bits!r}")

    @property
    def slots(self) -> int:
        return len(self.bits) // 2

    def codes(self) -> list[int]:
        return [int(self.bits[2 * i : 2 * i + 2], 2) for i in range(self.slots)]

    def gate_names(self) -> list[str]:
        return [GATE_NAMES[c] for c in self.codes()]

    @classmethod
    def from_codes(cls, codes) -> "ProgramRegister":
        return cls("".join(format(c, "02b") for c in codes))


def evaluate(circ: DispatchCircuit, prog: ProgramRegister) -> np.ndarray:
    if prog.slots != circ.slots:
        raise ValueError(f"program has {prog.slots} slots, circuit has {circ.slots}")
    u = np.eye(1 << circ.width, dtype=complex)
    for i, code in enumerate(prog.codes()):
        u = circ.slot_gates(i)[code] @ u
    return u


def dispatch_unitary(circ: DispatchCircuit) -> np.ndarray:
    """Fully quantum-controlled circuit on (program register, working register)."""
    na = circ.ancilla_bits
    if na + circ.width > 14:
        raise CapExceeded("controlled dispatch rendering is limited to 14 qubits")
    dw = 1 << circ.width
    total = np.eye((1 << na) * dw, dtype=complex)
    for i in range(circ.slots):
        gates = circ.slot_gates(i)
        blocks = []
        for a in range(1 << na):
            code = (a >> (na - 2 - 2 * i)) & 3
            blocks.append(gates[code])
        slot = np.zeros_like(total)
        for a, g in enumerate(blocks):
            slot[a * dw : (a + 1) * dw, a * dw : (a + 1) * dw] = g
        total = slot @ total
    return total


def distance(u, v) -> float:
    """min over phi of the operator norm ||u - e^{i phi} v|| for unitaries u, v.

    The eigenphases of v^dagger u fit in a smallest arc of length L; the
    optimal phase sits at its midpoint, giving 2 sin(L / 4).
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    phases = np.sort(np.angle(np.linalg.eigvals(v.conj().T @ u)))
    gaps = np.diff(np.concatenate([phases, phases[:1] + 2 * np.pi]))
    arc = 2 * np.pi - gaps.max()
    return float(2 * np.sin(max(arc, 0.0) / 4))


# ------------------------------------------------------------------ search


@dataclass
class SynthesisResult:
    program: Optional[ProgramRegister]
    distance: float
    slots: int
    width: int
    levels: list = field(default_factory=list)  # best distance seen per slot count

    @property
    def found(self) -> bool:
        return self.program is not None

    def unitary(self) -> np.ndarray:
        return evaluate(DispatchCircuit(self.slots, self.width), self.program)


def _half(circ: DispatchCircuit, start: int, stop: int) -> np.ndarray:
    dim = 1 << circ.width
    prods = np.eye(dim, dtype=complex)[None]
    for slot in range(start, stop):
        gates = circ.slot_gates(slot)
        prods = np.einsum("gij,pjk->pgik", gates, prods).reshape(-1, dim, dim)
    return prods


def _codes(index: int, length: int) -> list[int]:
    return [(index >> (2 * (length - 1 - k))) & 3 for k in range(length)]


def _search_level(target, circ: DispatchCircuit, eps: float, chunk: int = 256, top: int = 64):
    """Best (distance, bits) over all programs with circ.slots slots."""
    m = circ.slots
    h = m // 2
    dim = target.shape[0]
    left = _half(circ, 0, h)
    right = _half(circ, h, m)
    # tr((R L)^dagger T) = <R, T L^dagger>_F
    k = np.einsum("ij,pkj->pik", target, left.conj()).reshape(len(left), -1)
    rflat = right.reshape(len(right), -1).conj()
    threshold = dim * (1 - eps**2 / 2)
    best = (math.inf, None)
    for r0 in range(0, len(rflat), chunk):
        scores = np.abs(rflat[r0 : r0 + chunk] @ k.T)
        flat = scores.ravel()
        n_top = min(top, flat.size)
        cand = np.argpartition(-flat, n_top - 1)[:n_top]
        extra = np.flatnonzero(flat >= threshold)
        for idx in np.union1d(cand, extra):
            ri, li = divmod(int(idx), scores.shape[1])
            dist = distance(right[r0 + ri] @ left[li], target)
            bits = "".join(format(c, "02b") for c in _codes(li, h) + _codes(r0 + ri, m - h))
            if dist < best[0] - 1e-12 or (abs(dist - best[0]) <= 1e-12 and bits < best[1]):
                best = (dist, bits)
    return best


def synthesize(target, eps: float, max_slots: int = 12) -> SynthesisResult:
    """Shortest program whose dispatch circuit is eps-close to ``target``.

    Iterative deepening over the slot count; each level is a meet-in-the-middle
    search whose candidates are ranked by the phase-free trace overlap
    |tr(U^dagger target)| and then checked with the exact distance. Returns a
    result with ``program=None`` and the best distance seen if nothing within
    ``eps`` exists up to ``max_slots`` slots.
    """
    target = np.asarray(target, dtype=complex)
    d = int(target.shape[0]).bit_length() - 1
    if target.shape != (1 << d, 1 << d):
        raise ValueError("target must be a square matrix on whole qubits")
    if d > MAX_SEARCH_WIDTH:
        raise CapExceeded(f"synthesis is limited to {MAX_SEARCH_WIDTH} working qubits, got {d}")
    if d < 2:
        raise ValueError("the dispatch circuit needs a working register of at least 2 qubits")
    levels = []
    best_overall = math.inf
    for m in range(1, max_slots + 1):
        dist, bits = _search_level(target, DispatchCircuit(m, d), eps)
        levels.append(dist)
        best_overall = min(best_overall, dist)
        if dist <= eps:
            return SynthesisResult(ProgramRegister(bits), dist, m, d, levels)
    return SynthesisResult(None, best_overall, max_slots, d, levels)


# ------------------------------------------------------ universal strategies


@dataclass
class UniversalReport:
    epsilon: float
    budget: float
    programs: dict
    distances: dict
    omega: float
    omega_universal: float

    @property
    def loss(self) -> float:
        return self.omega - self.omega_universal

    @property
    def accumulated(self) -> float:
        return float(sum(sum(v) for v in self.distances.values()))

    @property
    def passed(self) -> bool:
        return self.omega_universal >= self.omega - self.epsilon - 1e-9

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "per_unitary_budget": self.budget,
            "programs": {k: [p.bits for p in v] for k, v in self.programs.items()},
            "distances": self.distances,
            "omega": self.omega,
            "omega_universal": self.omega_universal,
            "loss": self.loss,
            "accumulated_distance": self.accumulated,
            "pass": self.passed,
        }


def universal_strategy(strat: CircuitStrategy, programs: dict) -> CircuitStrategy:
    """Replace each prover unitary by its dispatch-circuit realization.

    The program registers sit in computational basis states, so the
    controlled dispatch acts as decode-then-apply on the working register.
    """
    def realize(progs, width):
        return [evaluate(DispatchCircuit(p.slots, width), p) for p in progs]

    alice_w = int(strat.alice[0].shape[0]).bit_length() - 1
    bob_w = int(strat.bob[0].shape[0]).bit_length() - 1
    return CircuitStrategy(
        state=strat.state,
        priv_x=strat.priv_x,
        priv_y=strat.priv_y,
        alice=realize(programs["alice"], alice_w),
        bob=realize(programs["bob"], bob_w),
        meta={**strat.meta, "universal": True},
    )


def compile_universal(
    game: QuantumGame,
    strat: CircuitStrategy,
    eps: float,
    max_slots: int = 12,
    *,
    strict: bool = True,
) -> UniversalReport:
    """Synthesize every prover unitary to eps / (2k) and rerun the game.

    With 2k unitaries each within eps / (2k), the final states differ by at
    most eps in norm, which bounds the value loss. ``strict=False`` keeps the
    best program found even when it misses the per-unitary budget.
    """
    strat.validate(game)
    k = game.rounds
    budget = eps / (2 * k)
    programs = {"alice": [], "bob": []}
    distances = {"alice": [], "bob": []}
    for side in ("alice", "bob"):
        for j, u in enumerate(getattr(strat, side)):
            res = synthesize(u, budget, max_slots)
            if not res.found:
                if strict:
                    raise SynthesisError(
                        f"{side} round {j + 1}: no program within {budget:.3g} up to {max_slots} slots",
                        res.distance,
                    )
                res = _best_effort(u, max_slots)
            programs[side].append(res.program)
            distances[side].append(res.distance)
    universal = universal_strategy(strat, programs)
    return UniversalReport(
        epsilon=eps,
        budget=budget,
        programs=programs,
        distances=distances,
        omega=run_quantum_game(game, strat),
        omega_universal=run_quantum_game(game, universal),
    )


def _best_effort(target, max_slots: int) -> SynthesisResult:
    d = int(target.shape[0]).bit_length() - 1
    best = None
    for m in range(1, max_slots + 1):
        dist, bits = _search_level(target, DispatchCircuit(m, d), 0.0)
        if best is None or dist < best.distance - 1e-12:
            best = SynthesisResult(ProgramRegister(bits), dist, m, d)
    return best
