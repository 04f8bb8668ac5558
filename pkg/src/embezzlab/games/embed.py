"""Recast a classical-question game and POVM strategy in the circuit model.

The verifier is unitary throughout. Questions are drawn coherently by
preparing sqrt(pi) amplitudes in a private register and copied out with
CNOTs; answers are swapped into private records between rounds, which acts as
a deferred measurement; the predicate is written into the decision qubit by a
basis permutation. Each prover POVM is realized by its isometric dilation
|0>|psi> -> sum_a |a> M_a|psi>, with the answer bits of the communication
register as the dilation ancilla, so post-measurement states match the
recursion used by ``strategy_value``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .circuits import CircuitStrategy, Gate, QuantumGame
from .model import ClassicalGame, GameError, PovmStrategy


def bits_for(size: int) -> int:
    return max(1, math.ceil(math.log2(size))) if size > 1 else 1


class _Alloc:
    def __init__(self):
        self.next = 0

    def take(self, width: int) -> list[int]:
        out = list(range(self.next, self.next + width))
        self.next += width
        return out


def _read(x: int, positions: list[int], width: int) -> int:
    """Value of the bits at ``positions`` inside a width-bit integer x."""
    v = 0
    for p in positions:
        v = (v << 1) | ((x >> (width - 1 - p)) & 1)
    return v


def _write(x: int, positions: list[int], width: int, value: int) -> int:
    n = len(positions)
    for k, p in enumerate(positions):
        bit = (value >> (n - 1 - k)) & 1
        shift = width - 1 - p
        x = (x & ~(1 << shift)) | (bit << shift)
    return x


def state_prep(amplitudes: np.ndarray) -> np.ndarray:
    """Householder unitary whose first column is the given real unit vector."""
    v = np.asarray(amplitudes, dtype=float)
    dim = v.size
    e0 = np.zeros(dim)
    e0[0] = 1.0
    w = v - e0
    nw = float(w @ w)
    if nw < 1e-30:
        return np.eye(dim, dtype=complex)
    return (np.eye(dim) - 2.0 * np.outer(w, w) / nw).astype(complex)


def dilation(ops, answer_bits: int) -> np.ndarray:
    """Unitary on (answer register, system) extending |0>|psi> -> sum_a |a> M_a|psi>."""
    dense = [op.toarray() if sp.issparse(op) else np.asarray(op, dtype=complex) for op in ops]
    dim = dense[0].shape[0]
    n_ans = 1 << answer_bits
    if len(dense) > n_ans:
        raise GameError("answer register too small for the POVM")
    defined = np.zeros((n_ans * dim, dim), dtype=complex)
    for a, m in enumerate(dense):
        defined[a * dim : (a + 1) * dim] = m
    rest = scipy.linalg.null_space(defined.conj().T)
    u = np.zeros((n_ans * dim, n_ans * dim), dtype=complex)
    u[:, :dim] = defined
    u[:, dim:] = rest
    return u


@dataclass
class EmbeddingLayout:
    """Qubit positions used by the embedded verifier and provers."""

    decision: int
    questions: list  # per round: (s positions, t positions)
    records: list  # per round < k: (a positions, b positions)
    com_x: tuple  # (s positions, a positions)
    com_y: tuple  # (t positions, b positions)
    sb: int
    tb: int
    ab: int
    bb: int
    priv_v: int


def _layout(game: ClassicalGame) -> EmbeddingLayout:
    k = game.rounds
    sb, tb, ab, bb = (bits_for(len(x)) for x in (game.S, game.T, game.A, game.B))
    alloc = _Alloc()
    decision = alloc.take(1)[0]
    questions = [(alloc.take(sb), alloc.take(tb)) for _ in range(k)]
    records = [(alloc.take(ab), alloc.take(bb)) for _ in range(k - 1)]
    priv_v = alloc.next
    com_x = (alloc.take(sb), alloc.take(ab))
    com_y = (alloc.take(tb), alloc.take(bb))
    return EmbeddingLayout(decision, questions, records, com_x, com_y, sb, tb, ab, bb, priv_v)


def _label(alphabet, index):
    return alphabet[index] if index < len(alphabet) else None


def _copy_gate(src: list[int], dst: list[int]) -> Gate:
    qubits = src + dst
    w = len(qubits)
    ps = list(range(len(src)))
    pd = list(range(len(src), w))
    return Gate.from_function(
        qubits, lambda x: _write(x, pd, w, _read(x, pd, w) ^ _read(x, ps, w))
    )


def _swap_gate(a: list[int], b: list[int]) -> Gate:
    qubits = a + b
    w = len(qubits)
    pa = list(range(len(a)))
    pb = list(range(len(a), w))
    return Gate.from_function(
        qubits, lambda x: _write(_write(x, pa, w, _read(x, pb, w)), pb, w, _read(x, pa, w))
    )


def _decode_history(game, lay, x, width, positions, rounds):
    """Labels (s, t, a, b) of the first ``rounds`` rounds stored in the verifier."""
    s_h, t_h, a_h, b_h = [], [], [], []
    for j in range(rounds):
        qs, qt = positions["q"][j]
        ra, rb = positions["r"][j]
        for alphabet, pos, out in ((game.S, qs, s_h), (game.T, qt, t_h), (game.A, ra, a_h), (game.B, rb, b_h)):
            lab = _label(alphabet, _read(x, pos, width))
            if lab is None:
                return None
            out.append(lab)
    return tuple(s_h), tuple(t_h), tuple(a_h), tuple(b_h)


def _prep_block(game, i, hist, lay) -> np.ndarray:
    dist = game.distribution(i, hist)
    amps = np.zeros(1 << (lay.sb + lay.tb))
    for si, ti in itertools.product(range(len(game.S)), range(len(game.T))):
        amps[(si << lay.tb) | ti] = math.sqrt(dist[si, ti])
    return state_prep(amps)


def _question_gate(game: ClassicalGame, lay: EmbeddingLayout, i: int) -> Gate:
    """Prepare round-i questions, controlled on the recorded transcript."""
    target = lay.questions[i][0] + lay.questions[i][1]
    hist_q = [q for j in range(i) for q in lay.questions[j][0] + lay.questions[j][1]]
    hist_r = [q for j in range(i) for q in lay.records[j][0] + lay.records[j][1]]
    controls = hist_q + hist_r
    if not controls:
        return Gate(tuple(target), matrix=_prep_block(game, 0, ((), (), (), ()), lay))
    qubits = controls + target
    w = len(qubits)
    rel = {q: k for k, q in enumerate(qubits)}
    positions = {
        "q": [([rel[q] for q in lay.questions[j][0]], [rel[q] for q in lay.questions[j][1]]) for j in range(i)],
        "r": [([rel[q] for q in lay.records[j][0]], [rel[q] for q in lay.records[j][1]]) for j in range(i)],
    }
    tdim = 1 << len(target)
    blocks = []
    for h in range(1 << len(controls)):
        x = h << len(target)
        hist = _decode_history(game, lay, x, w, positions, i)
        blocks.append(np.eye(tdim, dtype=complex) if hist is None else _prep_block(game, i, hist, lay))
    return Gate(tuple(qubits), matrix=scipy.linalg.block_diag(*blocks))


def _decision_gate(game: ClassicalGame, lay: EmbeddingLayout) -> Gate:
    k = game.rounds
    qubits = [lay.decision]
    for j in range(k):
        qubits += lay.questions[j][0] + lay.questions[j][1]
    for j in range(k - 1):
        qubits += lay.records[j][0] + lay.records[j][1]
    qubits += lay.com_x[1] + lay.com_y[1]
    w = len(qubits)
    rel = {q: n for n, q in enumerate(qubits)}
    records = [lay.records[j] for j in range(k - 1)] + [(lay.com_x[1], lay.com_y[1])]
    positions = {
        "q": [([rel[q] for q in lay.questions[j][0]], [rel[q] for q in lay.questions[j][1]]) for j in range(k)],
        "r": [([rel[q] for q in rec[0]], [rel[q] for q in rec[1]]) for rec in records],
    }

    def fn(x: int) -> int:
        hist = _decode_history(game, lay, x, w, positions, k)
        if hist is not None and game.accepts(*hist):
            return x ^ (1 << (w - 1))
        return x

    return Gate.from_function(qubits, fn)


def embedded_verifier(game: ClassicalGame) -> QuantumGame:
    """Unitary verifier circuits V_1 .. V_{k+1} for a classical-question game."""
    lay = _layout(game)
    k = game.rounds
    circuits = []
    for i in range(k):
        circ = []
        if i > 0:
            ra, rb = lay.records[i - 1]
            qs, qt = lay.questions[i - 1]
            circ += [_swap_gate(lay.com_x[1], ra), _swap_gate(lay.com_y[1], rb)]
            circ += [_copy_gate(qs, lay.com_x[0]), _copy_gate(qt, lay.com_y[0])]
        circ.append(_question_gate(game, lay, i))
        qs, qt = lay.questions[i]
        circ += [_copy_gate(qs, lay.com_x[0]), _copy_gate(qt, lay.com_y[0])]
        circuits.append(circ)
    circuits.append([_decision_gate(game, lay)])
    qg = QuantumGame(
        priv_v=lay.priv_v,
        com_x=lay.sb + lay.ab,
        com_y=lay.tb + lay.bb,
        verifier=circuits,
        decision_qubit=lay.decision,
        name=f"embedded-{game.name}" if game.name else "embedded",
    )
    qg.meta["layout"] = lay
    return qg


def _prover_circuits(questions, answers, table, system_qubits, rounds, qb, ab):
    """Per-round unitaries on (question bits, answer bits, system, memory)."""
    mem_slot = qb + ab
    mem_bits = mem_slot * (rounds - 1)
    sdim = 1 << system_qubits
    mdim = 1 << mem_bits
    adim = 1 << ab
    width = qb + ab + system_qubits + mem_bits
    circuits = []
    for i in range(rounds):
        u = np.zeros((1 << qb, adim * sdim, mdim, 1 << qb, adim * sdim, mdim), dtype=complex)
        for qv, mv in itertools.product(range(1 << qb), range(mdim)):
            w = np.eye(adim * sdim, dtype=complex)
            q_lab = _label(questions, qv)
            if q_lab is not None:
                hist_q, hist_a, ok = [], [], True
                for j in range(i):
                    slot = mv >> (mem_bits - (j + 1) * mem_slot) & ((1 << mem_slot) - 1)
                    ql = _label(questions, slot >> ab)
                    al = _label(answers, slot & (adim - 1))
                    if ql is None or al is None:
                        ok = False
                        break
                    hist_q.append(ql)
                    hist_a.append(al)
                view = (tuple(hist_q) + (q_lab,), tuple(hist_a))
                if ok and view in table:
                    w = dilation(table[view], ab)
            u[qv, :, mv, qv, :, mv] = w
        mat = u.reshape(1 << width, 1 << width)
        if i < rounds - 1:
            qpos = list(range(qb))
            apos = list(range(qb, qb + ab))
            base = qb + ab + system_qubits + i * mem_slot
            mq = list(range(base, base + qb))
            ma = list(range(base + qb, base + mem_slot))

            def fn(x, qpos=qpos, apos=apos, mq=mq, ma=ma):
                x = _write(x, mq, width, _read(x, mq, width) ^ _read(x, qpos, width))
                return _write(x, ma, width, _read(x, ma, width) ^ _read(x, apos, width))

            perm = np.array([fn(x) for x in range(1 << width)])
            out = np.empty_like(mat)
            out[perm] = mat
            mat = out
        circuits.append(mat)
    return circuits, mem_bits


def embed_classical(game: ClassicalGame, strat: PovmStrategy) -> tuple[QuantumGame, CircuitStrategy]:
    strat.validate(game)
    qgame = embedded_verifier(game)
    lay = qgame.meta["layout"]
    k = game.rounds
    ma, mb = strat.left_qubits, strat.right_qubits
    alice, mem_a = _prover_circuits(game.S, game.A, strat.alice, ma, k, lay.sb, lay.ab)
    bob, mem_b = _prover_circuits(game.T, game.B, strat.bob, mb, k, lay.tb, lay.bb)
    da, db = strat.dims
    psi = np.zeros((da, 1 << mem_a, db, 1 << mem_b), dtype=complex)
    psi[:, 0, :, 0] = np.asarray(strat.state, dtype=complex).reshape(da, db)
    cs = CircuitStrategy(
        state=psi.reshape(-1),
        priv_x=ma + mem_a,
        priv_y=mb + mem_b,
        alice=alice,
        bob=bob,
    )
    return qgame, cs
