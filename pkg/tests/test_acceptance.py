"""Acceptance criteria, one test per criterion.

Each test prints a single PASS/FAIL line with the measured quantities, then
asserts. Run directly (``python tests/test_acceptance.py``) for the summary
without pytest.
"""

import math
import sys
import time

import numpy as np
import pytest
import scipy.linalg

sys.path.insert(0, __file__.rsplit("/", 1)[0])

from conftest import toy_quantum_game  # noqa: E402
from embezzlab import transform as tf  # noqa: E402
from embezzlab.embezzle import (  # noqa: E402
    embezzled_version,
    embezzlement_fidelity,
    mu_tensor_state,
    qubits_for,
)
from embezzlab.games import (  # noqa: E402
    CircuitStrategy,
    chsh_circuit,
    chsh_game,
    chsh_strategy,
    classical_value,
    embed_classical,
    magic_square_game,
    magic_square_strategy,
    run_quantum_game,
    strategy_value,
)
from embezzlab.optimize import SeesawConfig, seesaw_restarts  # noqa: E402
from embezzlab.qlin import (  # noqa: E402
    overlap,
    random_state,
    random_unitary,
    schmidt_decompose,
    tv_distance,
)
from embezzlab.synth import (  # noqa: E402
    GATE_NAMES,
    DispatchCircuit,
    ProgramRegister,
    compile_universal,
    evaluate,
    menu_gate,
    synthesize,
)

TSIRELSON = math.cos(math.pi / 8) ** 2
_OUT = []


@pytest.fixture(autouse=True)
def _reporter(request):
    tr = request.config.pluginmanager.getplugin("terminalreporter")
    _OUT.append(tr.write_line if tr is not None else print)
    yield
    _OUT.pop()


def report(k: int, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {k}: {detail}"
    (_OUT[-1] if _OUT else print)(line)


def _within(seconds: float, t0: float) -> bool:
    return time.perf_counter() - t0 < seconds


def test_criterion_1_chsh_classical_value():
    t0 = time.perf_counter()
    val = classical_value(chsh_game())
    ok = abs(val - 0.75) <= 1e-12 and _within(1, t0)
    report(1, ok, f"classical CHSH value {val!r} (target 0.75)")
    assert ok


def test_criterion_2_chsh_entangled_value():
    t0 = time.perf_counter()
    val = strategy_value(chsh_game(), chsh_strategy())
    ok = abs(val - TSIRELSON) <= 1e-9 and _within(1, t0)
    report(2, ok, f"entangled CHSH value {val:.12f} (cos^2(pi/8) = {TSIRELSON:.12f})")
    assert ok


def test_criterion_3_magic_square():
    t0 = time.perf_counter()
    game = magic_square_game()
    q = strategy_value(game, magic_square_strategy())
    c = classical_value(game)
    ok = abs(q - 1) <= 1e-9 and abs(c - 8 / 9) <= 1e-12 and _within(30, t0)
    report(3, ok, f"quantum {q:.12f}, classical {c:.12f} (8/9), {time.perf_counter() - t0:.2f}s")
    assert ok


def _source(kind: str, m: int, rng) -> np.ndarray:
    dim = 1 << m
    if kind == "epr":
        return np.eye(dim).reshape(-1) / np.sqrt(dim)
    if kind == "rank1":
        psi = np.zeros(dim * dim)
        psi[0] = 1.0
        return psi
    return random_state(2 * m, rng)


def test_criterion_4_embezzlement_sweep():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    failures, dense_checked, worst_dense = [], 0, 0.0
    for m in (1, 2):
        for eps in (0.5, 0.25, 0.1):
            n = qubits_for(m, eps)
            assert n == math.ceil(m / eps)
            for kind in ("epr", "random", "rank1"):
                psi = _source(kind, m, rng)
                dec = schmidt_decompose(psi, m)
                fid = embezzlement_fidelity(dec, n)
                if fid < 1 - eps:
                    failures.append((m, eps, kind, fid))
                if kind == "rank1" and abs(fid - 1) > 1e-12:
                    failures.append((m, eps, kind, fid))
                if n + m <= 8:
                    dense = abs(overlap(mu_tensor_state(n, psi, m), embezzled_version(dec, n).to_dense()))
                    worst_dense = max(worst_dense, abs(dense - fid))
                    dense_checked += 1
    elapsed = time.perf_counter() - t0
    ok = not failures and worst_dense <= 1e-10 and elapsed < 10
    report(4, ok, f"18 cells, failures {failures}, dense cross-checks {dense_checked} "
                  f"(max diff {worst_dense:.1e}), {elapsed:.2f}s")
    assert ok


def test_criterion_5_theorem2_chsh():
    game, strat = chsh_game(), chsh_strategy()
    parts, ok = [], True
    for eps, n_expected in ((0.25, 4), (0.1, 10)):
        t0 = time.perf_counter()
        comp = tf.compile(strat, eps)
        rep = tf.verify_bound(strat, comp, game)
        elapsed = time.perf_counter() - t0
        good = (
            comp.n == n_expected
            and comp.qubits_per_side == n_expected + 1
            and rep.omega_prime >= TSIRELSON - math.sqrt(2 * eps) - 1e-9
            and elapsed < 300
        )
        ok &= good
        parts.append(f"eps={eps}: n={comp.n}, omega'={rep.omega_prime:.6f} >= bound {rep.bound:.4f}, "
                     f"gap {rep.gap:.4f}, {elapsed:.2f}s")
    report(5, ok, "; ".join(parts))
    assert ok


def test_criterion_6_theorem2_convergence():
    game, strat = chsh_game(), chsh_strategy()
    rows = tf.sweep(game, strat, ns=[2, 4, 6, 8, 10])
    vals = [r["omega_prime"] for r in rows]
    mono = all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))
    ok = mono and abs(vals[-1] - TSIRELSON) <= 0.05
    report(6, ok, "omega'(n) for n=2..10: " + ", ".join(f"{v:.6f}" for v in vals)
           + f"; final gap {TSIRELSON - vals[-1]:.4f}")
    assert ok


def test_criterion_7_theorem3():
    t0 = time.perf_counter()
    in_menu = max(synthesize(menu_gate(g, d), 1e-12, 2).distance for d in (2, 3) for g in GATE_NAMES)
    rng = np.random.default_rng(7)
    target = np.kron(np.eye(2), random_unitary(2, rng))
    rot = synthesize(target, 0.2, 12)
    qg, cs = chsh_circuit()
    uni = compile_universal(qg, cs, 0.1)
    toy = toy_quantum_game()
    toy_strat = CircuitStrategy(random_state(2, rng), 1, 1,
                                [_near_program(rng) for _ in range(2)],
                                [_near_program(rng) for _ in range(2)])
    acc = compile_universal(toy, toy_strat, 1e-6, max_slots=6, strict=False)
    moved = abs(acc.loss) > 0
    elapsed = time.perf_counter() - t0
    ok = (
        in_menu <= 1e-12
        and rot.found and rot.distance <= 0.2
        and uni.passed and uni.loss <= 0.1 + 1e-9
        and moved and abs(acc.loss) <= acc.accumulated + 1e-9
        and elapsed < 300
    )
    report(7, ok, f"menu distance {in_menu:.1e}; rotation {rot.distance:.4f} at M={rot.slots}; "
                  f"CHSH universal loss {uni.loss:.1e}; toy |loss| {abs(acc.loss):.4f} <= "
                  f"sum of 4 distances {acc.accumulated:.4f}; {elapsed:.2f}s")
    assert ok


def _near_program(rng, slots: int = 4, angle: float = 0.05) -> np.ndarray:
    """A d=2 program unitary followed by a small random rotation."""
    codes = rng.integers(0, 4, size=slots).tolist()
    u = evaluate(DispatchCircuit(slots, 2), ProgramRegister.from_codes(codes))
    herm = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    herm = (herm + herm.conj().T) / np.linalg.norm(herm + herm.conj().T, 2)
    return scipy.linalg.expm(1j * angle * herm) @ u


def _random_povm(dim: int, outcomes: int, rng) -> list:
    iso = random_unitary(dim * outcomes, rng)[:, :dim]
    return [iso[a * dim:(a + 1) * dim] for a in range(outcomes)]


def _trace_distance_mixed(a, b) -> float:
    delta = np.outer(a, a.conj()) - np.outer(b, b.conj())
    return 0.5 * float(np.abs(np.linalg.eigvalsh(delta)).sum())


def test_criterion_8_distance_chain():
    rng = np.random.default_rng(8)
    bad = 0
    for trial in range(1000):
        q = int(rng.integers(1, 4))
        a = random_state(q, rng)
        if trial % 2:
            b = a + rng.normal(scale=10 ** rng.uniform(-4, 0), size=a.size) * (1 + 1j)
            b /= np.linalg.norm(b)
        else:
            b = random_state(q, rng)
        povm = _random_povm(a.size, int(rng.integers(2, 5)), rng)
        p = np.array([np.linalg.norm(m @ a) ** 2 for m in povm])
        r = np.array([np.linalg.norm(m @ b) ** 2 for m in povm])
        tv = tv_distance(p, r)
        td = _trace_distance_mixed(a, b)
        fid = abs(overlap(a, b))
        pure = math.sqrt(max(0.0, 1 - fid**2))
        eps = 1 - fid
        chain = tv <= td + 1e-9 and td <= pure + 1e-9
        implication = pure <= math.sqrt(2 * eps) + 1e-9
        bad += not (chain and implication)
    ok = bad == 0
    report(8, ok, f"1000 random (state pair, POVM) triples, {bad} violations")
    assert ok


def test_criterion_9_seesaw():
    best, results = seesaw_restarts(chsh_game(), SeesawConfig(m=1, max_iters=200, seed=9, restarts=20))
    mono = all(np.all(np.diff(r.trace) >= -1e-12) for r in results)
    hits = sum(r.value >= 0.8535 for r in results)
    ok = mono and hits >= 1 and all(r.iterations <= 200 for r in results)
    report(9, ok, f"best {best.value:.10f}; {hits}/20 restarts >= 0.8535; traces monotone: {mono}")
    assert ok


def test_criterion_10_embedding_equivalence():
    game, strat = chsh_game(), chsh_strategy()
    qg, cs = embed_classical(game, strat)
    emb = run_quantum_game(qg, cs)
    direct = strategy_value(game, strat)
    ok = abs(emb - direct) <= 1e-9
    report(10, ok, f"embedded {emb:.12f} vs direct {direct:.12f} (diff {abs(emb - direct):.1e})")
    assert ok


if __name__ == "__main__":
    failed = 0
    tests = [(n, f) for n, f in globals().items() if n.startswith("test_criterion_")]
    for name, fn in sorted(tests, key=lambda item: int(item[0].split("_")[2])):
        try:
            fn()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
