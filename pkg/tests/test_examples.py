"""Worked examples: small cases with hand-computable or independently derived answers."""

import math

import numpy as np
import pytest

from embezzlab import embezzle as em
from embezzlab.games import (
    CircuitStrategy,
    ClassicalGame,
    Gate,
    PovmStrategy,
    QuantumGame,
    chsh_game,
    run_quantum_game,
    strategy_value,
)
from embezzlab.qlin import (
    measure,
    random_state,
    random_unitary,
    schmidt_decompose,
    tensor,
    tv_distance,
    validate_povm,
)

EULER_GAMMA = 0.5772156649015329


def test_harmonic_constants():
    assert em.harmonic_norm(1) == pytest.approx(1.224745, abs=1e-6)
    assert em.harmonic_norm(2) == pytest.approx(1.443376, abs=1e-6)
    assert abs(em.harmonic_norm(20) ** 2 - (20 * math.log(2) + EULER_GAMMA)) < 5e-7


def test_mu_state_n1():
    c = math.sqrt(1.5)
    assert np.allclose(em.mu_state(1), np.array([1, 0, 0, 1 / math.sqrt(2)]) / c)


def test_mu_schmidt_coefficients():
    dec = schmidt_decompose(em.mu_state(3), 3)
    expected = 1 / (em.harmonic_norm(3) * np.sqrt(np.arange(1, 9)))
    assert np.allclose(dec.coefficients, expected)


def test_selection_multiset_m3_n6(rng):
    dec = schmidt_decompose(random_state(6, rng), 3)
    sel = em.select_top_products(dec.coefficients, 6)
    grid = np.outer(1 / np.sqrt(np.arange(1, 65)), dec.coefficients).ravel() / sel.norm
    assert np.allclose(np.sort(sel.gammas), np.sort(grid)[-64:])


@pytest.mark.parametrize("m", [1, 2])
def test_dense_embezzled_version_norm_and_schmidt(rng, m):
    dec = schmidt_decompose(random_state(2 * m, rng), m)
    dense = em.embezzled_version(dec, 4).to_dense()
    assert abs(np.linalg.norm(dense) - 1) < 1e-10
    coeffs = schmidt_decompose(dense, 4 + m).coefficients[:16]
    assert np.allclose(coeffs, 1 / (em.harmonic_norm(4) * np.sqrt(np.arange(1, 17))))


def test_epr_fidelity_examples():
    dec = schmidt_decompose(np.array([1, 0, 0, 1]) / math.sqrt(2), 1)
    assert em.embezzlement_fidelity(dec, 1) == pytest.approx((1 / 1.5) * (1 + 1 / math.sqrt(2)) / math.sqrt(2))
    assert em.embezzlement_fidelity(dec, 10) >= 0.9


def test_local_unitaries_m1_n4(rng):
    dec = schmidt_decompose(random_state(2, rng), 1)
    ua, ub = em.embezzle_unitaries(dec, 4)
    assert np.max(np.abs(ua.conj().T @ ua - np.eye(32))) < 1e-10
    out = np.kron(ua, ub) @ em.embezzled_version(dec, 4).to_dense()
    # side-grouped: rows (emb_A, work_A), columns (emb_B, work_B)
    mu = em.mu_state(4).reshape(16, 16)
    expected = np.zeros((32, 32), dtype=complex)
    expected[::2, ::2] = mu
    assert np.linalg.norm(out - expected.reshape(-1)) < 1e-9


def test_random_m2_eps01_uses_structured_formula(rng):
    rep = em.verify_theorem1(schmidt_decompose(random_state(4, rng), 2), 2, 0.1)
    assert rep.n == 20 and rep.fidelity >= 0.9 and rep.passed


def test_chsh_product_state_deterministic_answers():
    zero = [np.eye(2), np.zeros((2, 2))]
    strat = PovmStrategy.one_round(np.array([1, 0, 0, 0]), 1, {0: zero, 1: zero}, {0: zero, 1: zero})
    assert strategy_value(chsh_game(), strat) == pytest.approx(0.75)


def test_never_accepting_game_has_value_zero():
    never = ClassicalGame((0, 1), (0, 1), (0, 1), (0, 1), lambda *x: False, np.full((2, 2), 0.25))
    zero = [np.eye(2), np.zeros((2, 2))]
    strat = PovmStrategy.one_round(np.array([1, 0, 0, 0]), 1, {0: zero, 1: zero}, {0: zero, 1: zero})
    assert strategy_value(never, strat) == 0.0


def test_trivial_quantum_games():
    x = np.array([[0, 1], [1, 0]])
    cs = CircuitStrategy(np.array([1, 0, 0, 0]), 1, 1, [np.eye(4)], [np.eye(4)])
    accept = QuantumGame(1, 1, 1, [[], [Gate((0,), matrix=x)]])
    idle = QuantumGame(1, 1, 1, [[], []])
    assert run_quantum_game(accept, cs) == pytest.approx(1.0)
    assert run_quantum_game(idle, cs) == 0.0


def test_small_linear_algebra_cases():
    assert np.allclose(tensor([1, 0], [0, 1]), [0, 1, 0, 0])
    dec = schmidt_decompose(np.array([0, 1, 0, 0]), 1)
    assert dec.coefficients[0] == pytest.approx(1.0)
    assert np.allclose(np.abs(dec.left_basis[:, 0]), [1, 0])
    assert np.allclose(np.abs(dec.right_basis[:, 0]), [0, 1])
    assert validate_povm([np.eye(2)])
    assert not validate_povm([np.eye(2) / 2, np.eye(2) / 2])
    res = measure([np.diag([1, 0]), np.diag([0, 1])], np.array([1, 0]))
    assert np.allclose(res.probabilities, [1, 0]) and np.allclose(res.post_states[0], [1, 0])
    assert tv_distance([0.5, 0.5], [0.5, 0.5]) == 0
    assert tv_distance([0.5, 0.5], [1, 0]) == 0.5


def test_random_povm_probabilities_sum_to_one(rng):
    iso = random_unitary(8, rng)[:, :2]
    povm = [iso[2 * a : 2 * a + 2] for a in range(4)]
    res = measure(povm, random_state(1, rng))
    assert np.all(res.probabilities >= 0) and abs(res.probabilities.sum() - 1) < 1e-9
