import numpy as np
import pytest
import scipy.sparse as sp

from embezzlab import qlin


def test_tensor_order_qubit0_is_msb():
    a = np.array([0, 1])
    b = np.array([1, 0])
    assert np.argmax(np.abs(qlin.tensor(a, b))) == 2
    assert np.allclose(qlin.basis_state(2, 2), qlin.tensor(a, b))


def test_num_qubits_rejects_non_power_of_two():
    assert qlin.num_qubits(8) == 3
    with pytest.raises(ValueError):
        qlin.num_qubits(6)


def test_as_state_checks_norm():
    with pytest.raises(ValueError):
        qlin.as_state([1, 1])
    assert qlin.as_state([1, 1], check_norm=False).dtype == complex


def test_schmidt_epr():
    epr = np.array([1, 0, 0, 1]) / np.sqrt(2)
    dec = qlin.schmidt_decompose(epr, 1)
    assert np.allclose(dec.coefficients, [2**-0.5, 2**-0.5])
    assert np.allclose(dec.reconstruct(), epr)
    dec.check()


def test_schmidt_product_state_has_one_nonzero_coefficient():
    psi = qlin.tensor([1, 0], [0.6, 0.8])
    dec = qlin.schmidt_decompose(psi, 1)
    assert dec.coefficients[0] == pytest.approx(1.0)
    assert dec.coefficients[1] == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("left", [1, 2, 3])
def test_schmidt_random_unequal_sides(rng, left):
    psi = qlin.random_state(4, rng)
    dec = qlin.schmidt_decompose(psi, left)
    assert dec.rank == min(2**left, 2 ** (4 - left))
    assert np.linalg.norm(dec.reconstruct() - psi) < 1e-9
    dec.check()


def test_schmidt_rejects_bad_cut():
    with pytest.raises(ValueError):
        qlin.schmidt_decompose(np.array([1, 0, 0, 0]), 2)


def test_random_unitary_is_unitary(rng):
    assert qlin.is_unitary(qlin.random_unitary(8, rng))
    assert not qlin.is_unitary(np.ones((2, 2)))


def test_distances(rng):
    a, b = qlin.random_state(3, rng), qlin.random_state(3, rng)
    d = qlin.trace_distance_pure(a, b)
    assert d == pytest.approx(np.sqrt(1 - abs(np.vdot(a, b)) ** 2))
    assert qlin.trace_distance_pure(a, a) == pytest.approx(0.0, abs=1e-7)
    assert qlin.tv_distance([1, 0], [0, 1]) == 1.0
    with pytest.raises(ValueError):
        qlin.tv_distance([0.5, 0.4], [0.5, 0.5])


def test_measure_and_povm_validation():
    plus = np.array([1, 1]) / np.sqrt(2)
    povm = [qlin.projector([1, 0]), qlin.projector([0, 1])]
    res = qlin.measure(povm, plus)
    assert np.allclose(res.probabilities, [0.5, 0.5])
    assert np.allclose(res.post_states[0], [1, 0])
    res = qlin.measure(povm, np.array([1, 0]))
    assert res.post_states[1] is None
    assert not qlin.validate_povm([qlin.projector([1, 0])])
    with pytest.raises(ValueError):
        qlin.measure([qlin.projector([1, 0])], plus)


def test_sparse_completeness_residual():
    povm = [sp.csr_matrix(qlin.projector([1, 0])), sp.csr_matrix(qlin.projector([0, 1]))]
    assert qlin.completeness_residual(povm) == 0.0
    assert qlin.completeness_residual(povm[:1]) == pytest.approx(1.0)
