"""Dense linear algebra helpers for pure states and measurements.

Qubit ordering: qubit 0 is the most significant bit of the amplitude index,
so ``tensor(a, b)[i * len(b) + j] == a[i] * b[j]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .config import TOL


def num_qubits(dim: int) -> int:
    q = int(dim).bit_length() - 1
    if dim < 1 or 1 << q != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return q


def as_state(amplitudes, *, check_norm: bool = True) -> np.ndarray:
    """Validate and return a 1-D complex state vector."""
    psi = np.asarray(amplitudes, dtype=complex).reshape(-1)
    num_qubits(psi.size)
    if check_norm:
        norm = np.linalg.norm(psi)
        if abs(norm - 1.0) > TOL.input_norm:
            raise ValueError(f"state is not normalized (norm={norm:.12g})")
    return psi


def basis_state(index: int, qubits: int) -> np.ndarray:
    psi = np.zeros(1 << qubits, dtype=complex)
    psi[index] = 1.0
    return psi


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def random_state(qubits: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.normal(size=1 << qubits) + 1j * rng.normal(size=1 << qubits)
    return psi / np.linalg.norm(psi)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR with phase correction."""
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``state = sum_i coefficients[i] * left_basis[:, i] (x) right_basis[:, i]``."""

    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    left_qubits: int
    right_qubits: int

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def reconstruct(self) -> np.ndarray:
        mat = (self.left_basis * self.coefficients) @ self.right_basis.T
        return mat.reshape(-1)

    def check(self, tol: float = TOL.state_norm) -> None:
        """Raise AssertionError if any structural invariant is violated."""
        c = self.coefficients
        assert abs(np.sum(c**2) - 1.0) <= tol, "coefficients not normalized"
        assert np.all(np.diff(c) <= tol), "coefficients not sorted"
        for basis in (self.left_basis, self.right_basis):
            gram = basis.conj().T @ basis
            assert np.max(np.abs(gram - np.eye(gram.shape[0]))) <= tol


def schmidt_decompose(state, left_qubits: int) -> SchmidtDecomposition:
    """Schmidt decomposition by SVD of the amplitude matrix.

    Every singular value is kept (including zeros), so the rank field equals
    ``min(2**left_qubits, 2**right_qubits)``.
    """
    psi = as_state(state)
    total = num_qubits(psi.size)
    if not 0 < left_qubits < total:
        raise ValueError(f"left_qubits must lie in (0, {total}), got {left_qubits}")
    right_qubits = total - left_qubits
    mat = psi.reshape(1 << left_qubits, 1 << right_qubits)
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    return SchmidtDecomposition(
        coefficients=s,
        left_basis=u,
        right_basis=vh.T,
        left_qubits=left_qubits,
        right_qubits=right_qubits,
    )


def overlap(a, b) -> complex:
    """Inner product <a|b>."""
    a = np.asarray(a, dtype=complex).reshape(-1)
    b = np.asarray(b, dtype=complex).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.size} vs {b.size}")
    return complex(np.vdot(a, b))


def trace_distance_pure(a, b) -> float:
    """Trace distance between two pure states, sqrt(1 - |<a|b>|^2)."""
    f = abs(overlap(a, b)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - f)))


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"mismatched support: {p.shape} vs {q.shape}")
    for dist in (p, q):
        if abs(dist.sum() - 1.0) > TOL.distribution:
            raise ValueError("distribution does not sum to one")
    return 0.5 * float(np.abs(p - q).sum())


# ---------------------------------------------------------------- measurements


@dataclass(frozen=True)
class PovmCheck:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


def completeness_residual(elements: Sequence) -> float:
    """Max-entry residual of sum_i M_i^dagger M_i - I."""
    if not elements:
        return float("inf")
    dim = elements[0].shape[0]
    if any(sp.issparse(m) for m in elements):
        acc = sp.csr_matrix((dim, dim), dtype=complex)
        for m in elements:
            m = sp.csr_matrix(m)
            acc = acc + m.conj().T @ m
        acc = acc - sp.identity(dim, dtype=complex, format="csr")
        return float(np.max(np.abs(acc.data))) if acc.nnz else 0.0
    acc = np.zeros((dim, dim), dtype=complex)
    for m in elements:
        m = np.asarray(m)
        if m.shape != (dim, dim):
            return float("inf")
        acc += m.conj().T @ m
    return float(np.max(np.abs(acc - np.eye(dim))))


def validate_povm(elements: Sequence, tol: float = TOL.povm) -> PovmCheck:
    res = completeness_residual(elements)
    return PovmCheck(res < tol, res)


@dataclass(frozen=True)
class Measurement:
    probabilities: np.ndarray
    # None marks an outcome whose probability is below the pruning threshold
    post_states: list[Optional[np.ndarray]]


def measure(elements: Sequence, state) -> Measurement:
    check = validate_povm(elements)
    if not check:
        raise ValueError(f"invalid POVM (residual {check.residual:.3g})")
    psi = as_state(state)
    probs = []
    posts: list[Optional[np.ndarray]] = []
    for m in elements:
        if m.shape[1] != psi.size:
            raise ValueError("POVM and state dimensions differ")
        v = m @ psi
        p = float(np.vdot(v, v).real)
        probs.append(p)
        posts.append(v / np.sqrt(p) if p >= TOL.prune else None)
    return Measurement(np.array(probs), posts)


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1, 1)
    return v @ v.conj().T


def is_unitary(u, tol: float = TOL.unitary) -> bool:
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)
