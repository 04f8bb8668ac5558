"""van Dam-Hayden embezzlement states and embezzled versions of bipartite states.

Labels ``j`` (embezzlement index), ``i`` (Schmidt index) and ``r`` (rank in the
selection) are 1-based; the computational basis index of label ``j`` is
``j - 1``. Dense bipartite renderings group registers by side:
``(emb_A, work_A) | (emb_B, work_B)``.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .config import CapExceeded, dense_cap
from .qlin import SchmidtDecomposition

MAX_HARMONIC_QUBITS = 30
_CHUNK = 1 << 20


@lru_cache(maxsize=None)
def harmonic_norm(n: int) -> float:
    """C = sqrt(H_{2^n}), summed with exactly rounded partial sums."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > MAX_HARMONIC_QUBITS:
        raise OverflowError(f"2**{n} terms exceed the summation limit 2**{MAX_HARMONIC_QUBITS}")
    total = 1 << n
    partials = []
    for start in range(1, total + 1, _CHUNK):
        stop = min(start + _CHUNK, total + 1)
        partials.append(math.fsum(1.0 / np.arange(start, stop, dtype=float)))
    return math.sqrt(math.fsum(partials))


def _check_dense(qubits_per_side: int) -> None:
    cap = dense_cap()
    if qubits_per_side > cap:
        raise CapExceeded(f"{qubits_per_side} qubits per side exceeds dense cap {cap}")


def mu_state(n: int) -> np.ndarray:
    """Dense embezzlement state on 2n qubits (n per side)."""
    _check_dense(n)
    big_n = 1 << n
    c = harmonic_norm(n)
    psi = np.zeros(big_n * big_n, dtype=complex)
    j = np.arange(1, big_n + 1)
    psi[(j - 1) * big_n + (j - 1)] = 1.0 / (c * np.sqrt(j))
    return psi


@dataclass(frozen=True)
class EmbezzledSelection:
    """The N = 2**n largest products gamma_{j,i} = alpha_i / (sqrt(j) C)."""

    n: int
    j: np.ndarray  # 1-based embezzlement labels, length N
    i: np.ndarray  # 1-based Schmidt labels, length N
    gammas: np.ndarray
    norm: float  # C

    @property
    def size(self) -> int:
        return len(self.j)

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.j.tolist(), self.i.tolist()))


def select_top_products(alpha, n: int) -> EmbezzledSelection:
    """Pick the 2**n largest gamma_{j,i} by a k-way merge over Schmidt columns.

    Each column i is decreasing in j, so a heap holding one frontier cell per
    column yields the cells in nonincreasing order without building the grid.
    Equal values come out ordered by (j, i).
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(np.diff(alpha) > 1e-12):
        raise ValueError("alpha must be sorted nonincreasing")
    big_n = 1 << n
    c = harmonic_norm(n)
    avals = alpha.tolist()
    heap = [(-a / c, 1, i) for i, a in enumerate(avals, start=1) if a > 0.0]
    heapq.heapify(heap)
    js = np.empty(big_n, dtype=np.int64)
    is_ = np.empty(big_n, dtype=np.int64)
    sqrt = math.sqrt
    replace, pop = heapq.heapreplace, heapq.heappop
    for r in range(big_n):
        _, j, i = heap[0]
        js[r] = j
        is_[r] = i
        if j < big_n:
            replace(heap, (-avals[i - 1] / (sqrt(j + 1) * c), j + 1, i))
        else:
            pop(heap)
    gammas = alpha[is_ - 1] / (np.sqrt(js) * c)
    return EmbezzledSelection(n=n, j=js, i=is_, gammas=gammas, norm=c)


@dataclass(frozen=True)
class EmbezzledVersion:
    selection: EmbezzledSelection
    coefficients: np.ndarray  # 1 / (C sqrt(r))
    source: SchmidtDecomposition

    def to_dense(self) -> np.ndarray:
        src = self.source
        n = self.selection.n
        _check_dense(n + max(src.left_qubits, src.right_qubits))
        big_n = 1 << n
        weights = np.zeros((big_n, src.rank))
        sel = self.selection
        weights[sel.j - 1, sel.i - 1] = self.coefficients
        blocks = np.einsum("ai,ji,bi->jab", src.left_basis, weights, src.right_basis)
        da, db = src.left_basis.shape[0], src.right_basis.shape[0]
        mat = np.zeros((big_n, da, big_n, db), dtype=complex)
        idx = np.arange(big_n)
        mat[idx, :, idx, :] = blocks
        return mat.reshape(-1)


def embezzled_version(source: SchmidtDecomposition, n: int) -> EmbezzledVersion:
    sel = select_top_products(source.coefficients, n)
    r = np.arange(1, sel.size + 1)
    return EmbezzledVersion(sel, 1.0 / (sel.norm * np.sqrt(r)), source)


def mu_tensor_state(n: int, psi, left_qubits: int) -> np.ndarray:
    """Dense mu_{2n} (x) psi in side-grouped register order."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    da = 1 << left_qubits
    db = psi.size // da
    _check_dense(n + max(left_qubits, db.bit_length() - 1))
    big_n = 1 << n
    c = harmonic_norm(n)
    pmat = psi.reshape(da, db)
    mat = np.zeros((big_n, da, big_n, db), dtype=complex)
    j = np.arange(big_n)
    mat[j, :, j, :] = pmat[None, :, :] / (c * np.sqrt(j + 1))[:, None, None]
    return mat.reshape(-1)


def embezzlement_fidelity(source: SchmidtDecomposition, n: int) -> float:
    """Closed form of (<mu| (x) <psi|) |E(psi)>; no dense state is built."""
    sel = select_top_products(source.coefficients, n)
    r = np.arange(1, sel.size + 1, dtype=float)
    terms = source.coefficients[sel.i - 1] / np.sqrt(sel.j * r)
    return math.fsum(terms.tolist()) / sel.norm**2


# ------------------------------------------------------------- local unitaries


def complete_basis(columns: np.ndarray, dim: int, tol: float = 1e-10) -> np.ndarray:
    """Extend orthonormal columns to a unitary by Gram-Schmidt on e_0, e_1, ..."""
    basis = [np.asarray(c, dtype=complex) for c in np.asarray(columns).T]
    k = 0
    while len(basis) < dim:
        v = np.zeros(dim, dtype=complex)
        v[k] = 1.0
        k += 1
        for _ in range(2):
            for b in basis:
                v = v - np.vdot(b, v) * b
        nv = np.linalg.norm(v)
        if nv > tol:
            basis.append(v / nv)
    return np.column_stack(basis)


def selection_permutation(sel: EmbezzledSelection, work_qubits: int) -> np.ndarray:
    """perm[src] = dst sending |j_r>|i_r - 1> to |r - 1>|0>, rest in index order."""
    dw = 1 << work_qubits
    total = sel.size * dw
    src = (sel.j - 1) * dw + (sel.i - 1)
    dst = np.arange(sel.size) * dw
    perm = np.full(total, -1, dtype=np.int64)
    perm[src] = dst
    free_dst = np.setdiff1d(np.arange(total), dst, assume_unique=True)
    free_src = np.flatnonzero(perm < 0)
    perm[free_src] = free_dst
    return perm


def _side_unitary(sel, basis, qubits, sparse):
    theta = complete_basis(basis, 1 << qubits)
    perm = selection_permutation(sel, qubits)
    inv = np.empty_like(perm)
    inv[perm] = np.arange(perm.size)
    if sparse:
        block = sp.kron(sp.identity(sel.size, format="csr"), sp.csr_matrix(theta.conj().T))
        return sp.csr_matrix(block)[inv, :]
    block = np.kron(np.eye(sel.size), theta.conj().T)
    return block[inv, :]


def embezzle_unitaries(source: SchmidtDecomposition, n: int, *, sparse: bool = False):
    """Local unitaries (U_A, U_B) with (U_A (x) U_B)|E(psi)> = |mu>|1>|1>.

    U_A maps |j_r>|theta^A_{i_r}> to |r>|1>; the Schmidt bases are completed by
    Gram-Schmidt and the remaining basis states are permuted in index order.
    """
    ma, mb = source.left_qubits, source.right_qubits
    if not sparse:
        _check_dense(n + max(ma, mb))
    sel = select_top_products(source.coefficients, n)
    ua = _side_unitary(sel, source.left_basis, ma, sparse)
    ub = _side_unitary(sel, source.right_basis, mb, sparse)
    return ua, ub


# ------------------------------------------------------------- verification


def qubits_for(m: int, epsilon: float) -> int:
    """Smallest integer n with n >= m / epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    return max(1, math.ceil(m / epsilon - 1e-9))


@dataclass(frozen=True)
class EmbezzlementReport:
    m: int
    epsilon: float
    n: int
    fidelity: float
    bound: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "n": self.n,
            "fidelity": self.fidelity,
            "bound": self.bound,
            "pass": self.passed,
        }


def verify_theorem1(source: SchmidtDecomposition, m: int, epsilon: float) -> EmbezzlementReport:
    n = qubits_for(m, epsilon)
    fid = embezzlement_fidelity(source, n)
    bound = 1.0 - epsilon
    return EmbezzlementReport(m, epsilon, n, fid, bound, fid >= bound)
