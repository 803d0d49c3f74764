"""Brute-force many-body reference on the 2^N-dimensional Fock space.

Jordan-Wigner ordering follows the sites 1..N: ``a_i`` carries the parity
string ``Z`` on every site ``< i``. Site 1 is the most significant bit of the
basis index. The many-body propagator is a dense matrix exponential of the
quadratic Hamiltonian, a code path independent of the single-particle
eigendecomposition used by the correlation-matrix kernels.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg as sla
from scipy import sparse

from . import tolerances as tol
from .errors import DimensionMismatch, SizeLimit, TraceDrift
from .models import check_site


@dataclass(frozen=True)
class FockOperators:
    n: int
    annihilators: tuple
    creators: tuple
    numbers: tuple

    @property
    def dim(self):
        return 1 << self.n

    @property
    def identity(self):
        return sparse.identity(self.dim, dtype=complex, format="csr")


def _check_size(n):
    if n < 1 or n > tol.FOCK_MAX_N:
        raise SizeLimit(f"Fock oracle supports 1 <= N <= {tol.FOCK_MAX_N}, got {n}")


@lru_cache(maxsize=None)
def fock_operators(n):
    _check_size(n)
    eye2 = sparse.identity(2, format="csr")
    z = sparse.csr_matrix(np.diag([1.0, -1.0]))
    lower = sparse.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # |1> -> |0>
    ann = []
    for i in range(n):
        op = sparse.identity(1, format="csr")
        for j in range(n):
            factor = z if j < i else lower if j == i else eye2
            op = sparse.kron(op, factor, format="csr")
        ann.append(op.astype(complex))
    cre = [a.conj().T.tocsr() for a in ann]
    num = [(c @ a).tocsr() for c, a in zip(cre, ann)]
    return FockOperators(n, tuple(ann), tuple(cre), tuple(num))


@dataclass
class FockDensityMatrix:
    n: int
    rho: np.ndarray

    def trace(self):
        return complex(np.trace(self.rho))


def vacuum(n):
    ops = fock_operators(n)
    rho = np.zeros((ops.dim, ops.dim), dtype=complex)
    rho[0, 0] = 1.0
    return FockDensityMatrix(n, rho)


def fully_occupied(n):
    ops = fock_operators(n)
    rho = np.zeros((ops.dim, ops.dim), dtype=complex)
    rho[-1, -1] = 1.0
    return FockDensityMatrix(n, rho)


def gaussian_state(g):
    """Quasi-free density matrix with two-point function ``G``.

    Writing ``G = W diag(nu) W^H``, the state is the product over modes
    ``b_k^dag = sum_i conj(W_ik) a_i^dag`` of ``nu_k n_k + (1 - nu_k)(1 - n_k)``.
    """
    g = np.asarray(g, dtype=complex)
    n = g.shape[0]
    ops = fock_operators(n)
    nu, w = np.linalg.eigh(0.5 * (g + g.conj().T))
    rho = np.eye(ops.dim, dtype=complex)
    one = ops.identity
    for k in range(n):
        bdag = sum(np.conj(w[i, k]) * ops.creators[i] for i in range(n))
        nk = (bdag @ bdag.conj().T).tocsr()
        factor = nu[k] * nk + (1.0 - nu[k]) * (one - nk)
        rho = factor @ rho
    return FockDensityMatrix(n, 0.5 * (rho + rho.conj().T))


def many_body_hamiltonian(h):
    h = np.asarray(h)
    n = h.shape[0]
    ops = fock_operators(n)
    out = sparse.csr_matrix((ops.dim, ops.dim), dtype=complex)
    for i in range(n):
        for j in range(n):
            if h[i, j] != 0:
                out = out + h[i, j] * (ops.creators[i] @ ops.annihilators[j])
    return out


def many_body_propagator(h, tau):
    """``exp(-i tau sum_nm h_nm a_n^dag a_m)`` as a dense matrix."""
    return sla.expm(-1j * tau * many_body_hamiltonian(h).toarray())


def apply_kraus(rho, kraus):
    """``sum_k A_k rho A_k^dag`` for dense or sparse ``A_k``."""
    out = np.zeros_like(rho.rho)
    for a in kraus:
        out += np.asarray(a @ rho.rho @ a.conj().T)
    return FockDensityMatrix(rho.n, out)


def unitary_kraus(h, tau):
    return [many_body_propagator(h, tau)]


def detection_kraus(n, i):
    ops = fock_operators(n)
    k = check_site(i, n)
    return [ops.numbers[k], ops.identity - ops.numbers[k]]


def extraction_kraus(n, i):
    ops = fock_operators(n)
    k = check_site(i, n)
    return [ops.annihilators[k], ops.identity - ops.numbers[k]]


def injection_kraus(n, i):
    ops = fock_operators(n)
    k = check_site(i, n)
    return [ops.creators[k], ops.numbers[k]]


def drive_kraus(proto, h):
    """Kraus operators of one driven step: attempt, then free evolution."""
    h = np.asarray(h)
    n = h.shape[0]
    _check_size(n)
    ops = fock_operators(n)
    ia, ib = proto.site_indices(n)
    u = many_body_propagator(h, proto.tau)
    r, al = proto.r, proto.alpha
    one = ops.identity
    terms = [
        (1.0 - r, one),
        (r * al, ops.creators[ia]),
        (r * al, ops.numbers[ia]),
        (r * (1.0 - al), ops.annihilators[ib]),
        (r * (1.0 - al), one - ops.numbers[ib]),
    ]
    return [np.sqrt(w) * (u @ m.toarray()) for w, m in terms if w > 0]


class OracleDrive:
    """Repeated application of the driven channel with cached Kraus operators."""

    def __init__(self, proto, model):
        self.n = model.site_count
        _check_size(self.n)
        self.kraus = drive_kraus(proto, model.h)

    def __call__(self, rho):
        if rho.n != self.n:
            raise DimensionMismatch(f"state has {rho.n} sites, channel has {self.n}")
        out = apply_kraus(rho, self.kraus)
        drift = abs(out.trace() - 1.0)
        if drift > tol.FOCK_TRACE_DRIFT:
            raise TraceDrift(f"trace drifted by {drift:.3e}")
        return out


def oracle_channel_step(rho, proto, model):
    return OracleDrive(proto, model)(rho)


@lru_cache(maxsize=None)
def _pair_entries(n):
    """COO entries of every ``a_i^dag a_j``, each with at most one nonzero per column."""
    ops = fock_operators(n)
    out = {}
    for i in range(n):
        for j in range(n):
            op = (ops.creators[i] @ ops.annihilators[j]).tocoo()
            out[i, j] = (op.row, op.col, op.data)
    return out


def oracle_two_point(rho):
    """``G[i, j] = Tr(rho a_i^dag a_j)``."""
    entries = _pair_entries(rho.n)
    g = np.empty((rho.n, rho.n), dtype=complex)
    for (i, j), (row, col, data) in entries.items():
        g[i, j] = np.sum(data * rho.rho[col, row])
    return g


def oracle_correlator(rho, creates, annihilates):
    """``Tr(rho a^dag_{c_1} ... a^dag_{c_k} a_{d_1} ... a_{d_l})`` with 1-based sites."""
    ops = fock_operators(rho.n)
    op = ops.identity
    for s in creates:
        op = op @ ops.creators[check_site(s, rho.n)]
    for s in annihilates:
        op = op @ ops.annihilators[check_site(s, rho.n)]
    return complex(op.multiply(rho.rho.T).sum())
