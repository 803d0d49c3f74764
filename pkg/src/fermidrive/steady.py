"""Steady states of the driven step.

The step is affine in ``G``. Flattening ``G`` row-major to a vector of length
N^2 gives ``vec(G) -> Lambda vec(G) + g``. The fixed point solves
``(1 - Lambda) x = g``, directly, through a minimum-norm generalized inverse when
``1 - Lambda`` is singular, or matrix-free by iterating the step.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from . import tolerances as tol
from .channels import DriveStep, EnergyBasisStep
from .errors import ConfigError, NoSolution, NotConverged
from .linalg import hermitize


@dataclass(frozen=True)
class VectorizedChannel:
    """Affine superoperator ``vec(G) -> Lambda vec(G) + g`` (row-major ``vec``)."""

    Lambda: np.ndarray
    g: np.ndarray

    @property
    def n(self):
        return int(round(np.sqrt(self.g.shape[0])))

    def apply(self, gmat):
        n = self.n
        return (self.Lambda @ np.asarray(gmat).reshape(n * n) + self.g).reshape(n, n)


@dataclass
class SteadyStateResult:
    """Outcome of a steady-state computation.

    ``unique`` is ``None`` for the fixed-point method, which cannot tell a
    unique fixed point from one member of a family. ``kernel_basis`` lists
    matrices spanning the fixed subspace of ``Lambda`` when the direct solve
    found one.
    """

    G: np.ndarray
    residual: float
    method: str
    unique: object
    kernel_dimension: int = 0
    kernel_basis: list = field(default_factory=list)
    iterations: int = 0


def vectorize_map(step, n):
    """Materialize an affine map on N x N matrices by probing basis matrices."""
    g = np.asarray(step(np.zeros((n, n), dtype=complex))).reshape(n * n)
    lam = np.empty((n * n, n * n), dtype=complex)
    e = np.zeros((n, n), dtype=complex)
    for k in range(n * n):
        i, j = divmod(k, n)
        e[i, j] = 1.0
        lam[:, k] = np.asarray(step(e)).reshape(n * n) - g
        e[i, j] = 0.0
    return VectorizedChannel(Lambda=lam, g=g)


def vectorize(proto, model, allow_large=False):
    """Build ``(Lambda, g)`` for the drive step of ``proto`` on ``model``.

    Refuses N > ``DENSE_SOLVE_MAX_N`` unless ``allow_large`` is set; Lambda
    takes 16 N^4 bytes.
    """
    n = model.site_count
    if n > tol.DENSE_SOLVE_MAX_N and not allow_large:
        raise ConfigError(
            f"N = {n} exceeds the dense-solve limit {tol.DENSE_SOLVE_MAX_N}; "
            "pass allow_large=True or use the fixed-point method"
        )
    return vectorize_map(DriveStep(proto, model.propagator(proto.tau)), n)


def spectral_radius(chan):
    return float(np.max(np.abs(np.linalg.eigvals(chan.Lambda))))


def _residual(chan, gmat):
    return float(np.max(np.abs(chan.apply(gmat) - gmat)))


def steady_direct(chan):
    """Solve ``(1 - Lambda) x = g``.

    A pivoted LU solve is used when the condition estimate clearly rules out
    singularity. Otherwise the singular values decide: if the smallest is below
    ``STEADY_SINGULAR_REL`` times the largest, the minimum-norm solution is
    returned with ``unique=False`` and a basis of the fixed subspace.

    Raises
    ------
    NoSolution
        ``g`` has a component outside the range of ``1 - Lambda``.
    """
    n = chan.n
    dim = n * n
    a = np.eye(dim) - chan.Lambda
    lu, piv, info = lapack.zgetrf(a)
    if info == 0:
        anorm = np.max(np.sum(np.abs(a), axis=0))
        rcond, _ = lapack.zgecon(lu, anorm, norm="1")
        # 1/kappa_2 >= rcond_1 / dim; the factor 10 covers the estimator's slack
        if rcond >= 10.0 * dim * tol.STEADY_SINGULAR_REL:
            x, _ = lapack.zgetrs(lu, piv, chan.g)
            gmat = hermitize(x.reshape(n, n))
            return SteadyStateResult(gmat, _residual(chan, gmat), "direct", True)

    u, s, vh = sla.svd(a)
    cutoff = tol.STEADY_SINGULAR_REL * s[0]
    rank = int(np.sum(s > cutoff))
    if rank == dim:
        x = sla.solve(a, chan.g)
        gmat = hermitize(x.reshape(n, n))
        return SteadyStateResult(gmat, _residual(chan, gmat), "direct", True)

    coeffs = u.conj().T @ chan.g
    leak = float(np.linalg.norm(coeffs[rank:]))
    if leak > tol.STEADY_COKERNEL * (1.0 + np.linalg.norm(chan.g)):
        raise NoSolution(f"injection term has a component {leak:.3e} outside the range of 1 - Lambda")
    x = vh[:rank].conj().T @ (coeffs[:rank] / s[:rank])
    gmat = hermitize(x.reshape(n, n))
    basis = [vh[k].conj().reshape(n, n) for k in range(rank, dim)]
    return SteadyStateResult(
        gmat, _residual(chan, gmat), "pseudo_inverse", False,
        kernel_dimension=dim - rank, kernel_basis=basis,
    )


def steady_fixed_point(g0, proto, model, tol=1e-12, max_iter=1_000_000, kernel="site"):
    """Iterate the drive step until successive states differ by less than ``tol``.

    ``kernel="energy"`` iterates in the eigenbasis (O(N^2) per step); the
    convergence test is then taken in that basis, where max-abs differences
    equal the site-basis ones up to a factor of at most N.
    The reported residual is always an explicit site-basis check.

    Raises
    ------
    NotConverged
        After ``max_iter`` iterations; signals slow mixing or a non-unique
        fixed subspace (e.g. ``r = 0``).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    site_step = DriveStep(proto, model.propagator(proto.tau))
    if kernel == "site":
        step, state = site_step, np.array(g0, dtype=complex)
        to_site = lambda s: s  # noqa: E731
    elif kernel == "energy":
        step = EnergyBasisStep(proto, model)
        w = model.state_modes
        state = w.conj().T @ np.asarray(g0, dtype=complex) @ w
        to_site = lambda s: w @ s @ w.conj().T  # noqa: E731
    else:
        raise ValueError(f"unknown kernel {kernel!r}")

    delta = np.inf
    for it in range(1, max_iter + 1):
        new = step(state)
        delta = float(np.max(np.abs(new - state)))
        state = new
        if delta < tol:
            gmat = hermitize(to_site(state))
            residual = float(np.max(np.abs(site_step(gmat) - gmat)))
            return SteadyStateResult(gmat, residual, "fixed_point", None, iterations=it)
    raise NotConverged(max_iter, delta)
