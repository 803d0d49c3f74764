"""Continuous-time limit: Lindblad injection at site a and loss at site b.

With ``hbar = 1`` the correlation matrix obeys

    dG/dt = -i [G, h^T] - {K, G} + gamma_a P_a,    K = (gamma_a P_a + gamma_b P_b) / 2.

Relation to the discrete drive step: with ``r = (gamma_a + gamma_b) tau`` and
``alpha = gamma_a / (gamma_a + gamma_b)`` (so ``r alpha = gamma_a tau`` and
``r (1 - alpha) = gamma_b tau``),

    (step(G) - G) / tau = rhs(G) + dephasing(G) + O(tau)

where ``dephasing(G) = -sum_s gamma_s / 2 ({P_s, G} - 2 P_s G P_s)``: each
injection/extraction attempt also destroys the coherence between the operated
site and the rest, which the Lindblad generator does not. The dephasing term
has zero diagonal, so site densities agree at first order without it.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .channels import DriveProtocol, Trajectory, site_densities
from .errors import ConfigError, DimensionMismatch, SingularLiouvillian, StabilityWarning
from .linalg import hermitize
from .models import check_site, mode_occupations
from .steady import SteadyStateResult


@dataclass(frozen=True)
class LindbladParams:
    gamma_a: float
    gamma_b: float
    a: int
    b: int

    def __post_init__(self):
        if self.gamma_a < 0 or self.gamma_b < 0:
            raise ConfigError("Lindblad rates must be non-negative")
        if self.a == self.b:
            raise ConfigError("injection and loss sites must differ")

    def site_indices(self, n):
        return check_site(self.a, n, "a"), check_site(self.b, n, "b")


def _rates(n, params):
    ia, ib = params.site_indices(n)
    k = np.zeros(n)
    k[ia] += 0.5 * params.gamma_a
    k[ib] += 0.5 * params.gamma_b
    return ia, ib, k


def lindblad_rhs(g, model, params):
    g = np.asarray(g)
    n = model.site_count
    if g.shape != (n, n):
        raise DimensionMismatch(f"G has shape {g.shape}, model has {n} sites")
    ia, _, k = _rates(n, params)
    ht = model.h.T
    out = -1j * (g @ ht - ht @ g) - (k[:, None] + k[None, :]) * g
    out[ia, ia] += params.gamma_a
    return out


def trace_rate(g, params, n):
    """d Tr G / dt implied by the equation of motion."""
    ia, ib = params.site_indices(n)
    return params.gamma_a * (1.0 - g[ia, ia].real) - params.gamma_b * g[ib, ib].real


def matched_protocol(params, tau):
    """Discrete protocol whose step approaches ``exp(tau * rhs)`` as ``tau -> 0``."""
    total = params.gamma_a + params.gamma_b
    return DriveProtocol(r=total * tau, alpha=params.gamma_a / total, tau=tau, a=params.a, b=params.b)


def dephasing(g, params, n):
    """Extra site dephasing carried by the discrete step at matched rates."""
    ia, ib = params.site_indices(n)
    out = np.zeros((n, n), dtype=complex)
    for i, gamma in ((ia, params.gamma_a), (ib, params.gamma_b)):
        out[i, :] -= 0.5 * gamma * g[i, :]
        out[:, i] -= 0.5 * gamma * g[:, i]
        out[i, i] += gamma * g[i, i]
    return out


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def lindblad_evolve(g0, model, params, dt, steps, stride=1, checkpoint_stride=None, observers=()):
    """Fixed-step classical Runge-Kutta integration.

    Warns with :class:`StabilityWarning` when ``dt * max(|E|, gamma) > 0.1``.
    The state is re-symmetrized to exact Hermiticity after every step.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if steps < 0 or stride < 1:
        raise ValueError("steps must be >= 0 and stride >= 1")
    checkpoint_stride = stride if checkpoint_stride is None else checkpoint_stride
    scale = max(float(np.max(np.abs(model.energies))), params.gamma_a, params.gamma_b)
    if dt * scale > 0.1:
        warnings.warn(f"dt * rate = {dt * scale:.3g} exceeds 0.1", StabilityWarning, stacklevel=2)

    n = model.site_count
    g = np.array(g0, dtype=complex)
    if g.shape != (n, n):
        raise DimensionMismatch(f"G0 has shape {g.shape}, model has {n} sites")
    f = lambda x: lindblad_rhs(x, model, params)  # noqa: E731

    rec, dens, ck, occ = [], [], [], []
    observed = [[] for _ in observers]

    def record(step, x):
        if step % stride == 0:
            rec.append(step)
            dens.append(site_densities(x))
            for slot, obs in zip(observed, observers):
                slot.append(obs(step, x))
        if step % checkpoint_stride == 0:
            ck.append(step)
            occ.append(mode_occupations(model, x))

    record(0, g)
    for step in range(1, steps + 1):
        g = hermitize(_rk4(f, g, dt))
        record(step, g)

    dens = np.array(dens).reshape(len(rec), n)
    rec = np.array(rec, dtype=int)
    return Trajectory(
        steps=rec, time=rec * dt, nbar=dens.mean(axis=1), densities=dens,
        checkpoint_steps=np.array(ck, dtype=int), occupations=np.array(occ).reshape(len(ck), n),
        energies=np.array(model.energies), final=g, observed=observed,
    )


def liouvillian(model, params):
    """Row-major vectorization of the homogeneous part of the equation of motion."""
    n = model.site_count
    _, _, k = _rates(n, params)
    h = np.asarray(model.h)
    eye = np.eye(n)
    # vec(A G B) = kron(A, B^T) vec(G) for row-major vec
    lin = -1j * np.kron(eye, h) + 1j * np.kron(h.T, eye)
    lin -= np.diag((k[:, None] + k[None, :]).reshape(n * n))
    return lin


def lindblad_steady(model, params):
    """Exact steady state from the vectorized linear equation.

    Raises
    ------
    SingularLiouvillian
        Some eigenmode is reached by neither rate, so the steady state is not unique.
    """
    n = model.site_count
    ia, ib = params.site_indices(n)
    v = model.modes
    reach = params.gamma_a * np.abs(v[ia]) ** 2 + params.gamma_b * np.abs(v[ib]) ** 2
    if np.any(reach <= tol.LINDBLAD_REACH):
        bad = np.flatnonzero(reach <= tol.LINDBLAD_REACH)
        raise SingularLiouvillian(f"modes {list(bad + 1)} are decoupled from the dissipator")
    rhs = np.zeros(n * n, dtype=complex)
    rhs[ia * n + ia] = -params.gamma_a
    x = np.linalg.solve(liouvillian(model, params), rhs)
    gmat = hermitize(x.reshape(n, n))
    residual = float(np.max(np.abs(lindblad_rhs(gmat, model, params))))
    return SteadyStateResult(gmat, residual, "direct", True)
