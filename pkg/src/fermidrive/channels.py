"""Induced maps on the correlation matrix and the driven injection/extraction step.

The primitive maps act on ``G[i, j] = <a_i^dag a_j>``:

* unitary     ``G -> u^H G u``
* detection   ``G -> P_i' G P_i' + P_i G P_i``
* extraction  ``G -> P_i' G P_i'``
* injection   ``G -> P_i + P_i' G P_i'``

where ``P_i`` projects on site ``i`` and ``P_i' = 1 - P_i``. Projectors are
never materialized: every site map is row/column surgery.

Operator ordering: a many-body evolution ``U = exp(-i tau sum h_nm a_n^dag a_m)``
acts on ``G`` as ``G -> conj(u) G u^T`` with ``u = exp(-i tau h)``. The drive
step therefore conjugates with ``u^T``, i.e. ``G -> (u^T)^H G u^T``. For real
symmetric ``h`` (the hopping chain) ``u^T = u`` and the distinction vanishes.
"""

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .errors import DimensionMismatch, InvalidProtocol
from .models import check_site, mode_occupations


def _square(g):
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {g.shape}")
    return g


@dataclass(frozen=True)
class DriveProtocol:
    """Parameters of the driven step.

    ``r`` is the attempt probability per step, ``alpha`` the probability that an
    attempt injects (at site ``a``) rather than extracts (at site ``b``), ``tau``
    the free-evolution time between attempts. Sites are 1-based.
    """

    r: float
    alpha: float
    tau: float
    a: int
    b: int

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise InvalidProtocol(f"r = {self.r} outside [0, 1]")
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidProtocol(f"alpha = {self.alpha} outside [0, 1]")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise InvalidProtocol(f"tau = {self.tau} must be positive and finite")
        if self.a == self.b:
            raise InvalidProtocol("injection and extraction sites must differ")

    def site_indices(self, n):
        """0-based (a, b) after range-checking against an N-site lattice."""
        return check_site(self.a, n, "a"), check_site(self.b, n, "b")


# -- primitive maps -----------------------------------------------------------

def apply_unitary(g, u):
    """``u^H G u``."""
    g = _square(g)
    if np.shape(u) != g.shape:
        raise DimensionMismatch(f"u has shape {np.shape(u)}, G has shape {g.shape}")
    return u.conj().T @ g @ u


def apply_detection(g, i):
    """Dephase site ``i``: zero its row and column except the diagonal."""
    g = _square(g)
    k = check_site(i, g.shape[0])
    out = np.array(g, dtype=complex)
    d = out[k, k]
    out[k, :] = 0.0
    out[:, k] = 0.0
    out[k, k] = d
    return out


def apply_extraction(g, i):
    """Empty site ``i``: zero its row and column."""
    g = _square(g)
    k = check_site(i, g.shape[0])
    out = np.array(g, dtype=complex)
    out[k, :] = 0.0
    out[:, k] = 0.0
    return out


def apply_injection(g, i):
    """Fill site ``i``: zero its row and column, then set ``G_ii = 1``."""
    out = apply_extraction(g, i)
    k = check_site(i, out.shape[0])
    out[k, k] = 1.0
    return out


# -- composition --------------------------------------------------------------

def sequence(*maps):
    """Map applying ``maps`` left to right."""
    return lambda g: reduce(lambda acc, m: m(acc), maps, g)


def mixture(weighted_maps):
    """Convex combination ``G -> sum_k w_k M_k(G)``.

    ``weighted_maps`` is an iterable of ``(weight, map)`` pairs with
    non-negative weights summing to one.
    """
    weighted_maps = list(weighted_maps)
    weights = np.array([w for w, _ in weighted_maps], dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise InvalidProtocol("mixture weights must be non-negative and sum to 1")
    return lambda g: sum(w * m(g) for w, m in weighted_maps)


def unitary_map(u):
    return lambda g: apply_unitary(g, u)


def detection_map(i):
    return lambda g: apply_detection(g, i)


def extraction_map(i):
    return lambda g: apply_extraction(g, i)


def injection_map(i):
    return lambda g: apply_injection(g, i)


# -- driven step --------------------------------------------------------------

class DriveStep:
    """Precomputed drive step for one (protocol, propagator) pair.

    ``u`` is the single-particle propagator ``exp(-i tau h)``; the step
    conjugates with its transpose (see module docstring). One call costs one
    dense conjugation plus O(N) surgery.
    """

    def __init__(self, proto, u):
        u = _square(u)
        self.proto = proto
        self.n = u.shape[0]
        self.ia, self.ib = proto.site_indices(self.n)
        self.w = np.ascontiguousarray(u.T)
        self.wh = self.w.conj().T
        r, al = proto.r, proto.alpha
        self.keep = 1.0 - r
        self.ca = 1.0 - r * al
        self.cb = 1.0 - r * (1.0 - al)
        # r alpha u^H P_a u, with u -> u^T
        wa = self.w[self.ia]
        self.injected = r * al * np.outer(wa.conj(), wa)

    def mix(self, g):
        """Unconjugated part ``(1-r) G + r alpha P_a' G P_a' + r (1-alpha) P_b' G P_b'``."""
        a, b = self.ia, self.ib
        x = np.array(g, dtype=complex)
        x[a, :] *= self.ca
        x[:, a] *= self.ca
        x[b, :] *= self.cb
        x[:, b] *= self.cb
        x[a, a] = self.ca * g[a, a]
        x[b, b] = self.cb * g[b, b]
        x[a, b] = self.keep * g[a, b]
        x[b, a] = self.keep * g[b, a]
        return x

    def __call__(self, g):
        g = _square(g)
        if g.shape[0] != self.n:
            raise DimensionMismatch(f"G is {g.shape[0]}x{g.shape[0]}, propagator is {self.n}x{self.n}")
        return self.wh @ self.mix(g) @ self.w + self.injected


def drive_step(g, proto, u):
    """One driven step: free evolution after a random injection/extraction attempt.

    ``G -> u^H ((1-r) G + r (alpha P_a' G P_a' + (1-alpha) P_b' G P_b')) u + r alpha u^H P_a u``
    with ``u`` replaced by ``u^T`` as explained in the module docstring.
    """
    return DriveStep(proto, u)(g)


class EnergyBasisStep:
    """The drive step carried out in the eigenbasis of the propagator.

    In that basis the free evolution is an elementwise phase and each site
    projector is a rank-1 update, so a step costs O(N^2) instead of O(N^3).
    States are passed in and out in the energy basis; use
    :func:`~fermidrive.models.to_energy_basis` and
    :func:`~fermidrive.models.from_energy_basis` to convert.
    """

    def __init__(self, proto, model):
        n = model.site_count
        self.proto = proto
        self.model = model
        ia, ib = proto.site_indices(n)
        w = model.state_modes
        e = model.energies
        tau = proto.tau
        self.phase = np.exp(1j * tau * (e[:, None] - e[None, :]))
        self.fa = w[ia].conj()
        self.fb = w[ib].conj()
        r, al = proto.r, proto.alpha
        self.r, self.alpha = r, al
        self.injected = r * al * np.outer(self.fa, self.fa.conj()) * self.phase

    @staticmethod
    def _remove(x, f):
        """``P' X P'`` for the rank-1 projector ``P = |f><f|``."""
        xf = x @ f
        fx = f.conj() @ x
        c = f.conj() @ xf
        return x - np.outer(f, fx) - np.outer(xf - c * f, f.conj())

    def __call__(self, x):
        r, al = self.r, self.alpha
        y = (1.0 - r) * x
        if r * al:
            y += r * al * self._remove(x, self.fa)
        if r * (1.0 - al):
            y += r * (1.0 - al) * self._remove(x, self.fb)
        return y * self.phase + self.injected


# -- trajectories -------------------------------------------------------------

@dataclass
class Trajectory:
    """Observables recorded along an evolution.

    ``steps``/``time``/``nbar``/``densities`` are recorded every ``stride``
    steps; ``checkpoint_steps``/``occupations`` every ``checkpoint_stride``.
    ``observed`` holds, per observer, the list of values it returned at the
    recorded steps.
    """

    steps: np.ndarray
    time: np.ndarray
    nbar: np.ndarray
    densities: np.ndarray
    checkpoint_steps: np.ndarray
    occupations: np.ndarray
    energies: np.ndarray
    final: np.ndarray
    observed: list = field(default_factory=list)


def site_densities(g):
    return np.real(np.diagonal(g)).copy()


def evolve(g0, proto, model, steps, stride=1, checkpoint_stride=None,
           observers=(), kernel="site"):
    """Iterate the drive step and record observables.

    Parameters
    ----------
    g0 : ndarray
        Initial correlation matrix in the site basis.
    proto : DriveProtocol
    model : SpectralModel
    steps : int
        Number of drive steps, ``>= 0``.
    stride, checkpoint_stride : int
        Recording intervals for site densities and for mode occupations.
        Step 0 is always recorded; the final step is recorded when it falls on
        the stride.
    observers : sequence of callables ``f(step, G)``
        Called at every density record with the site-basis state.
    kernel : {"site", "energy"}
        ``"site"`` iterates :func:`drive_step`; ``"energy"`` uses
        :class:`EnergyBasisStep` (O(N^2) per step, identical up to rounding).
    """
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    checkpoint_stride = stride if checkpoint_stride is None else checkpoint_stride
    if checkpoint_stride < 1:
        raise ValueError("checkpoint_stride must be >= 1")
    g0 = _square(g0)
    n = model.site_count
    if g0.shape[0] != n:
        raise DimensionMismatch(f"G0 is {g0.shape[0]}x{g0.shape[0]}, model has {n} sites")

    if kernel == "site":
        step = DriveStep(proto, model.propagator(proto.tau))
        state = np.array(g0, dtype=complex)
        to_site = lambda s: s  # noqa: E731
        occupations = lambda s: mode_occupations(model, s)  # noqa: E731
    elif kernel == "energy":
        step = EnergyBasisStep(proto, model)
        w = model.state_modes
        state = w.conj().T @ g0 @ w
        to_site = lambda s: w @ s @ w.conj().T  # noqa: E731
        occupations = lambda s: np.real(np.diagonal(s)).copy()  # noqa: E731
    else:
        raise ValueError(f"unknown kernel {kernel!r}")

    rec_steps, dens, ckpt_steps, occ = [], [], [], []
    observed = [[] for _ in observers]

    def record(k, s):
        if k % stride == 0:
            g = to_site(s)
            rec_steps.append(k)
            dens.append(site_densities(g))
            for slot, obs in zip(observed, observers):
                slot.append(obs(k, g))
        if k % checkpoint_stride == 0:
            ckpt_steps.append(k)
            occ.append(occupations(s))

    record(0, state)
    for k in range(1, steps + 1):
        state = step(state)
        record(k, state)

    dens = np.array(dens).reshape(len(rec_steps), n)
    rec_steps = np.array(rec_steps, dtype=int)
    return Trajectory(
        steps=rec_steps,
        time=rec_steps * proto.tau,
        nbar=dens.mean(axis=1),
        densities=dens,
        checkpoint_steps=np.array(ckpt_steps, dtype=int),
        occupations=np.array(occ).reshape(len(ckpt_steps), n),
        energies=np.array(model.energies),
        final=to_site(state),
        observed=observed,
    )
