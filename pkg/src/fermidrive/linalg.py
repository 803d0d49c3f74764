"""Dense complex linear algebra: Hermitian eigendecomposition, propagators and
the rank-2 resolvent identity."""

from dataclasses import dataclass, field

import numpy as np

from . import tolerances as tol
from .errors import DimensionMismatch, NonHermitianInput, SingularDenominator


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


def as_square(m, name="matrix"):
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty square matrix, got shape {m.shape}")
    return m


def hermiticity_error(m):
    """Largest entrywise deviation max|M_ij - conj(M_ji)|."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def check_hermitian(m, rel=tol.HERMITIAN_REL, name="matrix"):
    m = as_square(m, name)
    scale = 1.0 + float(np.max(np.abs(m)))
    err = hermiticity_error(m)
    if err > rel * scale:
        raise NonHermitianInput(f"{name} is not Hermitian (max |M - M^H| = {err:.3e})")
    return m


def hermitize(m):
    """Project onto the Hermitian part, (M + M^H) / 2."""
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a Hermitian matrix.

    Attributes
    ----------
    energies : ndarray, shape (N,)
        Eigenvalues in ascending order.
    modes : ndarray, shape (N, N)
        Unitary matrix whose column ``k`` is the eigenvector for ``energies[k]``.
    degenerate_pairs : tuple of (int, int)
        0-based index pairs ``(k, k+1)`` whose energies coincide to within
        ``DEGENERACY_REL * max|E|``.
    """

    energies: np.ndarray
    modes: np.ndarray
    degenerate_pairs: tuple = field(default=())

    @property
    def dim(self):
        return self.energies.shape[0]

    @property
    def is_degenerate(self):
        return bool(self.degenerate_pairs)

    def reconstruct(self):
        return (self.modes * self.energies) @ self.modes.conj().T


def eigendecompose(h):
    """Eigendecompose a Hermitian matrix.

    Raises :class:`NonHermitianInput` when ``h`` fails the Hermiticity check.
    Near-degenerate neighbours are reported, not rejected; consumers that need
    a non-degenerate spectrum check ``is_degenerate`` themselves.
    """
    h = check_hermitian(h, name="h")
    energies, modes = np.linalg.eigh(hermitize(h.astype(complex)))
    threshold = tol.DEGENERACY_REL * float(np.max(np.abs(energies)))
    # <= so that an all-zero spectrum is flagged as fully degenerate
    close = np.flatnonzero(np.diff(energies) <= threshold)
    pairs = tuple((int(k), int(k) + 1) for k in close)
    return SpectralDecomposition(_frozen(energies), _frozen(modes), pairs)


def propagator(spec, tau):
    """Single-particle propagator ``exp(-i tau h)`` built from the eigenpairs."""
    tau = float(tau)
    if not np.isfinite(tau):
        raise ValueError("tau must be finite")
    v = spec.modes
    return (v * np.exp(-1j * tau * spec.energies)) @ v.conj().T


def unitarity_error(u):
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


def rank2_resolvent(v, u, a, b):
    """Apply ``(1 + a|v><v| + b|u><u|)^{-1}`` to the unit vector ``v``.

    Closed form for normalized ``u`` and ``v``::

        ((1 + b)|v> - b <u,v> |u>) / (1 + a + b + a b (1 - |<v,u>|^2))

    Raises :class:`SingularDenominator` when the scalar denominator vanishes.
    """
    v = np.asarray(v, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if v.shape != u.shape or v.ndim != 1:
        raise DimensionMismatch("u and v must be vectors of equal length")
    for name, w in (("v", v), ("u", u)):
        if abs(np.linalg.norm(w) - 1.0) > 1e-10:
            raise ValueError(f"{name} must be normalized")
    uv = np.vdot(u, v)
    denom = 1.0 + a + b + a * b * (1.0 - abs(uv) ** 2)
    if abs(denom) < tol.SINGULAR_DENOMINATOR:
        raise SingularDenominator(f"rank-2 resolvent denominator {denom!r} vanishes")
    return ((1.0 + b) * v - b * uv * u) / denom
