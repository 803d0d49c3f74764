"""Single-particle models, overlap tables and initial correlation matrices.

Site indices are 1-based on every public function; arrays are 0-based inside.

Convention: ``G[i, j] = <a_i^dag a_j>``. Under ``U = exp(-i tau sum h_nm a_n^dag a_m)``
the correlation matrix evolves with ``h^T``, so energy-basis quantities of ``G``
use the eigenvectors of ``h^T``, which are ``conj(modes)``.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .errors import AmbiguousFilling, ConfigError, InvalidSize, SiteOutOfRange
from .linalg import SpectralDecomposition, _frozen, eigendecompose, propagator


@dataclass(frozen=True)
class SpectralModel:
    h: np.ndarray
    spec: SpectralDecomposition

    @property
    def site_count(self):
        return self.h.shape[0]

    @property
    def energies(self):
        return self.spec.energies

    @property
    def modes(self):
        return self.spec.modes

    @property
    def state_modes(self):
        """Eigenvectors of ``h^T``: the basis in which mode occupations of ``G`` are read."""
        return self.spec.modes.conj()

    def propagator(self, tau):
        return propagator(self.spec, tau)

    def check_site(self, s, name="site"):
        return check_site(s, self.site_count, name)


@dataclass(frozen=True)
class OverlapTable:
    site: int
    values: np.ndarray


def check_site(s, n, name="site"):
    """Validate a 1-based site index and return it as 0-based."""
    if isinstance(s, bool) or int(s) != s:
        raise SiteOutOfRange(f"{name} must be an integer, got {s!r}")
    s = int(s)
    if not 1 <= s <= n:
        raise SiteOutOfRange(f"{name} = {s} outside 1..{n}")
    return s - 1


def model_from_matrix(h):
    h = _frozen(np.asarray(h, dtype=complex))
    return SpectralModel(h=h, spec=eigendecompose(h))


def build_hopping_chain(n):
    """Open nearest-neighbour chain, ``h[i, i+1] = h[i+1, i] = 1``."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidSize(f"chain length must be an integer >= 2, got {n!r}")
    n = int(n)
    h = np.zeros((n, n))
    i = np.arange(n - 1)
    h[i, i + 1] = h[i + 1, i] = 1.0
    return model_from_matrix(h)


def chain_energies(n):
    """Closed-form chain spectrum ``2 cos(pi k / (N+1))``, ascending."""
    k = np.arange(1, n + 1)
    return np.sort(2.0 * np.cos(np.pi * k / (n + 1)))


def chain_overlap(n, s, k):
    """Closed-form ``|<s|k>|^2`` for the chain, with k the sine-wave index 1..N."""
    return 2.0 / (n + 1) * np.sin(np.pi * s * k / (n + 1)) ** 2


def overlaps(model, s):
    """Weights ``p_{s,k} = |<s|k>|^2`` of every mode on site ``s`` (1-based)."""
    i = model.check_site(s)
    return OverlapTable(site=int(s), values=_frozen(np.abs(model.modes[i]) ** 2))


def mode_occupations(model, g):
    """Energy-basis diagonal of ``G``: occupation of each eigenmode, ascending energy."""
    w = model.state_modes
    return np.real(np.einsum("ik,ij,jk->k", w.conj(), g, w))


def to_energy_basis(model, g):
    w = model.state_modes
    return w.conj().T @ g @ w


def from_energy_basis(model, x):
    w = model.state_modes
    return w @ x @ w.conj().T


def initial_state(model, kind, wall_site=None):
    """Build an initial correlation matrix.

    Parameters
    ----------
    model : SpectralModel
    kind : {"vacuum", "filled", "ground_half", "domain_wall"}
    wall_site : int, optional
        For ``domain_wall``: sites ``<= wall_site`` are empty, the rest filled.
        Defaults to ``N // 2``.
    """
    n = model.site_count
    if kind == "vacuum":
        return np.zeros((n, n), dtype=complex)
    if kind == "filled":
        return np.eye(n, dtype=complex)
    if kind == "ground_half":
        e = model.energies
        if np.any(np.abs(e) < tol.ZERO_ENERGY):
            raise AmbiguousFilling("zero-energy mode present; half filling is ambiguous")
        w = model.state_modes[:, e < 0]
        return w @ w.conj().T
    if kind == "domain_wall":
        if wall_site is None:
            wall_site = n // 2
        w = check_site(wall_site, n, "wall_site") + 1
        occ = (np.arange(1, n + 1) > w).astype(complex)
        return np.diag(occ)
    raise ConfigError(f"unknown initial state kind {kind!r}")


def load_matrix_file(path):
    """Read a Hamiltonian from a plain-text file.

    The first line holds N, followed by N lines of N whitespace-separated
    complex entries written like ``1.0+0.5j``. Hermiticity is checked when the
    model is built.
    """
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise ConfigError(f"{path}: first line must be the dimension N") from None
    if n < 1 or len(lines) != n + 1:
        raise ConfigError(f"{path}: expected {n} matrix rows, found {len(lines) - 1}")
    rows = []
    for lineno, ln in enumerate(lines[1:], start=2):
        try:
            row = [complex(tok) for tok in ln.split()]
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from None
        if len(row) != n:
            raise ConfigError(f"{path}:{lineno}: expected {n} entries, got {len(row)}")
        rows.append(row)
    return np.array(rows, dtype=complex)


def save_matrix_file(path, h):
    h = np.asarray(h, dtype=complex)
    with open(path, "w") as fh:
        fh.write(f"{h.shape[0]}\n")
        for row in h:
            fh.write(" ".join(f"{z.real:.17g}{z.imag:+.17g}j" for z in row) + "\n")


def load_model(path):
    return model_from_matrix(load_matrix_file(path))


def random_correlation_matrix(n, rng):
    """Random valid ``G``: Haar-random eigenvectors, eigenvalues uniform in [0, 1]."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return (q * rng.uniform(0.0, 1.0, n)) @ q.conj().T
