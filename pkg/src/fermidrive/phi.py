"""Weak-driving steady-state energy distribution.

For small attempt rate ``r`` the steady state is diagonal in the energy basis
to leading order, with occupations

    Phi_k = (A p_b + B p_a) / ((1 - alpha) p_b + alpha p_a)

where ``p_s = |<s|k>|^2`` and the coefficients follow from

    mu_l  = 2 (alpha p_{a,l} + (1 - alpha) p_{b,l})
    Q_st  = sum_l p_{s,l} p_{t,l} / mu_l
    mu    = 2 (1 - alpha Q_aa - (1 - alpha) Q_bb + alpha (1 - alpha) (Q_aa Q_bb - Q_ab^2))
    A     = alpha (1 - alpha) Q_ab / mu
    B     = alpha (1 - (1 - alpha) Q_bb) / mu

The cleared-denominator form stays finite when ``p_b`` vanishes for a mode
(then ``Phi_k = B / alpha``).
"""

from dataclasses import dataclass

import numpy as np

from . import tolerances as tol
from .errors import DegenerateSpectrum, VanishingDenominator, VanishingMu


@dataclass(frozen=True)
class PhiCoefficients:
    mu_modes: np.ndarray
    Qaa: float
    Qbb: float
    Qab: float
    A: float
    B: float
    mu: float


def _site_weights(model, proto):
    ia, ib = proto.site_indices(model.site_count)
    v = model.modes
    return np.abs(v[ia]) ** 2, np.abs(v[ib]) ** 2


def _require_nondegenerate(model):
    if model.spec.is_degenerate:
        raise DegenerateSpectrum(
            f"degenerate energy pairs {list(model.spec.degenerate_pairs)}; "
            "mode occupations are not well defined"
        )


def phi_coefficients(model, proto):
    _require_nondegenerate(model)
    pa, pb = _site_weights(model, proto)
    al = proto.alpha
    mu_l = 2.0 * (al * pa + (1.0 - al) * pb)
    if np.any(mu_l < tol.VANISHING_MU):
        bad = np.flatnonzero(mu_l < tol.VANISHING_MU)
        raise VanishingMu(f"modes {list(bad + 1)} have no weight on the operated sites")
    qaa = float(np.sum(pa * pa / mu_l))
    qbb = float(np.sum(pb * pb / mu_l))
    qab = float(np.sum(pa * pb / mu_l))
    mu = 2.0 * (1.0 - al * qaa - (1.0 - al) * qbb + al * (1.0 - al) * (qaa * qbb - qab ** 2))
    return PhiCoefficients(
        mu_modes=mu_l,
        Qaa=qaa,
        Qbb=qbb,
        Qab=qab,
        A=al * (1.0 - al) * qab / mu,
        B=al * (1.0 - (1.0 - al) * qbb) / mu,
        mu=mu,
    )


def phi_distribution(model, proto, coeffs=None):
    """Leading-order steady-state occupation of every energy mode (ascending energy)."""
    c = phi_coefficients(model, proto) if coeffs is None else coeffs
    pa, pb = _site_weights(model, proto)
    al = proto.alpha
    return (c.A * pb + c.B * pa) / ((1.0 - al) * pb + al * pa)


def first_guess_phi(model, proto):
    """Occupations neglecting the inter-mode coupling term of the diagonal equation."""
    pa, pb = _site_weights(model, proto)
    al = proto.alpha
    return al * pa / (al * pa + (1.0 - al) * pb)


def diagonal_residual(phi, model, proto):
    """Max-abs residual of the energy-diagonal stationarity equation

        0 = -Phi_n + alpha P_a,nn + alpha (P_a' Phi P_a')_nn + (1-alpha) (P_b' Phi P_b')_nn

    with the site projectors written in the energy basis, ``P_s,nl = <n|s><s|l>``.
    """
    n = model.site_count
    ia, ib = proto.site_indices(n)
    al = proto.alpha
    d = np.diag(np.asarray(phi, dtype=float))
    eye = np.eye(n)

    def projector(i):
        f = model.modes[i].conj()  # f_n = <n|s>
        return np.outer(f, f.conj())

    pa, pb = projector(ia), projector(ib)
    rhs = (
        -np.diagonal(d)
        + al * np.real(np.diagonal(pa))
        + al * np.real(np.diagonal((eye - pa) @ d @ (eye - pa)))
        + (1.0 - al) * np.real(np.diagonal((eye - pb) @ d @ (eye - pb)))
    )
    return float(np.max(np.abs(rhs)))


def lindblad_phi(model, params):
    """Small-rate Lindblad occupations ``g_a p_a / (g_a p_a + g_b p_b)`` per mode."""
    ia, ib = params.site_indices(model.site_count)
    v = model.modes
    wa = params.gamma_a * np.abs(v[ia]) ** 2
    wb = params.gamma_b * np.abs(v[ib]) ** 2
    den = wa + wb
    if np.any(den <= tol.SINGULAR_DENOMINATOR):
        bad = np.flatnonzero(den <= tol.SINGULAR_DENOMINATOR)
        raise VanishingDenominator(f"modes {list(bad + 1)} are not reached by either rate")
    return wa / den
