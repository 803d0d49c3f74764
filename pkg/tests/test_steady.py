import numpy as np
import pytest

from conftest import random_hermitian, random_state
from fermidrive.channels import DriveProtocol, DriveStep
from fermidrive.errors import ConfigError, NoSolution, NotConverged
from fermidrive.models import build_hopping_chain, model_from_matrix, to_energy_basis
from fermidrive.phi import phi_distribution
from fermidrive.steady import (VectorizedChannel, spectral_radius, steady_direct,
                               steady_fixed_point, vectorize)


def test_vectorized_matches_step(rng):
    for n in (2, 3, 5):
        m = model_from_matrix(random_hermitian(rng, n)) if n > 2 else build_hopping_chain(2)
        proto = DriveProtocol(0.5, 0.5, 0.1, 1, n)
        chan = vectorize(proto, m)
        step = DriveStep(proto, m.propagator(proto.tau))
        for _ in range(20):
            g = random_state(rng, n)
            np.testing.assert_allclose(chan.apply(g), step(g), atol=1e-12)


def test_vectorized_inhomogeneous_term(rng):
    m = model_from_matrix(random_hermitian(rng, 4))
    proto = DriveProtocol(0.3, 0.8, 0.4, 2, 3)
    chan = vectorize(proto, m)
    w = m.propagator(proto.tau).T
    pa = np.zeros((4, 4))
    pa[1, 1] = 1
    np.testing.assert_allclose(chan.g.reshape(4, 4), 0.24 * w.conj().T @ pa @ w, atol=1e-14)


def test_r_zero_is_isometry(rng):
    m = model_from_matrix(random_hermitian(rng, 4))
    chan = vectorize(DriveProtocol(0.0, 0.5, 0.7, 1, 4), m)
    assert np.all(chan.g == 0)
    np.testing.assert_allclose(np.linalg.svd(chan.Lambda, compute_uv=False), 1.0, atol=1e-12)


@pytest.mark.parametrize("r", [0.01, 0.3, 1.0])
def test_spectral_radius_below_one(r):
    m = build_hopping_chain(6)
    for alpha in (0.0, 0.4, 1.0):
        assert spectral_radius(vectorize(DriveProtocol(r, alpha, 0.3, 1, 6), m)) < 1


def test_dense_limit():
    m = build_hopping_chain(65)
    with pytest.raises(ConfigError):
        vectorize(DriveProtocol(0.1, 0.5, 0.1, 1, 65), m)


@pytest.mark.parametrize("alpha,want", [(1.0, np.eye(4)), (0.0, np.zeros((4, 4)))])
def test_absorbing_steady_states(alpha, want):
    m = build_hopping_chain(4)
    res = steady_direct(vectorize(DriveProtocol(0.2, alpha, 0.3, 1, 4), m))
    assert res.unique and res.method == "direct"
    assert res.residual < 1e-10
    np.testing.assert_allclose(res.G, want, atol=1e-10)


def test_steady_state_is_valid(rng):
    for _ in range(10):
        n = int(rng.integers(2, 7))
        m = model_from_matrix(random_hermitian(rng, n))
        a, b = rng.choice(np.arange(1, n + 1), size=2, replace=False)
        proto = DriveProtocol(rng.uniform(0.05, 1), rng.uniform(), rng.uniform(0.1, 1), int(a), int(b))
        res = steady_direct(vectorize(proto, m))
        assert res.residual < 1e-10
        assert np.max(np.abs(res.G - res.G.conj().T)) == 0
        ev = np.linalg.eigvalsh(res.G)
        assert ev.min() > -1e-9 and ev.max() < 1 + 1e-9


def test_small_r_matches_phi():
    m = build_hopping_chain(8)
    proto = DriveProtocol(1e-3, 0.7, 0.5, 1, 7)
    res = steady_direct(vectorize(proto, m))
    occ = np.real(np.diagonal(to_energy_basis(m, res.G)))
    assert np.max(np.abs(occ - phi_distribution(m, proto))) < 0.05


def test_disconnected_site_gives_kernel():
    h = np.zeros((3, 3))
    h[0, 1] = h[1, 0] = 1.0
    h[2, 2] = 0.5
    m = model_from_matrix(h)
    res = steady_direct(vectorize(DriveProtocol(0.4, 0.6, 0.3, 1, 2), m))
    assert res.unique is False and res.method == "pseudo_inverse"
    assert res.kernel_dimension >= 1
    assert res.residual < 1e-10
    assert len(res.kernel_basis) == res.kernel_dimension
    # the decoupled site keeps whatever it had; minimum norm leaves it empty
    assert abs(res.G[2, 2]) < 1e-12
    chan = vectorize(DriveProtocol(0.4, 0.6, 0.3, 1, 2), m)
    for k in res.kernel_basis:
        np.testing.assert_allclose(chan.apply(k) - chan.g.reshape(3, 3), k, atol=1e-10)


def test_no_solution():
    chan = VectorizedChannel(Lambda=np.eye(4, dtype=complex), g=np.array([1, 0, 0, 0], dtype=complex))
    with pytest.raises(NoSolution):
        steady_direct(chan)


def test_fixed_point_agrees_with_direct():
    m = build_hopping_chain(8)
    proto = DriveProtocol(0.1, 0.7, 0.5, 1, 5)
    direct = steady_direct(vectorize(proto, m))
    for kernel in ("site", "energy"):
        fp = steady_fixed_point(np.zeros((8, 8)), proto, m, tol=1e-12, kernel=kernel)
        assert fp.unique is None and fp.method == "fixed_point"
        assert np.max(np.abs(fp.G - direct.G)) < 1e-8


def test_fixed_point_from_solution_stops_at_once():
    m = build_hopping_chain(5)
    proto = DriveProtocol(0.5, 0.3, 0.4, 1, 5)
    direct = steady_direct(vectorize(proto, m))
    fp = steady_fixed_point(direct.G, proto, m, tol=1e-10)
    assert fp.iterations <= 1


def test_fixed_point_not_converged_at_r_zero(rng):
    m = model_from_matrix(random_hermitian(rng, 4))
    proto = DriveProtocol(0.0, 0.5, 0.3, 1, 4)
    with pytest.raises(NotConverged) as info:
        steady_fixed_point(random_state(rng, 4), proto, m, tol=1e-12, max_iter=200)
    assert info.value.max_iter == 200 and info.value.last_delta > 1e-12


def test_fixed_point_bad_arguments():
    m = build_hopping_chain(3)
    proto = DriveProtocol(0.5, 0.3, 0.4, 1, 3)
    with pytest.raises(ValueError):
        steady_fixed_point(np.zeros((3, 3)), proto, m, tol=0)
    with pytest.raises(ValueError):
        steady_fixed_point(np.zeros((3, 3)), proto, m, kernel="x")
