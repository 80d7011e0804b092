import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from adhm.darboux import (DarbouxPoint, canonical_bracket_matrix, coordinate_brackets, decompose,
                          delta, fibre_flow_coefficients, flow, h0, h0_cross_coefficients, h_tau,
                          matrix_poly, pi_forward, pi_inverse, poisson_flat, psi, psi_brackets)
from adhm.errors import DegenerateInputError, OffShellError
from adhm.hat import HatPair, from_hats, snap_to_s, to_hats
from adhm.rep import points_equal
from adhm.sampling import cgauss, random_gauge, sample_on_shell
from adhm.slice_forms import g_pair
from adhm.suites import fibre_gap

K1 = HatPair(1, [[0, 1], [1, 0]], np.diag([1, 0]), 0)
TAUS = [0.0, 1.0, 1j]


def hat_sample(k, tau, seed):
    return to_hats(sample_on_shell(k, tau, seed=seed, scramble=True))


def test_decompose_k1():
    dec = decompose(K1)
    assert np.allclose(dec.B1, np.diag([1, 0]))
    assert np.allclose(dec.B2, 0) and np.allclose(dec.S, 0)


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_tau_zero_has_no_s(k):
    dec = decompose(hat_sample(k, 0.0, k))
    assert np.abs(dec.S).max() <= 1e-9 * (1 + np.abs(dec.B2).max())


def test_s_independent_of_fibre_point():
    h = hat_sample(3, 1.0, 7)
    dec = decompose(h)
    f = dec.frame
    moved = f.replace(Bhat=f.Bhat + matrix_poly([0.3, -0.2, 0.1], f.Ahat))
    dec2 = decompose(moved)
    assert np.allclose(dec.S, dec2.S, atol=1e-9)


def test_decompose_off_shell():
    h = hat_sample(2, 1.0, 0)
    with pytest.raises(OffShellError):
        decompose(h.replace(Bhat=h.Bhat + np.diag([1, 0, 0])))


def test_pi_forward_k1():
    p = pi_forward(K1)
    assert np.allclose(p.lam, [0]) and np.allclose(p.mu, [1])
    assert np.allclose(p.lamhat, [-1, 1]) and np.allclose(p.muhat, [0, 0])


def test_pi_equivariance():
    h = hat_sample(3, 1.0, 3)
    p = pi_forward(h)
    z1, z2 = 0.4 - 0.1j, -0.3 + 0.2j
    eye = np.eye(4)
    q = pi_forward(h.replace(Ahat=h.Ahat + z1 * eye, Bhat=h.Bhat + z2 * eye), check=False)
    # the corner is no longer zero but the coordinates still make sense
    shifted = DarbouxPoint(p.lam + z1, p.mu, p.lamhat + z1, p.muhat + z2, p.tau)
    assert shifted.close_to(q)


@given(st.integers(0, 10 ** 6), st.sampled_from(TAUS))
@settings(max_examples=15)
def test_pi_gauge_invariant(seed, tau):
    h = hat_sample(3, tau, seed)
    g = random_gauge(3, np.random.default_rng(seed))
    assert pi_forward(h).close_to(pi_forward(h.conjugate(g)))


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("tau", TAUS)
def test_round_trips(k, tau):
    for seed in range(3):
        d = sample_on_shell(k, tau, seed=[seed, k], scramble=True)
        p = pi_forward(to_hats(d))
        back = pi_inverse(p)
        assert pi_forward(back).close_to(p, 1e-8)
        assert back.is_on_shell(1e-9)
        assert points_equal(d, from_hats(snap_to_s(back)), 1e-8)


def test_pi_inverse_k1():
    h = pi_inverse(pi_forward(K1))
    assert pi_forward(h).close_to(pi_forward(K1))
    assert np.allclose(h.Ahat, K1.Ahat) and np.allclose(h.Bhat, K1.Bhat, atol=1e-12)


def test_pi_inverse_tau_zero():
    rng = np.random.default_rng(0)
    lam, lamhat = np.array([0.0, 1.0]), np.array([-0.5, 0.5, 2.0])
    p = DarbouxPoint(lam, cgauss(rng, 2), lamhat, cgauss(rng, 3), 0)
    h = pi_inverse(p)
    g, ginv = g_pair(lam, lamhat)
    B2 = h.Bhat - np.diag(np.append(p.mu, 0))
    assert np.allclose(B2, ginv @ np.diag(p.muhat) @ g, atol=1e-12)


def test_pi_inverse_collision():
    with pytest.raises(DegenerateInputError):
        pi_inverse(DarbouxPoint([0, 0], [1, 1], [1, 2, 3], [0, 0, 0]))


def test_delta():
    assert abs(delta(K1) + 4) < 1e-12
    rep = HatPair(1, [[1, 0], [0, 1]], np.zeros((2, 2)))
    assert delta(rep) == 0
    h = hat_sample(3, 1.0, 2)
    g = random_gauge(3, np.random.default_rng(1))
    assert abs(delta(h) - delta(h.conjugate(g))) <= 1e-9 * abs(delta(h))


def test_psi():
    assert np.allclose(psi(K1), [0, 0, 2])
    h = hat_sample(3, 1.0, 4)
    ps = psi(h)
    assert ps[0] == ps[3]


def test_flows():
    h = hat_sample(3, 1.0, 5)
    same = flow(h, (), ())
    assert np.array_equal(same.Bhat, h.Bhat)
    p, q = [0.2, -0.1j, 0.3], [0.1, 0.2, -0.3, 0.05]
    ab = flow(flow(h, p, ()), (), q)
    ba = flow(flow(h, (), q), p, ())
    assert np.abs(ab.Bhat - ba.Bhat).max() <= 1e-10 * h.scale()
    assert ab.in_s
    ps0, ps1 = psi(h), psi(ab)
    assert np.abs(ps1 - ps0).max() <= 1e-9 * (1 + np.abs(ps0).max())
    d = from_hats(ab)
    assert d.residual_norm() <= 1e-10 * d.scale()


def test_h0_k1_coefficients():
    K = h0_cross_coefficients([0], [1, -1])
    assert np.allclose(K, [[0.5, 0.5]])
    p = DarbouxPoint([0], [2], [1, -1], [3, 5])
    assert np.isclose(h0(p), 4 + 9 + 25 + 6 + 10)
    assert h0(DarbouxPoint([0], [0], [1, -1], [0, 0])) == 0


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_h0_is_tr_bhat_squared(k):
    for seed in range(3):
        h = hat_sample(k, 0.0, [seed, 9])
        ht = h_tau(h)
        assert abs(h0(pi_forward(h)) - ht) <= 1e-8 * (1 + abs(ht))


def test_flat_bracket_normalization():
    for k in (1, 3):
        d = sample_on_shell(k, 1.0, seed=k)
        val = poisson_flat(lambda q: np.trace(q.A), lambda q: np.trace(q.B), d)
        assert abs(val - k) < 1e-9


@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_psi_commute(k):
    d = sample_on_shell(k, 1.0, seed=[k, 11], scramble=True)
    pb = psi_brackets(d)
    assert np.abs(pb).max() <= 1e-7 * d.scale()


@pytest.mark.parametrize("k", [1, 2, 3, 4])
@pytest.mark.parametrize("tau", TAUS)
def test_canonical_brackets(k, tau):
    h = hat_sample(k, tau, [k, 13])
    J = coordinate_brackets(h)
    assert np.abs(J - canonical_bracket_matrix(k)).max() <= 1e-6


@pytest.mark.parametrize("k", [1, 2, 3])
def test_fibre_transitivity(k):
    rng = np.random.default_rng(k)
    h = hat_sample(k, 1.0, [k, 17])
    assert fibre_gap(h, rng, 1e-7) == 0


def test_fibre_flow_requires_common_fibre():
    p = pi_forward(K1)
    q = DarbouxPoint([0.5], [1], [1, -1], [0, 0])
    with pytest.raises(ValueError):
        fibre_flow_coefficients(p, q)
