import numpy as np
import pytest
from hypothesis import given, strategies as st

from adhm.darboux import poisson_flat
from adhm.errors import DegenerateInputError, EndpointError
from adhm.ncalg import Necklace, PathPoly, necklace_bracket, path_mul, to_necklace
from adhm.rep import (AdhmData, QuiverRep, adhm_from_rep, evaluate, gauge_act, moment_nu,
                      moment_residual, points_equal, rep_from_adhm, trace_R)
from adhm.sampling import cgauss, random_closed_path, random_necklace, sample_on_shell

seeds = st.integers(0, 2 ** 32 - 1)


def rand_rep(seed, k=3, l=1):
    return QuiverRep.random(k, l, np.random.default_rng(seed))


def test_evaluate_units():
    r = rand_rep(0, 2, 1)
    assert np.array_equal(evaluate(PathPoly.unit(1), r), np.diag([1, 1, 0]))
    assert np.array_equal(evaluate(PathPoly.unit(2), r), np.diag([0, 0, 1]))


def test_evaluate_nilpotent_square():
    r = QuiverRep(2, 1, [[0, 1], [0, 0]], np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((2, 1)),
                  np.zeros((1, 2)), np.zeros((1, 2)))
    assert np.all(evaluate(PathPoly.word("a.a"), r) == 0)


def test_evaluate_xy():
    r = rand_rep(1)
    m = evaluate(PathPoly.word("x.y"), r)
    assert np.allclose(m[:3, :3], r.X1 @ r.Y1, rtol=0, atol=1e-14)
    assert np.all(m[3:, :] == 0) and np.all(m[:, 3:] == 0)


@given(seeds)
def test_evaluate_is_multiplicative(seed):
    rng = np.random.default_rng(seed)
    r = rand_rep(seed)
    p = PathPoly({random_closed_path(rng, int(rng.integers(1, 4)), start=1): 1})
    q = PathPoly({random_closed_path(rng, int(rng.integers(1, 3)), start=1): 2})
    lhs = evaluate(path_mul(p, q), r)
    rhs = evaluate(p, r) @ evaluate(q, r)
    assert np.linalg.norm(lhs - rhs) <= 1e-12 * (1 + np.linalg.norm(rhs))


def test_trace_examples():
    r = rand_rep(2)
    assert np.isclose(trace_R(Necklace.word("a"), r)[0], np.trace(r.A))
    assert trace_R(Necklace.word("a"), r)[1] == 0
    assert trace_R(to_necklace(PathPoly.unit(2)), r) == (0, 1)
    t1, t2 = trace_R(Necklace.word("a.a+"), r), trace_R(to_necklace(PathPoly.word("a+.a")), r)
    assert np.allclose(t1, t2)


@given(seeds)
def test_trace_kills_commutators(seed):
    rng = np.random.default_rng(seed)
    r = rand_rep(seed)
    p = PathPoly({random_closed_path(rng, 3, start=1): 1})
    q = PathPoly({random_closed_path(rng, 2, start=1): 1})
    m = evaluate(path_mul(p, q) - path_mul(q, p), r)
    assert abs(np.trace(m[:3, :3])) <= 1e-12 * (1 + np.abs(m).max())


def test_moment_nu_examples():
    zero = QuiverRep(1, 1, *[np.zeros((1, 1))] * 6)
    a, b = moment_nu(zero)
    assert a[0, 0] == 0 and b[0, 0] == 0
    r = QuiverRep(1, 1, [[2]], [[3]], [[1]], [[0]], [[0]], [[1]])
    a, b = moment_nu(r)
    assert a[0, 0] == 1 and b[0, 0] == -1
    r = rand_rep(3, 3, 2)
    a, b = moment_nu(r)
    assert abs(np.trace(a) + np.trace(b)) < 1e-12


def test_sign_map():
    r = rand_rep(4)
    d = adhm_from_rep(r)
    assert np.array_equal(d.i1, -r.X1[:, 0])
    back = rep_from_adhm(d)
    for n in ("A", "B", "X1", "X2", "Y1", "Y2"):
        assert np.array_equal(getattr(back, n), getattr(r, n))
    nu, _ = moment_nu(r)
    d = d.replace(tau=0.7)
    assert np.allclose(nu, moment_residual(d) + 0.7 * np.eye(3), atol=1e-12)
    with pytest.raises(EndpointError):
        adhm_from_rep(rand_rep(0, 2, 2))


def test_moment_residual_examples():
    d = AdhmData(1, [[0]], [[0]], [[1, 1]], [[-1], [-1]], 2)
    assert np.all(moment_residual(d) == 0)
    d = AdhmData(2, np.diag([1, 2]), np.diag([3, 4]), np.zeros((2, 2)), np.zeros((2, 2)), 0)
    assert np.all(moment_residual(d) == 0)
    rng = np.random.default_rng(0)
    d = AdhmData(3, cgauss(rng, 3, 3), cgauss(rng, 3, 3), cgauss(rng, 3, 2), cgauss(rng, 2, 3), 0.5)
    assert np.isclose(np.trace(moment_residual(d)), -np.trace(d.i @ d.j) - 3 * 0.5)


def test_gauge_action():
    d = sample_on_shell(4, 1.0, seed=5)
    assert points_equal(gauge_act(np.eye(4), d), d)
    q, _ = np.linalg.qr(cgauss(np.random.default_rng(1), 4, 4))
    e = gauge_act(q, d)
    assert abs(e.residual_norm() - d.residual_norm()) <= 1e-12
    g = np.eye(4) + 0.5 * cgauss(np.random.default_rng(2), 4, 4)
    e = gauge_act(g, d)
    for m in range(1, 5):
        a, b = np.trace(np.linalg.matrix_power(d.A, m)), np.trace(np.linalg.matrix_power(e.A, m))
        assert abs(a - b) <= 1e-9 * abs(a)
    with pytest.raises(DegenerateInputError):
        gauge_act(np.zeros((4, 4)), d)


def test_points_equal():
    d = sample_on_shell(2, 1.0, seed=6)
    g = np.eye(2) + 0.3 * cgauss(np.random.default_rng(3), 2, 2)
    assert points_equal(d, gauge_act(g, d))
    assert not points_equal(d, d.replace(A=d.A + np.eye(2)))
    assert not points_equal(d, sample_on_shell(2, 1.0, seed=7))


@pytest.mark.parametrize("seed", range(10))
def test_trace_is_lie_homomorphism(seed):
    """Traced necklace brackets agree with the flat bracket of traced functions."""
    rng = np.random.default_rng([seed, 99])
    k = int(rng.integers(1, 5))
    f, g = random_necklace(rng, 4), random_necklace(rng, 4)
    d = adhm_from_rep(QuiverRep.random(k, 1, rng))

    def traced(h):
        return lambda q: sum(trace_R(h, rep_from_adhm(q)))

    lhs = sum(trace_R(necklace_bracket(f, g), rep_from_adhm(d)))
    rhs = poisson_flat(traced(f), traced(g), d)
    assert abs(lhs - rhs) <= 1e-8 * (1 + abs(lhs))
