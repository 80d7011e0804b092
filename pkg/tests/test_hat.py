import numpy as np
import pytest
from hypothesis import given, strategies as st

from adhm.errors import DegenerateInputError, OffShellError
from adhm.hat import (HatPair, adhm_form, brute_commutator_blocks, embed, embed_pushforward,
                      from_hats, hat_commutator_blocks, hat_form, is_costable, is_regular,
                      is_stable, moment_tangent_basis, snap_to_s, to_hats, unpack_tangent)
from adhm.rep import AdhmData, gauge_act, points_equal
from adhm.sampling import cgauss, random_gauge, sample_on_shell

seeds = st.integers(0, 2 ** 32 - 1)


def test_to_hats_example():
    d = AdhmData(1, [[0]], [[0]], [[1, 0]], [[0], [1]])
    h = to_hats(d)
    assert np.array_equal(h.Ahat, [[0, 1], [1, 0]])
    assert np.array_equal(h.Bhat, np.zeros((2, 2)))
    assert h.in_s


@given(seeds, st.integers(1, 4))
def test_hats_round_trip_exact(seed, k):
    d = sample_on_shell(k, 1.0, seed=seed, scramble=True)
    h = to_hats(d)
    e = from_hats(h)
    for n in "ABij":
        assert np.array_equal(getattr(e, n), getattr(d, n))
    assert np.trace(h.Ahat) == np.trace(d.A)
    h2 = to_hats(e)
    assert np.array_equal(h2.Ahat, h.Ahat) and np.array_equal(h2.Bhat, h.Bhat)


def test_from_hats_rejects_corner():
    h = HatPair(1, [[0, 1], [1, 1]], np.zeros((2, 2)))
    with pytest.raises(DegenerateInputError):
        from_hats(h)
    with pytest.raises(DegenerateInputError):
        snap_to_s(h)


def test_gauge_equivariance_exact():
    d = sample_on_shell(3, 1.0, seed=1)
    g = np.eye(3) + 0.5 * np.diag([1, 2, 3])  # exactly invertible diagonal keeps arithmetic exact
    h1 = to_hats(gauge_act(g, d))
    h2 = to_hats(d).conjugate(g)
    assert np.allclose(h1.Ahat, h2.Ahat, atol=1e-15, rtol=0)
    assert np.allclose(h1.Bhat, h2.Bhat, atol=1e-15, rtol=0)


def test_symplectic_forms_agree():
    rng = np.random.default_rng(0)
    d = sample_on_shell(3, 1.0, seed=2)
    for _ in range(5):
        t1 = (cgauss(rng, 3, 3), cgauss(rng, 3, 3), cgauss(rng, 3, 2), cgauss(rng, 2, 3))
        t2 = (cgauss(rng, 3, 3), cgauss(rng, 3, 3), cgauss(rng, 3, 2), cgauss(rng, 2, 3))
        h1 = to_hats(AdhmData(3, *t1))
        h2 = to_hats(AdhmData(3, *t2))
        lhs = hat_form((h1.Ahat, h1.Bhat), (h2.Ahat, h2.Bhat))
        assert abs(lhs - adhm_form(t1, t2)) <= 1e-12 * (1 + abs(lhs))


def test_commutator_blocks():
    zero = AdhmData(2, np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((2, 2)))
    for blk in hat_commutator_blocks(zero):
        assert np.all(np.asarray(blk) == 0)
    d = sample_on_shell(3, 1.0, seed=3, scramble=True)
    for a, b in zip(hat_commutator_blocks(d), brute_commutator_blocks(to_hats(d))):
        assert np.max(np.abs(np.asarray(a) - np.asarray(b))) <= 1e-12 * d.scale() ** 2
    corner = hat_commutator_blocks(d)[3]
    assert abs(corner + 3 * d.tau) <= 1e-10 * d.scale()


@pytest.mark.parametrize("seed", range(5))
def test_embed_on_shell(seed):
    d = sample_on_shell(2, 1.0, seed=seed, scramble=True)
    e = embed(d)
    assert e.k == 3
    assert e.residual_norm() <= 1e-10 * e.scale()
    ji = e.j @ e.i
    assert ji[1, 1] == -3 * d.tau
    assert ji[1, 0] == 1 and ji[0, 0] == 0
    assert e.A[-1, -1] == 0 and e.B[-1, -1] == 0


def test_embed_rejects_off_shell():
    d = sample_on_shell(2, 1.0, seed=0)
    with pytest.raises(OffShellError):
        embed(d.replace(B=d.B + 1))


def test_embed_gauge_equivariant():
    d = sample_on_shell(2, 1.0, seed=4)
    g = random_gauge(2, np.random.default_rng(0))
    assert points_equal(embed(gauge_act(g, d)), embed(d))


def test_embed_symplectic():
    d = sample_on_shell(2, 1.0, seed=5, scramble=True)
    basis = moment_tangent_basis(d)
    rng = np.random.default_rng(1)
    for _ in range(4):
        t1, t2 = (unpack_tangent(basis @ cgauss(rng, basis.shape[1]), 2) for _ in range(2))
        before = adhm_form(t1, t2)
        after = adhm_form(embed_pushforward(d, t1), embed_pushforward(d, t2))
        assert abs(after - before) <= 1e-8 * (1 + abs(before))


def test_stability_examples():
    unstable = AdhmData(1, [[0]], [[0]], [[0, 0]], [[1], [0]])
    assert not is_stable(unstable)
    stable = AdhmData(1, [[0]], [[0]], [[1, 0]], [[0], [0]])
    assert is_stable(stable) and not is_costable(stable)
    # A, B commuting diagonal with i hitting one eigenline only
    d = AdhmData(2, np.diag([0, 1]), np.diag([2, 3]), [[1, 0], [0, 0]], np.zeros((2, 2)))
    assert not is_stable(d)


@given(seeds)
def test_stability_gauge_invariant(seed):
    d = sample_on_shell(3, 0.0, seed=seed)
    g = random_gauge(3, np.random.default_rng(seed))
    e = gauge_act(g, d)
    assert (is_stable(d), is_costable(d), is_regular(d)) == (is_stable(e), is_costable(e), is_regular(e))


def test_embed_preserves_regularity_at_tau_zero():
    for seed in range(10):
        d = sample_on_shell(2, 0.0, seed=seed, scramble=True)
        e = embed(d)
        assert (is_stable(d), is_costable(d), is_regular(d)) == (is_stable(e), is_costable(e), is_regular(e))
