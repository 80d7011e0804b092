"""Acceptance criteria 1-7, each at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (outside pytest's
capture) with the worst measured values, then asserts.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from adhm import autgrp as ag
from adhm.cli import main
from adhm.darboux import (canonical_bracket_matrix, coordinate_brackets, h0, h_tau, pi_forward,
                          pi_inverse, poisson_flat, psi, psi_brackets)
from adhm.hat import (adhm_form, brute_commutator_blocks, embed, embed_pushforward, from_hats,
                      hat_commutator_blocks, is_costable, is_regular, is_stable,
                      moment_tangent_basis, snap_to_s, to_hats, unpack_tangent)
from adhm.ncalg import (Necklace, PathPoly, e_generators, necklace_bracket, symplectic_elements,
                        to_necklace)
from adhm.rep import QuiverRep, adhm_from_rep, points_equal, rep_from_adhm, trace_R
from adhm.sampling import (cgauss, random_gauge, random_generator, random_hat_matrix,
                           random_necklace, random_potential, sample_on_shell)
from adhm.slice_forms import (canonical_ss, charpolys_from_slice, g_pair, in_g1,
                              is_regular_semisimple, slice_from_charpolys, to_slice)
from adhm.suites import _ExactSlice, normalization_ok, perturbation_gap


@pytest.fixture
def report(capsys):
    def emit(n, ok, **measured):
        vals = "  ".join(f"{k}={v:.3e}" if isinstance(v, float) else f"{k}={v}"
                         for k, v in measured.items())
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}  {vals}")
        assert ok, f"criterion {n} failed: {vals}"
    return emit


def rel(x, scale=1.0):
    return float(np.max(np.abs(x))) / scale if np.size(x) else 0.0


def test_criterion_1_necklace_exactness(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    anti = jac = 0
    for _ in range(100):
        f, g = random_necklace(rng, 4), random_necklace(rng, 4)
        anti += not (necklace_bracket(f, g) + necklace_bracket(g, f)).is_zero()
    for _ in range(25):
        f, g, h = (random_necklace(rng, 4) for _ in range(3))
        jac += not (necklace_bracket(f, necklace_bracket(g, h)) + necklace_bracket(g, necklace_bracket(h, f))
                    + necklace_bracket(h, necklace_bracket(f, g))).is_zero()
    E = [[to_necklace(e) for e in row] for row in e_generators()]
    erel = 0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    want = Necklace()
                    if j == k:
                        want = want + E[i][l]
                    if i == l:
                        want = want - E[k][j]
                    erel += necklace_bracket(E[i][j], E[k][l]) != want
    c, c1, c2 = symplectic_elements()
    csplit = int(c != c1 + c2)
    tame = 0
    for _ in range(30):
        f = random_potential(rng, 3)
        tame += not ag.check_preserves_c(ag.lambda_images(f))
        tame += not ag.check_preserves_c(ag.opp_images(f))
    elapsed = time.perf_counter() - t0
    fails = anti + jac + erel + csplit + tame
    report(1, fails == 0 and elapsed < 10, antisymmetry=anti, jacobi=jac, e_relations=erel,
           c_split=csplit, tame=tame, seconds=elapsed)


def test_criterion_2_hat_embedding(report):
    rng = np.random.default_rng(2)
    block = embedded = pairing = 0.0
    flips = n = 0
    seed = 0
    while n < 100:
        d = sample_on_shell(2, 0.0, seed=[2, seed], scramble=True)
        seed += 1
        if not is_regular(d):
            continue
        n += 1
        blocks, brute = hat_commutator_blocks(d), brute_commutator_blocks(to_hats(d))
        block = max(block, max(rel(np.asarray(a) - np.asarray(b)) for a, b in zip(blocks, brute))
                    / d.scale() ** 2)
        e = embed(d)
        embedded = max(embedded, e.relative_residual())
        flips += sum(f(d) != f(e) for f in (is_stable, is_costable, is_regular))
        if n <= 20:
            basis = moment_tangent_basis(d)
            t1, t2 = (unpack_tangent(basis @ cgauss(rng, basis.shape[1]), d.k) for _ in range(2))
            before = adhm_form(t1, t2)
            after = adhm_form(embed_pushforward(d, t1), embed_pushforward(d, t2))
            pairing = max(pairing, abs(after - before) / (1 + abs(before)))
    ok = block <= 1e-12 and embedded <= 1e-10 and flips == 0 and pairing <= 1e-8
    report(2, ok, samples=n, block=block, embed_residual=embedded, flips=flips, pairing=pairing)


def test_criterion_3_slice(report):
    rng = np.random.default_rng(3)
    conj = xform = gg = diag = 0.0
    exact_fails = 0
    for t in range(100):
        k = 1 + t % 5
        M = random_hat_matrix(k, rng)
        G = np.eye(k + 1, dtype=complex)
        G[:k, :k] = random_gauge(k, rng)
        s1, _ = to_slice(M)
        s2, _ = to_slice(G @ M @ np.linalg.inv(G))
        scale = 1 + np.max(np.abs(np.concatenate([s1.r, s1.s])))
        conj = max(conj, rel(np.concatenate([s1.r - s2.r, s1.s - s2.s]), scale))
        r = [Fraction(int(v), int(w)) for v, w in zip(rng.integers(-9, 10, k), rng.integers(1, 5, k))]
        s = [Fraction(int(v), int(w)) for v, w in zip(rng.integers(-9, 10, k + 1), rng.integers(1, 5, k + 1))]
        r2, s2_ = slice_from_charpolys(*charpolys_from_slice(_ExactSlice(r, s)), exact=True)
        exact_fails += list(r2) != r or list(s2_) != s
        css, gc = canonical_ss(M)
        Gc = np.eye(k + 1, dtype=complex)
        Gc[:k, :k] = gc
        C = Gc @ M @ np.linalg.inv(Gc)
        xform = max(xform, rel(C - css.assemble(), 1 + np.max(np.abs(C))))
        g, ginv = g_pair(css.lam, css.lamhat)
        gg = max(gg, rel(g @ ginv - np.eye(k + 1)))
        diag = max(diag, rel(g @ css.assemble() @ ginv - np.diag(css.lamhat), 1 + np.max(np.abs(css.lamhat))))
    g, ginv = g_pair([0], [1, -1])
    example = max(rel(g - np.array([[0.5, 0.5], [-0.5, 0.5]])), rel(ginv - np.array([[1, -1], [1, 1]])))
    ok = conj <= 1e-8 and exact_fails == 0 and xform <= 1e-8 and gg <= 1e-12 and diag <= 1e-8 \
        and example <= 1e-12
    report(3, ok, conjugation=conj, exact_round_trip_fails=exact_fails, canonical_x=xform,
           g_ginv=gg, diagonalization=diag, k1_example=example)


def test_criterion_4_darboux(report):
    rt = br = ps = phi = 0.0
    gauge_fails = n = 0
    for k in range(1, 5):
        for tau in (0.0, 1.0, 1j):
            for s in range(2):
                d = sample_on_shell(k, tau, seed=[4, k, s], scramble=True)
                h = to_hats(d)
                if not in_g1(h.Ahat):
                    continue
                n += 1
                p = pi_forward(h)
                q = pi_forward(pi_inverse(p))
                scale = 1 + max(np.max(np.abs(getattr(p, a))) for a in ("lam", "mu", "lamhat", "muhat"))
                rt = max(rt, max(rel(getattr(q, a) - getattr(p, a), scale)
                                 for a in ("lam", "mu", "lamhat", "muhat")))
                gauge_fails += not points_equal(d, from_hats(snap_to_s(pi_inverse(p))), 1e-8)
                br = max(br, float(np.abs(coordinate_brackets(h) - canonical_bracket_matrix(k)).max()))
                ps = max(ps, float(np.abs(psi_brackets(d)).max()) / d.scale())
                v = psi(h)
                phi = max(phi, abs(v[0] - v[k]))
    h0gap = 0.0
    for k in range(1, 5):
        for s in range(3):
            hh = to_hats(sample_on_shell(k, 0.0, seed=[40, k, s], scramble=True))
            ht = h_tau(hh)
            h0gap = max(h0gap, abs(h0(pi_forward(hh)) - ht) / (1 + abs(ht)))
    ok = n >= 20 and rt <= 1e-8 and gauge_fails == 0 and br <= 1e-6 and ps <= 1e-7 \
        and phi == 0 and h0gap <= 1e-8
    report(4, ok, points=n, pi_round_trip=rt, gauge_fails=gauge_fails, brackets=br,
           psi_commute=ps, phi1_gap=phi, h0=h0gap)


def test_criterion_5_bridge(report):
    worst = 0.0
    for t in range(50):
        rng = np.random.default_rng([5, t])
        k = int(rng.integers(1, 5))
        f, g = random_necklace(rng, 4), random_necklace(rng, 4)
        d = adhm_from_rep(QuiverRep.random(k, 1, rng))

        def traced(h):
            return lambda q: sum(trace_R(h, rep_from_adhm(q)))

        lhs = sum(trace_R(necklace_bracket(f, g), rep_from_adhm(d)))
        rhs = poisson_flat(traced(f), traced(g), d)
        worst = max(worst, abs(lhs - rhs) / (1 + abs(lhs)))
    report(5, worst <= 1e-8, triples=50, worst_relative=worst)


def test_criterion_6_autgrp(report):
    rng = np.random.default_rng(6)
    moment = charpoly = fd = 0.0
    kinds = set()
    for t in range(200):
        k = 1 + t % 4
        d = sample_on_shell(k, (1.0, 1j)[t % 2], seed=[6, t], scramble=True)
        gen = random_generator(rng)
        kinds.add(type(gen).__name__)
        out = ag.act(gen, d)
        moment = max(moment, out.relative_residual())
        charpoly = max(charpoly, ag.charpoly_gap(ag.e_image(out), ag.e_image(d)))
        if t < 40:
            fd = max(fd, perturbation_gap(d))
    attempted = fails = 0
    seed = 0
    while attempted < 100:
        d = sample_on_shell(3, 1.0, seed=[60, seed], scramble=True)
        seed += 1
        if not is_regular_semisimple(d.A):
            continue
        attempted += 1
        fails += not normalization_ok(d, seed=seed, tol=1e-9)
    ok = len(kinds) == 4 and moment <= 1e-10 and charpoly <= 1e-8 and fd <= 1e-7 \
        and attempted - fails >= 99
    report(6, ok, generator_kinds=len(kinds), moment=moment, charpoly=charpoly, finite_diff=fd,
           normalized=f"{attempted - fails}/{attempted}")


def test_criterion_7_determinism(report, tmp_path, capsys):
    outs = {}
    for cmd in (["verify", "--suite", "all", "--k", "2"], ["gen", "--k", "3"],
                ["normalize", "--k", "3"], ["coords", "--k", "2", "--tau-re", "0"]):
        blobs = []
        for run in range(2):
            path = tmp_path / f"{cmd[0]}{run}.out"
            main(cmd + ["--seed", "77", "--out", str(path)])
            blobs.append(path.read_bytes())
        outs[cmd[0]] = blobs[0] == blobs[1] and len(blobs[0]) > 0
    same_samples = all(
        f(7) == f(7) for f in (
            lambda s: sample_on_shell(3, 1.0, seed=s, scramble=True).A.tobytes(),
            lambda s: random_necklace(np.random.default_rng(s), 4),
            lambda s: str(ag.word_to_json([random_generator(np.random.default_rng(s))])),
        ))
    capsys.readouterr()
    ok = all(outs.values()) and same_samples
    report(7, ok, **{f"{k}_identical": v for k, v in outs.items()}, samplers_identical=same_samples)
