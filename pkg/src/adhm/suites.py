"""Verification suites behind ``adhm verify``.

Each suite returns a list of :class:`Check` records: a measured residual
(or failure count) and the tolerance it is held to.  Suites are pure
functions of their :class:`SuiteConfig`; all randomness is seeded from it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional

import numpy as np

from . import autgrp as ag
from .darboux import (canonical_bracket_matrix, coordinate_brackets, flow, h0,
                      fibre_flow_coefficients, h_tau, pi_forward, pi_inverse, psi,
                      psi_brackets, DarbouxPoint)
from .errors import AdhmError
from .hat import (adhm_form, brute_commutator_blocks, embed, embed_pushforward, from_hats,
                  hat_commutator_blocks, is_costable, is_regular, is_stable,
                  moment_tangent_basis, snap_to_s, to_hats, unpack_tangent)
from .ncalg import (Necklace, PathPoly, e_generators, necklace_bracket, symplectic_elements,
                    to_necklace)
from .rep import AdhmData, points_equal
from .sampling import (cgauss, random_gauge, random_generator, random_hat_matrix,
                       random_necklace, random_potential, rng_from, sample_on_shell)
from .slice_forms import (canonical_ss, charpolys_from_slice, g_pair, in_g1,
                          slice_from_charpolys, to_slice)

DEFAULT_TOLS: Dict[str, float] = {
    "exact": 0.0,
    "moment": 1e-10,
    "block": 1e-12,
    "symplectic": 1e-8,
    "slice": 1e-8,
    "gpair": 1e-12,
    "diag": 1e-8,
    "roundtrip": 1e-8,
    "bracket": 1e-6,
    "psi": 1e-7,
    "h0": 1e-8,
    "flow": 1e-9,
    "fibre": 1e-7,
    "charpoly": 1e-8,
    "fd": 1e-7,
    "closed_form": 1e-12,
    "cm": 1e-9,
}


@dataclass
class SuiteConfig:
    seed: int = 0
    k: int = 2
    tau: complex = 1.0
    tols: Dict[str, float] = field(default_factory=dict)
    data: Optional[AdhmData] = None

    def tol(self, name: str) -> float:
        return self.tols.get(name, DEFAULT_TOLS[name])


@dataclass
class Check:
    name: str
    value: float
    tol: float
    detail: Optional[object] = None

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def to_json(self):
        out = {"name": self.name, "value": self.value, "tol": self.tol, "pass": self.passed}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


def _rel(x, scale) -> float:
    return float(np.max(np.abs(x))) / scale if np.size(x) else 0.0


def _sci_table(M) -> List[List[str]]:
    return [[f"{abs(v):.2e}" for v in row] for row in np.atleast_2d(M)]


def _point(cfg: SuiteConfig, offset: int = 0, tau=None) -> AdhmData:
    if cfg.data is not None and offset == 0 and tau is None:
        return cfg.data
    return sample_on_shell(cfg.k, cfg.tau if tau is None else tau,
                           seed=[cfg.seed, offset], scramble=True)


# --- necklace ------------------------------------------------------------

def necklace_suite(cfg: SuiteConfig) -> List[Check]:
    rng = rng_from([cfg.seed, 101])
    ex = cfg.tol("exact")
    fails = 0
    for _ in range(30):
        f, g = random_necklace(rng), random_necklace(rng)
        fails += not (necklace_bracket(f, g) + necklace_bracket(g, f)).is_zero()
    checks = [Check("antisymmetry failures", fails, ex)]
    fails = 0
    for _ in range(10):
        f, g, h = (random_necklace(rng) for _ in range(3))
        jac = (necklace_bracket(f, necklace_bracket(g, h)) + necklace_bracket(g, necklace_bracket(h, f))
               + necklace_bracket(h, necklace_bracket(f, g)))
        fails += not jac.is_zero()
    checks.append(Check("jacobi failures", fails, ex))
    E = [[to_necklace(e) for e in row] for row in e_generators()]
    fails = 0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    want = Necklace()
                    if j == k:
                        want = want + E[i][l]
                    if i == l:
                        want = want - E[k][j]
                    fails += necklace_bracket(E[i][j], E[k][l]) != want
    for z in ("a", "a+"):
        for row in E:
            for e in row:
                fails += not necklace_bracket(Necklace.word(z), e).is_zero()
    fails += necklace_bracket(Necklace.word("a"), Necklace.word("a+")) != to_necklace(PathPoly.unit(1))
    checks.append(Check("e-relation failures", fails, ex))
    c, c1, c2 = symplectic_elements()
    checks.append(Check("c = c1 + c2 failures", int(c != c1 + c2), ex))
    fails = 0
    for _ in range(10):
        f = random_potential(rng, 3)
        fails += not ag.check_preserves_c(ag.lambda_images(f))
        fails += not ag.check_preserves_c(ag.opp_images(f))
    checks.append(Check("tame maps fixing c failures", fails, ex))
    return checks


# --- moment / hat / embedding -----------------------------------------------

def moment_suite(cfg: SuiteConfig) -> List[Check]:
    d = _point(cfg)
    res = d.relative_residual()
    checks = [Check("moment residual", res, cfg.tol("moment"))]
    blocks = hat_commutator_blocks(d)
    brute = brute_commutator_blocks(to_hats(d))
    err = max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in zip(blocks, brute))
    checks.append(Check("hat block formula", err / d.scale() ** 2, cfg.tol("block")))
    if res > cfg.tol("moment"):
        return checks
    e = embed(d)
    checks.append(Check("embedded moment residual", e.relative_residual(), cfg.tol("moment")))
    flips = sum(f(d) != f(e) for f in (is_stable, is_costable, is_regular))
    checks.append(Check("stability flips under embedding", flips, cfg.tol("exact")))
    basis = moment_tangent_basis(d)
    rng = rng_from([cfg.seed, 202])
    worst = 0.0
    for _ in range(3):
        t1, t2 = (unpack_tangent(basis @ cgauss(rng, basis.shape[1]), d.k) for _ in range(2))
        before = adhm_form(t1, t2)
        after = adhm_form(embed_pushforward(d, t1), embed_pushforward(d, t2))
        worst = max(worst, abs(after - before) / (1 + abs(before)))
    checks.append(Check("symplectic pairing under embedding", worst, cfg.tol("symplectic")))
    return checks


# --- slice -----------------------------------------------------------------

def slice_suite(cfg: SuiteConfig) -> List[Check]:
    rng = rng_from([cfg.seed, 303])
    k = cfg.k
    worst = 0.0
    for t in range(10):
        M = random_hat_matrix(k, rng)
        g = random_gauge(k, rng)
        G = np.eye(k + 1, dtype=complex)
        G[:k, :k] = g
        s1, _ = to_slice(M)
        s2, _ = to_slice(G @ M @ np.linalg.inv(G))
        scale = 1 + np.max(np.abs(np.concatenate([s1.r, s1.s])))
        worst = max(worst, _rel(np.concatenate([s1.r - s2.r, s1.s - s2.s]), scale))
    checks = [Check("slice conjugation invariance", worst, cfg.tol("slice"))]
    from fractions import Fraction
    fails = 0
    for _ in range(10):
        r = [Fraction(int(v), int(w)) for v, w in zip(rng.integers(-9, 10, k), rng.integers(1, 5, k))]
        s = [Fraction(int(v), int(w)) for v, w in zip(rng.integers(-9, 10, k + 1), rng.integers(1, 5, k + 1))]
        q, qhat = charpolys_from_slice(_ExactSlice(r, s))
        r2, s2 = slice_from_charpolys(q, qhat, exact=True)
        fails += (list(r2) != r) or (list(s2) != s)
    checks.append(Check("charpoly round-trip failures", fails, cfg.tol("exact")))
    worst_x = worst_g = worst_d = 0.0
    for _ in range(10):
        M = random_hat_matrix(k, rng)
        css, gc = canonical_ss(M)
        G = np.eye(k + 1, dtype=complex)
        G[:k, :k] = gc
        conj = G @ M @ np.linalg.inv(G)
        worst_x = max(worst_x, _rel(conj - css.assemble(), 1 + np.max(np.abs(conj))))
        g, ginv = g_pair(css.lam, css.lamhat)
        worst_g = max(worst_g, _rel(g @ ginv - np.eye(k + 1), 1.0))
        D = g @ css.assemble() @ ginv
        worst_d = max(worst_d, _rel(D - np.diag(css.lamhat), 1 + np.max(np.abs(css.lamhat))))
    g, ginv = g_pair([0], [1, -1])
    worst_g = max(worst_g, _rel(g - np.array([[0.5, 0.5], [-0.5, 0.5]]), 1.0),
                  _rel(ginv - np.array([[1, -1], [1, 1]]), 1.0))
    checks += [Check("canonical form by conjugation", worst_x, cfg.tol("diag")),
               Check("g g^-1 = I", worst_g, cfg.tol("gpair")),
               Check("g diagonalizes canonical form", worst_d, cfg.tol("diag"))]
    return checks


class _ExactSlice(NamedTuple):
    # charpolys_from_slice only reads .r and .s, so exact lists pass through
    r: list
    s: list


# --- darboux -----------------------------------------------------------------

def darboux_suite(cfg: SuiteConfig) -> List[Check]:
    d = _point(cfg)
    h = to_hats(d)
    if not in_g1(h.Ahat):
        return [Check("point in strongly semisimple domain", 1, 0)]
    p = pi_forward(h)
    back = pi_inverse(p)
    checks = [Check("pi(pi^-1(p)) = p", 0.0 if pi_forward(back).close_to(p, cfg.tol("roundtrip")) else 1.0, 0)]
    same = points_equal(d, from_hats(snap_to_s(back)), cfg.tol("roundtrip"))
    checks.append(Check("pi^-1(pi(h)) gauge equivalent", 0.0 if same else 1.0, 0))
    J = coordinate_brackets(h)
    err = np.abs(J - canonical_bracket_matrix(d.k))
    checks.append(Check("canonical coordinate brackets", float(err.max()), cfg.tol("bracket"),
                        detail=_sci_table(err)))
    pb = psi_brackets(d)
    checks.append(Check("psi pairwise brackets / scale", float(np.abs(pb).max()) / d.scale(), cfg.tol("psi"),
                        detail=_sci_table(pb)))
    ps = psi(h)
    checks.append(Check("phi1 - phihat1", abs(ps[0] - ps[d.k]), cfg.tol("exact")))
    d0 = _point(cfg, offset=1, tau=0.0)
    h00 = to_hats(d0)
    ht = h_tau(h00)
    checks.append(Check("H0 formula vs tr Bhat^2 (tau=0)",
                        abs(h0(pi_forward(h00)) - ht) / (1 + abs(ht)), cfg.tol("h0")))
    return checks


# --- flows -----------------------------------------------------------------

def flows_suite(cfg: SuiteConfig) -> List[Check]:
    d = _point(cfg)
    h = to_hats(d)
    rng = rng_from([cfg.seed, 404])
    k = d.k
    pc, qc = 0.3 * cgauss(rng, k), 0.3 * cgauss(rng, k + 1)
    same = flow(h, (), ())
    checks = [Check("zero flow is identity",
                    float(np.max(np.abs(same.Bhat - h.Bhat))), cfg.tol("exact"))]
    ab = flow(flow(h, pc, ()), (), qc)
    ba = flow(flow(h, (), qc), pc, ())
    checks.append(Check("flows commute", _rel(ab.Bhat - ba.Bhat, h.scale()), cfg.tol("flow")))
    ps0, ps1 = psi(h), psi(ab)
    checks.append(Check("psi invariant along flow", _rel(ps1 - ps0, 1 + np.max(np.abs(ps0))), cfg.tol("flow")))
    moved = from_hats(snap_to_s(ab))
    checks.append(Check("moment residual after flow", moved.relative_residual(), cfg.tol("moment")))
    if k <= 3 and in_g1(h.Ahat):
        checks.append(Check("fibre transitivity", fibre_gap(h, rng, cfg.tol("fibre")), 0))
    return checks


def fibre_gap(h, rng, tol) -> float:
    """Flow one random point of a fibre onto another; 0 on success."""
    p1 = pi_forward(h)
    k = p1.k
    g, _ = g_pair(p1.lam, p1.lamhat)
    mu2 = p1.mu + cgauss(rng, k)
    dm = cgauss(rng, k + 1)
    # keep the corner of Bhat at zero: sum_p g[p, k] dmuhat_p = 0
    dm[0] -= (g[:, k] @ dm) / g[0, k]
    p2 = DarbouxPoint(p1.lam, mu2, p1.lamhat, p1.muhat + dm, p1.tau)
    start = pi_inverse(p1)
    pc, qc = fibre_flow_coefficients(p1, p2)
    moved = snap_to_s(flow(start, pc, qc), tol=1e-7)
    target = snap_to_s(pi_inverse(p2), tol=1e-7)
    return 0.0 if points_equal(from_hats(moved), from_hats(target), tol) else 1.0


# --- autgrp ------------------------------------------------------------------

def autgrp_suite(cfg: SuiteConfig, n_normalize: int = 20) -> List[Check]:
    tau = cfg.tau if cfg.tau != 0 else 1.0
    rng = rng_from([cfg.seed, 505])
    d = _point(cfg, tau=None if cfg.tau != 0 else 1.0)
    E0 = ag.e_image(d)
    worst_m = worst_c = 0.0
    cur = d
    for _ in range(5):
        cur = ag.act(random_generator(rng), cur)
        worst_m = max(worst_m, cur.relative_residual())
        worst_c = max(worst_c, ag.charpoly_gap(ag.e_image(cur), E0))
    checks = [Check("moment residual along word", worst_m, cfg.tol("moment")),
              Check("E char poly along word", worst_c, cfg.tol("charpoly"))]
    worst = 0.0
    for _ in range(5):
        f = random_potential(rng, 3)
        for G in (ag.Triangular, ag.OppTriangular):
            back = ag.act(G(-f), ag.act(G(f), d))
            worst = max(worst, max(_rel(getattr(back, n) - getattr(d, n), d.scale()) for n in "ABij"))
    checks.append(Check("generator inverse", worst, cfg.tol("moment")))
    worst = 0.0
    for _ in range(5):
        pcoef = 0.5 * cgauss(rng, int(rng.integers(1, 5)))
        out = ag.act(ag.Triangular(ag.Potential.from_poly_times_b(pcoef, -1.0)), d)
        i, j = ag.triangular_closed_form(pcoef, d)
        worst = max(worst, _rel(out.i - i, d.scale()), _rel(out.j - j, d.scale()))
    checks.append(Check("triangular closed form", worst, cfg.tol("closed_form")))
    checks.append(Check("tr(ji)^2 perturbation vs finite differences",
                        perturbation_gap(d), cfg.tol("fd")))
    fails = 0
    for t in range(n_normalize):
        pt = sample_on_shell(cfg.k, tau, seed=[cfg.seed, 606, t], scramble=True)
        fails += not normalization_ok(pt, seed=t, tol=cfg.tol("cm"))
    checks.append(Check(f"normalization failures out of {n_normalize}", fails, cfg.tol("exact")))
    return checks


def perturbation_gap(d: AdhmData, s: float = 1e-3) -> float:
    """Relative gap between the closed-form coefficients and finite differences."""
    def val(t):
        return ag.tr_ji_sq(ag.act(ag.Triangular(ag.Potential([(("a", "b"), complex(t))])), d))
    lin, quad = ag.tr_ji_sq_perturbation(d)
    # the function is a polynomial of degree 4 in s; these stencils are exact up to s^2 error
    f = [val(m * s) for m in (-2, -1, 0, 1, 2)]
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * s)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * s * s) / 2
    scale = 1 + abs(lin) + abs(quad)
    return max(abs(d1 - lin), abs(d2 - quad)) / scale


def normalization_ok(d: AdhmData, seed: int = 0, tol: float = 1e-9) -> bool:
    try:
        res = ag.normalize_to_cm(d, seed=seed, tol=tol)
    except AdhmError:
        return False
    return ag.in_cm_locus(res.point, tol) and ag.replay_gap(d, res) <= tol \
        and res.point.relative_residual() <= tol


SUITES: Dict[str, Callable[[SuiteConfig], List[Check]]] = {
    "necklace": necklace_suite,
    "moment": moment_suite,
    "slice": slice_suite,
    "darboux": darboux_suite,
    "flows": flows_suite,
    "autgrp": autgrp_suite,
}


def run_suite(name: str, cfg: SuiteConfig) -> Dict[str, List[Check]]:
    if name == "all":
        return {n: fn(cfg) for n, fn in SUITES.items()}
    if name not in SUITES:
        raise KeyError(name)
    return {name: SUITES[name](cfg)}
