"""Seeded generators of on-shell ADHM data and related test objects."""
from __future__ import annotations

import numpy as np

from .errors import DegenerateInputError
from .rep import AdhmData, gauge_act

MAX_TRIES = 100


def rng_from(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def cgauss(rng: np.random.Generator, *shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def separated_spectrum(k: int, rng, min_gap: float = 0.3) -> np.ndarray:
    for _ in range(MAX_TRIES):
        lam = cgauss(rng, k) * 1.5
        if k == 1:
            return lam
        d = np.abs(lam[:, None] - lam[None, :])
        np.fill_diagonal(d, np.inf)
        if d.min() > min_gap:
            return lam
    raise DegenerateInputError("could not draw a separated spectrum")


def random_gauge(k: int, rng, max_cond: float = 20.0) -> np.ndarray:
    for _ in range(MAX_TRIES):
        g = np.eye(k) + cgauss(rng, k, k) / np.sqrt(k)
        if np.linalg.cond(g) < max_cond:
            return g
    raise DegenerateInputError("could not draw a well-conditioned gauge")


def sample_on_shell(k: int, tau: complex = 1.0, seed=0, scramble: bool = False) -> AdhmData:
    """On-shell datum with diagonal ``A`` (optionally gauge-scrambled).

    ``j`` is corrected column by column so that ``(ij)_pp = -tau``; the
    off-diagonal part of ``B`` then solves ``[A, B] = tau + ij`` exactly and
    its diagonal is free.
    """
    rng = rng_from(seed)
    tau = complex(tau)
    lam = separated_spectrum(k, rng)
    i = cgauss(rng, k, 2)
    j = cgauss(rng, 2, k)
    for p in range(k):
        u = i[p]
        c = -tau - u @ j[:, p]
        j[:, p] += c * u.conj() / np.vdot(u, u).real
    rhs = tau * np.eye(k) + i @ j
    diff = lam[:, None] - lam[None, :]
    np.fill_diagonal(diff, 1)
    B = rhs / diff
    np.fill_diagonal(B, cgauss(rng, k))
    d = AdhmData(k, np.diag(lam), B, i, j, tau)
    if scramble:
        d = gauge_act(random_gauge(k, rng), d)
    return d


def random_hat_matrix(k: int, seed=0) -> np.ndarray:
    rng = rng_from(seed)
    M = cgauss(rng, k + 1, k + 1)
    M[k, k] = 0
    return M


# --- symbolic samples ------------------------------------------------------

def random_closed_path(rng, length: int, start: int | None = None):
    """Uniform random walk of ``length`` arrows that returns to its start."""
    from .ncalg import ARROWS
    out_of = {v: [u for u, (t, _) in ARROWS.items() if t == v] for v in (1, 2)}
    for _ in range(1000):
        v0 = int(rng.integers(1, 3)) if start is None else start
        v, walk = v0, []
        for _ in range(length):
            u = out_of[v][int(rng.integers(len(out_of[v])))]
            walk.append(u)
            v = ARROWS[u][1]
        if v == v0:
            return tuple(reversed(walk))
    raise DegenerateInputError("no closed walk found")


def random_necklace(rng, max_degree: int = 4, n_terms: int = 3, coeff_range: int = 3):
    """Necklace with small integer coefficients and words of degree 1..max_degree."""
    from .ncalg import Necklace
    terms = []
    for _ in range(n_terms):
        path = random_closed_path(rng, int(rng.integers(1, max_degree + 1)))
        terms.append((path, int(rng.integers(-coeff_range, coeff_range + 1))))
    return Necklace(terms)


def random_potential(rng, max_degree: int = 3, n_terms: int = 3, exact: bool = True):
    """Potential in the letters a, b with words of length 1..max_degree."""
    from fractions import Fraction
    from .autgrp import Potential
    from .ncalg import GaussQ
    terms = []
    for _ in range(n_terms):
        n = int(rng.integers(1, max_degree + 1))
        word = tuple("ab"[int(b)] for b in rng.integers(0, 2, n))
        if exact:
            c = GaussQ(Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))),
                       Fraction(int(rng.integers(-4, 5)), int(rng.integers(1, 4))))
        else:
            c = complex(cgauss(rng)) * 0.5
        terms.append((word, c))
    return Potential(terms)


def random_sl2(rng) -> np.ndarray:
    T = np.eye(2) + 0.5 * cgauss(rng, 2, 2)
    return T / np.sqrt(np.linalg.det(T))


def random_generator(rng, max_degree: int = 3):
    """One tame generator with moderate coefficients, type chosen uniformly."""
    from .autgrp import GL2, OppTriangular, Triangular, UnimodularAffine
    kind = int(rng.integers(4))
    if kind == 0:
        return Triangular(random_potential(rng, max_degree, exact=False))
    if kind == 1:
        return OppTriangular(random_potential(rng, max_degree, exact=False))
    if kind == 2:
        return GL2(np.eye(2) + 0.5 * cgauss(rng, 2, 2))
    return UnimodularAffine(random_sl2(rng), cgauss(rng, 2))
