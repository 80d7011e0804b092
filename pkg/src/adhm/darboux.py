"""Darboux coordinates on the strongly semisimple part of the hat picture,
the commuting Hamiltonians, their flows, and numerical Poisson brackets."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from ._numdiff import holo_grad
from .errors import DegenerateInputError, OffShellError
from .hat import HatPair
from .rep import AdhmData, comm
from .slice_forms import (SEP_RTOL, canonical_from_spectra, canonical_ss, g_pair,
                          match_order, min_separation, spectral_scale)

ONSHELL_RTOL = 1e-9
COLLISION_RTOL = 1e-6


@dataclass(frozen=True, eq=False)
class DarbouxPoint:
    lam: np.ndarray
    mu: np.ndarray
    lamhat: np.ndarray
    muhat: np.ndarray
    tau: complex = 0j

    def __post_init__(self):
        for name in ("lam", "mu", "lamhat", "muhat"):
            object.__setattr__(self, name, np.array(getattr(self, name), dtype=complex).ravel())
        object.__setattr__(self, "tau", complex(self.tau))
        if self.mu.size != self.lam.size or self.muhat.size != self.lamhat.size:
            raise ValueError("momenta must match their positions in length")
        if self.lamhat.size != self.lam.size + 1:
            raise ValueError("lamhat must have one more entry than lam")

    @property
    def k(self) -> int:
        return self.lam.size

    def vector(self) -> np.ndarray:
        return np.concatenate([self.lam, self.mu, self.lamhat, self.muhat])

    def canonical(self) -> "DarbouxPoint":
        """Same point with both spectra in lexicographic (real, imag) order."""
        p = np.lexsort((self.lam.imag, self.lam.real))
        q = np.lexsort((self.lamhat.imag, self.lamhat.real))
        return DarbouxPoint(self.lam[p], self.mu[p], self.lamhat[q], self.muhat[q], self.tau)

    def close_to(self, other: "DarbouxPoint", tol: float = 1e-8) -> bool:
        """Equality modulo simultaneous permutations of (lam, mu) and (lamhat, muhat)."""
        if other.k != self.k:
            return False
        p = match_order(other.lam, self.lam)
        q = match_order(other.lamhat, self.lamhat)
        o = np.concatenate([other.lam[p], other.mu[p], other.lamhat[q], other.muhat[q]])
        v = self.vector()
        scale = 1.0 + float(np.max(np.abs(v)))
        return bool(np.max(np.abs(o - v)) <= tol * scale and abs(self.tau - other.tau) <= tol * scale)

    def __repr__(self):
        return f"DarbouxPoint(k={self.k}, tau={self.tau})"


class Decomposition(NamedTuple):
    B1: np.ndarray
    B2: np.ndarray
    S: np.ndarray
    lam: np.ndarray
    lamhat: np.ndarray
    mu: np.ndarray
    muhat: np.ndarray
    tau: complex
    frame: HatPair  # the input conjugated into canonical form
    conj: np.ndarray  # k x k conjugator into that frame
    g: np.ndarray
    ginv: np.ndarray


def decompose(h: HatPair, check: bool = True, order=None) -> Decomposition:
    """Split ``Bhat`` (in the canonical frame of ``Ahat``) as ``B1 + B2``.

    ``check=False`` skips the moment-map test so the coordinate functions can
    be evaluated at nearby off-shell points for differentiation.
    """
    k = h.k
    css, conj = canonical_ss(h.Ahat, order=order)
    f = h.conjugate(conj)
    C = comm(f.Ahat, f.Bhat)
    if check:
        tau = h.tau
        off = np.linalg.norm(C[:k, :k] - tau * np.eye(k))
        if off > ONSHELL_RTOL * h.scale() ** 2:
            raise OffShellError(f"[Ahat, Bhat] misses tau + m by {off:.3e}")
    else:
        tau = complex(np.trace(C[:k, :k]) / k)
    mu = C[k, :k].copy()
    B1 = np.diag(np.append(mu, 0))
    B2 = f.Bhat - B1
    g, ginv = g_pair(css.lam, css.lamhat)
    GB = g @ B2 @ ginv
    muhat = np.diag(GB).copy()
    S = GB - np.diag(muhat)
    return Decomposition(B1, B2, S, css.lam, css.lamhat, mu, muhat, tau, f, conj, g, ginv)


def pi_forward(h: HatPair, check: bool = True, order=None) -> DarbouxPoint:
    d = decompose(h, check=check, order=order)
    return DarbouxPoint(d.lam, d.mu, d.lamhat, d.muhat, d.tau)


def pi_inverse(p: DarbouxPoint) -> HatPair:
    """Hat pair in canonical form with the given Darboux coordinates."""
    k = p.k
    if min_separation(p.lam) <= SEP_RTOL * spectral_scale(p.lam) or \
            min_separation(p.lamhat) <= SEP_RTOL * spectral_scale(p.lamhat):
        raise DegenerateInputError("eigenvalue collision")
    css = canonical_from_spectra(p.lam, p.lamhat)
    Ahat = css.assemble()
    g, ginv = g_pair(p.lam, p.lamhat)
    tau_hat = np.diag([p.tau] * k + [-k * p.tau])
    R = g @ tau_hat @ ginv
    w = -np.diag(R)
    R = R + np.outer(w, np.ones(k + 1))
    diff = p.lamhat[:, None] - p.lamhat[None, :]
    np.fill_diagonal(diff, 1)
    C = R / diff
    np.fill_diagonal(C, p.muhat)
    Bhat = np.diag(np.append(p.mu, 0)) + ginv @ C @ g
    return HatPair(k, Ahat, Bhat, p.tau)


def delta(h: HatPair) -> complex:
    lam = np.linalg.eigvals(h.A)
    lamhat = np.linalg.eigvals(h.Ahat)
    return _vandermonde_sq(lam) * _vandermonde_sq(lamhat)


def _vandermonde_sq(vals) -> complex:
    out = 1 + 0j
    for a in range(len(vals)):
        for b in range(len(vals)):
            if a != b:
                out *= vals[a] - vals[b]
    return out


def psi(h: HatPair) -> np.ndarray:
    """``(tr A, ..., tr A^k, tr Ahat, ..., tr Ahat^(k+1))``."""
    out = []
    P = np.eye(h.k, dtype=complex)
    for _ in range(h.k):
        P = P @ h.A
        out.append(np.trace(P))
    P = np.eye(h.k + 1, dtype=complex)
    for _ in range(h.k + 1):
        P = P @ h.Ahat
        out.append(np.trace(P))
    return np.array(out)


def matrix_poly(coeffs: Sequence[complex], M: np.ndarray) -> np.ndarray:
    """``sum c_n M^n`` by Horner's rule, constant term first."""
    out = np.zeros_like(M, dtype=complex)
    eye = np.eye(M.shape[0], dtype=complex)
    for c in reversed(list(coeffs)):
        out = out @ M + c * eye
    return out


def flow(h: HatPair, pcoeffs=(), qcoeffs=(), project: bool | None = None) -> HatPair:
    """Move ``Bhat`` by ``blockdiag(p(A), 0) + q(Ahat)``.

    With ``project`` (default: whether the input has zero corners) the
    bottom-right entry of the result is reset to zero.
    """
    project = h.in_s if project is None else project
    k = h.k
    add = np.zeros((k + 1, k + 1), dtype=complex)
    if len(pcoeffs):
        add[:k, :k] = matrix_poly(pcoeffs, h.A)
    if len(qcoeffs):
        add += matrix_poly(qcoeffs, h.Ahat)
    Bh = h.Bhat + add
    if project:
        Bh[-1, -1] = 0
    return h.replace(Bhat=Bh)


def h_tau(h: HatPair) -> complex:
    return complex(np.trace(h.Bhat @ h.Bhat))


def h0_cross_coefficients(lam, lamhat) -> np.ndarray:
    """Matrix ``K[i, j] = ginv[i, j] * g[j, i]`` multiplying ``mu_i muhat_j``."""
    g, ginv = g_pair(lam, lamhat)
    k = len(lam)
    return ginv[:k, :] * g[:, :k].T


def h0(p: DarbouxPoint) -> complex:
    K = h0_cross_coefficients(p.lam, p.lamhat)
    return complex(np.sum(p.mu ** 2) + np.sum(p.muhat ** 2) + 2 * p.mu @ K @ p.muhat)


# --- Poisson brackets ----------------------------------------------------

def _split_point(d):
    if isinstance(d, AdhmData):
        return [d.A, d.B, d.i, d.j]
    if isinstance(d, HatPair):
        return [d.Ahat, d.Bhat]
    raise TypeError("expected AdhmData or HatPair")


def _rebuild(d, arrays):
    if isinstance(d, AdhmData):
        A, B, i, j = arrays
        return d.replace(A=A, B=B, i=i, j=j)
    Ah, Bh = arrays
    return d.replace(Ahat=Ah, Bhat=Bh)


def _default_radius(d) -> float:
    return 1e-3 * d.scale()


def flat_gradients(F: Callable, d, radius: float | None = None, method: str = "cauchy"):
    """Gradients of ``F`` (scalar or vector valued) at the point ``d``."""
    radius = _default_radius(d) if radius is None else radius
    return holo_grad(lambda arrs: F(_rebuild(d, arrs)), _split_point(d), radius, method)


def bracket_from_gradients(d, gF, gG) -> np.ndarray:
    """Flat bracket from precomputed gradients; vector inputs give a matrix.

    The pairing is ``{A_pq, B_qp} = 1`` and ``{j_rp, i_pr} = 1``, so that
    ``{tr A, tr B} = k``.
    """
    def tr(X, Y):
        X2 = X.reshape((-1,) + X.shape[-2:])
        Y2 = Y.reshape((-1,) + Y.shape[-2:])
        return np.einsum("apq,bqp->ab", X2, Y2)

    if isinstance(d, AdhmData):
        FA, FB, Fi, Fj = gF
        GA, GB, Gi, Gj = gG
        out = tr(FA, GB) - tr(GA, FB).T + tr(Fj, Gi) - tr(Gj, Fi).T
    else:
        FA, FB = gF
        GA, GB = gG
        out = tr(FA, GB) - tr(GA, FB).T
    return out


def poisson_flat(F: Callable, G: Callable, d, radius: float | None = None,
                 method: str = "cauchy"):
    """Flat Poisson bracket of ``F`` and ``G`` at ``d`` (AdhmData or HatPair).

    For scalar functions a complex number is returned; for vector-valued
    functions the full matrix of pairwise brackets.
    """
    gF = flat_gradients(F, d, radius, method)
    gG = gF if G is F else flat_gradients(G, d, radius, method)
    out = bracket_from_gradients(d, gF, gG)
    if np.ndim(F(d)) == 0 and np.ndim(G(d)) == 0:
        return complex(out[0, 0])
    return out


def coordinate_function(h: HatPair) -> Callable[[HatPair], np.ndarray]:
    """All Darboux coordinates as one holomorphic function near ``h``.

    Eigenvalues are tracked by proximity to those at ``h`` so the ordering
    does not jump between nearby evaluation points.
    """
    base = pi_forward(h)
    order = (base.lam, base.lamhat)
    return lambda q: pi_forward(q, check=False, order=order).vector()


def coordinate_brackets(h: HatPair, radius: float | None = None) -> np.ndarray:
    """Matrix of brackets among ``(lam, mu, lamhat, muhat)`` at ``h``.

    Brackets are taken on full pairs of (k+1)-square matrices, i.e. with the
    corner entries as coordinates too.
    """
    lam, lamhat = np.linalg.eigvals(h.A), np.linalg.eigvals(h.Ahat)
    sep = min(min_separation(lam), min_separation(lamhat))
    if sep <= COLLISION_RTOL * spectral_scale(lamhat):
        raise DegenerateInputError("spectra too close to collision for differentiation")
    if radius is None:
        # stay well inside the analyticity disc: collisions within either
        # spectrum or between them are the nearby singularities
        cross = float(np.min(np.abs(lam[:, None] - lamhat[None, :])))
        radius = min(1e-3 * h.scale(), 1e-2 * min(sep, cross))
    F = coordinate_function(h)
    g = flat_gradients(F, h, radius)
    return bracket_from_gradients(h, g, g)


def canonical_bracket_matrix(k: int) -> np.ndarray:
    """Expected bracket matrix of the Darboux coordinates."""
    n = 2 * k + 2 * (k + 1)
    J = np.zeros((n, n))
    for p in range(k):
        J[p, k + p], J[k + p, p] = 1, -1
    off = 2 * k
    for p in range(k + 1):
        J[off + p, off + k + 1 + p], J[off + k + 1 + p, off + p] = 1, -1
    return J


def psi_brackets(d, radius: float | None = None) -> np.ndarray:
    """Pairwise flat brackets of the 2k+1 functions ``psi`` at an ADHM datum."""
    from .hat import to_hats
    F = lambda q: psi(to_hats(q))
    g = flat_gradients(F, d, radius)
    return bracket_from_gradients(d, g, g)


def fibre_flow_coefficients(p1: DarbouxPoint, p2: DarbouxPoint):
    """Polynomials ``p`` (deg < k) and ``q`` (deg <= k) whose flow sends ``p1`` to ``p2``.

    Both points must share ``lam`` and ``lamhat``; solves Vandermonde systems
    ``p(lam_i) = dmu_i`` and ``q(lamhat_j) = dmuhat_j``.
    """
    if not (np.allclose(p1.lam, p2.lam) and np.allclose(p1.lamhat, p2.lamhat)):
        raise ValueError("points are not on a common fibre")
    V = np.vander(p1.lam, increasing=True)
    Vh = np.vander(p1.lamhat, increasing=True)
    pc = np.linalg.solve(V, p2.mu - p1.mu)
    qc = np.linalg.solve(Vh, p2.muhat - p1.muhat)
    return pc, qc
