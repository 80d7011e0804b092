"""The (k+1) x (k+1) matrix picture of ADHM data, the embedding into k+1,
and stability predicates."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import DegenerateInputError
from .rep import DEFAULT_TOL, AdhmData, _frozen, comm

RANK_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class HatPair:
    """Pair ``(Ahat, Bhat)`` of (k+1)-square matrices with parameter ``tau``."""

    k: int
    Ahat: np.ndarray
    Bhat: np.ndarray
    tau: complex = 0j

    def __post_init__(self):
        n = self.k + 1
        object.__setattr__(self, "Ahat", _frozen(self.Ahat, (n, n)))
        object.__setattr__(self, "Bhat", _frozen(self.Bhat, (n, n)))
        object.__setattr__(self, "tau", complex(self.tau))

    @property
    def in_s(self) -> bool:
        """Both bottom-right corners are exactly zero."""
        return self.Ahat[-1, -1] == 0 and self.Bhat[-1, -1] == 0

    @property
    def A(self) -> np.ndarray:
        return self.Ahat[:-1, :-1]

    @property
    def B(self) -> np.ndarray:
        return self.Bhat[:-1, :-1]

    def tau_hat(self) -> np.ndarray:
        return np.diag([self.tau] * self.k + [-self.k * self.tau])

    def scale(self) -> float:
        return 1.0 + float(np.linalg.norm(self.Ahat) + np.linalg.norm(self.Bhat))

    def residual_norm(self) -> float:
        """Distance of the upper-left block of ``[Ahat, Bhat]`` from ``tau * I``."""
        c = comm(self.Ahat, self.Bhat)[:-1, :-1]
        return float(np.linalg.norm(c - self.tau * np.eye(self.k)))

    def is_on_shell(self, tol: float = DEFAULT_TOL) -> bool:
        return self.residual_norm() <= tol * self.scale() ** 2

    def replace(self, **kw) -> "HatPair":
        fields = dict(k=self.k, Ahat=self.Ahat, Bhat=self.Bhat, tau=self.tau)
        fields.update(kw)
        return HatPair(**fields)

    def conjugate(self, g: np.ndarray) -> "HatPair":
        """Conjugate by ``blockdiag(g, 1)``."""
        G = np.eye(self.k + 1, dtype=complex)
        G[:-1, :-1] = g
        Gi = np.linalg.inv(G)
        return self.replace(Ahat=G @ self.Ahat @ Gi, Bhat=G @ self.Bhat @ Gi)

    def __repr__(self):
        return f"HatPair(k={self.k}, tau={self.tau})"


def to_hats(d: AdhmData) -> HatPair:
    k = d.k
    Ah = np.zeros((k + 1, k + 1), dtype=complex)
    Bh = np.zeros((k + 1, k + 1), dtype=complex)
    Ah[:k, :k], Ah[:k, k], Ah[k, :k] = d.A, d.i1, d.j2
    Bh[:k, :k], Bh[:k, k], Bh[k, :k] = d.B, d.i2, -d.j1
    return HatPair(k, Ah, Bh, d.tau)


def from_hats(h: HatPair) -> AdhmData:
    if not h.in_s:
        raise DegenerateInputError("corner entries must vanish to recover ADHM data")
    k = h.k
    return AdhmData.from_parts(h.A, h.B, h.Ahat[:k, k], h.Bhat[:k, k],
                               -h.Bhat[k, :k], h.Ahat[k, :k], h.tau)


def snap_to_s(h: HatPair, tol: float = 1e-9) -> HatPair:
    """Zero corner entries that are numerically zero; refuse otherwise."""
    corners = abs(h.Ahat[-1, -1]) + abs(h.Bhat[-1, -1])
    if corners > tol * h.scale():
        raise DegenerateInputError(f"corner entries {corners:.3e} are not negligible")
    Ah, Bh = h.Ahat.copy(), h.Bhat.copy()
    Ah[-1, -1] = Bh[-1, -1] = 0
    return h.replace(Ahat=Ah, Bhat=Bh)


def hat_commutator_blocks(d: AdhmData):
    """Blocks of ``[Ahat, Bhat]``: (upper-left, last column, last row, corner)."""
    i1, i2, j1, j2 = d.i1, d.i2, d.j1, d.j2
    return (comm(d.A, d.B) - d.i @ d.j,
            d.A @ i2 - d.B @ i1,
            j2 @ d.B + j1 @ d.A,
            complex(j1 @ i1 + j2 @ i2))


def brute_commutator_blocks(h: HatPair):
    c = comm(h.Ahat, h.Bhat)
    return c[:-1, :-1], c[:-1, -1], c[-1, :-1], complex(c[-1, -1])


def embed(d: AdhmData, tol: float = DEFAULT_TOL) -> AdhmData:
    """Symplectic embedding of an on-shell datum at k into k+1."""
    d.require_on_shell(tol)
    k, tau = d.k, d.tau
    h = to_hats(d)
    _, col, row, _ = hat_commutator_blocks(d)
    e = np.zeros(k + 1, dtype=complex)
    e[k] = 1
    i2 = np.append(col, -(k + 1) * tau)
    j1 = np.append(row, 0)
    return AdhmData.from_parts(h.Ahat, h.Bhat, e, i2, j1, e, tau)


# --- stability -----------------------------------------------------------

def _orth(M: np.ndarray, rtol: float = RANK_RTOL, ref: float | None = None) -> np.ndarray:
    if M.shape[1] == 0:
        return M
    u, s, _ = np.linalg.svd(M, full_matrices=False)
    ref = s[0] if ref is None else ref
    if ref == 0:
        return M[:, :0]
    r = int(np.sum(s > rtol * ref))
    return u[:, :r]


def invariant_span(mats, vecs: np.ndarray, max_len: int | None = None) -> np.ndarray:
    """Orthonormal basis of the smallest subspace containing ``vecs`` and
    invariant under every matrix in ``mats``.

    Grows by one word length per step and stops as soon as the rank does not
    increase; ``max_len`` bounds the word length (defaults to dimension - 1).
    """
    n = vecs.shape[0]
    max_len = n - 1 if max_len is None else max_len
    scale = max(float(np.linalg.norm(vecs, 2)), 1e-300)
    Q = _orth(vecs, ref=scale)
    if Q.shape[1] == 0:
        return Q
    newest = Q
    for _ in range(max_len):
        if Q.shape[1] == n:
            break
        cand = np.hstack([Q] + [M @ newest for M in mats])
        Q2 = _orth(cand)
        if Q2.shape[1] == Q.shape[1]:
            break
        newest = Q2
        Q = Q2
    return Q


def is_stable(d: AdhmData) -> bool:
    return invariant_span([d.A, d.B], d.i).shape[1] == d.k


def is_costable(d: AdhmData) -> bool:
    return invariant_span([d.A.T, d.B.T], d.j.T).shape[1] == d.k


def is_regular(d: AdhmData) -> bool:
    return is_stable(d) and is_costable(d)


# --- symplectic forms ----------------------------------------------------

def adhm_form(t1, t2) -> complex:
    """``tr(dA1 dB2 - dA2 dB1) + tr(dj1 di2 - dj2 di1)`` for tangents ``(dA, dB, di, dj)``."""
    dA1, dB1, di1, dj1 = t1
    dA2, dB2, di2, dj2 = t2
    return complex(np.trace(dA1 @ dB2 - dA2 @ dB1) + np.trace(dj1 @ di2 - dj2 @ di1))


def hat_form(t1, t2) -> complex:
    """``tr(dAhat1 dBhat2 - dAhat2 dBhat1)`` for tangents ``(dAhat, dBhat)``."""
    (dA1, dB1), (dA2, dB2) = t1, t2
    return complex(np.trace(dA1 @ dB2 - dA2 @ dB1))


def moment_tangent_basis(d: AdhmData, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of the linearized moment map.

    Coordinates are ``vec(dA), vec(dB), vec(di), vec(dj)`` (row-major).
    """
    k = d.k
    dim = 2 * k * k + 4 * k
    J = np.zeros((k * k, dim), dtype=complex)
    for c in range(dim):
        e = np.zeros(dim, dtype=complex)
        e[c] = 1
        dA, dB, di, dj = unpack_tangent(e, k)
        J[:, c] = (comm(dA, d.B) + comm(d.A, dB) - di @ d.j - d.i @ dj).ravel()
    _, s, vh = np.linalg.svd(J)
    rank = int(np.sum(s > tol * s[0]))
    return vh[rank:].conj().T


def unpack_tangent(v: np.ndarray, k: int):
    kk = k * k
    return (v[:kk].reshape(k, k), v[kk:2 * kk].reshape(k, k),
            v[2 * kk:2 * kk + 2 * k].reshape(k, 2), v[2 * kk + 2 * k:].reshape(2, k))


def embed_pushforward(d: AdhmData, tangent, h: float = 1e-5) -> Tuple[np.ndarray, ...]:
    """Central-difference image of a tangent vector under :func:`embed`."""
    dA, dB, di, dj = tangent

    def shifted(t):
        p = d.replace(A=d.A + t * dA, B=d.B + t * dB, i=d.i + t * di, j=d.j + t * dj)
        e = _embed_unchecked(p)
        return e.A, e.B, e.i, e.j

    plus, minus = shifted(h), shifted(-h)
    return tuple((p - m) / (2 * h) for p, m in zip(plus, minus))


def _embed_unchecked(d: AdhmData) -> AdhmData:
    # the embedding formula makes sense off-shell; used for difference quotients
    return embed(d, tol=np.inf)
