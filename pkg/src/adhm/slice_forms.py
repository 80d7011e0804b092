"""Normal forms for conjugation of (k+1)-square matrices by GL(k) x 1.

A matrix ``Ahat = [[A, x], [y, Lambda]]`` is split into its k x k block ``A``,
last column ``x``, last row ``y`` and corner ``Lambda``.  The subgroup acts
by ``blockdiag(g, 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError

SEP_RTOL = 1e-8
OBS_RTOL = 1e-9
X_COND_RTOL = 1e-12
KRYLOV_COND_OK = 1e6
EIG_NOISE_FACTOR = 100.0


@dataclass(frozen=True, eq=False)
class SliceForm:
    """Coordinates ``r`` (length k) and ``s`` (length k+1) of the slice matrix."""

    r: np.ndarray
    s: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=complex).ravel()
        s = np.array(self.s, dtype=complex).ravel()
        if s.size != r.size + 1:
            raise ValueError("s must have exactly one more entry than r")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "s", s)

    @property
    def k(self) -> int:
        return self.r.size

    def assemble(self) -> np.ndarray:
        k = self.k
        M = np.zeros((k + 1, k + 1), dtype=complex)
        M[:k, :k] = companion(self.r)
        M[:, k] = self.s
        M[k, k - 1] = 1
        return M


@dataclass(frozen=True, eq=False)
class CanonicalSS:
    """Diagonal ``lambda`` with last column ``x``, last row ones, corner ``Lambda``."""

    lam: np.ndarray
    x: np.ndarray
    Lam: complex
    lamhat: np.ndarray | None = None  # spectrum of the full matrix, if known

    def assemble(self) -> np.ndarray:
        k = len(self.lam)
        M = np.zeros((k + 1, k + 1), dtype=complex)
        M[:k, :k] = np.diag(self.lam)
        M[:k, k] = self.x
        M[k, :k] = 1
        M[k, k] = self.Lam
        return M


def split(Ahat: np.ndarray):
    Ahat = np.asarray(Ahat, dtype=complex)
    return Ahat[:-1, :-1], Ahat[:-1, -1], Ahat[-1, :-1], Ahat[-1, -1]


def companion(r: Sequence[complex]) -> np.ndarray:
    """Subdiagonal ones and last column ``r``."""
    k = len(r)
    C = np.zeros((k, k), dtype=complex)
    C[np.arange(1, k), np.arange(k - 1)] = 1
    C[:, -1] = r
    return C


# --- spectra -------------------------------------------------------------

def spectral_scale(vals) -> float:
    vals = np.asarray(vals)
    return 1.0 + (float(np.max(np.abs(vals))) if vals.size else 0.0)


def min_separation(vals) -> float:
    vals = np.asarray(vals)
    if vals.size < 2:
        return np.inf
    d = np.abs(vals[:, None] - vals[None, :])
    d[np.diag_indices(vals.size)] = np.inf
    return float(d.min())


def sorted_spectrum(vals, rtol: float = SEP_RTOL) -> np.ndarray:
    """Eigenvalues in lexicographic (real, imag) order; near-ties are refused."""
    vals = np.asarray(vals, dtype=complex)
    if min_separation(vals) <= rtol * spectral_scale(vals):
        raise DegenerateInputError("eigenvalues are not separated")
    return vals[np.lexsort((vals.imag, vals.real))]


def is_regular_semisimple(M: np.ndarray, rtol: float = SEP_RTOL) -> bool:
    """Distinct eigenvalues, separated beyond both ``rtol`` and rounding noise.

    Rounding moves an eigenvalue by about ``eps * kappa * |M|`` (``kappa`` its
    condition number); a defective eigenvalue splits by exactly that much, so
    requiring the gap to beat it rejects Jordan blocks of any size.
    """
    M = np.asarray(M, dtype=complex)
    if M.shape[0] == 1:
        return True
    vals, V = np.linalg.eig(M)
    sep = min_separation(vals)
    if not sep > rtol * spectral_scale(vals):
        return False
    try:
        W = np.linalg.inv(V)
    except np.linalg.LinAlgError:
        return False
    kappa = float(np.max(np.linalg.norm(V, axis=0) * np.linalg.norm(W, axis=1)))
    noise = EIG_NOISE_FACTOR * np.finfo(float).eps * kappa * np.linalg.norm(M, 2)
    return bool(sep > noise)


# --- membership ----------------------------------------------------------

def _observable(A: np.ndarray, y: np.ndarray, rtol: float = OBS_RTOL) -> bool:
    """Rank of the orthonormalized Krylov rows ``y, yA, yA^2, ...`` is full."""
    k = A.shape[0]
    ny = np.linalg.norm(y)
    if ny == 0:
        return False
    Q = (y / ny)[None, :]
    scale = 1.0 + np.linalg.norm(A, 2)
    v = Q[0]
    for _ in range(k - 1):
        w = v @ A
        w = w - (w @ Q.conj().T) @ Q
        w = w - (w @ Q.conj().T) @ Q
        nw = np.linalg.norm(w)
        if nw <= rtol * scale:
            return False
        v = w / nw
        Q = np.vstack([Q, v])
    return True


def in_g0(Ahat: np.ndarray, rtol: float = OBS_RTOL) -> bool:
    """``A`` is cyclic and no eigenvector of ``A`` is killed by ``y``.

    Both conditions together are equivalent to observability of ``(A, y)``:
    the row space spanned by ``y A^n`` is everything.
    """
    A, _, y, _ = split(Ahat)
    return _observable(A, y, rtol)


def in_g1(Ahat: np.ndarray, rtol: float = SEP_RTOL) -> bool:
    Ahat = np.asarray(Ahat, dtype=complex)
    return (in_g0(Ahat) and is_regular_semisimple(Ahat[:-1, :-1], rtol)
            and is_regular_semisimple(Ahat, rtol))


# --- the slice -----------------------------------------------------------

def lemma_x_solve(A: np.ndarray, y: np.ndarray, rtol: float = X_COND_RTOL) -> np.ndarray:
    """Unique polynomial ``X`` in the companion matrix ``A`` with last row ``y``."""
    A = np.asarray(A, dtype=complex)
    y = np.asarray(y, dtype=complex).ravel()
    k = A.shape[0]
    rows = [np.eye(k, dtype=complex)[-1]]
    for _ in range(k - 1):
        rows.append(rows[-1] @ A)
    R = np.array(rows)
    c = np.linalg.solve(R.T, y)
    X = np.zeros((k, k), dtype=complex)
    P = np.eye(k, dtype=complex)
    for ci in c:
        X += ci * P
        P = P @ A
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] <= rtol * s[0]:
        raise DegenerateInputError("y pairs to zero with an eigenvector of A")
    return X


def _cyclic_vector(A: np.ndarray, seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    k = A.shape[0]

    def krylov(v):
        cols = [v]
        for _ in range(k - 1):
            cols.append(A @ cols[-1])
        return np.column_stack(cols)

    best, best_cond = None, np.inf
    for c in range(k):
        K = krylov(np.eye(k, dtype=complex)[:, c])
        cond = np.linalg.cond(K)
        if cond < KRYLOV_COND_OK:
            return K, np.linalg.solve(K, A @ K[:, -1])
        if cond < best_cond:
            best, best_cond = K, cond
    rng = np.random.default_rng(seed)
    for _ in range(16):
        v = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        K = krylov(v)
        cond = np.linalg.cond(K)
        if cond < best_cond:
            best, best_cond = K, cond
    if not np.isfinite(best_cond) or best_cond > 1e14:
        raise DegenerateInputError("A has no numerically cyclic vector")
    return best, np.linalg.solve(best, A @ best[:, -1])


def to_slice(Ahat: np.ndarray, seed: int = 0) -> Tuple[SliceForm, np.ndarray]:
    """Return ``(sf, g)`` with ``blockdiag(g,1) Ahat blockdiag(g,1)^-1 = sf.assemble()``."""
    Ahat = np.asarray(Ahat, dtype=complex)
    if not in_g0(Ahat):
        raise DegenerateInputError("matrix is outside the slice domain")
    A, x, y, Lam = split(Ahat)
    K, r = _cyclic_vector(A, seed)
    C = companion(r)
    X = lemma_x_solve(C, y @ K)
    g = X @ np.linalg.inv(K)
    s = np.append(g @ x, Lam)
    return SliceForm(r, s), g


# --- characteristic polynomials -----------------------------------------
# coefficient lists are constant term first; plain Python arithmetic keeps
# exact inputs (Fraction, GaussQ) exact.

def _poly_mul_linear(q: List, root) -> List:
    """Coefficients of ``(z - root) q(z)``."""
    out = [0 * root] * (len(q) + 1)
    for n, c in enumerate(q):
        out[n + 1] = out[n + 1] + c
        out[n] = out[n] - root * c
    return out


def charpolys_from_slice(sf) -> Tuple[List, List]:
    r, s = list(sf.r), list(sf.s)
    k = len(r)
    q = [-ri for ri in r] + [1]
    qhat = _poly_mul_linear(q, s[k])
    for n in range(k):
        qhat[n] = qhat[n] - s[n]
    return q, qhat


def slice_from_charpolys(q: Sequence, qhat: Sequence, exact: bool = False):
    """Inverse of :func:`charpolys_from_slice` for monic ``q`` (deg k), ``qhat`` (deg k+1)."""
    q, qhat = list(q), list(qhat)
    k = len(q) - 1
    if len(qhat) != k + 2 or q[k] != 1 or qhat[k + 1] != 1:
        raise ValueError("expected monic polynomials of degrees k and k+1")
    r = [-c for c in q[:k]]
    s_last = q[k - 1] - qhat[k]
    zq = _poly_mul_linear(q, s_last)
    s = [zq[n] - qhat[n] for n in range(k)] + [s_last]
    if exact:
        return r, s
    return SliceForm(np.array([complex(v) for v in r]), np.array([complex(v) for v in s]))


def charpoly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial, constant term first (from eigenvalues)."""
    return np.poly(np.linalg.eigvals(np.asarray(M, dtype=complex)))[::-1]


# --- strongly semisimple canonical form ---------------------------------

def x_from_spectra(lam, lamhat) -> np.ndarray:
    lam = np.asarray(lam, dtype=complex)
    lamhat = np.asarray(lamhat, dtype=complex)
    x = np.empty(lam.size, dtype=complex)
    for i, li in enumerate(lam):
        others = np.delete(lam, i)
        x[i] = -np.prod(li - lamhat) / np.prod(li - others)
    return x


def canonical_from_spectra(lam, lamhat) -> CanonicalSS:
    lam = np.asarray(lam, dtype=complex)
    lamhat = np.asarray(lamhat, dtype=complex)
    return CanonicalSS(lam, x_from_spectra(lam, lamhat), complex(lamhat.sum() - lam.sum()), lamhat)


def canonical_ss(Ahat: np.ndarray, rtol: float = SEP_RTOL,
                 order: Tuple[np.ndarray, np.ndarray] | None = None):
    """Conjugate into canonical form; returns ``(CanonicalSS, g)``.

    Eigenvalues are sorted lexicographically unless ``order`` supplies
    reference spectra ``(lam_ref, lamhat_ref)`` to match against.
    """
    Ahat = np.asarray(Ahat, dtype=complex)
    if not in_g1(Ahat, rtol):
        raise DegenerateInputError("matrix is not strongly semisimple")
    A, _, y, _ = split(Ahat)
    vals, V = np.linalg.eig(A)
    lamhat = np.linalg.eigvals(Ahat)
    if order is None:
        perm = np.lexsort((vals.imag, vals.real))
        lamhat = sorted_spectrum(lamhat, rtol)
    else:
        perm = match_order(vals, order[0])
        lamhat = lamhat[match_order(lamhat, order[1])]
    vals, V = vals[perm], V[:, perm]
    yV = y @ V
    if np.min(np.abs(yV)) <= OBS_RTOL * np.linalg.norm(y) * np.linalg.norm(V, 2):
        raise DegenerateInputError("last row annihilates an eigenvector")
    g = np.diag(yV) @ np.linalg.inv(V)
    return canonical_from_spectra(vals, lamhat), g


def match_order(vals, ref) -> np.ndarray:
    """Permutation ``p`` such that ``vals[p]`` is closest to ``ref`` entrywise."""
    vals, ref = np.asarray(vals), np.asarray(ref)
    dist = np.abs(ref[:, None] - vals[None, :])
    perm = -np.ones(ref.size, dtype=int)
    used = set()
    for flat in np.argsort(dist, axis=None):
        a, b = divmod(int(flat), vals.size)
        if perm[a] < 0 and b not in used:
            perm[a] = b
            used.add(b)
    return perm


def g_pair(lam, lamhat) -> Tuple[np.ndarray, np.ndarray]:
    """Explicit diagonalizer ``g`` of the canonical matrix and its inverse."""
    lam = np.asarray(lam, dtype=complex)
    lamhat = np.asarray(lamhat, dtype=complex)
    k = lam.size
    if min_separation(lam) == 0 or min_separation(lamhat) == 0:
        raise DegenerateInputError("eigenvalue collision")
    g = np.empty((k + 1, k + 1), dtype=complex)
    ginv = np.empty((k + 1, k + 1), dtype=complex)
    for i in range(k + 1):
        den = np.prod(lamhat[i] - np.delete(lamhat, i))
        full = np.prod(lamhat[i] - lam)
        for j in range(k):
            g[i, j] = np.prod(lamhat[i] - np.delete(lam, j)) / den
        g[i, k] = full / den
    for i in range(k):
        den = np.prod(lam[i] - np.delete(lam, i))
        for j in range(k + 1):
            ginv[i, j] = np.prod(lam[i] - np.delete(lamhat, j)) / den
    ginv[k, :] = 1
    return g, ginv
