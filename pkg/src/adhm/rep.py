"""Matrix representations of the doubled quiver and ADHM data.

Arrow dictionary (fixed once, here):

    a -> A      a* -> B
    x -> X1     y* -> X2      (k x l blocks, vertex 2 to vertex 1)
    y -> Y1     x* -> Y2      (l x k blocks, vertex 1 to vertex 2)

With this dictionary the evaluated moment map ``([A,B] + X1 Y2 - X2 Y1,
Y1 X2 - Y2 X1)`` is exactly the image of the two vertex parts of ``c``.
For ``l = 1`` the ADHM coordinates are ``i1 = -X1, i2 = X2, j1 = Y2,
j2 = Y1``; this is the only place where that sign map appears.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import DegenerateInputError, EndpointError, OffShellError
from .ncalg import ARROWS, Necklace, PathPoly, is_trivial, to_necklace

DEFAULT_TOL = 1e-10
GAUGE_COND_MAX = 1e12


def _frozen(m, shape=None) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


def comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


@dataclass(frozen=True, eq=False)
class QuiverRep:
    """Representation of the doubled quiver on (C^k, C^l)."""

    k: int
    l: int
    A: np.ndarray
    B: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    Y1: np.ndarray
    Y2: np.ndarray

    def __post_init__(self):
        k, l = self.k, self.l
        if k < 1 or l < 1:
            raise ValueError("dimensions must be positive")
        for name, shape in (("A", (k, k)), ("B", (k, k)), ("X1", (k, l)),
                            ("X2", (k, l)), ("Y1", (l, k)), ("Y2", (l, k))):
            object.__setattr__(self, name, _frozen(getattr(self, name), shape))

    def arrow_matrix(self, arrow: str) -> np.ndarray:
        return {"a": self.A, "a*": self.B, "x": self.X1, "y*": self.X2,
                "y": self.Y1, "x*": self.Y2}[arrow]

    @classmethod
    def random(cls, k: int, l: int, rng: np.random.Generator) -> "QuiverRep":
        def g(*shape):
            return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return cls(k, l, g(k, k), g(k, k), g(k, l), g(k, l), g(l, k), g(l, k))


# --- evaluation ----------------------------------------------------------

def _block_slices(k: int, l: int):
    return {1: slice(0, k), 2: slice(k, k + l)}


def _path_matrix(path, r: QuiverRep) -> np.ndarray:
    """Product of the arrow matrices along a path (right-to-left order)."""
    if is_trivial(path):
        n = r.k if path[0] == "p1" else r.l
        return np.eye(n, dtype=complex)
    out = r.arrow_matrix(path[0])
    for u in path[1:]:
        out = out @ r.arrow_matrix(u)
    return out


def _endpoints(path):
    if is_trivial(path):
        v = 1 if path[0] == "p1" else 2
        return v, v
    return ARROWS[path[-1]][0], ARROWS[path[0]][1]


def evaluate(p: PathPoly, r: QuiverRep) -> np.ndarray:
    """Image of ``p`` as a (k+l) x (k+l) block matrix."""
    sl = _block_slices(r.k, r.l)
    out = np.zeros((r.k + r.l, r.k + r.l), dtype=complex)
    for path, c in p.items():
        t, h = _endpoints(path)
        out[sl[h], sl[t]] += complex(c) * _path_matrix(path, r)
    return out


def trace_R(f: Necklace | PathPoly, r: QuiverRep) -> Tuple[complex, complex]:
    """Traces of the two diagonal blocks of the evaluation of ``f``."""
    if isinstance(f, PathPoly):
        f = to_necklace(f)
    m = evaluate(f.representative(), r)
    return complex(np.trace(m[:r.k, :r.k])), complex(np.trace(m[r.k:, r.k:]))


def moment_nu(r: QuiverRep) -> Tuple[np.ndarray, np.ndarray]:
    first = comm(r.A, r.B) + r.X1 @ r.Y2 - r.X2 @ r.Y1
    second = r.Y1 @ r.X2 - r.Y2 @ r.X1
    return first, second


# --- ADHM data -----------------------------------------------------------

@dataclass(frozen=True, eq=False)
class AdhmData:
    """ADHM datum ``(A, B, i, j)`` with deformation parameter ``tau``.

    ``i`` is k x 2 with columns ``i1, i2``; ``j`` is 2 x k with rows ``j1, j2``.
    """

    k: int
    A: np.ndarray
    B: np.ndarray
    i: np.ndarray
    j: np.ndarray
    tau: complex = 0j

    def __post_init__(self):
        k = self.k
        if k < 1:
            raise ValueError("k must be positive")
        object.__setattr__(self, "A", _frozen(self.A, (k, k)))
        object.__setattr__(self, "B", _frozen(self.B, (k, k)))
        object.__setattr__(self, "i", _frozen(self.i, (k, 2)))
        object.__setattr__(self, "j", _frozen(self.j, (2, k)))
        object.__setattr__(self, "tau", complex(self.tau))

    @classmethod
    def from_parts(cls, A, B, i1, i2, j1, j2, tau=0j) -> "AdhmData":
        A = np.atleast_2d(np.asarray(A, dtype=complex))
        i = np.column_stack([np.ravel(i1), np.ravel(i2)])
        j = np.vstack([np.ravel(j1), np.ravel(j2)])
        return cls(A.shape[0], A, B, i, j, tau)

    @property
    def i1(self):
        return self.i[:, 0]

    @property
    def i2(self):
        return self.i[:, 1]

    @property
    def j1(self):
        return self.j[0, :]

    @property
    def j2(self):
        return self.j[1, :]

    def replace(self, **kw) -> "AdhmData":
        fields = dict(k=self.k, A=self.A, B=self.B, i=self.i, j=self.j, tau=self.tau)
        fields.update(kw)
        return AdhmData(**fields)

    def scale(self) -> float:
        return 1.0 + sum(float(np.linalg.norm(m)) for m in (self.A, self.B, self.i, self.j))

    def residual_norm(self) -> float:
        return float(np.linalg.norm(moment_residual(self)))

    def relative_residual(self) -> float:
        """Moment residual over ``scale()**2``; the residual is quadratic in the data."""
        return self.residual_norm() / self.scale() ** 2

    def is_on_shell(self, tol: float = DEFAULT_TOL) -> bool:
        return self.relative_residual() <= tol

    def require_on_shell(self, tol: float = DEFAULT_TOL):
        res = self.relative_residual()
        if res > tol:
            raise OffShellError(f"relative moment residual {res:.3e} exceeds {tol:.1e}")

    def __repr__(self):
        return f"AdhmData(k={self.k}, tau={self.tau})"


def moment_residual(d: AdhmData) -> np.ndarray:
    return comm(d.A, d.B) - d.i @ d.j - d.tau * np.eye(d.k)


def rep_from_adhm(d: AdhmData) -> QuiverRep:
    i1, i2 = d.i[:, [0]], d.i[:, [1]]
    j1, j2 = d.j[[0], :], d.j[[1], :]
    return QuiverRep(d.k, 1, d.A, d.B, -i1, i2, j2, j1)


def adhm_from_rep(r: QuiverRep, tau: complex = 0j) -> AdhmData:
    if r.l != 1:
        raise EndpointError(f"ADHM data need l = 1, got l = {r.l}")
    return AdhmData.from_parts(r.A, r.B, -r.X1, r.X2, r.Y2, r.Y1, tau)


def gauge_act(g: np.ndarray, d: AdhmData, cond_max: float = GAUGE_COND_MAX) -> AdhmData:
    """``(g A g^-1, g B g^-1, g i, j g^-1)``."""
    g = np.asarray(g, dtype=complex)
    if g.shape != (d.k, d.k):
        raise ValueError("gauge matrix has the wrong size")
    if not np.isfinite(g).all() or np.linalg.cond(g) > cond_max:
        raise DegenerateInputError("gauge matrix is singular or too ill-conditioned")
    gi = np.linalg.inv(g)
    return d.replace(A=g @ d.A @ gi, B=g @ d.B @ gi, i=g @ d.i, j=d.j @ gi)


# --- orbit invariants ----------------------------------------------------

def _letter_weights():
    letters = [("A", 1), ("B", 1)]
    letters += [(f"E{r}{s}", 2) for r in (1, 2) for s in (1, 2)]
    return letters


def invariant_words(max_weight: int = 6) -> List[Tuple[str, ...]]:
    """Canonical cyclic words in A, B and E_rs = i_r j_s up to total weight."""
    letters = _letter_weights()
    weight = dict(letters)
    seen = set()
    out = []
    frontier = [((), 0)]
    while frontier:
        nxt = []
        for word, w in frontier:
            for name, lw in letters:
                if w + lw > max_weight:
                    continue
                new = word + (name,)
                nxt.append((new, w + lw))
                canon = min(new[t:] + new[:t] for t in range(len(new)))
                if canon not in seen:
                    seen.add(canon)
                    out.append(canon)
        frontier = nxt
    out.sort(key=lambda wd: (sum(weight[c] for c in wd), wd))
    return out


def invariant_vector(d: AdhmData, max_weight: int = 6) -> np.ndarray:
    """Traces of all invariant words; a complete set of orbit coordinates in practice."""
    mats = {"A": d.A, "B": d.B}
    for r in (1, 2):
        for s in (1, 2):
            mats[f"E{r}{s}"] = np.outer(d.i[:, r - 1], d.j[s - 1, :])
    cache: Dict[Tuple[str, ...], np.ndarray] = {}

    def prod(word):
        if word in cache:
            return cache[word]
        m = mats[word[0]] if len(word) == 1 else prod(word[:-1]) @ mats[word[-1]]
        cache[word] = m
        return m

    return np.array([np.trace(prod(w)) for w in invariant_words(max_weight)])


def points_equal(d1: AdhmData, d2: AdhmData, tol: float = 1e-8, max_weight: int = 6) -> bool:
    """Whether two data lie in the same gauge orbit, judged by invariant traces."""
    if d1.k != d2.k or abs(d1.tau - d2.tau) > tol * (1 + abs(d1.tau)):
        return False
    v1, v2 = invariant_vector(d1, max_weight), invariant_vector(d2, max_weight)
    bound = tol * np.maximum(1.0, np.maximum(np.abs(v1), np.abs(v2)))
    return bool(np.all(np.abs(v1 - v2) <= bound))
