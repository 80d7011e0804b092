"""Tame symplectic automorphisms of the path algebra and their action on
ADHM data, orbit strata, and the normalization into the Calogero-Moser locus.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np

from .errors import DegenerateInputError, EndpointError, SearchBudgetError
from .ncalg import (ARROWS, ONE, GaussQ, PathPoly, canonical_rotation, format_coefficient,
                    is_trivial, parse_coefficient, path_mul, split_term, symplectic_elements)
from .rep import AdhmData, adhm_from_rep, evaluate, rep_from_adhm
from .slice_forms import SEP_RTOL, is_regular_semisimple, min_separation, spectral_scale

Word2 = Tuple[str, ...]
LETTERS = ("a", "b")


# --- potentials ----------------------------------------------------------

class Potential:
    """Cyclic polynomial in the letters ``a`` and ``b`` (where ``b = xy``).

    Coefficients are exact :class:`GaussQ` values or, for numerically
    constructed potentials, Python complex numbers.  Constant terms are dropped.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Dict[Word2, object] | Sequence[Tuple[Word2, object]] = ()):
        items = terms.items() if isinstance(terms, dict) else terms
        acc: Dict[Word2, object] = {}
        for word, c in items:
            word = tuple(word)
            if not word:
                continue
            if any(u not in LETTERS for u in word):
                raise ValueError(f"potential letters are a and b, got {word}")
            if not isinstance(c, (GaussQ, complex, float)):
                c = GaussQ.coerce(c)
            key = min(word[t:] + word[:t] for t in range(len(word)))
            acc[key] = acc[key] + c if key in acc else c
        self.terms = {w: c for w, c in acc.items() if c != 0}

    @property
    def is_exact(self) -> bool:
        return all(isinstance(c, GaussQ) for c in self.terms.values())

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def __neg__(self) -> "Potential":
        return Potential({w: -c for w, c in self.terms.items()})

    def __eq__(self, other):
        return isinstance(other, Potential) and self.terms == other.terms

    def partial(self, letter: str) -> Dict[Word2, object]:
        """Cyclic derivative: a linear combination of (open) words."""
        out: Dict[Word2, object] = {}
        for word, c in self.terms.items():
            for t, u in enumerate(word):
                if u == letter:
                    rest = word[t + 1:] + word[:t]
                    out[rest] = out[rest] + c if rest in out else c
        return {w: c for w, c in out.items() if c != 0}

    @classmethod
    def parse(cls, text: str) -> "Potential":
        terms = []
        for line in text.replace(";", "\n").splitlines():
            line = line.strip()
            if not line or line == "0":
                continue
            coeff, word = split_term(line)
            letters = tuple(s.strip() for s in word.split("."))
            terms.append((letters, parse_coefficient(coeff, exact=False)))
        return cls(terms)

    def dump(self) -> str:
        if not self.terms:
            return "0"
        return "\n".join(f"{format_coefficient(self.terms[w])} * {'.'.join(w)}"
                         for w in sorted(self.terms, key=lambda w: (len(w), w)))

    @classmethod
    def from_poly_times_b(cls, coeffs: Sequence[complex], sign: float = 1.0) -> "Potential":
        """``sign * p(a) b`` for ``p`` given constant term first."""
        return cls([(("a",) * n + ("b",), complex(sign * c)) for n, c in enumerate(coeffs)])

    def __repr__(self):
        return f"Potential({self.dump()!r})"


def _letter_path(letter: str, starred: bool = False):
    if letter == "a":
        return ("a*",) if starred else ("a",)
    return ("y*", "x*") if starred else ("x", "y")


def _linear_to_path(lin: Dict[Word2, object], starred: bool = False) -> PathPoly:
    terms = []
    for word, c in lin.items():
        path: Tuple[str, ...] = ()
        for u in word:
            path += _letter_path(u, starred)
        terms.append((path if path else ("p1",), c))
    return PathPoly(terms)


def _require_exact(f: Potential):
    if not f.is_exact:
        raise TypeError("symbolic images need exact (Gaussian rational) coefficients")


def lambda_images(f: Potential) -> Dict[str, PathPoly]:
    """Images of the six arrows under the strictly triangular map of ``f``."""
    _require_exact(f)
    da = _linear_to_path(f.partial("a"))
    db = _linear_to_path(f.partial("b"))
    img = {u: PathPoly.arrow(u) for u in ARROWS}
    img["a*"] = img["a*"] + da
    img["x*"] = img["x*"] + path_mul(PathPoly.arrow("y"), db)
    img["y*"] = img["y*"] + path_mul(db, PathPoly.arrow("x"))
    return img


def opp_images(f: Potential) -> Dict[str, PathPoly]:
    """Images under the opposite triangular map (starred arrows fixed)."""
    _require_exact(f)
    da = _linear_to_path(f.partial("a"), starred=True)
    db = _linear_to_path(f.partial("b"), starred=True)
    img = {u: PathPoly.arrow(u) for u in ARROWS}
    img["a"] = img["a"] + da
    img["x"] = img["x"] + path_mul(db, PathPoly.arrow("y*"))
    img["y"] = img["y"] + path_mul(PathPoly.arrow("x*"), db)
    return img


def _check_endpoints(images: Dict[str, PathPoly]):
    for arrow, img in images.items():
        want = ARROWS[arrow]
        for path, _ in img.items():
            if is_trivial(path):
                v = 1 if path[0] == "p1" else 2
                got = (v, v)
            else:
                got = (ARROWS[path[-1]][0], ARROWS[path[0]][1])
            if got != want:
                raise EndpointError(f"image of {arrow} contains a path with endpoints {got}")


def apply_images(images: Dict[str, PathPoly], p: PathPoly) -> PathPoly:
    """Apply the algebra endomorphism defined on arrows by ``images``."""
    _check_endpoints(images)
    out = PathPoly()
    for path, c in p.items():
        if is_trivial(path):
            out = out + PathPoly({path: c})
            continue
        acc = images[path[0]]
        for u in path[1:]:
            acc = path_mul(acc, images[u])
        out = out + acc.scale(c)
    return out


def check_preserves_c(images: Dict[str, PathPoly]) -> bool:
    c, _, _ = symplectic_elements()
    return (apply_images(images, c) - c).is_zero()


# --- generators ----------------------------------------------------------

@dataclass(frozen=True)
class Triangular:
    f: Potential

    def to_json(self):
        return {"type": "tri", "f": self.f.dump()}


@dataclass(frozen=True)
class OppTriangular:
    f: Potential

    def to_json(self):
        return {"type": "opp", "f": self.f.dump()}


@dataclass(frozen=True, eq=False)
class UnimodularAffine:
    S: np.ndarray
    t: np.ndarray = field(default_factory=lambda: np.zeros(2, dtype=complex))

    def __post_init__(self):
        S = np.array(self.S, dtype=complex).reshape(2, 2)
        if abs(np.linalg.det(S) - 1) > 1e-12:
            raise ValueError("affine part must have determinant 1")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "t", np.array(self.t, dtype=complex).reshape(2))

    def to_json(self):
        from .serialize import matrix_to_json, vector_to_json
        return {"type": "asl2", "S": matrix_to_json(self.S), "t": vector_to_json(self.t)}


@dataclass(frozen=True, eq=False)
class GL2:
    T: np.ndarray

    def __post_init__(self):
        T = np.array(self.T, dtype=complex).reshape(2, 2)
        if abs(np.linalg.det(T)) < 1e-14 * (1 + np.linalg.norm(T)) ** 2:
            raise ValueError("T must be invertible")
        object.__setattr__(self, "T", T)

    def to_json(self):
        from .serialize import matrix_to_json
        return {"type": "gl2", "T": matrix_to_json(self.T)}


TameGenerator = Union[Triangular, OppTriangular, UnimodularAffine, GL2]


def generator_from_json(obj) -> TameGenerator:
    from .serialize import matrix_from_json, vector_from_json
    kind = obj.get("type")
    if kind == "tri":
        return Triangular(Potential.parse(obj["f"]))
    if kind == "opp":
        return OppTriangular(Potential.parse(obj["f"]))
    if kind == "gl2":
        return GL2(matrix_from_json(obj["T"]))
    if kind == "asl2":
        return UnimodularAffine(matrix_from_json(obj["S"]), vector_from_json(obj["t"]))
    raise ValueError(f"unknown generator type {kind!r}")


def word_to_json(word: Sequence[TameGenerator]):
    return [g.to_json() for g in word]


def word_from_json(items) -> List[TameGenerator]:
    return [generator_from_json(o) for o in items]


# --- action on ADHM data --------------------------------------------------

def eval_linear(lin: Dict[Word2, object], Ma: np.ndarray, Mb: np.ndarray) -> np.ndarray:
    """Evaluate a linear combination of words in ``a, b`` on matrices."""
    k = Ma.shape[0]
    out = np.zeros((k, k), dtype=complex)
    mats = {"a": Ma, "b": Mb}
    for word, c in lin.items():
        P = np.eye(k, dtype=complex)
        for u in word:
            P = P @ mats[u]
        out += complex(c) * P
    return out


def act(gen: TameGenerator, d: AdhmData, check: bool = True, tol: float = 1e-10) -> AdhmData:
    """Action of a tame generator on an ADHM datum."""
    if check:
        d.require_on_shell(tol)
    if isinstance(gen, (Triangular, OppTriangular)):
        if gen.f.is_exact:
            imgs = lambda_images(gen.f) if isinstance(gen, Triangular) else opp_images(gen.f)
            return _act_by_images(imgs, d)
        return _act_numeric(gen, d)
    if isinstance(gen, UnimodularAffine):
        (s11, s12), (s21, s22) = gen.S
        t1, t2 = gen.t
        eye = np.eye(d.k)
        return d.replace(A=s11 * d.A + s12 * d.B + t1 * eye, B=s21 * d.A + s22 * d.B + t2 * eye)
    if isinstance(gen, GL2):
        return d.replace(i=d.i @ gen.T.T, j=np.linalg.inv(gen.T).T @ d.j)
    raise TypeError(f"unknown generator {gen!r}")


def _act_by_images(images: Dict[str, PathPoly], d: AdhmData) -> AdhmData:
    r = rep_from_adhm(d)
    k = d.k
    blocks = {u: evaluate(img, r) for u, img in images.items()}
    new = dict(A=blocks["a"][:k, :k], B=blocks["a*"][:k, :k],
               X1=blocks["x"][:k, k:], X2=blocks["y*"][:k, k:],
               Y1=blocks["y"][k:, :k], Y2=blocks["x*"][k:, :k])
    from .rep import QuiverRep
    return adhm_from_rep(QuiverRep(k, 1, **new), d.tau)


def _act_numeric(gen, d: AdhmData) -> AdhmData:
    r = rep_from_adhm(d)
    if isinstance(gen, Triangular):
        Mb = r.X1 @ r.Y1
        Da = eval_linear(gen.f.partial("a"), r.A, Mb)
        Db = eval_linear(gen.f.partial("b"), r.A, Mb)
        X2, Y2 = r.X2 + Db @ r.X1, r.Y2 + r.Y1 @ Db
        return adhm_from_rep(type(r)(d.k, 1, r.A, r.B + Da, r.X1, X2, r.Y1, Y2), d.tau)
    Mb = r.X2 @ r.Y2
    Da = eval_linear(gen.f.partial("a"), r.B, Mb)
    Db = eval_linear(gen.f.partial("b"), r.B, Mb)
    X1, Y1 = r.X1 + Db @ r.X2, r.Y1 + r.Y2 @ Db
    return adhm_from_rep(type(r)(d.k, 1, r.A + Da, r.B, X1, r.X2, Y1, r.Y2), d.tau)


def apply_word(word: Sequence[TameGenerator], d: AdhmData, check: bool = True) -> AdhmData:
    for gen in word:
        d = act(gen, d, check=check)
    return d


def triangular_closed_form(pcoeffs: Sequence[complex], d: AdhmData):
    """``(i, j)`` after ``Triangular(-p(a) b)`` by the explicit 2x2 block formula."""
    from .darboux import matrix_poly
    P = matrix_poly(pcoeffs, d.A)
    i = np.column_stack([d.i1, d.i2 + P @ d.i1])
    j = np.vstack([d.j1 - d.j2 @ P, d.j2])
    return i, j


# --- invariants and strata ----------------------------------------------

def e_image(d: AdhmData) -> np.ndarray:
    """2k x 2k block matrix ``[[i1 j1, i1 j2], [i2 j1, i2 j2]]``."""
    blocks = [[np.outer(d.i[:, r], d.j[s]) for s in range(2)] for r in range(2)]
    return np.block(blocks)


def charpoly_fl(M: np.ndarray) -> np.ndarray:
    """Characteristic polynomial by Faddeev-LeVerrier, constant term first."""
    n = M.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[n] = 1
    Mk = np.zeros_like(M, dtype=complex)
    eye = np.eye(n)
    for m in range(1, n + 1):
        Mk = M @ (Mk + coeffs[n - m + 1] * eye)
        coeffs[n - m] = -np.trace(Mk) / m
    return coeffs


def charpoly_gap(M1: np.ndarray, M2: np.ndarray) -> float:
    """Largest coefficient difference of the two characteristic polynomials.

    The coefficient of ``x^(n-m)`` is a degree-m form in the entries, so it
    is compared on the scale ``max(1, |M|)^m``.
    """
    s = max(1.0, float(np.linalg.norm(M1, 2)), float(np.linalg.norm(M2, 2)))
    # scaling the matrices by 1/s divides the degree-m coefficient by s^m
    c1, c2 = charpoly_fl(np.asarray(M1) / s), charpoly_fl(np.asarray(M2) / s)
    return float(np.abs(c1[:-1] - c2[:-1]).max(initial=0.0))


class Stratum(NamedTuple):
    kind: str  # "albe1" (diagonalizable) or "albe2" (Jordan block)
    alpha: Tuple[complex, ...]
    is_N1: bool


def classify_ji(M: np.ndarray, k: int, tau: complex, tol: float = 1e-9) -> Stratum:
    M = np.asarray(M, dtype=complex)
    scale = 1.0 + float(np.linalg.norm(M))
    tr, det = np.trace(M), np.linalg.det(M)
    disc = np.sqrt(tr * tr - 4 * det)
    a1, a2 = (tr - disc) / 2, (tr + disc) / 2
    is_n1 = abs(np.trace(M @ M) - (k * tau) ** 2) <= tol * scale ** 2
    if abs(a1 - a2) <= np.sqrt(tol) * scale:
        alpha = tr / 2
        if np.linalg.norm(M - alpha * np.eye(2)) > np.sqrt(tol) * scale:
            return Stratum("albe2", (complex(alpha),), bool(is_n1))
        return Stratum("albe1", (complex(alpha), complex(alpha)), bool(is_n1))
    pair = sorted([complex(a1), complex(a2)], key=lambda z: (round(z.real, 12), z.imag))
    return Stratum("albe1", tuple(pair), bool(is_n1))


def stratum(d: AdhmData, tol: float = 1e-9) -> Stratum:
    if d.tau == 0:
        raise DegenerateInputError("strata are classified only for tau != 0")
    d.require_on_shell(1e-10)
    return classify_ji(d.j @ d.i, d.k, d.tau, tol)


def tr_ji_sq(d: AdhmData) -> complex:
    M = d.j @ d.i
    return complex(np.trace(M @ M))


def tr_ji_sq_perturbation(d: AdhmData) -> Tuple[complex, complex]:
    """First- and second-order coefficients of ``tr (ji)^2`` along ``f = s ab``."""
    A = d.A
    i1, i2, j1, j2 = d.i1, d.i2, d.j1, d.j2
    j1i1, j2i2, j2i1 = j1 @ i1, j2 @ i2, j2 @ i1
    j2Ai1, j2Ai2, j1Ai1 = j2 @ A @ i1, j2 @ A @ i2, j1 @ A @ i1
    linear = 2 * (j1i1 - j2i2) * j2Ai1 + 2 * j2i1 * (j2Ai2 - j1Ai1)
    quad = 2 * j2Ai1 ** 2 - 2 * j2i1 * (j2 @ A @ A @ i1)
    return complex(linear), complex(quad)


# --- search for a regular semisimple perturbation ----------------------

def _rank(M: np.ndarray, rtol: float = 1e-8) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def shiota_search(C: np.ndarray, D: np.ndarray, tau: complex, epsilon: float = 1e-2,
                  seed: int = 0, budget: int = 1000, halvings: int = 8,
                  sep_rtol: float = SEP_RTOL) -> np.ndarray:
    """Small ``p`` (constant term first) making ``C + p(D)`` regular semisimple."""
    from .darboux import matrix_poly
    C = np.asarray(C, dtype=complex)
    D = np.asarray(D, dtype=complex)
    n = C.shape[0]
    if tau == 0:
        raise DegenerateInputError("tau must be nonzero")
    if _rank(C @ D - D @ C - tau * np.eye(n)) != 1:
        raise DegenerateInputError("[C, D] - tau has rank different from 1")
    zero = np.zeros(n, dtype=complex)
    if is_regular_semisimple(C, sep_rtol):
        return zero
    rng = np.random.default_rng(seed)
    for r in range(halvings):
        scale = epsilon / 2 ** r
        for _ in range(budget):
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            p = v / np.linalg.norm(v) * scale * rng.uniform(0.5, 1.0)
            if is_regular_semisimple(C + matrix_poly(p, D), sep_rtol):
                return p
    raise SearchBudgetError(f"no regular semisimple perturbation in {budget * halvings} draws")


# --- normalization into the Calogero-Moser locus -------------------------

class Normalization(NamedTuple):
    word: List[TameGenerator]
    point: AdhmData
    gauge: np.ndarray  # point == gauge_act(gauge, apply_word(word, input))


def replay_gap(d: AdhmData, res: "Normalization") -> float:
    """Entrywise distance, relative to scale, between the replayed word and the result."""
    from .rep import gauge_act
    r = gauge_act(res.gauge, apply_word(res.word, d, check=False))
    p = res.point
    return max(float(np.max(np.abs(getattr(r, n) - getattr(p, n)))) for n in "ABij") / p.scale()


def in_cm_locus(d: AdhmData, tol: float = 1e-9) -> bool:
    return bool(np.linalg.norm(d.i2) + np.linalg.norm(d.j2) <= tol * d.scale())


def _interpolate(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    return np.linalg.solve(np.vander(nodes, increasing=True), values)


def normalize_to_cm(d: AdhmData, seed: int = 0, tol: float = 1e-9,
                    entry_rtol: float = 1e-6, max_tries: int = 100) -> Normalization:
    """Move a datum with regular semisimple ``A`` into ``{i2 = 0, j2 = 0}``."""
    from .rep import gauge_act
    if d.tau == 0:
        raise DegenerateInputError("normalization needs tau != 0")
    d.require_on_shell(1e-10)
    k = d.k
    if in_cm_locus(d, tol):
        return Normalization([], d, np.eye(k, dtype=complex))
    if not is_regular_semisimple(d.A):
        raise DegenerateInputError("A is not regular semisimple")
    vals, V = np.linalg.eig(d.A)
    gauge = np.linalg.inv(V)
    cur = gauge_act(gauge, d)
    cur = cur.replace(A=np.diag(vals))  # drop rounding off the diagonal
    word: List[TameGenerator] = []

    def push(gen):
        nonlocal cur
        word.append(gen)
        cur = act(gen, cur, check=False)

    # make every entry of i1 nonzero
    rng = np.random.default_rng(seed)
    inorm = np.linalg.norm(cur.i)
    if np.min(np.abs(cur.i1)) <= entry_rtol * inorm:
        for _ in range(max_tries):
            T = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            T = T / np.sqrt(np.linalg.det(T))
            if np.min(np.abs((cur.i @ T.T)[:, 0])) > entry_rtol * inorm:
                push(GL2(T))
                break
        else:
            raise DegenerateInputError("could not make all entries of i1 nonzero")
    # kill i2 with p(A) i1
    p = _interpolate(vals, -cur.i2 / cur.i1)
    push(Triangular(Potential.from_poly_times_b(p, -1.0)))
    swap = np.array([[0, 1], [1, 0]], dtype=complex)
    push(GL2(swap))
    j2 = cur.j2
    if np.min(np.abs(j2)) <= entry_rtol * np.linalg.norm(cur.j):
        raise DegenerateInputError("an entry of j vanishes after the first interpolation")
    p = _interpolate(vals, cur.j1 / j2)
    push(Triangular(Potential.from_poly_times_b(p, -1.0)))
    push(GL2(swap))
    if not in_cm_locus(cur, tol):
        raise DegenerateInputError(
            f"normalization residual {np.linalg.norm(cur.i2) + np.linalg.norm(cur.j2):.3e} too large")
    return Normalization(word, cur, gauge)
