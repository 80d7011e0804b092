"""Exact arithmetic in the path algebra of the doubled instanton quiver.

The quiver has two vertices.  Vertex 1 carries the loops ``a`` and ``a*``;
``x`` runs 2 -> 1, ``y`` runs 1 -> 2 and the starred arrows reverse them.
Paths are written right to left, so the word ``x.y`` means "first ``y``,
then ``x``" and is a loop at vertex 1.  This is also the order in which the
corresponding matrices multiply.

Coefficients are Gaussian rationals (:class:`GaussQ`); every identity in this
module holds exactly, with no floating point involved.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

from .errors import DegreeError, EndpointError

MAX_DEGREE = 64

# arrow -> (tail, head)
ARROWS: Dict[str, Tuple[int, int]] = {
    "a": (1, 1),
    "a*": (1, 1),
    "x": (2, 1),
    "x*": (1, 2),
    "y": (1, 2),
    "y*": (2, 1),
}
IDEMPOTENTS = {"p1": 1, "p2": 2}
STAR = {"a": "a*", "x": "x*", "y": "y*", "a*": "a", "x*": "x", "y*": "y"}
UNSTARRED = ("a", "x", "y")

Path = Tuple[str, ...]


class GaussQ:
    """Gaussian rational ``re + im*i`` with :class:`fractions.Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussQ is immutable")

    @classmethod
    def coerce(cls, value) -> "GaussQ":
        if isinstance(value, GaussQ):
            return value
        if isinstance(value, (int, Fraction)):
            return cls(value, 0)
        if isinstance(value, complex) or isinstance(value, float):
            raise TypeError("floating point coefficients are not exact; use Fraction")
        raise TypeError(f"cannot use {value!r} as an exact coefficient")

    def __add__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussQ(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussQ(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussQ.coerce(other) - self

    def __mul__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussQ(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = GaussQ.coerce(other)
        n = o.re * o.re + o.im * o.im
        if n == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * GaussQ(o.re, -o.im)
        return GaussQ(num.re / n, num.im / n)

    def __rtruediv__(self, other):
        return GaussQ.coerce(other) / self

    def __neg__(self):
        return GaussQ(-self.re, -self.im)

    def __pos__(self):
        return self

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        try:
            o = GaussQ.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"GaussQ({self.re}, {self.im})"

    def __str__(self):
        return format_coefficient(self)


Coeff = Union[GaussQ, int, Fraction]
ONE = GaussQ(1)
ZERO = GaussQ(0)


# --- path bookkeeping -----------------------------------------------------

def is_trivial(path: Path) -> bool:
    return len(path) == 1 and path[0] in IDEMPOTENTS


def head(path: Path) -> int:
    if is_trivial(path):
        return IDEMPOTENTS[path[0]]
    return ARROWS[path[0]][1]


def tail(path: Path) -> int:
    if is_trivial(path):
        return IDEMPOTENTS[path[0]]
    return ARROWS[path[-1]][0]


def degree_of(path: Path) -> int:
    return 0 if is_trivial(path) else len(path)


def is_closed(path: Path) -> bool:
    return head(path) == tail(path)


def validate_path(path: Path) -> Path:
    path = tuple(path)
    if not path:
        raise EndpointError("empty path; use p1 or p2 for trivial paths")
    if is_trivial(path):
        return path
    for u in path:
        if u not in ARROWS:
            raise EndpointError(f"unknown arrow {u!r}")
    for left, right in zip(path, path[1:]):
        if ARROWS[left][0] != ARROWS[right][1]:
            raise EndpointError(f"{left} cannot follow {right} in {'.'.join(path)}")
    return path


def concat(p: Path, q: Path):
    """Concatenate two paths (``p`` after ``q``); ``None`` if they do not compose."""
    if tail(p) != head(q):
        return None
    if is_trivial(p):
        return q
    if is_trivial(q):
        return p
    return p + q


def idempotent(vertex: int) -> Path:
    return ("p1",) if vertex == 1 else ("p2",)


def canonical_rotation(path: Path) -> Path:
    """Lexicographically least rotation, arrow order a < a* < x < x* < y < y*."""
    if is_trivial(path):
        return path
    return min(path[i:] + path[:i] for i in range(len(path)))


def _check_degree(deg: int):
    if deg > MAX_DEGREE:
        raise DegreeError(f"degree {deg} exceeds the cap of {MAX_DEGREE}")


# --- path polynomials ----------------------------------------------------

class PathPoly:
    """Element of the path algebra: a finite combination of paths."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Path, Coeff] | Iterable[Tuple[Path, Coeff]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Path, GaussQ] = {}
        for path, c in items:
            path = validate_path(path)
            _check_degree(degree_of(path))
            acc[path] = acc.get(path, ZERO) + GaussQ.coerce(c)
        object.__setattr__(self, "_terms", {p: c for p, c in acc.items() if c})

    def __setattr__(self, name, value):
        raise AttributeError("PathPoly is immutable")

    @classmethod
    def arrow(cls, name: str) -> "PathPoly":
        return cls({(name,): ONE})

    @classmethod
    def unit(cls, vertex: int) -> "PathPoly":
        return cls({idempotent(vertex): ONE})

    @classmethod
    def word(cls, text: str, coeff: Coeff = 1) -> "PathPoly":
        """Single path from dotted text, e.g. ``"x.y"`` or ``"a.a+"``."""
        return cls({_parse_word(text): coeff})

    @property
    def terms(self) -> Dict[Path, GaussQ]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((degree_of(p) for p in self._terms), default=-1)

    def coeff(self, path) -> GaussQ:
        if isinstance(path, str):
            path = _parse_word(path)
        return self._terms.get(tuple(path), ZERO)

    def __iter__(self) -> Iterator[Tuple[Path, GaussQ]]:
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __add__(self, other: "PathPoly") -> "PathPoly":
        if not isinstance(other, PathPoly):
            return NotImplemented
        return PathPoly(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "PathPoly":
        return PathPoly({p: -c for p, c in self._terms.items()})

    def __sub__(self, other: "PathPoly") -> "PathPoly":
        if not isinstance(other, PathPoly):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Coeff) -> "PathPoly":
        c = GaussQ.coerce(c)
        return PathPoly({p: c * v for p, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, PathPoly):
            return path_mul(self, other)
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return self.scale(other)
        except TypeError:
            return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, PathPoly):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"PathPoly({dump_pathpoly(self)!r})"


def path_mul(p: PathPoly, q: PathPoly) -> PathPoly:
    """Bilinear concatenation product; non-composable pairs contribute zero."""
    _check_degree(p.degree())
    _check_degree(q.degree())
    out = []
    for pp, pc in p.items():
        for qp, qc in q.items():
            r = concat(pp, qp)
            if r is not None:
                out.append((r, pc * qc))
    return PathPoly(out)


# --- necklaces -----------------------------------------------------------

class Necklace:
    """Element of the path algebra modulo commutators (cyclic words)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Path, Coeff] | Iterable[Tuple[Path, Coeff]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: Dict[Path, GaussQ] = {}
        for path, c in items:
            path = validate_path(path)
            _check_degree(degree_of(path))
            if not is_closed(path):
                continue
            key = canonical_rotation(path)
            acc[key] = acc.get(key, ZERO) + GaussQ.coerce(c)
        object.__setattr__(self, "_terms", {p: c for p, c in acc.items() if c})

    def __setattr__(self, name, value):
        raise AttributeError("Necklace is immutable")

    @classmethod
    def word(cls, text: str, coeff: Coeff = 1) -> "Necklace":
        return cls({_parse_word(text): coeff})

    @property
    def terms(self) -> Dict[Path, GaussQ]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def is_zero(self) -> bool:
        return not self._terms

    def degree(self) -> int:
        return max((degree_of(p) for p in self._terms), default=-1)

    def representative(self) -> PathPoly:
        return PathPoly(self._terms)

    def __add__(self, other):
        if not isinstance(other, Necklace):
            return NotImplemented
        return Necklace(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return Necklace({p: -c for p, c in self._terms.items()})

    def __sub__(self, other):
        if not isinstance(other, Necklace):
            return NotImplemented
        return self + (-other)

    def scale(self, c: Coeff) -> "Necklace":
        c = GaussQ.coerce(c)
        return Necklace({p: c * v for p, v in self._terms.items()})

    def __mul__(self, c):
        try:
            return self.scale(c)
        except TypeError:
            return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, Necklace):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self):
        return f"Necklace({dump_pathpoly(self.representative())!r})"


def to_necklace(p: PathPoly) -> Necklace:
    """Project to cyclic words: open paths vanish, rotations are identified."""
    _check_degree(p.degree())
    return Necklace(p.items())


def cyclic_derivative(f: Necklace | PathPoly, w: str) -> PathPoly:
    """Cyclic derivative of a necklace with respect to the arrow ``w``.

    For a cyclic word u_1...u_n this sums, over the positions where u_i = w,
    the complementary path u_{i+1}...u_n u_1...u_{i-1}.  When the complement
    is empty (``w`` a loop) the trivial path at its vertex is used.
    """
    if w not in ARROWS:
        raise EndpointError(f"{w!r} is not a non-trivial arrow")
    if isinstance(f, PathPoly):
        f = to_necklace(f)
    _check_degree(f.degree())
    out = []
    for path, c in f.items():
        if is_trivial(path):
            continue
        n = len(path)
        for i, u in enumerate(path):
            if u != w:
                continue
            rest = path[i + 1:] + path[:i]
            out.append((rest if rest else idempotent(ARROWS[w][1]), c))
    return PathPoly(out)


def necklace_bracket(f: Necklace, g: Necklace) -> Necklace:
    """Necklace Lie bracket summed over the pairs (a,a*), (x,x*), (y,y*)."""
    total = PathPoly()
    for z in UNSTARRED:
        zs = STAR[z]
        total = total + path_mul(cyclic_derivative(f, z), cyclic_derivative(g, zs))
        total = total - path_mul(cyclic_derivative(f, zs), cyclic_derivative(g, z))
    return to_necklace(total)


def commutator(p: PathPoly, q: PathPoly) -> PathPoly:
    return path_mul(p, q) - path_mul(q, p)


def symplectic_elements() -> Tuple[PathPoly, PathPoly, PathPoly]:
    """Return ``(c, c1, c2)``: the full commutator sum and its two vertex parts."""
    a, as_ = PathPoly.arrow("a"), PathPoly.arrow("a*")
    x, xs = PathPoly.arrow("x"), PathPoly.arrow("x*")
    y, ys = PathPoly.arrow("y"), PathPoly.arrow("y*")
    c = commutator(a, as_) + commutator(x, xs) + commutator(y, ys)
    c1 = commutator(a, as_) + x * xs - ys * y
    c2 = y * ys - xs * x
    return c, c1, c2


def e_generators():
    """2x2 nested list ``E = [[-x x*, -x y], [y* x*, y* y]]`` of loops at vertex 1."""
    left = [PathPoly.arrow("x").scale(-1), PathPoly.arrow("y*")]
    right = [PathPoly.arrow("x*"), PathPoly.arrow("y")]
    return [[path_mul(left[r], right[s]) for s in range(2)] for r in range(2)]


# --- text serialization --------------------------------------------------

_TEXT_NAME = {"a": "a", "a*": "a+", "x": "x", "x*": "x+", "y": "y", "y*": "y+",
              "p1": "p1", "p2": "p2"}
_FROM_TEXT = {v: k for k, v in _TEXT_NAME.items()}


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_coefficient(c) -> str:
    """Text form of a coefficient: ``3/2``, ``-1`` or ``(1/2-3i)``.

    Exact values print as fractions; complex floats print with ``repr`` so
    they parse back bit-for-bit.
    """
    if isinstance(c, GaussQ):
        if c.im == 0:
            return _fmt_fraction(c.re)
        im = _fmt_fraction(abs(c.im))
        sign = "-" if c.im < 0 else "+"
        return f"({_fmt_fraction(c.re)}{sign}{im}i)"
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    sign = "-" if str(c.imag).startswith("-") else "+"
    return f"({c.real!r}{sign}{abs(c.imag)!r}i)"


_NUM = r"(?:\d+(?:/\d+)?|(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?|inf|nan)"
_COMPLEX_RE = re.compile(rf"^\(\s*([+-]?{_NUM})\s*([+-])\s*({_NUM})\s*i\s*\)$")
_REAL_RE = re.compile(rf"^[+-]?{_NUM}$")
_IMAG_RE = re.compile(rf"^([+-]?{_NUM})\s*i$")


def _parse_real(tok: str, exact: bool):
    is_float = any(ch in tok for ch in ".eE") or "inf" in tok or "nan" in tok
    if exact:
        return Fraction(tok)
    return float(tok) if is_float else Fraction(tok)


def parse_coefficient(text: str, exact: bool = True):
    """Inverse of :func:`format_coefficient`.

    With ``exact=True`` decimals become exact fractions and the result is a
    :class:`GaussQ`.  Otherwise decimal literals give a Python complex.
    """
    t = text.strip()
    m = _COMPLEX_RE.match(t)
    if m:
        re_, sign, im = m.groups()
        re_v, im_v = _parse_real(re_, exact), _parse_real(im, exact)
        if sign == "-":
            im_v = -im_v
    elif _REAL_RE.match(t):
        re_v, im_v = _parse_real(t, exact), 0
    elif _IMAG_RE.match(t):
        re_v, im_v = 0, _parse_real(_IMAG_RE.match(t).group(1), exact)
    else:
        raise ValueError(f"cannot parse coefficient {text!r}")
    if isinstance(re_v, float) or isinstance(im_v, float):
        return complex(float(re_v), float(im_v))
    return GaussQ(re_v, im_v)


def _parse_word(text: str) -> Path:
    names = [s.strip() for s in text.strip().split(".")]
    try:
        return tuple(_FROM_TEXT[n] for n in names)
    except KeyError as exc:
        raise ValueError(f"unknown arrow {exc.args[0]!r} in {text!r}") from None


def split_term(line: str) -> Tuple[str, str]:
    """Split ``coeff * word`` into its parts (coefficient defaults to 1)."""
    if "*" in line:
        coeff, word = line.rsplit("*", 1)
        return coeff.strip(), word.strip()
    return "1", line.strip()


def dump_pathpoly(p: PathPoly) -> str:
    """One ``coeff * w1.w2`` term per line, in sorted path order."""
    if p.is_zero():
        return "0"
    lines = []
    for path in sorted(p.terms, key=lambda q: (degree_of(q), q)):
        word = ".".join(_TEXT_NAME[u] for u in path)
        lines.append(f"{format_coefficient(p.terms[path])} * {word}")
    return "\n".join(lines)


def load_pathpoly(text: str) -> PathPoly:
    terms = []
    for line in text.strip().splitlines():
        line = line.strip()
        if not line or line == "0":
            continue
        coeff, word = split_term(line)
        terms.append((_parse_word(word), parse_coefficient(coeff, exact=True)))
    return PathPoly(terms)
