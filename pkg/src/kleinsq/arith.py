"""Exact arithmetic over Q for biquadratic extensions Q(sqrt a1, sqrt a2).

Rationals are :class:`fractions.Fraction`; square classes are carried as
squarefree integers. Local-global verdicts come from Hilbert symbols only.
The witness searches are independent certificates and never decide anything.
"""

from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

from sympy import factorint, isprime, legendre_symbol

from . import f2la
from .decomp import XShape, x_shape
from .errors import (
    DegenerateNorm,
    DependentClasses,
    InconsistentImage,
    InternalInconsistency,
    InvalidPlace,
    ParamsMismatch,
    PreconditionFailed,
    SquareParameter,
    ZeroInput,
)
from .f2la import Subspace

INF = "inf"

_fault_places: set = set()  # places whose symbol is deliberately flipped (test mode)


def to_rational(q) -> Fraction:
    q = Fraction(q)
    if q == 0:
        raise ZeroInput("zero has no square class")
    return q


def squarefree_part(q) -> int:
    q = to_rational(q)
    # n/d and n*d differ by the square d^2
    n = q.numerator * q.denominator
    out = -1 if n < 0 else 1
    for p, e in factorint(abs(n)).items():
        if e % 2:
            out *= p
    return out


def _split(n: int, p: int) -> tuple[int, int]:
    """(valuation, unit part) of a nonzero integer at p."""
    k = 0
    while n % p == 0:
        n //= p
        k += 1
    return k, n


def _check_place(place):
    if place == INF or place == "∞":
        return INF
    if isinstance(place, bool) or not isinstance(place, int) or not isprime(place):
        raise InvalidPlace(f"not a place of Q: {place!r}")
    return place


def _symbol(a: int, b: int, place) -> int:
    if place == INF:
        return -1 if (a < 0 and b < 0) else 1
    alpha, u = _split(a, place)
    beta, v = _split(b, place)
    if place == 2:
        eps = lambda x: ((x - 1) // 2) % 2
        omega = lambda x: ((x * x - 1) // 8) % 2
        e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u)
        return -1 if e % 2 else 1
    s = -1 if (alpha * beta * ((place - 1) // 2)) % 2 else 1
    if beta % 2:
        s *= legendre_symbol(u % place, place)
    if alpha % 2:
        s *= legendre_symbol(v % place, place)
    return s


def hilbert_symbol(a, b, place) -> int:
    """(a, b)_v = +1 iff z^2 = a x^2 + b y^2 has a nonzero solution over Q_v."""
    place = _check_place(place)
    a, b = squarefree_part(a), squarefree_part(b)
    s = _symbol(a, b, place)
    return -s if place in _fault_places else s


def relevant_places(*qs) -> list:
    """Infinity, 2, and the odd primes dividing some numerator or denominator."""
    primes = {2}
    for q in qs:
        q = to_rational(q)
        primes.update(factorint(abs(q.numerator)))
        primes.update(factorint(q.denominator))
    primes.discard(1)
    return [INF] + sorted(primes)


@contextlib.contextmanager
def symbol_fault(place=2):
    """Flip every Hilbert symbol at ``place`` while the block runs (test mode)."""
    place = _check_place(place)
    _fault_places.add(place)
    try:
        yield
    finally:
        _fault_places.discard(place)


def hasse_invariant(coeffs, place) -> int:
    out = 1
    for x, y in itertools.combinations(coeffs, 2):
        out *= hilbert_symbol(x, y, place)
    return out


# --- decisions ---------------------------------------------------------------


def is_sum_of_two_squares(a) -> bool:
    a = to_rational(a)
    if a < 0:
        return False
    return all(hilbert_symbol(-1, a, p) == 1 for p in relevant_places(a)[1:])


def norm_form_solvable(a, b) -> bool:
    """Whether b = a y^2 - x^2 has a rational solution (a not a square)."""
    a, b = to_rational(a), to_rational(b)
    if squarefree_part(a) == 1:
        raise SquareParameter("a must not be a square")
    # <a, -1, -b> isotropic  <=>  (a, -b)_v = 1 everywhere
    return all(hilbert_symbol(a, -b, v) == 1 for v in relevant_places(a, b))


@dataclass(frozen=True)
class BiquadParams:
    a1: int
    a2: int

    def __post_init__(self):
        a1, a2 = squarefree_part(self.a1), squarefree_part(self.a2)
        object.__setattr__(self, "a1", a1)
        object.__setattr__(self, "a2", a2)
        if a1 == 1:
            raise DependentClasses("a1 is a square")
        if a2 == 1:
            raise DependentClasses("a2 is a square")
        if squarefree_part(a1 * a2) == 1:
            raise DependentClasses("a1a2 is a square")

    @property
    def a3(self) -> int:
        return squarefree_part(self.a1 * self.a2)

    @property
    def a(self) -> tuple[int, int, int]:
        return (self.a1, self.a2, self.a3)


def q8_embeddable(p: BiquadParams) -> bool:
    """<a1, a2, a1a2> equivalent to <1, 1, 1> over Q."""
    if p.a1 < 0 or p.a2 < 0:
        return False
    form = (p.a1, p.a2, p.a3)
    return all(hasse_invariant(form, v) == 1 for v in relevant_places(*form)[1:])


@dataclass(frozen=True)
class EmbeddingReport:
    z4z2: tuple[bool, bool, bool]
    d4: tuple[bool, bool, bool]
    q8: bool


def d4_criteria(p: BiquadParams, i: int) -> tuple[bool, bool]:
    """Both presentations of the type-i dihedral criterion (i = 1, 2, 3)."""
    a = p.a
    j, k = [x for x in range(3) if x != i - 1]
    return norm_form_solvable(a[j], a[i - 1]), norm_form_solvable(a[k], a[i - 1])


def embedding_report(p: BiquadParams) -> EmbeddingReport:
    d4 = []
    for i in (1, 2, 3):
        x, y = d4_criteria(p, i)
        if x != y:
            raise InternalInconsistency(f"the two D4 type-{i} criteria disagree for {p}")
        d4.append(x)
    z4z2 = tuple(is_sum_of_two_squares(x) for x in p.a)
    return EmbeddingReport(z4z2=z4z2, d4=tuple(d4), q8=q8_embeddable(p))


# T-vectors as 3-bit ints, bit i-1 holding t_i
D4_VECTORS = (0b001, 0b010, 0b100)
Z4Z2_VECTORS = (0b110, 0b101, 0b011)
Q8_VECTOR = 0b111


def achieved_vectors(report: EmbeddingReport) -> list[int]:
    out = [v for v, ok in zip(D4_VECTORS, report.d4) if ok]
    out += [v for v, ok in zip(Z4Z2_VECTORS, report.z4z2) if ok]
    if report.q8:
        out.append(Q8_VECTOR)
    return out


def im_T(report: EmbeddingReport) -> Subspace:
    pts = set(achieved_vectors(report)) | {0}
    if any((x ^ y) not in pts for x in pts for y in pts):
        raise InconsistentImage(f"achieved T-vectors {sorted(pts)} are not closed under addition")
    return f2la.canonicalize(pts, 3)


@dataclass(frozen=True)
class XClassification:
    shape: XShape
    imT: Subspace
    report: EmbeddingReport


def classify_X(p: BiquadParams) -> XClassification:
    report = embedding_report(p)
    imT = im_T(report)
    return XClassification(shape=x_shape(imT), imT=imT, report=report)


# --- witnesses -----------------------------------------------------------------


def _integer_form(form) -> list[int]:
    cs = [to_rational(c) for c in form]
    den = 1
    for c in cs:
        den = den * c.denominator // gcd(den, c.denominator)
    return [int(c * den) for c in cs]


def witness_search(form, bound: int):
    """A primitive integer zero of c1 x^2 + c2 y^2 + c3 z^2 with entries at most
    ``bound`` in absolute value, or None."""
    c = _integer_form(form)
    if all(x > 0 for x in c) or all(x < 0 for x in c):
        return None
    s = min(range(3), key=lambda i: abs(c[i]))
    u_i, w_i = [i for i in range(3) if i != s]
    cs, cu, cw = c[s], c[u_i], c[w_i]
    for r in range(1, bound + 1):
        for u, w in itertools.chain(((r, w) for w in range(r + 1)), ((u, r) for u in range(r))):
            rhs = -(cu * u * u + cw * w * w)
            if rhs % cs:
                continue
            q = rhs // cs
            if q < 0:
                continue
            t = isqrt(q)
            if t * t != q or t > bound:
                continue
            g = gcd(gcd(t, u), w)
            out = [0, 0, 0]
            out[s], out[u_i], out[w_i] = t // g, u // g, w // g
            return tuple(out)
    return None


def two_squares_witness(a, bound: int = 10**4):
    a = to_rational(a)
    if a <= 0:
        return None
    n, d = a.numerator * a.denominator, a.denominator
    for x in range(min(isqrt(n), bound) + 1):
        y = isqrt(n - x * x)
        if y * y == n - x * x:
            w = (Fraction(x, d), Fraction(y, d))
            assert w[0] ** 2 + w[1] ** 2 == a
            return w
    return None


def norm_form_witness(a, b, bound: int = 10**4):
    """(x, y) with b = a y^2 - x^2, or None."""
    a, b = to_rational(a), to_rational(b)
    hit = witness_search((a, -1, -b), bound)
    if hit is None:
        return None
    y, x, z = hit
    w = (Fraction(x, z), Fraction(y, z))
    assert a * w[1] ** 2 - w[0] ** 2 == b
    return w


def _three_squares(n: int, bound: int):
    for x in range(min(isqrt(n), bound) + 1):
        for y in range(x, isqrt(n - x * x) + 1):
            r = n - x * x - y * y
            z = isqrt(r)
            if z * z == r:
                return (x, y, z)
    return None


def _cross(u, v):
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def _dot(u, v):
    return sum(x * y for x, y in zip(u, v))


def q8_witness(p: BiquadParams, bound: int = 10**4):
    """Rational e, f in Q^3 with |e|^2 = a1, |f|^2 = a2 and e.f = 0, or None."""
    if p.a1 <= 0 or p.a2 <= 0:
        return None
    e = _three_squares(p.a1, bound)
    if e is None:
        return None
    units = ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    crosses = [c for c in (_cross(e, x) for x in units) if any(c)]
    u = crosses[0]
    v = next(c for c in crosses[1:] if any(_cross(u, c)))
    A, B, C = _dot(u, u), _dot(u, v), _dot(v, v)
    D = A * C - B * B
    # A * |X u + Y v|^2 = (A X + B Y)^2 + D Y^2
    hit = witness_search((1, D, -A * p.a2), bound)
    if hit is None:
        return None
    W, Y, t = hit
    X = Fraction(W - B * Y, A)
    f = tuple((X * ui + Y * vi) / t for ui, vi in zip(u, v))
    e = tuple(Fraction(x) for x in e)
    assert _dot(e, e) == p.a1 and _dot(f, f) == p.a2 and _dot(e, f) == 0
    return e, f


def report_witnesses(p: BiquadParams, report: EmbeddingReport, bound: int = 10**4) -> dict:
    """Explicit certificates for every positive verdict (None where the search ran out)."""
    out: dict = {}
    for i, ok in enumerate(report.z4z2, 1):
        if ok:
            out[f"z4z2_{i}"] = two_squares_witness(p.a[i - 1], bound)
    for i, ok in enumerate(report.d4, 1):
        if ok:
            j = [x for x in range(3) if x != i - 1][0]
            out[f"d4_{i}"] = norm_form_witness(p.a[j], p.a[i - 1], bound)
    if report.q8:
        out["q8"] = q8_witness(p, bound)
    return out


# --- the biquadratic field -------------------------------------------------------

# coordinate signs of the Galois elements on the basis (1, r1, r2, r1 r2)
_SIGNS = {
    "1": (1, 1, 1, 1),
    "s1": (1, -1, 1, -1),
    "s2": (1, 1, -1, -1),
    "s1s2": (1, -1, -1, 1),
}
# subfield -> the Galois element fixing it, and the one generating its group over F
_FIXER = {"K1": "s2", "K2": "s1", "K3": "s1s2"}
_DOWN = {"K1": "s1", "K2": "s2", "K3": "s1"}
_SUPPORT = {"K": (0, 1, 2, 3), "K1": (0, 1), "K2": (0, 2), "K3": (0, 3), "F": (0,)}


@dataclass(frozen=True)
class KElement:
    """f1 + f2 sqrt(a1) + f3 sqrt(a2) + f4 sqrt(a1) sqrt(a2)."""

    params: BiquadParams
    coords: tuple[Fraction, Fraction, Fraction, Fraction]

    def __post_init__(self):
        if len(self.coords) != 4:
            raise ValueError("a KElement has four coordinates")
        object.__setattr__(self, "coords", tuple(Fraction(c) for c in self.coords))

    @classmethod
    def of(cls, params: BiquadParams, *coords) -> "KElement":
        return cls(params, tuple(coords))

    def _same(self, other: "KElement") -> None:
        if self.params != other.params:
            raise ParamsMismatch(f"{self.params} vs {other.params}")

    def __add__(self, other):
        self._same(other)
        return KElement(self.params, tuple(x + y for x, y in zip(self.coords, other.coords)))

    def __neg__(self):
        return KElement(self.params, tuple(-x for x in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        return mult(self, other)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def lies_in(self, field: str) -> bool:
        return all(c == 0 for i, c in enumerate(self.coords) if i not in _SUPPORT[field])


def mult(k: KElement, l: KElement) -> KElement:
    k._same(l)
    a1, a2 = k.params.a1, k.params.a2
    x0, x1, x2, x3 = k.coords
    y0, y1, y2, y3 = l.coords
    return KElement(k.params, (
        x0 * y0 + a1 * x1 * y1 + a2 * x2 * y2 + a1 * a2 * x3 * y3,
        x0 * y1 + x1 * y0 + a2 * (x2 * y3 + x3 * y2),
        x0 * y2 + x2 * y0 + a1 * (x1 * y3 + x3 * y1),
        x0 * y3 + x3 * y0 + x1 * y2 + x2 * y1,
    ))


def galois_act(s: str, k: KElement) -> KElement:
    return KElement(k.params, tuple(e * c for e, c in zip(_SIGNS[s], k.coords)))


def norm(k: KElement, to: str, frm: str = "K") -> KElement:
    """N_{frm/to}(k) for the tower F < K1, K2, K3 < K."""
    if not k.lies_in(frm):
        raise ValueError(f"element does not lie in {frm}")
    if frm == "K" and to in _FIXER:
        return mult(k, galois_act(_FIXER[to], k))
    if frm == "K" and to == "F":
        out = k
        for s in ("s1", "s2", "s1s2"):
            out = mult(out, galois_act(s, k))
        return out
    if frm in _DOWN and to == "F":
        return mult(k, galois_act(_DOWN[frm], k))
    if frm == to:
        return k
    raise ValueError(f"no norm from {frm} to {to}")


def lemma51_factorize(k: KElement):
    """Pairs ((h1, h2), (h3, h4)) with N_{K/K3}(k) = (h1^2 - a1 h2^2)(h3^2 - a2 h4^2)."""
    f1, f2, f3, f4 = k.coords
    if f1 * f4 != f2 * f3:
        raise PreconditionFailed("need f1 f4 = f2 f3 for the K3-norm to lie in F")
    g = norm(k, "K3").coords[0]
    if g == 0:
        raise DegenerateNorm("k is zero")
    if f1 != 0:
        h = ((f1, f2), (Fraction(1), f3 / f1))
    elif f2 == 0:
        h = ((f3, f4), (Fraction(0), Fraction(1)))
    else:  # f1 = 0 forces f3 = 0
        h = ((Fraction(0), Fraction(1)), (f2, f4))
    a1, a2 = k.params.a1, k.params.a2
    (h1, h2), (h3, h4) = h
    if (h1 * h1 - a1 * h2 * h2) * (h3 * h3 - a2 * h4 * h4) != g:
        raise AssertionError("factorization does not multiply back")
    return h
