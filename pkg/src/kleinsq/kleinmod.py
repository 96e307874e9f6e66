"""Finite-dimensional modules over F_2[G], G the Klein four-group <s1, s2>.

A module is a dimension plus the two matrices by which the generators act.
Elements are written additively as bit vectors.  The operators that matter
are the nilpotent ones ``A1 = 1+s1``, ``A2 = 1+s2``, ``A3 = 1+s1 s2`` and the
norm ``N = A1 A2``.
"""

from __future__ import annotations

import random
import threading
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import f2la
from .errors import InvalidModule, ModuleFormatError, NotInFamily
from .f2la import F2Matrix, Subspace

# Largest n for which Omega^{+-n} belongs to the decomposition family.
OMEGA_MAX = 2


@dataclass(frozen=True)
class SummandType:
    kind: str
    n: int = 0

    _DIMS = {"Triv": 1, "CycG1": 2, "CycG2": 2, "CycG3": 2, "Free": 4}
    _NAMES = {"Triv": "F2", "CycG1": "C_G1", "CycG2": "C_G2", "CycG3": "C_G3", "Free": "Free"}

    def __post_init__(self):
        if self.kind in ("OmegaPlus", "OmegaMinus"):
            if self.n < 1:
                raise ValueError("Omega modules need n >= 1")
        elif self.kind not in self._DIMS or self.n != 0:
            raise ValueError(f"unknown summand type {self.kind}({self.n})")

    @property
    def dim(self) -> int:
        if self.kind in ("OmegaPlus", "OmegaMinus"):
            return 2 * self.n + 1
        return self._DIMS[self.kind]

    @property
    def name(self) -> str:
        if self.kind == "OmegaPlus":
            return f"Omega+{self.n}"
        if self.kind == "OmegaMinus":
            return f"Omega-{self.n}"
        return self._NAMES[self.kind]

    def dual(self) -> "SummandType":
        if self.kind == "OmegaPlus":
            return SummandType("OmegaMinus", self.n)
        if self.kind == "OmegaMinus":
            return SummandType("OmegaPlus", self.n)
        return self

    @classmethod
    def from_name(cls, name: str) -> "SummandType":
        for kind, label in cls._NAMES.items():
            if name == label:
                return cls(kind)
        if name.startswith("Omega+"):
            return cls("OmegaPlus", int(name[6:]))
        if name.startswith("Omega-"):
            return cls("OmegaMinus", int(name[6:]))
        raise ValueError(f"unknown summand name {name!r}")

    @property
    def sort_key(self) -> tuple[int, int]:
        return (_KIND_ORDER.index(self.kind), self.n)

    def __lt__(self, other: "SummandType") -> bool:
        return self.sort_key < other.sort_key

    def __str__(self):
        return self.name


_KIND_ORDER = ("Triv", "CycG1", "CycG2", "CycG3", "Free", "OmegaPlus", "OmegaMinus")


TRIV = SummandType("Triv")
CYC_G1 = SummandType("CycG1")
CYC_G2 = SummandType("CycG2")
CYC_G3 = SummandType("CycG3")
FREE = SummandType("Free")


def omega_plus(n: int) -> SummandType:
    return SummandType("OmegaPlus", n)


def omega_minus(n: int) -> SummandType:
    return SummandType("OmegaMinus", n)


def family(omega_max: int = OMEGA_MAX) -> tuple[SummandType, ...]:
    return (
        (TRIV, CYC_G1, CYC_G2, CYC_G3, FREE)
        + tuple(omega_plus(n) for n in range(1, omega_max + 1))
        + tuple(omega_minus(n) for n in range(1, omega_max + 1))
    )


FAMILY = family()


class Multiplicities(Counter):
    """Counts of summand types; zero counts are dropped."""

    def total_dim(self) -> int:
        return sum(t.dim * c for t, c in self.items())

    def by_name(self) -> dict[str, int]:
        return {t.name: c for t, c in sorted(self.items()) if c}

    def types(self) -> list[SummandType]:
        out = []
        for t in sorted(self):
            out.extend([t] * self[t])
        return out


@dataclass(frozen=True)
class KleinModule:
    s1: F2Matrix
    s2: F2Matrix

    @property
    def dim(self) -> int:
        return self.s1.nrows

    def validate(self) -> list[str]:
        return validate(self)

    def check(self) -> "KleinModule":
        problems = validate(self)
        if problems:
            raise InvalidModule(problems)
        return self


def validate(M: KleinModule) -> list[str]:
    """Violated module identities; the empty list means ``M`` is a valid module."""
    n = M.s1.nrows
    shapes = {M.s1.shape, M.s2.shape}
    if shapes != {(n, n)}:
        return [f"action matrices must both be {n}x{n}, got {sorted(shapes)}"]
    I = F2Matrix.identity(n)
    out = []
    if M.s1 @ M.s1 != I:
        out.append("s1² ≠ I")
    if M.s2 @ M.s2 != I:
        out.append("s2² ≠ I")
    if M.s1 @ M.s2 != M.s2 @ M.s1:
        out.append("s1s2 ≠ s2s1")
    return out


def _from_nilpotents(dim: int, a1_images: dict[int, int], a2_images: dict[int, int]) -> KleinModule:
    """Module whose (1+s_i) sends basis vector j to ``ai_images[j]`` (default 0)."""
    I = F2Matrix.identity(dim)
    A1 = F2Matrix.from_columns([a1_images.get(j, 0) for j in range(dim)], dim)
    A2 = F2Matrix.from_columns([a2_images.get(j, 0) for j in range(dim)], dim)
    return KleinModule(I + A1, I + A2)


def canonical(t: SummandType) -> KleinModule:
    """The basis-explicit model of a summand type.

    Omega-n uses basis alpha_1..alpha_n, beta_1..beta_{n+1};
    Omega+n uses gamma_1..gamma_{n+1}, delta_1..delta_n; the top row comes first.
    """
    if t.kind == "Triv":
        return _from_nilpotents(1, {}, {})
    if t.kind == "CycG1":
        return _from_nilpotents(2, {0: 0b11, 1: 0b11}, {})
    if t.kind == "CycG2":
        return _from_nilpotents(2, {}, {0: 0b11, 1: 0b11})
    if t.kind == "CycG3":
        return _from_nilpotents(2, {0: 0b11, 1: 0b11}, {0: 0b11, 1: 0b11})
    if t.kind == "Free":
        # basis 1, s1, s2, s1s2 of the group ring
        s1 = F2Matrix.from_columns([0b0010, 0b0001, 0b1000, 0b0100], 4)
        s2 = F2Matrix.from_columns([0b0100, 0b1000, 0b0001, 0b0010], 4)
        return KleinModule(s1, s2)
    n = t.n
    dim = 2 * n + 1
    if t.kind == "OmegaMinus":
        alpha = list(range(n))
        beta = list(range(n, 2 * n + 1))
        a2 = {alpha[i]: 1 << beta[i] for i in range(n)}
        a1 = {alpha[i]: 1 << beta[i + 1] for i in range(n)}
        return _from_nilpotents(dim, a1, a2)
    gamma = list(range(n + 1))
    delta = list(range(n + 1, 2 * n + 1))
    a1 = {gamma[i]: 1 << delta[i] for i in range(n)}
    a2 = {gamma[i + 1]: 1 << delta[i] for i in range(n)}
    return _from_nilpotents(dim, a1, a2)


def direct_sum(parts: Sequence[KleinModule]) -> KleinModule:
    rows1: list[int] = []
    rows2: list[int] = []
    shift = 0
    for P in parts:
        rows1.extend(r << shift for r in P.s1.rows)
        rows2.extend(r << shift for r in P.s2.rows)
        shift += P.dim
    return KleinModule(F2Matrix(shift, shift, tuple(rows1)), F2Matrix(shift, shift, tuple(rows2)))


def from_multiplicities(counts) -> KleinModule:
    parts = []
    for t, c in sorted(dict(counts).items()):
        parts.extend([canonical(t)] * c)
    return direct_sum(parts)


def conjugate(M: KleinModule, P: F2Matrix) -> KleinModule:
    """The isomorphic module obtained by the change of basis ``P``."""
    Pinv = P.inverse()
    return KleinModule(P @ M.s1 @ Pinv, P @ M.s2 @ Pinv)


def transpose(M: KleinModule) -> KleinModule:
    """The dual module (actions transposed)."""
    return KleinModule(M.s1.T, M.s2.T)


def operator(M: KleinModule, which: str) -> F2Matrix:
    I = F2Matrix.identity(M.dim)
    if which == "A1":
        return I + M.s1
    if which == "A2":
        return I + M.s2
    if which == "A3":
        return I + M.s1 @ M.s2
    if which == "N":
        return (I + M.s1) @ (I + M.s2)
    raise ValueError(f"unknown operator {which!r}")


class _Ops:
    """The nilpotent operators of a module, computed once."""

    def __init__(self, M: KleinModule):
        self.M = M
        self.m = M.dim
        self.A1 = operator(M, "A1")
        self.A2 = operator(M, "A2")
        self.A3 = self.A1 + self.A2 + self.A1 @ self.A2
        self.N = self.A1 @ self.A2


def fixed_submodule(M: KleinModule) -> Subspace:
    M.check()
    ops = _Ops(M)
    return f2la.kernel(ops.A1.vstack(ops.A2))


def submodule_closure(M: KleinModule, S: Iterable) -> Subspace:
    M.check()
    span = f2la.canonicalize(S, M.dim)
    while True:
        grown = f2la.canonicalize(
            list(span.basis) + [M.s1.apply(b) for b in span.basis] + [M.s2.apply(b) for b in span.basis],
            M.dim,
        )
        if grown == span:
            return span
        span = grown


def restrict(M: KleinModule, S: Subspace) -> KleinModule:
    """The submodule ``S`` as a module in its echelon basis."""
    if S.ambient_dim != M.dim:
        raise ValueError("subspace lives in the wrong ambient space")
    cols1, cols2 = [], []
    for b in S.basis:
        c1, c2 = S.coords(M.s1.apply(b)), S.coords(M.s2.apply(b))
        if c1 is None or c2 is None:
            raise ValueError("subspace is not a submodule")
        cols1.append(c1)
        cols2.append(c2)
    d = S.dim
    return KleinModule(F2Matrix.from_columns(cols1, d), F2Matrix.from_columns(cols2, d))


# --- Hom spaces -------------------------------------------------------------


def hom_dim(X: KleinModule, M: KleinModule) -> int:
    """dim Hom_G(X, M), by solving ``Phi s_X = s_M Phi`` in the entries of Phi."""
    X.check()
    M.check()
    k, m = X.dim, M.dim
    # variable index of Phi[i][l] is i*k + l  (Phi is m x k)
    eqs = []
    for sX, sM in ((X.s1, M.s1), (X.s2, M.s2)):
        for i in range(m):
            row_m = sM.rows[i]
            for j in range(k):
                eq = 0
                for l in range(k):
                    if (sX.rows[l] >> j) & 1:
                        eq ^= 1 << (i * k + l)
                r = row_m
                while r:
                    l = f2la.low_bit(r)
                    eq ^= 1 << (l * k + j)
                    r &= r - 1
                eqs.append(eq)
    return k * m - f2la.rank_of(eqs)


def _block_system_nullity(m: int, nblocks: int, equations) -> int:
    """Nullity of ``sum_b C_b x_b = 0`` over unknown blocks x_1..x_r in F_2^m.

    ``equations`` is a list of lists of (block, F2Matrix) pairs.
    """
    rows = []
    for terms in equations:
        for i in range(m):
            r = 0
            for b, C in terms:
                r ^= C.rows[i] << (b * m)
            rows.append(r)
    return nblocks * m - f2la.rank_of(rows)


def _hom_from_presentation(t: SummandType, ops: _Ops) -> int:
    """dim Hom_G(canonical(t), M) from the generators-and-relations of ``t``."""
    m = ops.m
    A1, A2 = ops.A1, ops.A2
    if t.kind == "Free":
        return m
    if t.kind == "Triv":
        return m - A1.vstack(A2).rank()
    if t.kind == "CycG1":
        return m - A2.rank()
    if t.kind == "CycG2":
        return m - A1.rank()
    if t.kind == "CycG3":
        return m - ops.A3.rank()
    n = t.n
    if t.kind == "OmegaMinus":
        # generators alpha_1..alpha_n: N alpha_i = 0, A1 alpha_i = A2 alpha_{i+1}
        eqs = [[(i, ops.N)] for i in range(n)]
        eqs += [[(i, A1), (i + 1, A2)] for i in range(n - 1)]
        return _block_system_nullity(m, n, eqs)
    # generators gamma_1..gamma_{n+1}: A2 gamma_1 = 0, A1 gamma_i = A2 gamma_{i+1}, A1 gamma_{n+1} = 0
    eqs = [[(0, A2)], [(n, A1)]]
    eqs += [[(i, A1), (i + 1, A2)] for i in range(n)]
    return _block_system_nullity(m, n + 1, eqs)


RANK_INVARIANTS = (
    "dim",
    "dim fixed",
    "rank A1",
    "rank A2",
    "rank A3",
    "rank N",
    "dim(im A1 ∩ im A2)",
    "rank A1|ker A2",
    "rank A2|ker A1",
)


def rank_invariants(M: KleinModule, ops: _Ops | None = None) -> list[int]:
    ops = ops or _Ops(M)
    m = ops.m
    A1, A2 = ops.A1, ops.A2
    ker1, ker2 = f2la.kernel(A1), f2la.kernel(A2)
    return [
        m,
        m - A1.vstack(A2).rank(),
        A1.rank(),
        A2.rank(),
        ops.A3.rank(),
        ops.N.rank(),
        f2la.intersect(f2la.image(A1), f2la.image(A2)).dim,
        f2la.map_subspace(A1, ker2).dim,
        f2la.map_subspace(A2, ker1).dim,
    ]


def functional_labels(fam: Sequence[SummandType] = FAMILY) -> list[str]:
    return (
        [f"hom({t.name}, M)" for t in fam]
        + [f"hom(M, {t.name})" for t in fam]
        + list(RANK_INVARIANTS)
    )


def functionals(M: KleinModule, fam: Sequence[SummandType] = FAMILY) -> list[int]:
    """The 27 additive invariants used to count summands."""
    M.check()
    ops = _Ops(M)
    dual_ops = _Ops(transpose(M))
    hom_in = [_hom_from_presentation(t, ops) for t in fam]
    # Hom(M, X) = Hom(X*, M*) and canonical(t)* is canonical(t.dual())
    hom_out = [_hom_from_presentation(t.dual(), dual_ops) for t in fam]
    return hom_in + hom_out + rank_invariants(M, ops)


def functionals_generic(M: KleinModule, fam: Sequence[SummandType] = FAMILY) -> list[int]:
    """Same values as :func:`functionals`, via the raw Hom systems (slow)."""
    hom_in = [hom_dim(canonical(t), M) for t in fam]
    hom_out = [hom_dim(M, canonical(t)) for t in fam]
    return hom_in + hom_out + rank_invariants(M)


# --- multiplicity solver ----------------------------------------------------


@dataclass(frozen=True)
class GramData:
    family: tuple[SummandType, ...]
    matrix: tuple[tuple[int, ...], ...]  # functionals x types
    rank: int
    left_inverse: tuple[tuple[Fraction, ...], ...]


def _rational_rank(rows: Sequence[Sequence[Fraction]]) -> int:
    work = [list(map(Fraction, r)) for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][c] != 0), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        p = work[rank]
        for i in range(len(work)):
            if i != rank and work[i][c] != 0:
                f = work[i][c] / p[c]
                work[i] = [a - f * b for a, b in zip(work[i], p)]
        rank += 1
    return rank


def _left_inverse(F: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """(F^T F)^{-1} F^T over the rationals; F must have full column rank."""
    nr, nc = len(F), len(F[0])
    G = [[Fraction(sum(F[r][i] * F[r][j] for r in range(nr))) for j in range(nc)] for i in range(nc)]
    aug = [G[i] + [Fraction(int(i == j)) for j in range(nc)] for i in range(nc)]
    for c in range(nc):
        piv = next(i for i in range(c, nc) if aug[i][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        p = aug[c][c]
        aug[c] = [x / p for x in aug[c]]
        for i in range(nc):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[c])]
    Ginv = [row[nc:] for row in aug]
    return [[sum(Ginv[i][k] * F[r][k] for k in range(nc)) for r in range(nr)] for i in range(nc)]


def compute_gram(fam: Sequence[SummandType] = FAMILY) -> GramData:
    """Evaluate every functional on every canonical type (always recomputed)."""
    fam = tuple(fam)
    cols = [functionals(canonical(t), fam) for t in fam]
    F = [[cols[j][i] for j in range(len(fam))] for i in range(len(cols[0]))]
    rank = _rational_rank(F)
    L = _left_inverse(F) if rank == len(fam) else []
    return GramData(fam, tuple(map(tuple, F)), rank, tuple(map(tuple, L)))


_gram_lock = threading.Lock()
_gram_cache: dict[tuple[SummandType, ...], GramData] = {}


def gram(fam: Sequence[SummandType] = FAMILY) -> GramData:
    """Memoized :func:`compute_gram`; aborts if the functionals do not separate the family."""
    fam = tuple(fam)
    with _gram_lock:
        data = _gram_cache.get(fam)
        if data is None:
            data = compute_gram(fam)
            if data.rank != len(fam):
                raise RuntimeError(
                    f"functional matrix has rank {data.rank} < {len(fam)}; the family is not separated"
                )
            _gram_cache[fam] = data
    return data


def multiplicities(M: KleinModule, fam: Sequence[SummandType] = FAMILY) -> Multiplicities:
    """Counts ``c`` with ``M`` isomorphic to the sum of canonical(t)^c(t).

    Only valid for modules promised to decompose over ``fam``; anything else
    raises :class:`NotInFamily` with the functional values attached.
    """
    data = gram(fam)
    v = functionals(M, data.family)
    counts = []
    for row in data.left_inverse:
        x = sum((coef * val for coef, val in zip(row, v)), Fraction(0))
        counts.append(x)
    bad = next((x for x in counts if x.denominator != 1 or x < 0), None)
    if bad is not None:
        raise NotInFamily(f"no nonnegative integer solution (got coefficient {bad})", v)
    ints = [int(x) for x in counts]
    for r, row in enumerate(data.matrix):
        if sum(a * c for a, c in zip(row, ints)) != v[r]:
            raise NotInFamily(f"functional {functional_labels(data.family)[r]!r} is inconsistent", v)
    return Multiplicities({t: c for t, c in zip(data.family, ints) if c})


# --- random sampling ----------------------------------------------------------


def random_counts(rng: random.Random, max_dim: int = 60, fam: Sequence[SummandType] = FAMILY) -> Multiplicities:
    """A random multiset over ``fam`` of total dimension at most ``max_dim``."""
    target = rng.randint(0, max_dim)
    counts = Multiplicities()
    total = 0
    while True:
        fits = [t for t in fam if total + t.dim <= target]
        if not fits:
            return counts
        t = rng.choice(fits)
        counts[t] += 1
        total += t.dim


def random_conjugate(M: KleinModule, rng: random.Random) -> KleinModule:
    return conjugate(M, f2la.random_invertible(M.dim, rng))


# --- text format -------------------------------------------------------------


def format_module(M: KleinModule) -> str:
    n = M.dim
    lines = [f"dim {n}", "sigma1"]
    lines += [f2la.bitstring(r, n) for r in M.s1.rows]
    lines.append("sigma2")
    lines += [f2la.bitstring(r, n) for r in M.s2.rows]
    return "\n".join(lines) + "\n"


def parse_module(text: str) -> KleinModule:
    """Parse the ``dim / sigma1 / rows / sigma2 / rows`` format (no validation)."""
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith("dim "):
        raise ModuleFormatError("line 1 must be 'dim <n>'")
    try:
        n = int(lines[0][4:])
    except ValueError:
        raise ModuleFormatError(f"bad dimension in {lines[0]!r}") from None
    if n < 0:
        raise ModuleFormatError("dimension must be nonnegative")
    if len(lines) != 2 * n + 3:
        raise ModuleFormatError(f"expected {2 * n + 3} lines, found {len(lines)}")
    if lines[1] != "sigma1" or lines[n + 2] != "sigma2":
        raise ModuleFormatError("missing 'sigma1' / 'sigma2' header")

    def block(rows):
        out = []
        for k, row in enumerate(rows):
            if len(row) != n or any(ch not in "01" for ch in row):
                raise ModuleFormatError(f"row {k + 1} must be {n} characters from {{0,1}}: {row!r}")
            out.append(f2la.parse_bitstring(row) if n else 0)
        return F2Matrix(n, n, tuple(out))

    return KleinModule(block(lines[2 : n + 2]), block(lines[n + 3 :]))
