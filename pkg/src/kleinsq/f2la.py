"""Dense linear algebra over the two-element field.

Vectors are Python ints used as bitsets: bit ``i`` holds coordinate ``i``.
A row-major matrix stores one such int per row, so ``A @ x`` is a parity of
``row & x`` per row.  Subspaces are kept in reduced row-echelon form where
the pivot of a vector is its lowest set bit; that form is unique, which makes
``==`` on :class:`Subspace` a genuine subspace equality.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import DimensionMismatch, LengthMismatch, NotASubspace


def low_bit(v: int) -> int:
    """Index of the lowest set bit of ``v`` (``v`` must be nonzero)."""
    return (v & -v).bit_length() - 1


def parity(v: int) -> int:
    return v.bit_count() & 1


def from_bits(bits: Sequence[int]) -> int:
    v = 0
    for i, b in enumerate(bits):
        if b & 1:
            v |= 1 << i
    return v


def to_bits(v: int, n: int) -> tuple[int, ...]:
    return tuple((v >> i) & 1 for i in range(n))


def bitstring(v: int, n: int) -> str:
    return "".join(str((v >> i) & 1) for i in range(n))


def parse_bitstring(s: str) -> int:
    if any(ch not in "01" for ch in s):
        raise ValueError(f"not a bitstring: {s!r}")
    return from_bits([int(ch) for ch in s])


def _check_len(v: int, n: int) -> None:
    if v < 0 or v.bit_length() > n:
        raise LengthMismatch(f"vector {v:#x} does not fit in dimension {n}")


def _as_int(v, n: int) -> int:
    if isinstance(v, int):
        _check_len(v, n)
        return v
    bits = tuple(v)
    if len(bits) != n:
        raise LengthMismatch(f"vector of length {len(bits)} in dimension {n}")
    return from_bits(bits)


class _Reducer:
    """Semi-echelon basis keyed by lowest bit, with optional XOR-tracked tags."""

    __slots__ = ("rows",)

    def __init__(self):
        self.rows: dict[int, tuple[int, int]] = {}

    def reduce(self, v: int, tag: int = 0) -> tuple[int, int]:
        rows = self.rows
        while v:
            p = low_bit(v)
            hit = rows.get(p)
            if hit is None:
                break
            v ^= hit[0]
            tag ^= hit[1]
        return v, tag

    def insert(self, v: int, tag: int = 0) -> bool:
        v, tag = self.reduce(v, tag)
        if v:
            self.rows[low_bit(v)] = (v, tag)
            return True
        return False

    def rref(self) -> tuple[list[int], list[int]]:
        piv = sorted(self.rows)
        vecs = [self.rows[p][0] for p in piv]
        tags = [self.rows[p][1] for p in piv]
        # ascending pivots: row i can only carry bits of later pivots
        for i, p in enumerate(piv):
            bit = 1 << p
            vi, ti = vecs[i], tags[i]
            for j in range(i):
                if vecs[j] & bit:
                    vecs[j] ^= vi
                    tags[j] ^= ti
        return vecs, tags


def rank_of(vectors: Iterable[int]) -> int:
    red = _Reducer()
    return sum(1 for v in vectors if red.insert(v))


@dataclass(frozen=True)
class Subspace:
    """A subspace of F_2^n held by its unique reduced-echelon basis."""

    ambient_dim: int
    basis: tuple[int, ...] = ()
    pivots: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        if not self.pivots and self.basis:
            object.__setattr__(self, "pivots", tuple(low_bit(b) for b in self.basis))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n)

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, tuple(1 << i for i in range(n)))

    def reduce(self, v: int) -> tuple[int, int]:
        """Residual of ``v`` modulo the span, and the coefficient mask used."""
        coeff = 0
        for k, (p, b) in enumerate(zip(self.pivots, self.basis)):
            if (v >> p) & 1:
                v ^= b
                coeff |= 1 << k
        return v, coeff

    def __contains__(self, v: int) -> bool:
        return self.reduce(v)[0] == 0

    def coords(self, v: int) -> int | None:
        """Coefficient mask of ``v`` over ``basis``, or None if ``v`` is outside."""
        rest, coeff = self.reduce(v)
        return coeff if rest == 0 else None

    def combine(self, coeff: int) -> int:
        v = 0
        k = 0
        while coeff:
            if coeff & 1:
                v ^= self.basis[k]
            coeff >>= 1
            k += 1
        return v

    def issubset(self, other: "Subspace") -> bool:
        return self.ambient_dim == other.ambient_dim and all(b in other for b in self.basis)

    def __le__(self, other: "Subspace") -> bool:
        return self.issubset(other)

    def vectors(self):
        """Every element of the subspace (2^dim of them)."""
        for c in range(1 << self.dim):
            yield self.combine(c)

    def as_bits(self) -> list[tuple[int, ...]]:
        return [to_bits(b, self.ambient_dim) for b in self.basis]

    def __repr__(self):
        inner = ", ".join(bitstring(b, self.ambient_dim) for b in self.basis)
        return f"Subspace(n={self.ambient_dim}, [{inner}])"


def canonicalize(vectors: Iterable, ambient_dim: int) -> Subspace:
    red = _Reducer()
    for v in vectors:
        red.insert(_as_int(v, ambient_dim))
    vecs, _ = red.rref()
    return Subspace(ambient_dim, tuple(vecs))


def canonicalize_tracked(vectors: Sequence[int], tags: Sequence[int], ambient_dim: int):
    """Like :func:`canonicalize`, also returning for each basis vector the XOR of
    input tags that produces it."""
    red = _Reducer()
    for v, t in zip(vectors, tags):
        red.insert(_as_int(v, ambient_dim), t)
    vecs, out = red.rref()
    return Subspace(ambient_dim, tuple(vecs)), out


@dataclass(frozen=True)
class F2Matrix:
    nrows: int
    ncols: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.nrows:
            raise DimensionMismatch(f"{len(self.rows)} rows given for a {self.nrows}-row matrix")
        for r in self.rows:
            _check_len(r, self.ncols)

    # constructors
    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls(nrows, ncols, (0,) * nrows)

    @classmethod
    def from_lists(cls, entries: Sequence[Sequence[int]], ncols: int | None = None) -> "F2Matrix":
        if ncols is None:
            ncols = len(entries[0]) if entries else 0
        rows = []
        for r in entries:
            if len(r) != ncols:
                raise LengthMismatch("ragged matrix rows")
            rows.append(from_bits(r))
        return cls(len(rows), ncols, tuple(rows))

    @classmethod
    def from_columns(cls, columns: Sequence[int], nrows: int) -> "F2Matrix":
        rows = [0] * nrows
        for j, c in enumerate(columns):
            _check_len(c, nrows)
            while c:
                i = low_bit(c)
                rows[i] |= 1 << j
                c &= c - 1
        return cls(nrows, len(columns), tuple(rows))

    # access
    def entry(self, i: int, j: int) -> int:
        return (self.rows[i] >> j) & 1

    def to_lists(self) -> list[list[int]]:
        return [list(to_bits(r, self.ncols)) for r in self.rows]

    def columns(self) -> list[int]:
        return list(self.transpose().rows)

    # arithmetic
    def apply(self, v: int) -> int:
        out = 0
        for i, r in enumerate(self.rows):
            if (r & v).bit_count() & 1:
                out |= 1 << i
        return out

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        if self.ncols != other.nrows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        orows = other.rows
        out = []
        for r in self.rows:
            acc = 0
            while r:
                j = low_bit(r)
                acc ^= orows[j]
                r &= r - 1
            out.append(acc)
        return F2Matrix(self.nrows, other.ncols, tuple(out))

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return F2Matrix(self.nrows, self.ncols, tuple(a ^ b for a, b in zip(self.rows, other.rows)))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    def transpose(self) -> "F2Matrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            while r:
                j = low_bit(r)
                cols[j] |= 1 << i
                r &= r - 1
        return F2Matrix(self.ncols, self.nrows, tuple(cols))

    @property
    def T(self) -> "F2Matrix":
        return self.transpose()

    def rank(self) -> int:
        return rank_of(self.rows)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows

    def inverse(self) -> "F2Matrix":
        n = self.nrows
        if self.ncols != n:
            raise DimensionMismatch("only square matrices are invertible")
        # rows of self, tagged by which unit vectors they came from
        span, tags = canonicalize_tracked(self.rows, [1 << i for i in range(n)], n)
        if span.dim != n:
            raise DimensionMismatch("matrix is singular")
        # span.basis[k] = e_k after full reduction, so tags[k] is row k of the inverse
        return F2Matrix(n, n, tuple(tags))

    def vstack(self, other: "F2Matrix") -> "F2Matrix":
        if self.ncols != other.ncols:
            raise DimensionMismatch("column counts differ")
        return F2Matrix(self.nrows + other.nrows, self.ncols, self.rows + other.rows)

    def __repr__(self):
        body = " ".join(bitstring(r, self.ncols) for r in self.rows)
        return f"F2Matrix({self.nrows}x{self.ncols}: {body})"


def solve(A: F2Matrix, b) -> int | None:
    """Some ``x`` with ``A @ x == b``, or None when the system is inconsistent."""
    b = _as_int(b, A.nrows)
    n = A.ncols
    aug_bit = 1 << n
    red = _Reducer()
    for i, r in enumerate(A.rows):
        red.insert(r | (aug_bit if (b >> i) & 1 else 0))
    vecs, _ = red.rref()
    x = 0
    mask = aug_bit - 1
    for v in vecs:
        if v & mask == 0:
            return None
        if v & aug_bit:
            x |= 1 << low_bit(v)
    if A.apply(x) != b:  # certificate
        raise AssertionError("solve produced a non-solution")
    return x


def kernel(A: F2Matrix) -> Subspace:
    n = A.ncols
    red = _Reducer()
    for r in A.rows:
        red.insert(r)
    vecs, _ = red.rref()
    pivots = [low_bit(v) for v in vecs]
    pivset = set(pivots)
    out = []
    for j in range(n):
        if j in pivset:
            continue
        x = 1 << j
        for p, v in zip(pivots, vecs):
            if (v >> j) & 1:
                x |= 1 << p
        out.append(x)
    return canonicalize(out, n)


def image_with_preimages(A: F2Matrix) -> tuple[Subspace, list[int]]:
    """Column space of ``A`` together with, for each basis vector ``y``, an ``x``
    such that ``A @ x == y``."""
    cols = A.columns()
    return canonicalize_tracked(cols, [1 << j for j in range(A.ncols)], A.nrows)


def image(A: F2Matrix) -> Subspace:
    return canonicalize(A.columns(), A.nrows)


def map_subspace(A: F2Matrix, S: Subspace) -> Subspace:
    """The image ``A(S)``."""
    if S.ambient_dim != A.ncols:
        raise DimensionMismatch("subspace does not live in the domain")
    return canonicalize([A.apply(b) for b in S.basis], A.nrows)


def _same_ambient(U: Subspace, V: Subspace) -> None:
    if U.ambient_dim != V.ambient_dim:
        raise DimensionMismatch(f"ambient dimensions {U.ambient_dim} and {V.ambient_dim} differ")


def intersect(U: Subspace, V: Subspace) -> Subspace:
    _same_ambient(U, V)
    n = U.ambient_dim
    # Zassenhaus: rows (u | u) and (v | 0); low block eliminated first
    rows = [u | (u << n) for u in U.basis] + list(V.basis)
    red = _Reducer()
    for r in rows:
        red.insert(r)
    vecs, _ = red.rref()
    low = (1 << n) - 1
    return canonicalize([v >> n for v in vecs if v & low == 0], n)


def add(U: Subspace, V: Subspace) -> Subspace:
    _same_ambient(U, V)
    return canonicalize(U.basis + V.basis, U.ambient_dim)


def sum_of(spaces: Sequence[Subspace], ambient_dim: int) -> Subspace:
    vecs = []
    for S in spaces:
        vecs.extend(S.basis)
    return canonicalize(vecs, ambient_dim)


def complement(U: Subspace, V: Subspace) -> Subspace:
    """A complement of ``U`` inside ``V``.

    Walks the echelon basis of ``V`` in pivot order and keeps each vector that is
    independent of ``U`` and of the vectors already kept.
    """
    _same_ambient(U, V)
    if not U.issubset(V):
        raise NotASubspace("complement requires U to lie inside V")
    red = _Reducer()
    for u in U.basis:
        red.insert(u)
    chosen = [v for v in V.basis if red.insert(v)]
    return canonicalize(chosen, V.ambient_dim)


def preimage(A: F2Matrix, W: Subspace) -> Subspace:
    """``{x : A @ x in W}``."""
    if W.ambient_dim != A.nrows:
        raise DimensionMismatch("target subspace does not live in the codomain")
    ann = kernel(F2Matrix(W.dim, W.ambient_dim, W.basis))
    Q = F2Matrix(ann.dim, W.ambient_dim, ann.basis)
    return kernel(Q @ A)


def random_matrix(nrows: int, ncols: int, rng: random.Random) -> F2Matrix:
    return F2Matrix(nrows, ncols, tuple(rng.getrandbits(ncols) if ncols else 0 for _ in range(nrows)))


def random_invertible(n: int, rng: random.Random) -> F2Matrix:
    while True:
        M = random_matrix(n, n, rng)
        if M.is_invertible():
            return M
