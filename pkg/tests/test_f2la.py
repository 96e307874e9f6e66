import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from kleinsq import f2la
from kleinsq.errors import DimensionMismatch, LengthMismatch, NotASubspace
from kleinsq.f2la import F2Matrix, Subspace


def span_set(vectors, n):
    """All elements of the span, by enumeration."""
    out = {0}
    for v in vectors:
        out |= {x ^ v for x in out}
    return out


def space_set(S: Subspace):
    return span_set(S.basis, S.ambient_dim)


def matrices(max_n=6):
    return st.integers(1, max_n).flatmap(
        lambda r: st.integers(1, max_n).flatmap(
            lambda c: st.lists(st.integers(0, (1 << c) - 1), min_size=r, max_size=r).map(
                lambda rows: F2Matrix(r, c, tuple(rows))
            )
        )
    )


def subspaces(n):
    return st.lists(st.integers(0, (1 << n) - 1), max_size=n + 2).map(lambda vs: f2la.canonicalize(vs, n))


# --- worked examples ----------------------------------------------------------


def test_canonicalize_full_space():
    S = f2la.canonicalize([(1, 1), (0, 1)], 2)
    assert S.as_bits() == [(1, 0), (0, 1)]


def test_canonicalize_empty():
    S = f2la.canonicalize([], 3)
    assert S.dim == 0 and S == Subspace.zero(3)


def test_canonicalize_duplicates():
    S = f2la.canonicalize([(1, 0, 1), (1, 0, 1)], 3)
    assert S.as_bits() == [(1, 0, 1)]


def test_canonicalize_length_mismatch():
    with pytest.raises(LengthMismatch):
        f2la.canonicalize([(1, 0)], 3)


def test_solve_identity():
    assert f2la.to_bits(f2la.solve(F2Matrix.identity(3), (1, 0, 1)), 3) == (1, 0, 1)


def test_solve_zero_map():
    assert f2la.solve(F2Matrix.zeros(2, 2), (1, 0)) is None


def test_solve_rank_one():
    A = F2Matrix.from_lists([[1, 1], [0, 0]])
    x = f2la.solve(A, (1, 0))
    assert f2la.to_bits(x, 2) in {(1, 0), (0, 1)}
    assert A.apply(x) == f2la.from_bits((1, 0))


def test_solve_dimension_mismatch():
    with pytest.raises((DimensionMismatch, LengthMismatch)):
        f2la.solve(F2Matrix.identity(2), (1, 0, 1))


def test_kernel_image_examples():
    assert f2la.kernel(F2Matrix.identity(4)).dim == 0
    assert f2la.image(F2Matrix.zeros(3, 3)).dim == 0
    A = F2Matrix.from_lists([[1, 1], [1, 1]])
    assert f2la.kernel(A).as_bits() == [(1, 1)]
    assert f2la.image(A).as_bits() == [(1, 1)]


def test_intersect_lines():
    U = f2la.canonicalize([(1, 0)], 2)
    V = f2la.canonicalize([(0, 1)], 2)
    assert f2la.intersect(U, V).dim == 0


def test_complement_of_line():
    U = f2la.canonicalize([(1, 0, 0)], 3)
    V = Subspace.full(3)
    C = f2la.complement(U, V)
    assert C.dim == 2
    assert space_set(U) & space_set(C) == {0}
    assert space_set(f2la.add(U, C)) == set(range(8))
    assert f2la.complement(U, V).basis == C.basis


def test_complement_requires_containment():
    U = f2la.canonicalize([(1, 0, 0)], 3)
    V = f2la.canonicalize([(0, 1, 0)], 3)
    with pytest.raises(NotASubspace):
        f2la.complement(U, V)


def test_preimage_of_zero_map():
    W = f2la.canonicalize([(1, 0)], 2)
    assert f2la.preimage(F2Matrix.zeros(2, 3), W) == Subspace.full(3)


def test_mismatched_ambient():
    with pytest.raises(DimensionMismatch):
        f2la.intersect(Subspace.full(2), Subspace.full(3))


# --- properties against enumeration ----------------------------------------------


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_kernel_and_image_by_enumeration(A):
    xs = range(1 << A.ncols)
    K, I = f2la.kernel(A), f2la.image(A)
    assert space_set(K) == {x for x in xs if A.apply(x) == 0}
    assert space_set(I) == {A.apply(x) for x in xs}
    assert K.dim + I.dim == A.ncols
    img, pre = f2la.image_with_preimages(A)
    assert all(A.apply(x) == y for x, y in zip(pre, img.basis))


@settings(max_examples=150, deadline=None)
@given(matrices(), st.data())
def test_solve_by_enumeration(A, data):
    b = data.draw(st.integers(0, (1 << A.nrows) - 1))
    reachable = {A.apply(x) for x in range(1 << A.ncols)}
    x = f2la.solve(A, b)
    if b in reachable:
        assert x is not None and A.apply(x) == b
    else:
        assert x is None


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(subspaces(n), subspaces(n))))
def test_subspace_algebra(UV):
    U, V = UV
    su, sv = space_set(U), space_set(V)
    I, S = f2la.intersect(U, V), f2la.add(U, V)
    assert space_set(I) == su & sv
    assert space_set(S) == {a ^ b for a in su for b in sv}
    assert U.dim + V.dim == I.dim + S.dim
    C = f2la.complement(I, U)
    assert space_set(C) & space_set(I) == {0} and f2la.add(C, I) == U


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(subspaces(n), st.just(n))), matrices())
def test_preimage_by_enumeration(Wn, A):
    W, n = Wn
    A = F2Matrix(n, A.ncols, tuple(r & ((1 << A.ncols) - 1) for r in (list(A.rows) * n)[:n]))
    sw = space_set(W)
    assert space_set(f2la.preimage(A, W)) == {x for x in range(1 << A.ncols) if A.apply(x) in sw}


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(subspaces))
def test_canonical_form(S):
    assert f2la.canonicalize(S.basis, S.ambient_dim) == S
    assert list(S.pivots) == sorted(set(S.pivots))
    # reduced: each pivot column appears in exactly one basis vector
    for p in S.pivots:
        assert sum((b >> p) & 1 for b in S.basis) == 1
    # coords round-trip on every element of the span
    for v in space_set(S):
        assert S.combine(S.coords(v)) == v


def test_equality_is_span_equality():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 6)
        vs = [rng.getrandbits(n) for _ in range(rng.randint(0, 4))]
        ws = [rng.getrandbits(n) for _ in range(rng.randint(0, 4))]
        same = span_set(vs, n) == span_set(ws, n)
        assert (f2la.canonicalize(vs, n) == f2la.canonicalize(ws, n)) == same


def test_random_dimension_formula_n12():
    rng = random.Random(12)
    for _ in range(200):
        U = f2la.canonicalize([rng.getrandbits(12) for _ in range(rng.randint(0, 12))], 12)
        V = f2la.canonicalize([rng.getrandbits(12) for _ in range(rng.randint(0, 12))], 12)
        assert U.dim + V.dim == f2la.intersect(U, V).dim + f2la.add(U, V).dim


def test_matrix_algebra():
    rng = random.Random(3)
    for _ in range(50):
        n = rng.randint(1, 8)
        A, B, C = (f2la.random_matrix(n, n, rng) for _ in range(3))
        assert (A @ B) @ C == A @ (B @ C)
        assert A @ (B + C) == A @ B + A @ C
        P = f2la.random_invertible(n, rng)
        assert P @ P.inverse() == F2Matrix.identity(n)
        for v in range(1 << min(n, 5)):
            assert (A @ B).apply(v) == A.apply(B.apply(v))
        assert A.T.T == A


def test_rank_matches_enumeration():
    for rows in itertools.product(range(8), repeat=3):
        A = F2Matrix(3, 3, rows)
        assert A.rank() == len(span_set(rows, 3)).bit_length() - 1
