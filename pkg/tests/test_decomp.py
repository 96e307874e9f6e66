import itertools
import random

import pytest

from kleinsq import decomp, f2la, kleinmod as km
from kleinsq.decomp import XShape, x_shape
from kleinsq.errors import MissingFlag, NotComplement, NotInSubspace, PhiNotFixed
from kleinsq.f2la import Subspace
from kleinsq.kleinmod import CYC_G1, CYC_G2, CYC_G3, FREE, TRIV, omega_minus, omega_plus


def fixed(M):
    return km.fixed_submodule(M)


def brute_filtration(M, phi):
    """The five subspaces straight from their defining diagrams, by enumeration."""
    A1, A2, N = (km.operator(M, w) for w in ("A1", "A2", "N"))
    elems = range(1 << M.dim)
    pts = {f for f in elems if f in phi}
    A = {N.apply(g) for g in elems} & pts
    B = {A1.apply(g) for g in elems if A2.apply(g) == 0} & pts
    C = {A2.apply(g) for g in elems if A1.apply(g) == 0} & pts
    D = {A1.apply(g) for g in elems if A1.apply(g) == A2.apply(g)} & pts
    return A, B, C, D


def elements(S: Subspace):
    out = {0}
    for b in S.basis:
        out |= {x ^ b for x in out}
    return out


# --- filtration ------------------------------------------------------------------


def test_filtration_free():
    M = km.canonical(FREE)
    phi = fixed(M)
    F = decomp.filtration(M, phi)
    assert phi.dim == 1
    assert F.A == F.V == F.B == F.C == F.D == phi


def test_filtration_omega_plus_one():
    M = km.canonical(omega_plus(1))
    phi = fixed(M)
    F = decomp.filtration(M, phi)
    assert F.B == F.C == F.V == F.D == phi and F.A.dim == 0


def test_filtration_triv():
    M = km.canonical(TRIV)
    F = decomp.filtration(M, Subspace.full(1))
    assert all(S.dim == 0 for S in (F.A, F.V, F.B, F.C, F.D))


def test_phi_not_fixed():
    M = km.canonical(FREE)
    with pytest.raises(PhiNotFixed):
        decomp.filtration(M, Subspace.full(4))


def test_filtration_against_enumeration():
    rng = random.Random(1)
    for _ in range(40):
        M = km.random_conjugate(km.from_multiplicities(km.random_counts(rng, 10)), rng)
        fx = fixed(M)
        phi = f2la.canonicalize([fx.combine(rng.getrandbits(fx.dim)) for _ in range(rng.randint(0, fx.dim))], M.dim)
        F = decomp.filtration(M, phi)
        A, B, C, D = brute_filtration(M, phi)
        assert (elements(F.A), elements(F.B), elements(F.C), elements(F.D)) == (A, B, C, D)
        assert elements(F.V) == B & C
        assert F.A.issubset(F.V)


# --- W pairing ---------------------------------------------------------------------


def test_w_pairing_omega_plus_two():
    M = km.canonical(omega_plus(2))
    phi = fixed(M)
    F = decomp.filtration(M, phi)
    assert F.V.dim == 0 and F.B.dim == F.C.dim == 1
    W = decomp.w_pairing(M, phi, F.B, F.C)
    assert W.B_W == F.B and W.C_W == F.C
    assert W.phi(F.B.basis[0]) == F.C.basis[0]


def test_w_pairing_two_omega_plus_one():
    M = km.from_multiplicities({omega_plus(1): 2})
    phi = fixed(M)
    F = decomp.filtration(M, phi)
    assert F.B == F.C == F.V
    W = decomp.w_pairing(M, phi, Subspace.zero(M.dim), Subspace.zero(M.dim))
    assert W.B_W.dim == 0


def test_w_pairing_zero_module():
    M = km.direct_sum([])
    W = decomp.w_pairing(M, Subspace.zero(0), Subspace.zero(0), Subspace.zero(0))
    assert W.B_W.dim == W.C_W.dim == 0


def test_w_pairing_rejects_bad_complement():
    M = km.from_multiplicities({omega_plus(1): 1})
    phi = fixed(M)
    with pytest.raises(NotComplement):
        decomp.w_pairing(M, phi, phi, Subspace.zero(M.dim))


def test_w_pairing_uniqueness_by_enumeration():
    """For each b in B_W exactly one c in C_comp completes the chain."""
    rng = random.Random(3)
    for _ in range(25):
        counts = km.random_counts(rng, 11)
        M = km.random_conjugate(km.from_multiplicities(counts), rng)
        phi = fixed(M)
        F = decomp.filtration(M, phi)
        Bc, Cc = f2la.complement(F.V, F.B), f2la.complement(F.V, F.C)
        W = decomp.w_pairing(M, phi, Bc, Cc)
        A1, A2 = km.operator(M, "A1"), km.operator(M, "A2")
        elems = range(1 << M.dim)
        left = {A1.apply(g) for g in elems if A2.apply(g) == 0}
        right = {A2.apply(g) for g in elems if A1.apply(g) == 0}
        achievable = set()
        for g2 in elems:
            b, c = A2.apply(g2), A1.apply(g2)
            if b in left and c in right:
                achievable.add((b, c))
        for b in elements(W.B_W):
            partners = {c for (bb, c) in achievable if bb == b and c in Cc}
            assert partners == {W.phi(b)}
        assert W.B_W.dim == W.C_W.dim == W.phi_W.rank()


# --- build_hat_J ------------------------------------------------------------------------


def test_hat_J_free_plus_triv():
    M = km.from_multiplicities({FREE: 1, TRIV: 1})
    res = decomp.build_hat_J(M, fixed(M))
    assert res.counts().by_name() == {"F2": 1, "Free": 1}


def test_hat_J_omega_plus_two():
    M = km.canonical(omega_plus(2))
    res = decomp.build_hat_J(M, fixed(M))
    assert res.counts().by_name() == {"Omega+2": 1}


def test_hat_J_cyclic_mix():
    rng = random.Random(9)
    counts = km.Multiplicities({CYC_G1: 1, CYC_G2: 1, CYC_G3: 1, omega_plus(1): 1})
    for _ in range(10):
        M = km.random_conjugate(km.from_multiplicities(counts), rng)
        res = decomp.build_hat_J(M, fixed(M))
        assert res.counts() == counts == km.multiplicities(M)


def test_layer_fixed_parts():
    rng = random.Random(17)
    for _ in range(40):
        M = km.random_conjugate(km.from_multiplicities(km.random_counts(rng, 30)), rng)
        phi = fixed(M)
        res = decomp.build_hat_J(M, phi)
        F, W = res.filtration, res.pairing
        parts = decomp.layer_fixed_parts(res)
        assert parts[0] == F.A
        assert parts[1] == F.V
        assert parts[2] == f2la.sum_of([F.V, W.B_W, W.C_W], M.dim)
        assert parts[-1] == phi


def test_hat_J_with_partial_phi():
    rng = random.Random(23)
    for _ in range(40):
        M = km.random_conjugate(km.from_multiplicities(km.random_counts(rng, 30)), rng)
        fx = fixed(M)
        phi = f2la.canonicalize([fx.combine(rng.getrandbits(fx.dim)) for _ in range(rng.randint(0, fx.dim))], M.dim)
        res = decomp.build_hat_J(M, phi)
        assert f2la.intersect(res.total, fx) == phi
        assert km.multiplicities(res.submodule()) == res.counts()


# --- witnesses -----------------------------------------------------------------------------


def _check_witness(res, which, f, g):
    A1, A2, N = (km.operator(res.module, w) for w in ("A1", "A2", "N"))
    assert g in res.total
    if which == "A":
        assert N.apply(g) == f
    elif which == "B":
        assert A1.apply(g) == f and A2.apply(g) == 0
    elif which == "C":
        assert A2.apply(g) == f and A1.apply(g) == 0
    else:
        assert A1.apply(g) == f == A2.apply(g)


def test_witnesses_on_sampled_elements():
    rng = random.Random(31)
    for _ in range(20):
        M = km.random_conjugate(km.from_multiplicities(km.random_counts(rng, 24)), rng)
        res = decomp.build_hat_J(M, fixed(M))
        F = res.filtration
        for which, S in zip("ABCD", (F.A, F.B, F.C, F.D)):
            for f in list(elements(S))[:16]:
                _check_witness(res, which, f, decomp.solvable_in_hat_J(res, which, f))


def test_zero_witness():
    M = km.from_multiplicities({FREE: 1})
    res = decomp.build_hat_J(M, fixed(M))
    for which in "ABCD":
        assert decomp.solvable_in_hat_J(res, which, 0) == 0


def test_witness_outside_subspace():
    M = km.from_multiplicities({TRIV: 1, CYC_G1: 1})
    res = decomp.build_hat_J(M, fixed(M))
    f = next(v for v in fixed(M).basis if v not in res.filtration.A)
    with pytest.raises(NotInSubspace):
        decomp.solvable_in_hat_J(res, "A", f)


# --- X shapes -------------------------------------------------------------------------------


def all_subspaces_of_f2_cubed():
    seen = set()
    for k in range(4):
        for vs in itertools.combinations(range(1, 8), k):
            S = f2la.canonicalize(vs, 3)
            if S not in seen:
                seen.add(S)
                yield S


def test_sixteen_subspaces():
    assert len(list(all_subspaces_of_f2_cubed())) == 16


def test_x_shape_examples():
    assert x_shape(Subspace.zero(3)) is XShape.ZERO
    plane = f2la.canonicalize([(0, 1, 1), (0, 0, 1)], 3)
    assert x_shape(plane) is XShape.OMEGA_MINUS_1
    assert x_shape(Subspace.full(3)) is XShape.UNDECIDED


@pytest.mark.parametrize("flag", [True, False])
def test_x_shape_total(flag):
    for S in all_subspaces_of_f2_cubed():
        shape = x_shape(S, flag, decided=True)
        d = S.dim
        zero_coords = [i for i in range(3) if all(not (v >> i) & 1 for v in S.basis)]
        expected = {
            0: XShape.ZERO,
            1: XShape.F2,
            2: XShape.OMEGA_MINUS_1 if zero_coords else XShape.F2_PLUS_F2,
            3: XShape.OMEGA_MINUS_2 if flag else XShape.OMEGA_MINUS_1_SQUARED,
        }[d]
        assert shape is expected


def test_x_shape_missing_flag():
    with pytest.raises(MissingFlag):
        x_shape(Subspace.full(3), decided=True)
    assert x_shape(Subspace.zero(3), decided=True) is XShape.ZERO
    assert XShape.UNDECIDED.candidates == (XShape.OMEGA_MINUS_2, XShape.OMEGA_MINUS_1_SQUARED)
