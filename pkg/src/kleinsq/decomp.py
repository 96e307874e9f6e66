"""Filtration of a fixed subspace and the explicit summand builder.

Everything here works for an abstract module ``M`` and a subspace ``phi`` of
its fixed points; in the field setting ``phi`` is the image of the base
field's square classes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import f2la
from .errors import MissingFlag, NotComplement, NotInSubspace, PhiNotFixed, VerificationFailed
from .f2la import F2Matrix, Subspace
from .kleinmod import (
    CYC_G1,
    CYC_G2,
    CYC_G3,
    FREE,
    TRIV,
    KleinModule,
    Multiplicities,
    SummandType,
    _Ops,
    fixed_submodule,
    omega_plus,
    submodule_closure,
)


@dataclass(frozen=True)
class Filtration:
    A: Subspace  # phi ∩ N(M)
    V: Subspace  # B ∩ C
    B: Subspace  # phi ∩ A1(ker A2)
    C: Subspace  # phi ∩ A2(ker A1)
    D: Subspace  # phi ∩ A1(ker(s1 + s2))


def _check_phi(M: KleinModule, phi: Subspace) -> None:
    if phi.ambient_dim != M.dim or not phi.issubset(fixed_submodule(M)):
        raise PhiNotFixed("phi must be a subspace of the fixed submodule")


def filtration(M: KleinModule, phi: Subspace) -> Filtration:
    _check_phi(M, phi)
    ops = _Ops(M)
    A = f2la.intersect(phi, f2la.image(ops.N))
    B = f2la.intersect(phi, f2la.map_subspace(ops.A1, f2la.kernel(ops.A2)))
    C = f2la.intersect(phi, f2la.map_subspace(ops.A2, f2la.kernel(ops.A1)))
    # A1 g = A2 g  <=>  (s1 + s2) g = 0
    D = f2la.intersect(phi, f2la.map_subspace(ops.A1, f2la.kernel(M.s1 + M.s2)))
    return Filtration(A=A, V=f2la.intersect(B, C), B=B, C=C, D=D)


@dataclass(frozen=True)
class WPairing:
    """Pairs (b, c) from the chosen complements for which the three-step chain
    g1 -> b <- g2 -> c <- g3 (with A2 g1 = 0 = A1 g3) is solvable."""

    B_W: Subspace
    C_W: Subspace
    phi_W: F2Matrix  # B_W coordinates -> C_W coordinates
    witnesses: tuple[tuple[int, int, int, int, int], ...]  # (b, c, g1, g2, g3) per B_W basis vector

    def phi(self, b: int) -> int:
        coeff = self.B_W.coords(b)
        if coeff is None:
            raise NotInSubspace("vector is not in B_W")
        return self.C_W.combine(self.phi_W.apply(coeff))

    def witness(self, b: int) -> tuple[int, int, int]:
        coeff = self.B_W.coords(b)
        if coeff is None:
            raise NotInSubspace("vector is not in B_W")
        g1 = g2 = g3 = 0
        for k, (_, _, w1, w2, w3) in enumerate(self.witnesses):
            if (coeff >> k) & 1:
                g1 ^= w1
                g2 ^= w2
                g3 ^= w3
        return g1, g2, g3


def _is_complement(X: Subspace, V: Subspace, whole: Subspace) -> bool:
    return (
        X.issubset(whole)
        and f2la.intersect(X, V).dim == 0
        and f2la.add(X, V) == whole
    )


def w_pairing(M: KleinModule, phi: Subspace, B_comp: Subspace, C_comp: Subspace,
              filt: Filtration | None = None) -> WPairing:
    filt = filt or filtration(M, phi)
    if not _is_complement(B_comp, filt.V, filt.B):
        raise NotComplement("B_comp is not a complement of V in B")
    if not _is_complement(C_comp, filt.V, filt.C):
        raise NotComplement("C_comp is not a complement of V in C")
    ops = _Ops(M)
    m = M.dim
    A1, A2 = ops.A1, ops.A2
    # unknown x = g1 | g2 << m | g3 << 2m
    rows = []
    for i in range(m):
        rows.append(A2.rows[i])                                  # A2 g1 = 0
        rows.append(A1.rows[i] << (2 * m))                       # A1 g3 = 0
        rows.append((A1.rows[i] << m) | (A2.rows[i] << (2 * m)))  # A1 g2 = A2 g3
        rows.append(A1.rows[i] | (A2.rows[i] << m))              # A1 g1 = A2 g2
    K = f2la.kernel(F2Matrix(len(rows), 3 * m, tuple(rows)))
    lo = (1 << m) - 1

    def project(x):  # (b, c) = (A1 g1, A1 g2), packed as b | c << m
        return A1.apply(x & lo) | (A1.apply((x >> m) & lo) << m)

    pairs = [project(x) for x in K.basis]
    P, combos = f2la.canonicalize_tracked(pairs, [1 << k for k in range(K.dim)], 2 * m)
    box = f2la.canonicalize(list(B_comp.basis) + [c << m for c in C_comp.basis], 2 * m)
    Q = f2la.intersect(P, box)
    B_W = f2la.canonicalize([q & lo for q in Q.basis], m)
    C_W = f2la.canonicalize([q >> m for q in Q.basis], m)
    if not (Q.dim == B_W.dim == C_W.dim):
        raise VerificationFailed("the achievable pairs are not the graph of a bijection")

    witnesses = []
    cols = []
    for b in B_W.basis:
        # the unique q in Q with first half b
        coeff = f2la.solve(F2Matrix.from_columns([q & lo for q in Q.basis], m), b)
        q = Q.combine(coeff)
        c = q >> m
        pcoeff = P.coords(q)
        x = 0
        for k in range(P.dim):
            if (pcoeff >> k) & 1:
                x ^= K.combine(combos[k])
        g1, g2, g3 = x & lo, (x >> m) & lo, x >> (2 * m)
        if not (A2.apply(g1) == 0 and A1.apply(g1) == b and A2.apply(g2) == b
                and A1.apply(g2) == c and A2.apply(g3) == c and A1.apply(g3) == 0):
            raise VerificationFailed("W witness does not solve its chain")
        witnesses.append((b, c, g1, g2, g3))
        cols.append(C_W.coords(c))
    phi_W = F2Matrix.from_columns(cols, C_W.dim)
    return WPairing(B_W, C_W, phi_W, tuple(witnesses))


@dataclass
class HatJResult:
    """Explicit summands spanning a submodule whose fixed part is ``phi``.

    ``summands`` lists (type, generators); each layer list keeps the fixed
    vector together with the elements that solve its defining equations, so
    that witnesses can be assembled later.
    """

    module: KleinModule
    phi: Subspace
    filtration: Filtration
    pairing: WPairing
    summands: list[tuple[SummandType, tuple[int, ...]]]
    spans: dict[str, Subspace]
    total: Subspace
    a_layer: list[tuple[int, int]] = field(default_factory=list)         # (f, g): N g = f
    v_layer: list[tuple[int, int, int]] = field(default_factory=list)    # (f, g1, g2)
    w_layer: list[tuple[int, int, int, int, int]] = field(default_factory=list)  # (b, c, g1, g2, g3)
    b_layer: list[tuple[int, int]] = field(default_factory=list)         # (f, g): A1 g = f, A2 g = 0
    c_layer: list[tuple[int, int]] = field(default_factory=list)         # (f, g): A2 g = f, A1 g = 0
    d_layer: list[tuple[int, int]] = field(default_factory=list)         # (f, g): A1 g = A2 g = f
    f_layer: list[int] = field(default_factory=list)

    def counts(self) -> Multiplicities:
        return Multiplicities(t for t, _ in self.summands)

    def submodule(self) -> KleinModule:
        from .kleinmod import restrict

        return restrict(self.module, self.total)


LAYERS = ("Y_A", "Y_V", "Y_W", "Y_B", "Y_C", "Y_D", "Y_F")


def _preimage_vector(A: F2Matrix, target: int) -> int:
    x = f2la.solve(A, target)
    if x is None:
        raise VerificationFailed("expected preimage does not exist")
    return x


def build_hat_J(M: KleinModule, phi: Subspace) -> HatJResult:
    filt = filtration(M, phi)
    ops = _Ops(M)
    m = M.dim
    A1, A2, N = ops.A1, ops.A2, ops.N
    ker_both_A1 = A1.vstack(A2)  # [A1; A2] x = (f, 0)
    res = HatJResult(module=M, phi=phi, filtration=filt, pairing=None, summands=[],  # type: ignore[arg-type]
                     spans={}, total=Subspace.zero(m))
    gens: dict[str, list[int]] = {name: [] for name in LAYERS}

    def stacked(top: int, bottom: int) -> int:
        return top | (bottom << m)

    for f in filt.A.basis:
        g = _preimage_vector(N, f)
        res.a_layer.append((f, g))
        res.summands.append((FREE, (g,)))
        gens["Y_A"].append(g)

    for f in f2la.complement(filt.A, filt.V).basis:
        g1 = _preimage_vector(ker_both_A1, stacked(f, 0))
        g2 = _preimage_vector(ker_both_A1, stacked(0, f))
        res.v_layer.append((f, g1, g2))
        res.summands.append((omega_plus(1), (g1, g2)))
        gens["Y_V"] += [g1, g2]

    B_comp = f2la.complement(filt.V, filt.B)
    C_comp = f2la.complement(filt.V, filt.C)
    pairing = w_pairing(M, phi, B_comp, C_comp, filt)
    res.pairing = pairing
    for b, c, g1, g2, g3 in pairing.witnesses:
        res.w_layer.append((b, c, g1, g2, g3))
        res.summands.append((omega_plus(2), (g1, g2, g3)))
        gens["Y_W"] += [g1, g2, g3]

    for f in f2la.complement(pairing.B_W, B_comp).basis:
        g = _preimage_vector(ker_both_A1, stacked(f, 0))
        res.b_layer.append((f, g))
        res.summands.append((CYC_G1, (g,)))
        gens["Y_B"].append(g)

    for f in f2la.complement(pairing.C_W, C_comp).basis:
        g = _preimage_vector(ker_both_A1, stacked(0, f))
        res.c_layer.append((f, g))
        res.summands.append((CYC_G2, (g,)))
        gens["Y_C"].append(g)

    BC = f2la.add(filt.B, filt.C)
    equal_sides = A1.vstack(A2)
    for f in f2la.complement(f2la.intersect(BC, filt.D), filt.D).basis:
        g = _preimage_vector(equal_sides, stacked(f, f))
        res.d_layer.append((f, g))
        res.summands.append((CYC_G3, (g,)))
        gens["Y_D"].append(g)

    for f in f2la.complement(f2la.add(BC, filt.D), phi).basis:
        res.f_layer.append(f)
        res.summands.append((TRIV, (f,)))
        gens["Y_F"].append(f)

    res.spans = {name: submodule_closure(M, gens[name]) for name in LAYERS}
    res.total = f2la.sum_of(list(res.spans.values()), m)
    _verify_hat_J(res)
    return res


def _verify_hat_J(res: HatJResult) -> None:
    M = res.module
    expected = sum(t.dim for t, _ in res.summands)
    if res.total.dim != expected:
        raise VerificationFailed(f"summands are not independent: span {res.total.dim} != {expected}")
    for t, g in res.summands:
        if submodule_closure(M, g).dim != t.dim:
            raise VerificationFailed(f"summand {t} generated by {g} has the wrong dimension")
    fixed = fixed_submodule(M)
    if f2la.intersect(res.total, fixed) != res.phi:
        raise VerificationFailed("fixed part of the constructed submodule differs from phi")


def layer_fixed_parts(res: HatJResult) -> list[Subspace]:
    """Fixed parts of the partial sums Y_A, Y_A+Y_V, ..., Y_A+...+Y_F."""
    fixed = fixed_submodule(res.module)
    out = []
    acc: list[Subspace] = []
    for name in LAYERS:
        acc.append(res.spans[name])
        out.append(f2la.intersect(f2la.sum_of(acc, res.module.dim), fixed))
    return out


def solvable_in_hat_J(res: HatJResult, which: str, f: int) -> int:
    """An element ``g`` of the constructed submodule solving the diagram for ``f``:

    A: N g = f;  B: A1 g = f, A2 g = 0;  C: A2 g = f, A1 g = 0;  D: A1 g = A2 g = f.
    """
    ops = _Ops(res.module)
    A1, A2 = ops.A1, ops.A2
    targets: list[tuple[int, int]] = []  # (fixed vector, its witness)
    if which == "A":
        targets = [(fa, g) for fa, g in res.a_layer]
    elif which == "B":
        targets = [(fa, A2.apply(g)) for fa, g in res.a_layer]
        targets += [(fv, g1) for fv, g1, _ in res.v_layer]
        targets += [(b, g1) for b, _, g1, _, _ in res.w_layer]
        targets += res.b_layer
    elif which == "C":
        targets = [(fa, A1.apply(g)) for fa, g in res.a_layer]
        targets += [(fv, g2) for fv, _, g2 in res.v_layer]
        targets += [(c, g3) for _, c, _, _, g3 in res.w_layer]
        targets += res.c_layer
    elif which == "D":
        # D0 layer first, then the W graph {b + phi_W(b)}, then V
        targets = list(res.d_layer)
        targets += [(b ^ c, g1 ^ g2 ^ g3) for b, c, g1, g2, g3 in res.w_layer]
        targets += [(fa, A1.apply(g) ^ A2.apply(g)) for fa, g in res.a_layer]
        targets += [(fv, g1 ^ g2) for fv, g1, g2 in res.v_layer]
    else:
        raise ValueError(f"unknown diagram {which!r}")

    m = res.module.dim
    if f == 0:
        return 0
    coeff = f2la.solve(F2Matrix.from_columns([t for t, _ in targets], m), f) if targets else None
    if coeff is None:
        raise NotInSubspace(f"vector is not in the {which} subspace")
    g = 0
    for k, (_, w) in enumerate(targets):
        if (coeff >> k) & 1:
            g ^= w
    ok = {
        "A": ops.N.apply(g) == f,
        "B": A1.apply(g) == f and A2.apply(g) == 0,
        "C": A2.apply(g) == f and A1.apply(g) == 0,
        "D": A1.apply(g) == f and A2.apply(g) == f,
    }[which]
    if not ok or g not in res.total:
        raise VerificationFailed(f"assembled {which}-witness does not check out")
    return g


# --- classification of the X summand ------------------------------------------


class XShape(Enum):
    ZERO = "Zero"
    F2 = "F2"
    F2_PLUS_F2 = "F2PlusF2"
    OMEGA_MINUS_1 = "OmegaMinus1"
    OMEGA_MINUS_2 = "OmegaMinus2"
    OMEGA_MINUS_1_SQUARED = "OmegaMinus1Squared"
    UNDECIDED = "Undecided(Omega-2 | Omega-1 ⊕ Omega-1)"

    @property
    def candidates(self) -> tuple["XShape", ...]:
        if self is XShape.UNDECIDED:
            return (XShape.OMEGA_MINUS_2, XShape.OMEGA_MINUS_1_SQUARED)
        return (self,)


# t_i = 0 planes, as subspaces of F_2^3 (bit i-1 holds t_i)
COORDINATE_PLANES = tuple(
    f2la.canonicalize([1 << j for j in range(3) if j != i], 3) for i in range(3)
)


def x_shape(imT: Subspace, norm_intersection_nontrivial: bool | None = None,
            decided: bool = False) -> XShape:
    if imT.ambient_dim != 3:
        raise ValueError("im(T) lives in F_2^3")
    d = imT.dim
    if d == 0:
        return XShape.ZERO
    if d == 1:
        return XShape.F2
    if d == 2:
        return XShape.OMEGA_MINUS_1 if imT in COORDINATE_PLANES else XShape.F2_PLUS_F2
    if norm_intersection_nontrivial is None:
        if decided:
            raise MissingFlag("dim im(T) = 3 needs the norm-intersection flag")
        return XShape.UNDECIDED
    return XShape.OMEGA_MINUS_2 if norm_intersection_nontrivial else XShape.OMEGA_MINUS_1_SQUARED
