"""Command-line interface: ``kleinsq {classify,examples,decompose,sweep,selftest}``.

Exit codes: 0 success, 1 check failure, 2 input error, 3 module outside the family.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from collections import Counter
from fractions import Fraction

from . import arith, f2la, kleinmod
from .decomp import XShape, build_hat_J
from .errors import (
    DependentClasses,
    InconsistentImage,
    InternalInconsistency,
    InvalidModule,
    KleinSqError,
    ModuleFormatError,
    NotInFamily,
    VerificationFailed,
    ZeroInput,
)

EXIT_OK, EXIT_CHECK, EXIT_INPUT, EXIT_FAMILY = 0, 1, 2, 3

# (a1, a2) -> (expected shape, expected im(T) as 3-bit strings t1 t2 t3)
EXAMPLES = (
    ((7, -5), XShape.ZERO, []),
    ((7, -1), XShape.F2, ["010"]),
    ((2, -1), XShape.OMEGA_MINUS_1, ["010", "001"]),
    ((5, 13), XShape.F2_PLUS_F2, ["101", "011"]),
    ((5, 41), XShape.UNDECIDED, ["100", "010", "001"]),
)


# --- documents ---------------------------------------------------------------


def _q(x) -> str:
    return str(Fraction(x))


def _witness_doc(w):
    if w is None:
        return None
    if isinstance(w[0], tuple):  # quaternion witness (e, f)
        return [[_q(x) for x in v] for v in w]
    return [_q(x) for x in w]


def classify_doc(a1: int, a2: int, bound: int) -> dict:
    p = arith.BiquadParams(a1, a2)
    c = arith.classify_X(p)
    r = c.report
    return {
        "a1": p.a1,
        "a2": p.a2,
        "report": {"z4z2": list(r.z4z2), "d4": list(r.d4), "q8": r.q8},
        "imT": [f2la.bitstring(v, 3) for v in c.imT.basis],
        "x_shape": c.shape.value,
        "witnesses": {k: _witness_doc(w) for k, w in arith.report_witnesses(p, r, bound).items()},
    }


def _flatten(doc, prefix=""):
    if isinstance(doc, dict) and doc:
        for k, v in doc.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(doc, list) and doc and isinstance(doc[0], (dict, list)):
        for i, v in enumerate(doc):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, _scalar(doc)


def _scalar(v) -> str:
    if v == {}:
        return "{}"
    if v is None:
        return "none"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, list):
        return "[" + " ".join(_scalar(x) for x in v) + "]"
    return str(v)


def render_text(doc) -> str:
    return "\n".join(f"{k}: {v}" for k, v in _flatten(doc))


def emit(doc, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        out.write(json.dumps(doc, ensure_ascii=False, indent=2) + "\n")
    else:
        out.write(render_text(doc) + "\n")


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _reduce_arg(name: str, a: int) -> int:
    r = arith.squarefree_part(a)
    if r != a:
        print(f"warning: {name} = {a} reduced to its square class {r}", file=sys.stderr)
    return r


# --- commands ------------------------------------------------------------------


def cmd_classify(args) -> int:
    try:
        a1 = _reduce_arg("a1", args.a1)
        a2 = _reduce_arg("a2", args.a2)
        doc = classify_doc(a1, a2, args.witness_bound)
    except (DependentClasses, ZeroInput) as e:
        _err(str(e))
        return EXIT_INPUT
    except (InternalInconsistency, InconsistentImage) as e:
        _err(str(e))
        return EXIT_CHECK
    emit(doc, args.format)
    return EXIT_OK


def run_examples(bound: int) -> list[dict]:
    docs = []
    for (a1, a2), shape, imT in EXAMPLES:
        d = {"a1": a1, "a2": a2, "expected": {"x_shape": shape.value, "imT": imT}}
        try:
            got = classify_doc(a1, a2, bound)
            d["computed"] = {"x_shape": got["x_shape"], "imT": got["imT"]}
            d["match"] = got["x_shape"] == shape.value and got["imT"] == imT
        except (InternalInconsistency, InconsistentImage) as e:
            d["computed"] = {"error": str(e)}
            d["match"] = False
        docs.append(d)
    return docs


def cmd_examples(args) -> int:
    if args.inject_fault:
        with arith.symbol_fault(2):
            docs = run_examples(args.witness_bound)
    else:
        docs = run_examples(args.witness_bound)
    bad = [d for d in docs if not d["match"]]
    if args.format == "json":
        emit(docs, "json")
    else:
        for d in docs:
            got = d["computed"].get("x_shape", d["computed"].get("error"))
            status = "ok" if d["match"] else "MISMATCH"
            print(f"({d['a1']}, {d['a2']}): expected {d['expected']['x_shape']}, computed {got} ... {status}")
        print(f"{len(docs) - len(bad)}/{len(docs)} match")
    if bad:
        _err("mismatches: " + ", ".join(f"({d['a1']}, {d['a2']})" for d in bad))
        return EXIT_CHECK
    return EXIT_OK


def decompose_doc(M: kleinmod.KleinModule) -> dict:
    counts = kleinmod.multiplicities(M)
    res = build_hat_J(M, kleinmod.fixed_submodule(M))  # raises VerificationFailed on a bad build
    n = M.dim
    return {
        "status": "ok",
        "dim": n,
        "multiplicities": counts.by_name(),
        "hat_J": [
            {"type": t.name, "generators": [f2la.bitstring(g, n) for g in gens]}
            for t, gens in res.summands
        ],
        "checks": {
            "dimension_sum": counts.total_dim() == n,
            "hat_J_direct": True,
            "hat_J_fixed_part": True,
            "hat_J_counts": kleinmod.multiplicities(res.submodule()) == res.counts(),
        },
    }


def cmd_decompose(args) -> int:
    try:
        with open(args.file, encoding="utf-8") as fh:
            M = kleinmod.parse_module(fh.read())
        M.check()
    except OSError as e:
        _err(f"cannot read {args.file}: {e.strerror}")
        return EXIT_INPUT
    except (ModuleFormatError, InvalidModule) as e:
        _err(str(e))
        return EXIT_INPUT
    try:
        doc = decompose_doc(M)
    except NotInFamily as e:
        labels = kleinmod.functional_labels()
        emit({"status": "not_in_family", "dim": M.dim, "reason": str(e),
              "functionals": dict(zip(labels, e.functionals or []))}, args.format)
        return EXIT_FAMILY
    except VerificationFailed as e:
        _err(str(e))
        return EXIT_CHECK
    emit(doc, args.format)
    return EXIT_OK if all(doc["checks"].values()) else EXIT_CHECK


def sweep_pairs(max_abs: int) -> list[tuple[int, int]]:
    """Valid squarefree pairs with |a1| < |a2|, or |a1| = |a2| and a1 < a2, in lexicographic order."""
    sf = [a for a in range(-max_abs, max_abs + 1) if a not in (0, 1) and arith.squarefree_part(a) == a]
    pairs = []
    for a1 in sf:
        for a2 in sf:
            if (abs(a1), a1) >= (abs(a2), a2):
                continue
            if arith.squarefree_part(a1 * a2) == 1:
                continue
            pairs.append((a1, a2))
    return sorted(pairs)


def cmd_sweep(args) -> int:
    if args.max_abs < 2:
        _err("sweep needs N >= 2")
        return EXIT_INPUT
    records = []
    try:
        for a1, a2 in sweep_pairs(args.max_abs):
            records.append(classify_doc(a1, a2, args.witness_bound))
    except (InternalInconsistency, InconsistentImage) as e:
        _err(str(e))
        return EXIT_CHECK
    hist = Counter(r["x_shape"] for r in records)
    histogram = {s.value: hist[s.value] for s in XShape if hist[s.value]}
    if args.format == "json":
        emit({"records": records, "histogram": histogram}, "json")
    else:
        for r in records:
            print(f"{r['a1']} {r['a2']}: imT=[{' '.join(r['imT'])}] x_shape={r['x_shape']}")
        print("histogram:")
        for k, v in histogram.items():
            print(f"  {k}: {v}")
    return EXIT_OK


# --- self-test -------------------------------------------------------------------


def _random_rational(rng: random.Random, top: int = 10**4) -> Fraction:
    return Fraction(rng.choice((-1, 1)) * rng.randint(1, top), rng.randint(1, top))


def _random_params(rng: random.Random) -> arith.BiquadParams:
    while True:
        try:
            return arith.BiquadParams(rng.randint(-60, 60) or 2, rng.randint(-60, 60) or 3)
        except DependentClasses:
            pass


def check_gram(verbose: bool) -> bool:
    data = kleinmod.compute_gram()
    if verbose:
        labels = kleinmod.functional_labels()
        width = max(map(len, labels))
        print(" " * width + "  " + " ".join(f"{t.name:>7}" for t in data.family))
        for lab, row in zip(labels, data.matrix):
            print(f"{lab:<{width}}  " + " ".join(f"{x:>7}" for x in row))
        print(f"rank {data.rank}")
    return data.rank == len(data.family)


def check_product_formula(rng: random.Random, n: int = 100) -> bool:
    for _ in range(n):
        a, b = _random_rational(rng), _random_rational(rng)
        prod = 1
        for v in arith.relevant_places(a, b):
            prod *= arith.hilbert_symbol(a, b, v)
        if prod != 1:
            return False
    return True


def _random_element(rng, p):
    return arith.KElement(p, tuple(Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(4)))


def check_norm_tower(rng: random.Random, n: int = 50) -> bool:
    for _ in range(n):
        p = _random_params(rng)
        k = _random_element(rng, p)
        full = arith.norm(k, "F")
        for sub in ("K1", "K2", "K3"):
            if arith.norm(arith.norm(k, sub), "F", frm=sub) != full:
                return False
    return True


def check_norm_factorization(rng: random.Random, n: int = 200) -> bool:
    for _ in range(n):
        p = _random_params(rng)
        f1, f2, f3 = (Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(3))
        if f1 == 0:
            f1 = Fraction(1)
        k = arith.KElement(p, (f1, f2, f3, f2 * f3 / f1))
        (h1, h2), (h3, h4) = arith.lemma51_factorize(k)
        g = arith.norm(k, "K3").coords[0]
        if (h1 * h1 - p.a1 * h2 * h2) * (h3 * h3 - p.a2 * h4 * h4) != g:
            return False
    return True


def cmd_selftest(args) -> int:
    rng = random.Random(args.seed)
    checks = [
        ("gram-rank", lambda: check_gram(args.verbose)),
        ("product-formula", lambda: check_product_formula(rng)),
        ("norm-tower", lambda: check_norm_tower(rng)),
        ("norm-factorization", lambda: check_norm_factorization(rng)),
    ]
    for name, fn in checks:
        try:
            ok = fn()
        except (KleinSqError, AssertionError) as e:
            ok = False
            _err(f"{name}: {e}")
        print(f"{name}: {'pass' if ok else 'FAIL'}")
        if not ok:
            _err(f"self-test failed at {name}")
            return EXIT_CHECK
    return EXIT_OK


# --- argument parsing ------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--format", choices=("text", "json"), default=d("text"))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--witness-bound", type=int, default=d(10**4), metavar="N")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kleinsq", parents=[_global_flags(False)], description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = [_global_flags(True)]

    p = sub.add_parser("classify", parents=common, help="classify X for Q(sqrt a1, sqrt a2)")
    p.add_argument("a1", type=int)
    p.add_argument("a2", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("examples", parents=common, help="rerun the five worked examples")
    p.add_argument("--inject-fault", action="store_true", help="flip the Hilbert symbol at 2 (test mode)")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("decompose", parents=common, help="decompose a module file")
    p.add_argument("file")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sweep", parents=common, help="classify all pairs with |a1| <= |a2| <= N")
    p.add_argument("max_abs", type=int, metavar="N")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("selftest", parents=common, help="run the internal consistency checks")
    p.add_argument("--verbose", action="store_true", help="print the functional matrix")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
