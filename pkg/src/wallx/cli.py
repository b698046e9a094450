"""Command line interface.

Every command prints one JSON document with a ``manifest`` block (inputs
hash, arithmetic mode, library versions).  Exit codes: 0 pass, 1 a checked
property is false, 2 usage or parse error, 3 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any

from . import __version__

EXIT_PASS, EXIT_FAIL, EXIT_PARSE, EXIT_INTERNAL = 0, 1, 2, 3


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _fraction(s) -> Fraction:
    try:
        return Fraction(str(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"not a rational number: {s!r}") from exc


def _fraction_list(s: str) -> list[Fraction]:
    return [_fraction(x) for x in s.split(",") if x.strip()]


def _jsonable(x: Any):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x) if isinstance(x, (set, frozenset)) else x
        return [_jsonable(v) for v in items]
    if isinstance(x, (int, float, str, bool)) or x is None:
        return x
    return str(x)


def manifest(payload: dict, mode: str = "exact", seed: int | None = None) -> dict:
    import mpmath
    import sympy

    blob = json.dumps(_jsonable(payload), sort_keys=True).encode()
    return {
        "inputs_sha256": hashlib.sha256(blob).hexdigest(),
        "mode": mode,
        "seed": seed,
        "versions": {
            "wallx": __version__,
            "python": platform.python_version(),
            "sympy": sympy.__version__,
            "mpmath": mpmath.__version__,
        },
    }


def _load_json(path: str | None, inline: str | None) -> dict:
    try:
        if inline:
            return json.loads(inline)
        if path:
            with open(path) as fh:
                return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(str(exc)) from exc
    raise ParseError("no input given (use --input or --json)")


def threads() -> int:
    try:
        return max(1, int(os.environ.get("WALLX_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# stability data from JSON


def parse_stability(doc: dict, charge_key: str = "charge"):
    """Build ``(data, sector)`` from the interchange format.

    ``pairing`` (antisymmetric), ``generators`` (height-one set), ``height``,
    optional ``objects`` and ``symbols``; ``charge`` lists
    ``{"gamma", "re", "im"}`` over a basis; ``a`` lists ``{"gamma", "src",
    "tgt", "coeff"}`` where ``coeff`` is an expression in ``t = L^(1/2)`` and
    the symbols, or ``{"dilog": k}`` for the k-th dilogarithm coefficient.
    """
    import sympy

    from .graded_algebra import TruncatedAlgebra, coefficient_field
    from .stability_engine import CentralCharge, Sector, StabilityData, dilog_coefficient

    try:
        pairing = doc["pairing"]
        generators = doc.get("generators") or [
            [int(i == j) for j in range(len(pairing))] for i in range(len(pairing))
        ]
        symbols = tuple(doc.get("symbols", ()))
        fd = coefficient_field(symbols)
        alg = TruncatedAlgebra(int(doc.get("objects", 1)), pairing, generators, int(doc.get("height", 6)), field_data=fd)
        charge = _parse_charge(doc[charge_key], doc.get("charge_mode", "exact"))
        names = {"t": fd[1], **{s: g for s, g in zip(symbols, fd[2])}}
        a = {}
        for item in doc.get("a", []):
            key = (int(item.get("src", 0)), int(item.get("tgt", 0)), tuple(int(x) for x in item["gamma"]))
            c = item["coeff"]
            if isinstance(c, dict) and "dilog" in c:
                val = dilog_coefficient(alg, int(c["dilog"]))
            else:
                expr = sympy.sympify(str(c), locals={k: sympy.Symbol(k) for k in names})
                val = alg.K.from_expr(expr)
            a[key] = a.get(key, alg.K.zero) + val
        sector = None
        if doc.get("sector"):
            sector = Sector(_fraction(doc["sector"]["start"]), _fraction(doc["sector"]["end"]))
        return StabilityData(charge, a, alg, sector), sector
    except (KeyError, TypeError, sympy.SympifyError) as exc:
        raise ParseError(f"malformed stability data: {exc}") from exc


def _parse_charge(items, mode: str):
    from .stability_engine import CentralCharge

    pairs = [(tuple(int(x) for x in it["gamma"]), (_fraction(it["re"]), _fraction(it["im"]))) for it in items]
    if mode == "float":
        pairs = [(g, (float(r), float(i))) for g, (r, i) in pairs]
    return CentralCharge.from_generators(pairs, mode=mode)


def expand_dilog_rays(doc: dict) -> dict:
    """Expand ``{"dilog_rays": [[g1], [g2]]}`` into all multiples up to the height."""
    if "dilog_rays" not in doc:
        return doc
    out = dict(doc)
    a = list(doc.get("a", []))
    n = int(doc.get("height", 6))
    for ray in doc["dilog_rays"]:
        for k in range(1, n + 1):
            a.append({"gamma": [k * x for x in ray], "coeff": {"dilog": k}})
    out["a"] = a
    return out


def _serialize_a(data) -> list[dict]:
    return [
        {"src": k[0], "tgt": k[1], "gamma": list(k[2]), "coeff": str(v.as_expr())}
        for k, v in sorted(data.a.items())
    ]


def _spectrum_json(data, sector=None) -> dict:
    from .stability_engine import extract_spectrum

    sp = extract_spectrum(data, sector)
    out = {
        "rays": [
            {"phase": ph, "classes": [list(k[2]) for k in sorted(c)]} for ph, c in sp.rays
        ],
        "omega": None if sp.omega is None else [
            {"src": k[0], "tgt": k[1], "gamma": list(k[2]), "omega": v} for k, v in sorted(sp.omega.items())
        ],
    }
    if sp.mu:
        out["mu"] = [{"src": k[0], "tgt": k[1], "gamma": list(k[2]), "coeff": str(v.as_expr())}
                     for k, v in sorted(sp.mu.items())]
    return out


def _render(x: dict) -> str:
    """Aligned-text rendering ``c e_{src tgt}^{gamma}``, one term per line."""
    lines = []
    for (i, j, g), c in sorted(x.items()):
        lines.append(f"{str(c.as_expr()):>24}  E[{i}{j}]^{tuple(g)}")
    return "\n".join(lines)


def _factors(data) -> list[str]:
    from .stability_engine import ray_elements

    return [_render(g) for _, g in ray_elements(data)]


def _split_angles(data, sector):
    """Rational cut angles strictly between consecutive rays."""
    from .stability_engine import rays

    groups = rays(data, sector)
    phases = [data.charge.phase(g[0][2]) for g in groups]
    cuts = []
    for hi, lo in zip(phases, phases[1:]):
        cuts.append(Fraction((hi + lo) / 2).limit_denominator(10**6))
    return cuts


def _auto_sector(data):
    from .stability_engine import Sector, rays

    groups = rays(data)
    if not groups:
        return None
    phases = [data.charge.phase(g[0][2]) for g in groups]
    lo, hi = min(phases), max(phases)
    pad = max(1e-6, (1 - (hi - lo)) / 4)
    start = Fraction(lo - pad).limit_denominator(10**6)
    end = Fraction(hi + pad).limit_denominator(10**6)
    return Sector(start, end)


# ---------------------------------------------------------------------------
# commands


def cmd_factorize(args) -> tuple[int, dict]:
    from .stability_engine import check_support, factor_check

    doc = expand_dilog_rays(_load_json(args.input, args.json))
    data, sector = parse_stability(doc)
    args.arith_mode = data.charge.mode
    cert = check_support(data)
    report: dict = {"support": {"passed": cert.passed, "C": cert.C,
                                "witness": None if cert.witness is None else list(cert.witness[2]),
                                "detail": cert.detail}}
    if not cert.passed:
        return EXIT_FAIL, report
    sector = sector or _auto_sector(data)
    report["sector"] = None if sector is None else [str(sector.start), str(sector.end)]
    report["spectrum"] = _spectrum_json(data, sector)
    splits = []
    ok = True
    for cut in _split_angles(data, sector):
        r = factor_check(data, sector, mode="split", split=cut)
        splits.append({"cut": str(cut), "passed": r.passed})
        ok &= r.passed
    report["split_checks"] = splits
    return (EXIT_PASS if ok else EXIT_FAIL), report


def cmd_wallcross(args) -> tuple[int, dict]:
    from .stability_engine import factor_check, wall_cross

    doc = expand_dilog_rays(_load_json(args.input, args.json))
    data, _ = parse_stability(doc)
    args.arith_mode = data.charge.mode
    new_charge = _parse_charge(doc["new_charge"], doc.get("charge_mode", "exact"))
    new = wall_cross(data, new_charge)
    back = wall_cross(new, data.charge)
    invariance = factor_check(new, mode="reference", reference=data).passed
    involution = data.algebra.equal(back.a, data.a)
    report = {
        "a_new": _serialize_a(new),
        "spectrum": _spectrum_json(new),
        "factors": _factors(new),
        "product_invariance": invariance,
        "involution": involution,
    }
    return (EXIT_PASS if invariance and involution else EXIT_FAIL), report


def _a2_point(args):
    from .vstab_wcf import A2Point

    if args.theta:
        th = _fraction_list(args.theta)
        if len(th) != 3:
            raise ParseError("--theta needs theta01,theta12,theta02")
        return A2Point(*th)
    if args.alpha:
        al = _fraction_list(args.alpha)
        if len(al) != 2:
            raise ParseError("--alpha needs alpha1,alpha2")
        return A2Point.from_alpha(*al)
    raise ParseError("give --theta or --alpha")


def cmd_a2(args) -> tuple[int, dict]:
    from .vstab_wcf import BoundaryAmbiguity, NotInCoamoeba, a2_classify, coamoeba_member, oracle_cases

    p = _a2_point(args)
    member, translate = coamoeba_member(p)
    report: dict = {"theta": [p.theta01, p.theta12, p.theta02], "alpha": [p.alpha1, p.alpha2, p.alpha3],
                    "coamoeba": member, "translate": translate}
    try:
        cases = a2_classify(p, check_member=not args.ignore_coamoeba)
    except BoundaryAmbiguity as exc:
        report["status"] = "boundary"
        report["detail"] = str(exc)
        return EXIT_PASS, report
    except NotInCoamoeba as exc:
        report["status"] = "outside"
        report["detail"] = str(exc)
        return EXIT_FAIL, report
    oracle = oracle_cases(p)
    report.update(status="classified", cases=sorted(cases), oracle=sorted(oracle), agree=cases == oracle)
    return (EXIT_PASS if cases == oracle else EXIT_FAIL), report


def cmd_wcf(args) -> tuple[int, dict]:
    from .vstab_wcf import CASES, A2Point, wcf_verify

    p = _a2_point(args) if (args.theta or args.alpha) else A2Point(Fraction(2, 5), Fraction(7, 10), Fraction(1, 2))
    if args.case not in CASES:
        raise ParseError(f"--case must be one of {sorted(CASES)}")
    thetas = _fraction_list(args.thetas)
    if len(thetas) != 3:
        raise ParseError("--thetas needs three values")
    cutoff = [int(x) for x in args.cutoff.split(",")]
    results = []
    ok = True
    for q in (args.q or [None]):
        mode = "symbolic" if q is None else "fq"
        r = wcf_verify(thetas, p, CASES[args.case], mode, q, cutoff, order=args.order)
        results.append({"q": q, "mode": mode, "passed": r.passed,
                        "entry": None if r.entry is None else list(r.entry),
                        "lhs": None if r.passed else repr(r.lhs), "rhs": None if r.passed else repr(r.rhs)})
        ok &= r.passed
    return (EXIT_PASS if ok else EXIT_FAIL), {"thetas": thetas, "case": args.case, "results": results}


def _classify_chunk(points):
    from .vstab_wcf import A2Point, BoundaryAmbiguity, a2_classify, coamoeba_member, oracle_cases

    rows = []
    for idx, (a1, a2) in points:
        p = A2Point.from_alpha(a1, a2)
        member, translate = coamoeba_member(p)
        if not member:
            continue
        try:
            cases = a2_classify(p)
        except BoundaryAmbiguity:
            continue
        rows.append((idx, {"alpha1": str(a1), "alpha2": str(a2), "translate": list(translate),
                           "cases": sorted(cases), "oracle": sorted(oracle_cases(p))}))
    return rows


def cmd_regions(args) -> tuple[int, dict]:
    from collections import Counter

    from .vstab_wcf import grid_points

    pts = list(enumerate(grid_points(args.grid, _fraction(args.lo), _fraction(args.hi))))
    workers = threads()
    if workers > 1:
        chunks = [pts[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(workers) as ex:
            rows = [r for part in ex.map(_classify_chunk, chunks) for r in part]
    else:
        rows = _classify_chunk(pts)
    rows = [r for _, r in sorted(rows, key=lambda t: t[0])]
    mismatches = [r for r in rows if r["cases"] != r["oracle"]]
    summary = Counter(",".join(r["cases"]) for r in rows)
    report = {"points": len(rows), "mismatches": len(mismatches), "region_types": dict(sorted(summary.items()))}
    if args.out:
        with open(args.out, "w") as fh:
            json.dump({"rows": rows, **report}, fh, indent=1)
        report["out"] = args.out
    return (EXIT_PASS if not mismatches else EXIT_FAIL), report


def cmd_oracle(args) -> tuple[int, dict]:
    from .graded_algebra import specialize
    from .quiver_an import HallElement, corr_product, ext_dim, fq_ext_count, hom_dim, hom_ext, indec_rep, indecomposables

    mismatches = []
    checked = 0
    for q in args.q or [2]:
        for n in range(1, args.n + 1):
            for a in indecomposables(n):
                for b in indecomposables(n):
                    ra, rb = indec_rep(q, n, a), indec_rep(q, n, b)
                    h = hom_ext(a, b)
                    if (h.get(0, 0), h.get(1, 0)) != (hom_dim(ra, rb), ext_dim(ra, rb)):
                        mismatches.append({"q": q, "pair": [repr(a), repr(b)], "check": "hom_ext"})
                    # rho_b * rho_a counts extensions 0 -> b -> E -> a -> 0
                    prod = corr_product(HallElement.basis(b), HallElement.basis(a))
                    coeff = sum((specialize(c, q) for c in prod.terms.values()), Fraction(0))
                    if coeff != fq_ext_count(q, a, b, n)[2]:
                        mismatches.append({"q": q, "pair": [repr(a), repr(b)], "check": "corr_product"})
                    checked += 1
    return (EXIT_PASS if not mismatches else EXIT_FAIL), {"pairs_checked": checked, "mismatches": mismatches}


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wallx", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="JSON file whose keys provide option defaults")
    ap.add_argument("--out-json", help="also write the report to this path")
    ap.add_argument("--seed", type=int, default=None)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn, helptext in (
        ("factorize", cmd_factorize, "ray decomposition and factorization checks"),
        ("wallcross", cmd_wallcross, "recompute ray data under a new charge"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--input", help="stability data JSON file")
        p.add_argument("--json", help="inline stability data JSON")
        p.set_defaults(func=fn)

    p = sub.add_parser("a2-classify", help="classify an A_2 phase triple")
    p.add_argument("--theta", help="theta01,theta12,theta02 in units of pi")
    p.add_argument("--alpha", help="alpha1,alpha2")
    p.add_argument("--ignore-coamoeba", action="store_true")
    p.set_defaults(func=cmd_a2)

    p = sub.add_parser("wcf-verify", help="check interval concatenation")
    p.add_argument("--q", type=int, action="append", help="prime field size (repeatable); omit for symbolic")
    p.add_argument("--cutoff", default="2,2")
    p.add_argument("--thetas", default="1/7,3/7,6/7")
    p.add_argument("--theta", help="point theta01,theta12,theta02")
    p.add_argument("--alpha", help="point alpha1,alpha2")
    p.add_argument("--case", default="ALL")
    p.add_argument("--order", default="clockwise", choices=["clockwise", "ascending"])
    p.set_defaults(func=cmd_wcf)

    p = sub.add_parser("regions", help="classify a grid of the alpha plane")
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--lo", default="-3")
    p.add_argument("--hi", default="3")
    p.add_argument("--out")
    p.set_defaults(func=cmd_regions)

    p = sub.add_parser("hall-oracle", help="compare symbolic Hom/Hall data with F_q counts")
    p.add_argument("--q", type=int, action="append")
    p.add_argument("--n", type=int, default=3)
    p.set_defaults(func=cmd_oracle)
    return ap


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> None:
    """Use the keys of the ``--config`` JSON file as option defaults."""
    if "--config" not in argv:
        return
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ParseError("--config needs a path")
    try:
        with open(argv[idx + 1]) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"bad config: {exc}") from exc
    defaults = {k.replace("-", "_"): v for k, v in cfg.items()}
    for action in ap._actions:
        if isinstance(action, argparse._SubParsersAction):
            for parser in action.choices.values():
                parser.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        _apply_config(ap, argv)
    except ParseError as exc:
        print(json.dumps({"status": "parse-error", "detail": str(exc)}), file=sys.stderr)
        return EXIT_PARSE
    args = ap.parse_args(argv)  # exits with 2 on usage errors
    # output locations do not affect the result
    payload = {k: v for k, v in vars(args).items() if k not in ("func", "out_json", "out", "config")}
    for key in ("input",):
        path = payload.get(key)
        if path and os.path.exists(path):
            with open(path, "rb") as fh:
                payload["input_sha256"] = hashlib.sha256(fh.read()).hexdigest()
    try:
        code, report = args.func(args)
    except ParseError as exc:
        print(json.dumps({"status": "parse-error", "detail": str(exc)}), file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # engine errors
        print(json.dumps({"status": "internal-error", "error": type(exc).__name__, "detail": str(exc)}), file=sys.stderr)
        return EXIT_INTERNAL
    mode = getattr(args, "arith_mode", "exact")
    out = {"command": args.command, "status": "pass" if code == EXIT_PASS else "fail",
           "report": _jsonable(report), "manifest": manifest(payload, mode, args.seed)}
    text = json.dumps(out, indent=2, sort_keys=True)
    print(text)
    if args.out_json:
        with open(args.out_json, "w") as fh:
            fh.write(text + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
