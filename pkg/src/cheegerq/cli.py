"""Command-line entry point.

Exit codes: 0 success, 1 internal error or failed suite checks, 2 bad
arguments, 3 invalid shape file, 4 solver did not converge (the result is
still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import geometry as geo
from .closed_forms import Exponent
from .constants import constant_bundle
from .errors import CheegerError, ExponentError, PreconditionError, ShapeFileError
from .shapes import Epigraph, HalfStrip, UnionShape, load_shape, summary
from .solver import (
    SolverOptions,
    elongation_demo,
    estimate,
    existence_report,
    nonexistence_demo,
    stadium_witness,
)

OUTPUT_ENV = "CHEEGERQ_OUTPUT_DIR"

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_SHAPE, EXIT_NOT_CONVERGED = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_plain) + "\n"


def _plain(obj):
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _csv(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _out_dir(args) -> Path:
    return Path(args.out or os.environ.get(OUTPUT_ENV) or ".")


def _qtag(q: float) -> str:
    return f"q{q:g}"


def _check_q(q: float, N: int = 2) -> float:
    try:
        return Exponent(N, q).q
    except ExponentError as exc:
        raise UsageError(str(exc)) from None


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"shape file not found: {path}")
    try:
        return load_shape(p)
    except CheegerError as exc:
        raise ShapeFileError(f"{path}: {exc}") from None


def _options(args) -> SolverOptions:
    base = SolverOptions()
    try:
        return SolverOptions(
            vertex_count=args.vertex_count or base.vertex_count,
            multistarts=args.multistarts or base.multistarts,
            max_iters=args.max_iters or base.max_iters,
            tol_rel=args.tol or base.tol_rel,
            rng_seed=args.seed,
        )
    except CheegerError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------


def cmd_compute(args, union_only: bool = False) -> int:
    q = _check_q(args.q)
    shape = _load(args.shape)
    if union_only and not isinstance(shape, UnionShape):
        raise ShapeFileError(f"{args.shape}: the union command needs a shape of kind 'union'")
    est = estimate(shape, q, _options(args))
    stem = Path(args.shape).stem
    out = _out_dir(args)
    if args.format == "csv":
        path = out / f"{stem}-{_qtag(q)}.csv"
        write_atomic(path, _csv(["shape", "q", "value", "lower_bound", "method", "iterations", "converged"],
                                [[summary(shape), q, est.value, est.lower_bound, est.method, est.iterations, est.converged]]))
    else:
        path = out / f"{stem}-{_qtag(q)}.json"
        write_atomic(path, _json({"shape": shape.to_dict(), **est.to_dict()}))
    status = "converged" if est.converged else "NOT converged"
    print(f"{summary(shape)} q={q:g}: h_q <= {est.value:.10g} (floor {est.lower_bound:.6g}, {est.method}, {status}) -> {path}")
    return EXIT_OK if est.converged else EXIT_NOT_CONVERGED


def cmd_constants(args) -> int:
    q = _check_q(args.q, args.N)
    if args.N < 2:
        raise UsageError("constants need N >= 2")
    bundle = constant_bundle(args.N, q)
    out = _out_dir(args)
    if args.format == "csv":
        d = bundle.to_dict()
        path = out / f"constants-N{args.N}-{_qtag(q)}.csv"
        write_atomic(path, _csv(list(d), [list(d.values())]))
    else:
        path = out / f"constants-N{args.N}-{_qtag(q)}.json"
        write_atomic(path, _json(bundle.to_dict()))
    lo = "none" if bundle.C_lower is None else f"{bundle.C_lower:.6g}"
    print(f"N={args.N} q={q:g}: C_lower={lo} C_upper={bundle.C_upper:.6g} -> {path}")
    return EXIT_OK


def cmd_smooth(args) -> int:
    shape = _load(args.shape)
    if isinstance(shape, (UnionShape, Epigraph)) or not shape.bounded:
        raise ShapeFileError(f"{args.shape}: smoothing needs a bounded convex shape")
    P = shape.polygon()
    rows = []
    for n in args.n:
        body = geo.smooth(P, n, angular_resolution=args.directions)
        rows.append({
            "n": n,
            "perimeter": body.perimeter(),
            "area": body.area(),
            "perimeter_error": body.perimeter() - geo.perimeter(P),
            "sandwich_holds": bool(np.all(body.sandwich_holds())),
            "lipschitz": body.lipschitz,
        })
    path = _out_dir(args) / f"{Path(args.shape).stem}-smooth.json"
    write_atomic(path, _json({"shape": shape.to_dict(), "directions": args.directions,
                              "perimeter": geo.perimeter(P), "area": geo.area(P), "levels": rows}))
    ok = all(r["sandwich_holds"] for r in rows)
    print(f"{summary(shape)} smoothed at n={','.join(map(str, args.n))}: sandwich {'holds' if ok else 'FAILS'} -> {path}")
    return EXIT_OK if ok else EXIT_INTERNAL


def cmd_demo(args) -> int:
    q = _check_q(args.q)
    out = _out_dir(args)
    if args.demo == "elongation":
        try:
            sizes = [float(s) for s in args.sizes.split(",")]
        except ValueError:
            raise UsageError(f"--sizes must be comma-separated numbers, got {args.sizes!r}") from None
        res = elongation_demo(args.family, q, sizes)
        if args.format == "json":
            path = out / f"elongation-{args.family}-{_qtag(q)}.json"
            write_atomic(path, _json({"family": res.family, "q": q, "slope": res.slope,
                                      "rows": [dict(zip(("size", "perimeter", "area", "ratio"), r)) for r in res.rows]}))
        else:
            path = out / f"elongation-{args.family}-{_qtag(q)}.csv"
            write_atomic(path, _csv(["size", "q", "perimeter", "area", "ratio"],
                                    [[s, q, p, a, r] for s, p, a, r in res.rows]))
        print(f"{args.family} q={q:g}: log-log slope {res.slope:.6f} (expected {1 - 1 / q:.6f} as size grows) -> {path}")
        return EXIT_OK
    if args.demo == "nonexistence":
        steps = nonexistence_demo(Epigraph(args.halfwidth), q, steps=args.steps)
        path = out / f"nonexistence-{_qtag(q)}.{args.format}"
        if args.format == "json":
            write_atomic(path, _json({"halfwidth": args.halfwidth, "q": q, "steps": [s._asdict() for s in steps]}))
        else:
            write_atomic(path, _csv(["shift", "scale", "ratio"], steps))
        print(f"epigraph halfwidth {args.halfwidth:g} q={q:g}: ratios {steps[0].ratio:.6g} -> {steps[-1].ratio:.6g} "
              f"over {len(steps)} steps -> {path}")
        return EXIT_OK
    if args.demo == "witness":
        steps = stadium_witness(args.halfwidth, q, args.eps)
        path = out / f"witness-{_qtag(q)}.{args.format}"
        if args.format == "json":
            write_atomic(path, _json({"halfwidth": args.halfwidth, "q": q, "eps": args.eps,
                                      "steps": [s._asdict() for s in steps]}))
        else:
            write_atomic(path, _csv(["d", "ratio"], steps))
        print(f"half-strip halfwidth {args.halfwidth:g} q={q:g}: stadium length {steps[-1].d:g} gives ratio "
              f"{steps[-1].ratio:.3g} < {args.eps:g} -> {path}")
        return EXIT_OK
    # existence
    shape = _load(args.shape) if args.shape else HalfStrip(args.halfwidth)
    rep = existence_report(shape, q)
    path = out / f"existence-{_qtag(q)}.json"
    write_atomic(path, _json({"shape": shape.to_dict(), "q": q, **rep.to_dict()}))
    verdict = {True: "attained", False: "not attained", None: "borderline"}[rep.exists]
    print(f"{summary(shape)} q={q:g}: {verdict}; {rep.reason} -> {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import DEFAULT_QS, default_corpus, run_suite

    qs = DEFAULT_QS
    if args.qs:
        try:
            qs = [float(s) for s in args.qs.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--qs must be comma-separated numbers, got {args.qs!r}") from None
        if not qs:
            raise UsageError("--qs is empty")
        for q in qs:
            _check_q(q)
    corpus = [_load(p) for p in args.shape] if args.shape else default_corpus()
    report = run_suite(corpus, qs, args.seed, _options(args))
    out = _out_dir(args)
    write_atomic(out / "report.json", report.to_json())
    write_atomic(out / "report.md", report.to_markdown())
    write_atomic(out / "sandwich.svg", report.sandwich_svg())
    write_atomic(out / "elongation.svg", report.elongation_svg())
    s = report.summary
    print(f"suite: {s['passed']}/{s['total']} checks passed -> {out / 'report.json'}")
    return EXIT_OK if report.all_passed else EXIT_INTERNAL


# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, solver: bool = False) -> None:
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or the current directory)")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--seed", type=int, default=0)
    if solver:
        p.add_argument("--vertex-count", type=int)
        p.add_argument("--multistarts", type=int)
        p.add_argument("--max-iters", type=int, help="objective evaluations per solve")
        p.add_argument("--tol", type=float, help="relative tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cheegerq", description="Generalized Cheeger constants of planar sets.")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, helptext in (("compute", "estimate h_q of a shape"), ("union", "estimate h_q of a disjoint union")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--shape", required=True, help="JSON shape file")
        p.add_argument("--q", type=float, required=True)
        _add_common(p, solver=True)

    p = sub.add_parser("constants", help="print the comparison constants")
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--q", type=float, required=True)
    _add_common(p)

    p = sub.add_parser("smooth", help="smooth a convex polygon through its mollified gauge")
    p.add_argument("--shape", required=True)
    p.add_argument("--n", type=int, nargs="+", default=[10, 20, 40])
    p.add_argument("--directions", type=int, default=720)
    _add_common(p)

    p = sub.add_parser("demo", help="elongation, nonexistence, witness and existence demonstrations")
    p.add_argument("demo", choices=("elongation", "nonexistence", "witness", "existence"))
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--family", choices=("stadium", "ellipse", "rectangle"), default="stadium")
    p.add_argument("--sizes", default="100,1000,10000")
    p.add_argument("--halfwidth", type=float, default=1.0)
    p.add_argument("--steps", type=int, default=10)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--shape", help="shape file for the existence report (default: half-strip)")
    _add_common(p)
    p.set_defaults(format="csv")

    p = sub.add_parser("verify", help="run the inequality suite")
    p.add_argument("--qs", help="comma-separated exponents (default 0.5,1,1.2,1.5,1.8)")
    p.add_argument("--shape", action="append", help="corpus shape file (repeatable; default corpus otherwise)")
    _add_common(p, solver=True)
    return parser


COMMANDS = {
    "compute": cmd_compute,
    "union": lambda a: cmd_compute(a, union_only=True),
    "constants": cmd_constants,
    "smooth": cmd_smooth,
    "demo": cmd_demo,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ShapeFileError as exc:
        print(f"invalid shape: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CheegerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
