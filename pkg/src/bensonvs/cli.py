"""Command-line interface: ``solve``, ``compare``, ``certify``, ``export``, ``gen``.

Exit codes: 0 success (``solve``: converged), 2 ``solve`` stopped at the
iteration limit, 1 any error including bad usage.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

from .config import DEFAULT_TOL
from .driver import CONVERGED, RunConfig, RunResult, certify, run
from .errors import BensonError, OracleUnavailable
from .export import result_off, vertices_csv
from .instances import INSTANCES, make_instance, oracle_for
from .problem import load_problem

EXIT_OK, EXIT_ERROR, EXIT_MAXITER = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v

    return conv


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--problem", required=True, help="problem document (JSON)")
    p.add_argument("--epsilon", type=_positive(float), required=True)
    p.add_argument("--max-iter", type=_positive(int), default=1000)
    p.add_argument("--jobs", type=_positive(int), default=os.cpu_count() or 1, help="projection worker threads")
    for name in ("geom", "dedupe", "kkt", "feas", "gap", "cut"):
        p.add_argument(
            f"--tol.{name}", dest=f"tol_{name}", type=_positive(float), default=None,
            help=f"default {getattr(DEFAULT_TOL, name):g}",
        )


def _tolerances(args):
    return DEFAULT_TOL.updated(**{k[4:]: v for k, v in vars(args).items() if k.startswith("tol_")})


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _write_json(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def cmd_solve(args) -> int:
    vcp = load_problem(_read_json(args.problem))
    cfg = RunConfig(
        epsilon=args.epsilon, max_iter=args.max_iter, mode=args.mode, seed=args.seed,
        tol=_tolerances(args), jobs=args.jobs, timing=args.timing, log_path=args.log,
    )
    res = run(vcp, cfg)
    if args.out:
        _write_json(args.out, res.to_dict())
    print(f"{res.status}: d_H={res.d_H:.6g} iterations={res.iterations} |X|={len(res.X)}")
    return EXIT_OK if res.status == CONVERGED else EXIT_MAXITER


COMPARE_COLUMNS = ["mode", "seed", "status", "scalarizations", "X", "qp_solved", "qp_skipped", "skip_rate", "d_H", "wallclock_s"]


def cmd_compare(args) -> int:
    vcp = load_problem(_read_json(args.problem))
    tol = _tolerances(args)
    plans = [("vs", None), ("first", None)] + [("random", s) for s in args.seeds]
    rows = []
    for mode, seed in plans:
        t0 = time.perf_counter()
        res = run(vcp, RunConfig(epsilon=args.epsilon, max_iter=args.max_iter, mode=mode, seed=seed, tol=tol, jobs=args.jobs))
        c = res.counters
        rows.append({
            "mode": mode, "seed": "" if seed is None else seed, "status": res.status,
            "scalarizations": c["scalarizations"], "X": len(res.X), "qp_solved": c["qp_solved"],
            "qp_skipped": c["qp_skipped"], "skip_rate": f"{c['skip_rate']:.3f}", "d_H": f"{res.d_H:.6g}",
            "wallclock_s": f"{time.perf_counter() - t0:.3f}",
        })
    widths = {k: max(len(k), *(len(str(r[k])) for r in rows)) for k in COMPARE_COLUMNS}
    print("  ".join(k.rjust(widths[k]) for k in COMPARE_COLUMNS))
    for r in rows:
        print("  ".join(str(r[k]).rjust(widths[k]) for k in COMPARE_COLUMNS))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, COMPARE_COLUMNS)
            w.writeheader()
            w.writerows(rows)
    return EXIT_OK


def cmd_certify(args) -> int:
    res = RunResult.from_dict(_read_json(args.result))
    vcp = load_problem(_read_json(args.problem))
    try:
        oracle = oracle_for(vcp)
    except OracleUnavailable:
        oracle = None
    cert = certify(res, vcp, oracle=oracle, n_samples=args.samples, seed=args.seed, jobs=args.jobs)
    print(json.dumps(cert.to_dict(), indent=1))
    return EXIT_OK if cert.passed else EXIT_ERROR


def cmd_export(args) -> int:
    if not (args.off or args.csv):
        raise BensonError("nothing to export: give --off and/or --csv")
    res = RunResult.from_dict(_read_json(args.result))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            fh.write(vertices_csv(res))
    if args.off:
        text = result_off(res, which=args.which, margin=args.margin)
        with open(args.off, "w") as fh:
            fh.write(text)
    return EXIT_OK


def cmd_gen(args) -> int:
    params = {k: v for k, v in vars(args).items() if k in ("a", "m", "n", "seed", "length", "radius", "E", "load", "stress")}
    params["nonneg_loads"] = args.nonneg_loads
    vcp = make_instance(args.instance, **{k: v for k, v in params.items() if v is not None})
    _write_json(args.out, vcp.to_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bensonvs", description="Outer/inner polyhedral approximation of convex vector problems.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="approximate the upper image of a problem")
    _add_run_flags(p)
    p.add_argument("--mode", choices=["vs", "first", "random"], default="vs")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", help="result document (JSON)")
    p.add_argument("--log", help="per-iteration CSV log")
    p.add_argument("--timing", action="store_true", help="fill the wallclock_ms log column")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="vertex selection against the baseline modes")
    _add_run_flags(p)
    p.add_argument("--seeds", type=int, nargs="*", default=[], help="seeds for random-mode rows")
    p.add_argument("--csv", help="also write the table as CSV")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("certify", help="independent checks of a result")
    p.add_argument("--result", required=True)
    p.add_argument("--problem", required=True)
    p.add_argument("--samples", type=_positive(int), default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=_positive(int), default=os.cpu_count() or 1)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("export", help="OFF mesh (q = 3) or vertex CSV of a result")
    p.add_argument("--result", required=True)
    p.add_argument("--off")
    p.add_argument("--which", choices=["inner", "outer"], default="inner")
    p.add_argument("--margin", type=_positive(float), default=1.0)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("gen", help="write an instance document")
    p.add_argument("--instance", choices=INSTANCES, required=True)
    p.add_argument("--a", type=float, help="ellipsoid semi-axis (default 7)")
    p.add_argument("--m", type=int, help="elastic net observations (default 20)")
    p.add_argument("--n", type=int, help="elastic net predictors (default 50)")
    p.add_argument("--seed", type=int, help="elastic net data seed (default 1)")
    for name in ("length", "radius", "E", "load", "stress"):
        p.add_argument(f"--{name}", type=float, help="truss parameter")
    p.add_argument("--nonneg-loads", action="store_true", help="truss loads restricted to >= 0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        import logging

        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (BensonError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
