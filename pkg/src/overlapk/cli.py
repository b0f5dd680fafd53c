"""Command-line interface: ``overlapk exact | estimate | simulate``.

Exit codes: 0 success, 2 usage or input/config error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import load_config, paper_study_config, parse_dist
from .distributions import Sample, Support
from .errors import (
    ConfigError,
    DegenerateSampleError,
    IntegrationError,
    OverlapError,
    ParameterError,
    UsageError,
)
from .kde import fit
from .overlap import Diagnostics, IndexSubset, estimate_all, exact_delta
from .simulation import StudyConfig, StudyReport, run_study

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

THREADS_ENV = "OVERLAPK_THREADS"

log = logging.getLogger("overlapk")


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# data files


def read_data_file(path: str | Path) -> list[float]:
    """Read observations: one number per line (``#`` comments and blank lines
    skipped), or a single-column CSV whose header is ``value``."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(f"{path}: cannot read file ({exc})") from None

    lines = [(no, ln.strip()) for no, ln in enumerate(text.splitlines(), start=1)]
    lines = [(no, ln) for no, ln in lines if ln and not ln.startswith("#")]
    if lines and lines[0][1].strip('"').lower() == "value":
        rows = list(csv.reader(io.StringIO("\n".join(ln for _, ln in lines))))
        if any(len(r) != 1 for r in rows):
            raise CliError(f"{path}: CSV input must have exactly one column named 'value'")
        lines = [(no, r[0].strip()) for (no, _), r in zip(lines[1:], rows[1:])]

    values = []
    for no, ln in lines:
        try:
            v = float(ln)
        except ValueError:
            raise CliError(f"{path}:{no}: not a number: {ln!r}") from None
        if not math.isfinite(v):
            raise CliError(f"{path}:{no}: value is not finite: {ln!r}")
        values.append(v)
    if len(values) < 2:
        raise CliError(f"{path}: need at least 2 observations, found {len(values)}")
    return values


# ---------------------------------------------------------------------------
# report formatting


def _fmt(v: float) -> str:
    return format(v, ".6g")


def report_to_csv(report: StudyReport) -> str:
    k_max = max((len(r.sizes) for r in report.rows), default=0)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["case_id", *(f"n{i}" for i in range(1, k_max + 1)), "subset", "average", "rb", "rmse", "replicates_used"]
    )
    for r in report.rows:
        sizes = [str(n) for n in r.sizes] + [""] * (k_max - len(r.sizes))
        writer.writerow(
            [r.case_id, *sizes, r.subset.label, _fmt(r.average), _fmt(r.rb), _fmt(r.rmse), r.replicates_used]
        )
    return buf.getvalue()


def report_to_dict(report: StudyReport, config: StudyConfig) -> dict:
    return {
        "seed": config.seed,
        "replicates": config.replicates,
        "exact": [
            {"case_id": cid, "quadrature": report.exact[cid], "reference": report.reference[cid]}
            for cid in report.exact
        ],
        "rows": [
            {
                "case_id": r.case_id,
                "sizes": list(r.sizes),
                "subset": list(r.subset.indices),
                "average": r.average,
                "rb": r.rb,
                "rmse": r.rmse,
                "replicates_used": r.replicates_used,
            }
            for r in report.rows
        ],
        "underflow": report.underflow,
        "warnings": report.warnings,
        "quality_errors": report.quality_errors,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_exact(args: argparse.Namespace) -> int:
    specs = []
    if args.config:
        config = load_config(args.config)
        cases = {c.case_id: c for c in config.cases}
        if args.case is None or args.case not in cases:
            raise CliError(f"--case must name one of: {', '.join(cases)}")
        specs.extend(cases[args.case].specs)
    specs.extend(parse_dist(d) for d in args.dist or [])
    if not specs:
        raise CliError("give at least one --dist (or --config with --case)")
    if not args.tol > 0:
        raise CliError("--tol must be > 0")
    try:
        res = exact_delta(specs, tol=args.tol)
    except IntegrationError as exc:
        raise CliError(f"integration failed: {exc}", EXIT_NUMERIC) from None
    if args.json:
        print(json.dumps({"value": res.value, "est_abs_error": res.est_abs_error}))
    else:
        for i, s in enumerate(specs, start=1):
            print(f"f{i}: {s.describe()}")
        print(f"Delta_{len(specs)} = {res.value:.4f}  (est. abs. error {res.est_abs_error:.1e})")
    return EXIT_OK


def _supports(args, n_files: int) -> list[Support]:
    if args.support_per_file:
        items = [s.strip() for s in args.support_per_file.split(",")]
        if len(items) != n_files:
            raise CliError(f"--support-per-file lists {len(items)} supports for {n_files} files")
        try:
            return [Support(s) for s in items]
        except ValueError:
            raise CliError("--support-per-file entries must be 'real' or 'nonneg'") from None
    return [Support(args.support)] * n_files


def cmd_estimate(args: argparse.Namespace) -> int:
    k = len(args.files)
    if k < 2:
        raise CliError("estimate needs at least 2 data files")
    supports = _supports(args, k)
    samples, models = [], []
    for path, support in zip(args.files, supports):
        values = read_data_file(path)
        try:
            smp = Sample(values, support)
            models.append(fit(smp))
        except (ParameterError, DegenerateSampleError) as exc:
            raise CliError(f"{path}: {exc}") from None
        samples.append(smp)

    if args.subsets:
        try:
            subsets = [IndexSubset.parse(s, k) for s in args.subsets]
        except UsageError as exc:
            raise CliError(f"--subsets: {exc}") from None
    else:
        subsets = [IndexSubset((i,), k) for i in range(1, k + 1)] + [IndexSubset.full(k)]
        subsets = list(dict.fromkeys(subsets))
    diag = Diagnostics()
    try:
        results = estimate_all(models, samples, subsets, diag)
    except UsageError as exc:
        raise CliError(str(exc)) from None

    if args.json:
        doc = {
            "files": [str(p) for p in args.files],
            "bandwidths": [m.bandwidth for m in models],
            "boundaries": [m.boundary.value for m in models],
            "estimates": [{"subset": list(r.subset.indices), "value": r.value} for r in results],
            "underflow": diag.underflow,
        }
        print(json.dumps(doc))
    elif args.csv:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["subset", "value"])
        for r in results:
            writer.writerow([r.subset.label, _fmt(r.value)])
        sys.stdout.write(buf.getvalue())
    else:
        for i, (path, m) in enumerate(zip(args.files, models), start=1):
            print(f"sample {i}: {path}  n={m.n}  h={m.bandwidth:.4f}  boundary={m.boundary.value}")
        print(f"{'subset':<16}estimate")
        for r in results:
            print(f"{str(r.subset):<16}{r.value:.4f}")
    if diag.underflow:
        print(f"warning: {diag.underflow} density underflow(s); ratios set to 0", file=sys.stderr)
    return EXIT_OK


def _threads(args) -> int:
    env = os.environ.get(THREADS_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return args.threads


def cmd_simulate(args: argparse.Namespace) -> int:
    if bool(args.config) == bool(args.paper_study):
        raise CliError("give exactly one of --config or --paper-study")
    config = paper_study_config() if args.paper_study else load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.replicates is not None:
        overrides["replicates"] = args.replicates
    if overrides:
        try:
            config = StudyConfig(
                cases=config.cases,
                size_tuples=config.size_tuples,
                replicates=overrides.get("replicates", config.replicates),
                seed=overrides.get("seed", config.seed),
                estimators=config.estimators,
            )
        except OverlapError as exc:
            raise CliError(str(exc)) from None
    try:
        report = run_study(config, threads=_threads(args))
    except IntegrationError as exc:
        raise CliError(f"integration failed: {exc}", EXIT_NUMERIC) from None

    if args.format == "json":
        text = json.dumps(report_to_dict(report, config), indent=2) + "\n"
    else:
        text = report_to_csv(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for msg in report.warnings:
        print(f"warning: {msg}", file=sys.stderr)
    for msg in report.quality_errors:
        print(f"error: {msg}", file=sys.stderr)
    if args.out:
        print(f"wrote {len(report.rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_NUMERIC if report.quality_errors else EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="overlapk",
        description="Generalized Weitzman overlap coefficient among k distributions.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", help="exact overlap of parametric densities by quadrature")
    p.add_argument(
        "--dist",
        action="append",
        metavar="SPEC",
        help="e.g. weibull:shape=1.2,scale=5 | normal:location=0,variance=1 | extreme:location=0,scale=1",
    )
    p.add_argument("--config", help="study config; use with --case")
    p.add_argument("--case", help="case id inside --config")
    p.add_argument("--tol", type=float, default=1e-8, help="absolute quadrature tolerance")
    p.add_argument("--json", action="store_true", help="emit {value, est_abs_error}")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("estimate", help="kernel/moment estimates from k data files")
    p.add_argument("files", nargs="+", help="data files, one per population")
    p.add_argument("--support", choices=["real", "nonneg"], default="real")
    p.add_argument("--support-per-file", metavar="S1,S2,...", help="per-file support list")
    p.add_argument(
        "--subsets", nargs="+", metavar="I,J,...", help="index subsets (default: singletons + all)"
    )
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("simulate", help="run the Monte Carlo study")
    p.add_argument("--config", help="JSON study config")
    p.add_argument("--paper-study", action="store_true", help="bundled twelve-case design")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--replicates", type=int, help="override the replicate count")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = all CPUs")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except CliError as exc:
        print(f"overlapk: error: {exc}", file=sys.stderr)
        return exc.code
    except ConfigError as exc:
        print(f"overlapk: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"overlapk: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, UsageError, DegenerateSampleError) as exc:
        print(f"overlapk: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
