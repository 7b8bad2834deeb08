"""Command line interface: ``benford-smooth <command> ...``.

Exit codes: 0 when no test rejects (or the command succeeded), 1 when at
least one test of ``analyze`` rejects, 2 on any error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import logging
import secrets
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from . import __version__
from .alternatives import FAMILIES, AlternativeSpec, alternative_pmf, draw_counts
from .core import POLICIES, DigitSample, _benford_array, tabulate_digits
from .errors import BenfordError
from .montecarlo import (
    DEFAULT_BATTERY,
    DESK_NULL_REPLICATIONS,
    DESK_POWER_REPLICATIONS,
    FULL_BATTERY,
    CriticalValueCache,
    CriticalValueRecord,
    McConfig,
    child_rng,
    empirical_quantile,
    evaluate,
    get_statistic,
    mc_critical_values,
    power_curve,
    simulate_null,
)
from .smooth import DEFAULT_KMAX, MC_THRESHOLD_N, TestResult, data_driven_select
from .study import curves_to_csv, run_figure1

log = logging.getLogger("benford_smooth")

REPORT_SCHEMA_VERSION = 1
CALIBRATIONS = {"auto": "auto", "asymptotic": "asymptotic", "mc": "monte-carlo"}


class CliError(Exception):
    pass


def _asymptotic_df(test_id: str) -> Optional[int]:
    """Degrees of freedom of the limiting chi-square law, if the test has one."""
    if test_id == "chi2":
        return 8
    if test_id.startswith("Tkhat"):
        return 1
    if test_id.startswith("T") and test_id[1:].isdigit():
        return int(test_id[1:])
    return None


def _resolve_tests(spec: Optional[str], all_tests: bool, kmax: int) -> list[str]:
    tests = list(FULL_BATTERY if all_tests else DEFAULT_BATTERY) if not spec else [t.strip() for t in spec.split(",") if t.strip()]
    if kmax != DEFAULT_KMAX:
        tests = [f"Tkhat{kmax}" if t == "Tkhat" else t for t in tests]
    for t in tests:
        get_statistic(t)
    return list(dict.fromkeys(tests))


def _new_seed(seed: Optional[int]) -> int:
    return secrets.randbits(63) if seed is None else seed


def read_values(path: str, column: Optional[str], delimiter: str) -> list[str]:
    """Raw text records from a one-number-per-line file or a delimited column."""
    fh = sys.stdin if path == "-" else open(path, newline="", encoding="utf-8")
    try:
        if column is None:
            return [line.strip() for line in fh if line.strip()]
        reader = csv.reader(fh, delimiter=delimiter)
        header = next(reader, None)
        if header is None:
            raise CliError(f"{path}: empty file")
        header = [h.strip() for h in header]
        if column in header:
            idx = header.index(column)
        elif column.isdigit() and int(column) < len(header):
            idx = int(column)
        else:
            raise CliError(f"{path}: no column {column!r} (header: {header})")
        return [row[idx].strip() for row in reader if len(row) > idx and row[idx].strip()]
    finally:
        if fh is not sys.stdin:
            fh.close()


def analyze_sample(
    sample: DigitSample,
    tests: Sequence[str],
    alpha: float,
    calibration: str,
    reps: int,
    seed: int,
    workers: int = 1,
    cache: Optional[CriticalValueCache] = None,
) -> list[TestResult]:
    """Run ``tests`` on ``sample``; simulated tests share one set of null samples."""
    counts = sample.counts[None, :]
    observed = evaluate(tests, counts)[0]
    results: dict[str, TestResult] = {}
    need_mc = []
    for t, value in zip(tests, observed):
        df = _asymptotic_df(t)
        method = calibration
        if method == "auto":
            method = "monte-carlo" if sample.n < MC_THRESHOLD_N else "asymptotic"
        if method == "asymptotic" and df is not None:
            crit = float(stats.chi2.ppf(1 - alpha, df))
            results[t] = TestResult(t, float(value), crit, bool(value > crit), "asymptotic", alpha, float(stats.chi2.sf(value, df)))
        else:
            need_mc.append(t)
    if need_mc:
        cfg = McConfig(reps, seed, sample.n, alpha)
        hits = {t: cache.get(t, cfg) for t in need_mc} if cache is not None else {}
        if hits and all(hits.values()):
            for t in need_mc:
                v = float(observed[tests.index(t)])
                crit = hits[t].value
                results[t] = TestResult(t, v, crit, bool(v > crit), "monte-carlo", alpha, None, None, reps, seed)
        else:
            null = simulate_null(need_mc, sample.n, reps, seed, workers)
            for j, t in enumerate(need_mc):
                v = float(observed[tests.index(t)])
                crit = empirical_quantile(null[:, j], 1 - alpha)
                p = (1 + int(np.sum(null[:, j] >= v))) / (reps + 1)
                results[t] = TestResult(t, v, crit, bool(v > crit), "monte-carlo", alpha, p, None, reps, seed)
                if cache is not None:
                    cache.put(CriticalValueRecord(t, sample.n, alpha, crit, reps, seed))
    for t in tests:
        if t.startswith("Tkhat"):
            k_max = int(t[5:]) if t[5:] else DEFAULT_KMAX
            k_hat, _ = data_driven_select(sample, k_max)
            results[t] = replace(results[t], selected_k=k_hat)
    return [results[t] for t in tests]


def build_report(args, sample: DigitSample, results: list[TestResult], seed: int) -> dict:
    pi = _benford_array()
    return {
        "schema": "benford-smooth/analysis",
        "schema_version": REPORT_SCHEMA_VERSION,
        "tool_version": __version__,
        "input": {"path": args.input, "column": args.column, "policy": args.policy},
        "n": sample.n,
        "skipped": sample.skipped,
        "digits": [
            {"digit": d, "count": int(c), "observed": float(c) / sample.n, "expected": float(pi[d - 1])}
            for d, c in enumerate(sample.counts, start=1)
        ],
        "alpha": args.alpha,
        "calibration": args.calibration,
        "seed": seed,
        "replications": args.reps,
        "tests": [r.to_dict() for r in results],
        "any_reject": any(r.reject for r in results),
        "generated_at": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }


def _format_table(report: dict) -> str:
    lines = [f"n = {report['n']} (skipped {report['skipped']}), alpha = {report['alpha']}, seed = {report['seed']}", ""]
    lines.append("digit  count  observed  benford")
    for row in report["digits"]:
        lines.append(f"{row['digit']:>5}  {row['count']:>5}  {row['observed']:8.4f}  {row['expected']:7.4f}")
    lines.append("")
    lines.append(f"{'test':<8} {'statistic':>11} {'critical':>10} {'p-value':>8}  {'decision':<9} calibration")
    for t in report["tests"]:
        p = "" if t["p_value"] is None else f"{t['p_value']:.4f}"
        decision = "reject" if t["reject"] else "accept"
        k = f" (K={t['selected_k']})" if t["selected_k"] else ""
        lines.append(f"{t['test']:<8} {t['statistic']:11.4f} {t['critical_value']:10.4f} {p:>8}  {decision:<9} {t['calibration']}{k}")
    return "\n".join(lines)


def cmd_analyze(args) -> int:
    if not 0 < args.alpha < 1:
        raise CliError(f"--alpha must be in (0, 1), got {args.alpha}")
    tests = _resolve_tests(args.tests, args.all_tests, args.kmax)
    values = read_values(args.input, args.column, args.delimiter)
    sample = tabulate_digits(values, args.policy)
    seed = _new_seed(args.seed)
    cache = CriticalValueCache(args.cache) if args.cache else None
    results = analyze_sample(sample, tests, args.alpha, CALIBRATIONS[args.calibration], args.reps, seed, args.workers, cache)
    report = build_report(args, sample, results, seed)
    if args.format == "table":
        print(_format_table(report))
    else:
        print(json.dumps(report, indent=2))
    return 1 if report["any_reject"] else 0


def cmd_sample(args) -> int:
    spec = AlternativeSpec(args.family, args.beta)
    seed = _new_seed(args.seed)
    counts = draw_counts(alternative_pmf(spec), args.n, child_rng(seed, 0, (2,)))
    # Shuffle so the file looks like raw data, deterministically.
    digits = np.repeat(np.arange(1, 10), counts)
    child_rng(seed, 1, (2,)).shuffle(digits)
    text = "".join(f"{d}\n" for d in digits)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
        log.info("wrote %d digits to %s (seed %d)", args.n, args.output, seed)
    return 0


def cmd_critical_values(args) -> int:
    if not 0 < args.alpha < 1:
        raise CliError(f"--alpha must be in (0, 1), got {args.alpha}")
    ids = [s.strip() for s in args.statistic.split(",") if s.strip()]
    seed = _new_seed(args.seed)
    cfg = McConfig(args.reps, seed, args.n, args.alpha)
    cache = CriticalValueCache(args.cache) if args.cache else None
    for rec in mc_critical_values(ids, cfg, args.workers, cache).values():
        print(json.dumps(rec.__dict__))
    return 0


def parse_grid(text: str) -> list[float]:
    """``"a,b,c"`` or ``"start:stop:num"`` (inclusive, like ``linspace``)."""
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(x) for x in np.round(np.linspace(float(start), float(stop), int(num)), 12)]
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_power(args) -> int:
    if not 0 < args.alpha < 1:
        raise CliError(f"--alpha must be in (0, 1), got {args.alpha}")
    tests = _resolve_tests(args.tests, args.all_tests, args.kmax)
    grid = parse_grid(args.betas)
    seed = _new_seed(args.seed)
    cfg = McConfig(args.reps, seed, args.n, args.alpha)
    cache = CriticalValueCache(args.cache) if args.cache else None
    curves = power_curve(tests, args.family, grid, cfg, args.null_reps, args.workers, cache)
    text = curves_to_csv(curves, seed)
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    return 0


def cmd_figure1(args) -> int:
    seed = _new_seed(args.seed)
    cache = CriticalValueCache(args.cache) if args.cache else None
    run_figure1(args.output_dir, args.reps, args.null_reps, seed, args.alpha, args.workers, cache)
    log.info("figure data written to %s (seed %d)", args.output_dir, seed)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="benford-smooth", description="Smooth goodness-of-fit tests for Benford's law.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, tests=True):
        sp.add_argument("--alpha", type=float, default=0.05)
        sp.add_argument("--seed", type=int, default=None, help="master seed (random and echoed when omitted)")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--cache", default=None, help="critical-value cache file")
        if tests:
            sp.add_argument("--tests", default=None, help="comma-separated statistic ids")
            sp.add_argument("--all-tests", action="store_true", help="run the full battery")
            sp.add_argument("--kmax", type=int, default=DEFAULT_KMAX)

    a = sub.add_parser("analyze", help="test a data file for Benford conformance")
    a.add_argument("input", help="data file, or - for stdin")
    a.add_argument("--column", default=None, help="column name or index of a delimited file with header")
    a.add_argument("--delimiter", default=",")
    a.add_argument("--policy", choices=POLICIES, default="strict")
    a.add_argument("--calibration", choices=list(CALIBRATIONS), default="auto")
    a.add_argument("--reps", type=int, default=DESK_NULL_REPLICATIONS, help="null replications for simulated tests")
    a.add_argument("--format", choices=("json", "table"), default="json")
    common(a)
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sample", help="write digits drawn from an alternative family")
    s.add_argument("--family", choices=FAMILIES, required=True)
    s.add_argument("--beta", type=float, required=True, help="family parameter (gamma for contaminated2)")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--output", "-o", default=None)
    s.set_defaults(func=cmd_sample)

    c = sub.add_parser("critical-values", help="Monte Carlo critical values under the Benford law")
    c.add_argument("--statistic", required=True, help="statistic id(s), comma separated")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--reps", type=int, default=DESK_NULL_REPLICATIONS)
    common(c, tests=False)
    c.set_defaults(func=cmd_critical_values)

    w = sub.add_parser("power", help="simulated power curve along a parameter grid")
    w.add_argument("--family", choices=FAMILIES, required=True)
    w.add_argument("--betas", required=True, help="'b1,b2,...' or 'start:stop:num'")
    w.add_argument("--n", type=int, required=True)
    w.add_argument("--reps", type=int, default=DESK_POWER_REPLICATIONS)
    w.add_argument("--null-reps", type=int, default=DESK_NULL_REPLICATIONS)
    w.add_argument("--output", "-o", default=None)
    common(w)
    w.set_defaults(func=cmd_power)

    f = sub.add_parser("figure1", help="power study over the six alternative families")
    f.add_argument("--reps", type=int, default=DESK_POWER_REPLICATIONS)
    f.add_argument("--null-reps", type=int, default=DESK_NULL_REPLICATIONS)
    f.add_argument("--output-dir", "-o", required=True)
    common(f, tests=False)
    f.set_defaults(func=cmd_figure1)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "workers", 1) < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (BenfordError, CliError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
