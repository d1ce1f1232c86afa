"""
Command-line front end.

Every subcommand writes CSV (or JSON for `history`) to stdout or --out.
Exit codes: 0 success, 1 usage/domain/IO error, 2 verification failure.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
import time
from fractions import Fraction
from typing import List, Optional

from pydantic import ValidationError
from sqlalchemy.exc import SQLAlchemyError

from .adversary import predicted_counts, write_adversary
from .config import DEFAULT_TOL, LOG_LEVEL, MAX_WORKERS
from .db import get_db
from .domain import DomainError, load_instance, parse_rational
from .models import RunRecord
from .packers import pack, parse_algorithm, write_trace_csv
from .planner import CoverProgressError, best_ratio, plan_cover, round_up, write_plan_csv
from .ratio import empirical_ratio, opt_bounds, ratio_curve
from .report import (
    curve_rows,
    fit_conjecture,
    plot_bound_svg,
    plot_curve_svg,
    plot_plan_svg,
    published_disagreements,
    table1_disagreements,
    table1_rows,
    write_bound_curve,
    write_curve,
    write_reports,
    write_table1,
)
from .schemas import AdversaryParams, PaginatedRuns, RunRecordOut, RunReport
from .verify import load_config, run_verification, write_summary_csv

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # exit status 2 belongs to verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def rational(text: str) -> Fraction:
    return parse_rational(text)


@contextlib.contextmanager
def _output(path: Optional[str]):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def record_run(db, report: RunReport) -> RunRecord:
    try:
        record = RunRecord(
            label=report.label,
            algorithm=report.algorithm,
            bins_used=report.bins_used,
            opt_lb=report.opt_lb,
            ffd_ub=report.ffd_ub,
            ratio_low=None if report.ratio_low is None else str(report.ratio_low),
            ratio_high=None if report.ratio_high is None else str(report.ratio_high),
            wall_time=report.wall_time,
        )
        db.add(record)
        db.commit()
        db.refresh(record)
        logger.info(f"Recorded run: label={report.label}, algorithm={report.algorithm}")
        return record
    except SQLAlchemyError as e:
        db.rollback()
        logger.error(f"Database error recording run: {e}")
        raise


def list_runs(db, algorithm: Optional[str] = None, label: Optional[str] = None,
              limit: int = 100, offset: int = 0) -> PaginatedRuns:
    try:
        q = db.query(RunRecord).order_by(RunRecord.recorded_at.desc(), RunRecord.id.desc())
        if algorithm:
            q = q.filter(RunRecord.algorithm == algorithm)
        if label:
            q = q.filter(RunRecord.label == label)

        total = q.count()
        results = q.offset(offset).limit(limit).all()
        items = [RunRecordOut.model_validate(r) for r in results]
        return PaginatedRuns(items=items, total=total, limit=limit, offset=offset)
    except SQLAlchemyError as e:
        logger.error(f"Database error listing runs: {e}")
        raise


def cmd_pack(args) -> int:
    algorithm = parse_algorithm(args.algo)
    reports = []
    traces = []
    for path in args.instances:
        instance = load_instance(path)
        start = time.perf_counter()
        result = pack(algorithm, instance, trace=args.trace is not None)
        elapsed = time.perf_counter() - start
        bounds = opt_bounds(instance)
        low = high = None
        if bounds.lb > 0:
            low, high = empirical_ratio(result, bounds)
        reports.append(RunReport(
            label=instance.label, algorithm=algorithm.label, bins_used=result.bins_used,
            opt_lb=bounds.lb, ffd_ub=bounds.ub_ffd, ratio_low=low, ratio_high=high,
            wall_time=elapsed,
        ))
        traces.extend(result.trace or [])

    with _output(args.out) as out:
        write_reports(reports, out, timing=args.timing)
    if args.trace is not None:
        with _output(args.trace) as out:
            write_trace_csv(traces, out)

    if args.record:
        with get_db() as db:
            for report in reports:
                record_run(db, report)
    return EXIT_OK


def cmd_plan(args) -> int:
    plan = plan_cover(args.R, samples=args.samples)
    with _output(args.out) as out:
        write_plan_csv(plan, out)
    if args.svg:
        plot_plan_svg(plan, args.svg)
    logger.info(f"R={float(plan.target_R):.6f} needs k={plan.k} copies")
    return EXIT_OK


def cmd_best_ratio(args) -> int:
    R, plan = best_ratio(args.k, args.tol)
    with _output(args.out) as out:
        out.write("k,R,R_dec,copies\n")
        out.write(f"{args.k},{R},{round_up(R, 4)},{plan.k}\n")
    if args.plan:
        with _output(args.plan) as out:
            write_plan_csv(plan, out)
    return EXIT_OK


def cmd_table1(args) -> int:
    rows = table1_rows(range(args.min_bits, args.max_bits + 1), args.tol)
    with _output(args.out) as out:
        write_table1(rows, out)
    table1_disagreements(rows)
    return EXIT_OK


def cmd_curve(args) -> int:
    if args.k_max < 1:
        raise DomainError(f"k_max must be at least 1, got {args.k_max}")
    rows = curve_rows(args.k_max, args.tol)
    with _output(args.out) as out:
        write_curve(rows, out)
    a, rmse = fit_conjecture(rows)
    logger.info(f"Fitted R(k) ~ 3/2 + {a:.6f}/(k + log2(k+1)), rmse {rmse:.2e}")
    published_disagreements(rows)
    if args.svg:
        plot_curve_svg(rows, args.svg)
    return EXIT_OK


def cmd_bound(args) -> int:
    rows = ratio_curve(args.r_L, points=args.points)
    with _output(args.out) as out:
        write_bound_curve(rows, out)
    worst = max(rows, key=lambda row: row[1])
    logger.info(f"r_L={args.r_L}: worst bound {float(worst[1]):.6f} at r_L*={worst[0]}")
    if args.svg:
        plot_bound_svg(args.r_L, rows, args.svg)
    return EXIT_OK


def cmd_adversary(args) -> int:
    params = AdversaryParams(N=args.N, r_L=args.r_L, r_L_star=args.r_L_star)
    path, meta = write_adversary(params, args.out)
    predicted = predicted_counts(params)
    sys.stdout.write("ph3_lower,ffd_upper,ffd_bound_applies,instance,sidecar\n")
    sys.stdout.write(
        f"{predicted.ph3_lower},{predicted.ffd_upper},{str(predicted.ffd_bound_applies).lower()},"
        f"{path},{meta}\n"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    config = load_config(args.config)
    summary = run_verification(config, seed=args.seed, workers=args.workers)
    with _output(args.out) as out:
        write_summary_csv(summary, out)
    logger.info(
        f"verify: {summary.count('pass')} passed, {summary.count('fail')} failed, "
        f"{summary.count('skip')} skipped"
    )
    return EXIT_OK if summary.passed else EXIT_VERIFY


def cmd_history(args) -> int:
    with get_db() as db:
        page = list_runs(db, args.algorithm, args.label, args.limit, args.offset)
    with _output(args.out) as out:
        out.write(page.model_dump_json(indent=2) + "\n")
    return EXIT_OK


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise ValueError(text)
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kcopy", description="k-copy PH3 bin packing toolkit")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="logging level (default from LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pack", help="pack instance files with one algorithm")
    p.add_argument("instances", nargs="+", help="instance file(s)")
    p.add_argument("--algo", required=True, help="nf | ff | bf | ffd | ph3:<r_L>")
    p.add_argument("--out", help="report CSV (default stdout)")
    p.add_argument("--trace", help="write the per-item routing trace CSV here")
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.add_argument("--record", action="store_true", help="store the reports in the run history")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("plan", help="interval cover for a target ratio")
    p.add_argument("R", type=rational, help="target ratio in (3/2, 33/19)")
    p.add_argument("--samples", type=int, default=None, help="interior samples per copy")
    p.add_argument("--out")
    p.add_argument("--svg", help="plot every copy's bound")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("best-ratio", help="best ratio reachable with k copies")
    p.add_argument("k", type=_positive)
    p.add_argument("--tol", type=rational, default=DEFAULT_TOL)
    p.add_argument("--out")
    p.add_argument("--plan", help="also write the plan CSV here")
    p.set_defaults(func=cmd_best_ratio)

    p = sub.add_parser("table1", help="k-copy PH3 against RedBlue for 4..16 advice bits")
    p.add_argument("--tol", type=rational, default=Fraction(1, 10**7))
    p.add_argument("--min-bits", type=_positive, default=4)
    p.add_argument("--max-bits", type=_positive, default=16)
    p.add_argument("--out")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("curve", help="best ratio for k = 1..k_max")
    p.add_argument("k_max", type=int)
    p.add_argument("--tol", type=rational, default=DEFAULT_TOL)
    p.add_argument("--out")
    p.add_argument("--svg", help="plot the curve with the fitted conjecture")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("bound", help="one copy's bound over r_L* in [0, 1]")
    p.add_argument("r_L", type=rational)
    p.add_argument("--points", type=_positive, default=100, help="grid intervals over [0, 1]")
    p.add_argument("--out")
    p.add_argument("--svg", help="plot the curve")
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("adversary", help="write a tightness instance and its sidecar")
    p.add_argument("N", type=int)
    p.add_argument("r_L", type=rational)
    p.add_argument("r_L_star", type=rational)
    p.add_argument("--out", required=True, help="instance file to write")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("verify", help="run the verification pipeline")
    p.add_argument("config", nargs="?", help="JSON config (defaults when omitted)")
    p.add_argument("--seed", type=int, help="seed for the fuzz stage")
    p.add_argument("--workers", type=_positive, default=MAX_WORKERS)
    p.add_argument("--out", help="summary CSV (default stdout)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("history", help="list recorded pack runs")
    p.add_argument("--algorithm")
    p.add_argument("--label")
    p.add_argument("--limit", type=_positive, default=100)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_history)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=str(args.log_level).upper(), stream=sys.stderr)
    try:
        return args.func(args)
    except (DomainError, ValidationError, CoverProgressError) as e:
        logger.error(f"{args.command}: {e}")
    except (OSError, json.JSONDecodeError) as e:
        logger.error(f"{args.command}: {e}")
    except SQLAlchemyError as e:
        logger.error(f"{args.command}: database error: {e}")
    return EXIT_USAGE
