"""
End-to-end verification behind `kcopy verify`.

Stages, in order: the cover plan, the adversary sweep over (N, r_L, r_L*)
with k-copy replay, and an optional seeded fuzz of the packers against the
exhaustive OPT oracle.
"""
from __future__ import annotations

import csv
import json
import logging
import multiprocessing
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import IO, List, Optional, Tuple, Union

from .adversary import generate, predicted_counts
from .domain import DomainError, Instance
from .packers import PH3Config, first_fit, best_fit, next_fit, run_ffd, run_ph3
from .planner import CoverPlan, plan_cover, run_kcopy, verify_plan, widen_plan
from .ratio import brute_force_opt, empirical_ratio, opt_bounds, theorem1_bound
from .schemas import AdversaryParams, VerifyConfig

logger = logging.getLogger(__name__)

PASS, FAIL, SKIP = "pass", "fail", "skip"


@dataclass(frozen=True)
class CheckResult:
    check: str
    status: str
    detail: str = ""
    N: Optional[int] = None
    r_L: Optional[Fraction] = None
    r_L_star: Optional[Fraction] = None

    @property
    def sort_key(self):
        return (
            self.N if self.N is not None else -1,
            self.r_L if self.r_L is not None else Fraction(-1),
            self.r_L_star if self.r_L_star is not None else Fraction(-1),
            self.check,
        )


@dataclass
class VerifySummary:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def failures(self) -> List[CheckResult]:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def passed(self) -> bool:
        return not self.failures

    def count(self, status: str) -> int:
        return sum(1 for c in self.checks if c.status == status)


def load_config(path: Union[str, Path, None]) -> VerifyConfig:
    if path is None:
        return VerifyConfig()
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return VerifyConfig.model_validate(data)


def _within(bracket: Tuple[Fraction, Fraction], target: Fraction, tol: Fraction) -> bool:
    """Whether [low, high] meets [target(1 - tol), target(1 + tol)]."""
    low, high = bracket
    return low <= target * (1 + tol) and high >= target * (1 - tol)


def check_plan(plan: CoverPlan) -> CheckResult:
    violations = verify_plan(plan)
    if violations:
        shown = "; ".join(v.describe() for v in violations[:3])
        return CheckResult("plan-cover", FAIL, f"{len(violations)} violations: {shown}")
    return CheckResult("plan-cover", PASS, f"k={plan.k}")


def check_point(N: int, r_L: Fraction, r: Fraction, config: VerifyConfig, plan: CoverPlan) -> List[CheckResult]:
    """Generator, replay and formula cross-checks for one parameter point."""
    where = dict(N=N, r_L=r_L, r_L_star=r)
    params = AdversaryParams(N=N, r_L=r_L, r_L_star=r)
    instance = generate(params)
    predicted = predicted_counts(params)
    ph3 = run_ph3(PH3Config(r_L=r_L), instance)
    bounds = opt_bounds(instance)
    results = []

    ok = ph3.bins_used >= predicted.ph3_lower
    results.append(CheckResult(
        "ph3-lower", PASS if ok else FAIL,
        f"{ph3.bins_used} vs {float(predicted.ph3_lower):.3f}", **where))

    if predicted.ffd_bound_applies:
        ok = bounds.ub_ffd <= predicted.ffd_upper
        results.append(CheckResult(
            "ffd-upper", PASS if ok else FAIL,
            f"{bounds.ub_ffd} vs {float(predicted.ffd_upper):.3f}", **where))
    else:
        results.append(CheckResult("ffd-upper", SKIP, "too few 1/6-e items for the closed form", **where))

    if N < config.ratio_min_n:
        results.append(CheckResult("ratio-bracket", SKIP, f"N < {config.ratio_min_n}", **where))
        results.append(CheckResult("kcopy", SKIP, f"N < {config.ratio_min_n}", **where))
        return results

    tol = config.tolerance_pct / 100
    target = theorem1_bound(r_L, r).value
    bracket = empirical_ratio(ph3, bounds)
    ok = _within(bracket, target, tol)
    results.append(CheckResult(
        "ratio-bracket", PASS if ok else FAIL,
        f"[{float(bracket[0]):.4f}, {float(bracket[1]):.4f}] vs {float(target):.4f}", **where))

    bins, winner = run_kcopy(plan, instance, workers=1)
    ratio = Fraction(bins, bounds.ub_ffd)
    ok = ratio <= plan.target_R * (1 + tol)
    results.append(CheckResult(
        "kcopy", PASS if ok else FAIL,
        f"copy {winner}: {bins}/{bounds.ub_ffd} = {float(ratio):.4f} vs R={float(plan.target_R):.4f}", **where))
    return results


def _check_point_job(job) -> List[CheckResult]:
    N, r_L, r, config, plan = job
    try:
        return check_point(N, r_L, r, config, plan)
    except (DomainError, ValueError) as e:
        return [CheckResult("point", FAIL, str(e), N=N, r_L=r_L, r_L_star=r)]


def _random_instance(rng: random.Random, max_items: int) -> Instance:
    n = rng.randint(1, max_items)
    sizes = []
    for _ in range(n):
        q = rng.randint(2, 60)
        sizes.append(Fraction(rng.randint(1, q), q))
    return Instance.from_sizes(sizes, label="fuzz")


def fuzz_checks(config: VerifyConfig, seed: int) -> List[CheckResult]:
    """Feasibility of every packer and lb <= OPT <= FFD on random small instances."""
    rng = random.Random(seed)
    bad = []
    for i in range(config.fuzz_instances):
        instance = _random_instance(rng, config.fuzz_max_items)
        try:
            for packer in (next_fit, first_fit, best_fit, run_ffd):
                packer(instance)
            run_ph3(PH3Config(r_L=Fraction(rng.randint(0, 19), 19)), instance)
            bounds = opt_bounds(instance)
            opt = brute_force_opt(instance, max_items=config.fuzz_max_items)
            if not bounds.lb <= opt <= bounds.ub_ffd:
                bad.append(f"#{i}: lb={bounds.lb} opt={opt} ffd={bounds.ub_ffd}")
        except DomainError as e:
            bad.append(f"#{i}: {e}")
    if bad:
        return [CheckResult("fuzz", FAIL, f"{len(bad)} of {config.fuzz_instances}: " + "; ".join(bad[:3]))]
    return [CheckResult("fuzz", PASS, f"{config.fuzz_instances} instances, seed {seed}")]


def run_verification(
    config: VerifyConfig, seed: Optional[int] = None, workers: int = 1
) -> VerifySummary:
    summary = VerifySummary()
    points = [
        (N, r_L, r) for N in config.n_values for r_L, r in config.effective_grid()
    ]

    if not points:
        logger.warning("Verification grid is empty; nothing to check")
    else:
        plan = plan_cover(config.plan_R)
        if config.plan_widen > 0:
            plan = widen_plan(plan, config.plan_widen)
            logger.info(f"Plan intervals widened by {config.plan_widen}")
        summary.checks.append(check_plan(plan))

        jobs = [(N, r_L, r, config, plan) for N, r_L, r in points]
        logger.info(f"Checking {len(jobs)} parameter points with {workers} worker(s)")
        if workers > 1:
            with multiprocessing.Pool(workers) as pool:
                batches = pool.map(_check_point_job, jobs)
        else:
            batches = [_check_point_job(job) for job in jobs]
        point_checks = [c for batch in batches for c in batch]
        summary.checks.extend(sorted(point_checks, key=lambda c: c.sort_key))

    if config.fuzz_instances:
        if seed is None:
            logger.warning("fuzz_instances is set but no --seed was given; fuzz stage skipped")
        else:
            summary.checks.extend(fuzz_checks(config, seed))

    for failure in summary.failures:
        logger.error(f"{failure.check} failed at N={failure.N} r_L={failure.r_L} "
                     f"r_L*={failure.r_L_star}: {failure.detail}")
    return summary


SUMMARY_COLUMNS = ["check", "N", "r_L", "r_L_star", "status", "detail"]


def write_summary_csv(summary: VerifySummary, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for c in summary.checks:
        writer.writerow([
            c.check,
            "" if c.N is None else c.N,
            "" if c.r_L is None else str(c.r_L),
            "" if c.r_L_star is None else str(c.r_L_star),
            c.status,
            c.detail,
        ])
