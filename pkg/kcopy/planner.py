"""
k-copy ensembles of PH3: interval covers for a target ratio, the best ratio
reachable with k copies, advice-bit arithmetic and the RedBlue comparison bound.
"""
from __future__ import annotations

import bisect
import csv
import logging
import multiprocessing
from dataclasses import dataclass, field, replace
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from functools import lru_cache
from typing import IO, List, Optional, Tuple

from .config import (
    COVER_RESOLUTION_BITS,
    DEFAULT_TOL,
    MAX_WORKERS,
    PLAN_VERIFY_SAMPLES,
    PLANNER_MAX_STEPS,
)
from .domain import ONE_THIRD, DomainError, Instance, parse_rational
from .packers import PH3Config, run_ph3
from .ratio import THREE_HALVES, one_copy_optimum, theorem1_bound

logger = logging.getLogger(__name__)

ONE_COPY_R_L, ONE_COPY_R = one_copy_optimum()


class CoverProgressError(RuntimeError):
    """The cover iteration stopped advancing or hit its step cap."""


class CoverVerificationError(DomainError):
    """A copy's bound exceeds the target somewhere on its interval."""


@dataclass(frozen=True)
class CopySpec:
    r_L: Fraction
    r_min: Fraction
    r_max: Fraction
    verified_max_bound: Optional[Fraction] = None

    @property
    def interval(self) -> Tuple[Fraction, Fraction]:
        return self.r_min, self.r_max


@dataclass(frozen=True)
class CoverPlan:
    target_R: Fraction
    copies: Tuple[CopySpec, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "copies", tuple(self.copies))

    @property
    def k(self) -> int:
        return len(self.copies)


@dataclass(frozen=True)
class CoverViolation:
    r_L_star: Fraction
    copy_index: Optional[int]
    bound: Optional[Fraction]

    def describe(self) -> str:
        if self.copy_index is None:
            return f"r_L*={self.r_L_star} is not covered by any copy"
        return f"copy {self.copy_index} has bound {float(self.bound):.6f} at r_L*={self.r_L_star}"


def _check_target(R: Fraction) -> Fraction:
    R = parse_rational(R)
    if not THREE_HALVES < R < ONE_COPY_R:
        raise DomainError(f"target ratio must lie strictly between 3/2 and 33/19, got {R}")
    return R


def _floor_to(x: Fraction, resolution: Optional[int]) -> Fraction:
    if resolution is None:
        return x
    return Fraction((x.numerator * resolution) // x.denominator, resolution)


@lru_cache(maxsize=1 << 17)
def cover_step(r_min, R, resolution: Optional[int] = None) -> CopySpec:
    """One copy of the cover: the r_L whose bound at r_min equals R, and how far it reaches.

    With a dyadic `resolution`, r_L and r_max are floored onto the grid
    1/resolution. Flooring only lowers the bound at r_min and shrinks the
    interval, so the copy stays within R.
    """
    R = _check_target(R)
    r_min = parse_rational(r_min)
    if r_min < 0 or r_min >= 1:
        raise DomainError(f"r_min must lie in [0, 1), got {r_min}")

    c = R - THREE_HALVES
    if r_min <= ONE_THIRD:
        r_L = r_min + c * (2 + 6 * r_min) / 9
    else:
        r_L = r_min + c * (4 * r_min) / 3
    r_L = _floor_to(min(r_L, Fraction(1)), resolution)

    r_max1 = (3 * r_L - 3 + 2 * R) / (12 - 6 * R)
    r_max2 = r_L / (7 - 4 * R)
    r_max = _floor_to(max(r_max1, r_max2), resolution)
    if r_max <= r_min:
        raise CoverProgressError(f"no progress at r_min={r_min} for R={R}")
    return CopySpec(r_L, r_min, min(r_max, Fraction(1)))


def _max_bound_on(spec: CopySpec, samples: int) -> Fraction:
    width = spec.r_max - spec.r_min
    points = [spec.r_min, spec.r_max]
    points.extend(spec.r_min + width * Fraction(j, samples + 1) for j in range(1, samples + 1))
    return max(theorem1_bound(spec.r_L, r).value for r in points)


def plan_cover(
    R,
    resolution: Optional[int] = None,
    samples: Optional[int] = None,
    max_steps: Optional[int] = None,
) -> CoverPlan:
    """Chain cover_step from r_L* = 0 until the intervals reach 1.

    Every copy is checked at both interval ends plus `samples` interior
    points. The bound is monotone on each side of r_L, so samples=0 is
    already a complete check.
    """
    R = _check_target(R)
    samples = PLAN_VERIFY_SAMPLES if samples is None else samples
    max_steps = PLANNER_MAX_STEPS if max_steps is None else max_steps

    copies: List[CopySpec] = []
    r_min = Fraction(0)
    while True:
        if len(copies) >= max_steps:
            raise CoverProgressError(f"cover for R={R} exceeded {max_steps} copies")
        spec = cover_step(r_min, R, resolution)
        worst = _max_bound_on(spec, samples)
        if worst > R:
            raise CoverVerificationError(
                f"copy {len(copies)} (r_L={spec.r_L}) reaches {float(worst):.9f} > R on "
                f"[{float(spec.r_min):.9f}, {float(spec.r_max):.9f}]"
            )
        copies.append(replace(spec, verified_max_bound=worst))
        if spec.r_max >= 1:
            break
        r_min = spec.r_max

    logger.debug(f"Cover for R={float(R):.6f} uses {len(copies)} copies")
    return CoverPlan(R, copies)


def one_copy_plan() -> CoverPlan:
    return CoverPlan(
        ONE_COPY_R, [CopySpec(ONE_COPY_R_L, Fraction(0), Fraction(1), ONE_COPY_R)]
    )


def _count_copies(R: Fraction, limit: int, bits: int) -> int:
    """Number of copies plan_cover(R, resolution=2**bits) would use, stopping past `limit`.

    Same arithmetic as cover_step on the dyadic grid, carried out on the
    integer numerators m = r_min * 2**bits.
    """
    P, Q = R.numerator, R.denominator
    D = 1 << bits
    cn, cd = 2 * P - 3 * Q, 2 * Q
    den1, den2 = 12 * Q - 6 * P, 7 * Q - 4 * P
    m = 0
    count = 0
    while True:
        count += 1
        if count > limit:
            return count
        if 3 * m <= D:
            a = m + (cn * (2 * D + 6 * m)) // (9 * cd)
        else:
            a = m + (cn * 4 * m) // (3 * cd)
        a = min(a, D)
        b1 = (3 * a * Q - 3 * Q * D + 2 * P * D) // den1
        b2 = (a * Q) // den2
        nxt = max(b1, b2)
        if nxt <= m:
            raise CoverProgressError(f"no progress at r_min={m}/2^{bits} for R={R}")
        if nxt >= D:
            return count
        m = nxt


@lru_cache(maxsize=256)
def best_ratio(k: int, tol=None, bits: Optional[int] = None) -> Tuple[Fraction, CoverPlan]:
    """Smallest R (to within tol, from above) whose cover needs at most k copies."""
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    tol = DEFAULT_TOL if tol is None else parse_rational(tol)
    if tol <= 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    bits = COVER_RESOLUTION_BITS if bits is None else bits

    lo, hi = THREE_HALVES, ONE_COPY_R
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _count_copies(mid, k, bits) <= k:
            hi = mid
        else:
            lo = mid

    if hi == ONE_COPY_R:
        return ONE_COPY_R, one_copy_plan()
    plan = plan_cover(hi, resolution=1 << bits, samples=0)
    if plan.k > k:
        logger.warning(f"best_ratio({k}) produced a plan with {plan.k} copies")
    return hi, plan


def verify_plan(plan: CoverPlan, samples: int = 10_000) -> List[CoverViolation]:
    """Check a plan on the grid i/samples of [0, 1].

    Every grid point must lie in some copy's interval, and every copy whose
    interval contains the point must keep its bound within target_R.
    """
    violations: List[CoverViolation] = []
    if not plan.copies:
        return [CoverViolation(Fraction(0), None, None)]
    starts = [spec.r_min for spec in plan.copies]
    for i in range(samples + 1):
        r = Fraction(i, samples)
        j = bisect.bisect_right(starts, r) - 1
        covered = False
        while j >= 0 and plan.copies[j].r_max >= r:
            covered = True
            bound = theorem1_bound(plan.copies[j].r_L, r).value
            if bound > plan.target_R:
                violations.append(CoverViolation(r, j, bound))
            j -= 1
        if not covered:
            violations.append(CoverViolation(r, None, None))
    return violations


def widen_plan(plan: CoverPlan, amount) -> CoverPlan:
    """Copy of `plan` with every interval stretched by `amount` on both sides (clamped to [0, 1])."""
    amount = parse_rational(amount)
    return CoverPlan(
        plan.target_R,
        [
            CopySpec(
                spec.r_L,
                max(Fraction(0), spec.r_min - amount),
                min(Fraction(1), spec.r_max + amount),
            )
            for spec in plan.copies
        ],
    )


def advice_bits(k: int) -> int:
    if k < 1:
        raise DomainError(f"k must be at least 1, got {k}")
    return (k - 1).bit_length()


def copies_for_bits(bits: int) -> int:
    if bits < 0:
        raise DomainError(f"bits must be non-negative, got {bits}")
    return 1 << bits


def redblue_bound(bits: int) -> Decimal:
    """RedBlue's published bound 1.5 + 15 / 2^(l/2 + 1), at 4 decimals."""
    if bits < 1:
        raise DomainError(f"bits must be at least 1, got {bits}")
    value = Decimal("1.5") + Decimal(15) / (Decimal(2) ** (Decimal(bits) / 2 + 1))
    return value.quantize(Decimal("0.0001"), rounding=ROUND_HALF_UP)


def round_up(x, places: int = 4) -> Decimal:
    """Ceiling of x at `places` decimals, computed exactly."""
    x = parse_rational(x)
    scale = 10 ** places
    n = -((-x.numerator * scale) // x.denominator)
    return Decimal(n).scaleb(-places)


def _copy_bins(args: Tuple[Fraction, Instance]) -> int:
    r_L, instance = args
    return run_ph3(PH3Config(r_L=r_L), instance).bins_used


def run_kcopy(plan: CoverPlan, instance: Instance, workers: Optional[int] = None) -> Tuple[int, int]:
    """Run every copy of `plan` on `instance`; (min bins, index of the first copy attaining it)."""
    if not plan.copies:
        raise DomainError("plan has no copies")
    workers = MAX_WORKERS if workers is None else workers
    jobs = [(spec.r_L, instance) for spec in plan.copies]
    if workers > 1 and len(jobs) > 1:
        with multiprocessing.Pool(min(workers, len(jobs))) as pool:
            counts = pool.map(_copy_bins, jobs)
    else:
        counts = [_copy_bins(job) for job in jobs]
    best = min(counts)
    return best, counts.index(best)


PLAN_COLUMNS = ["copy_index", "r_L", "r_min", "r_max", "verified_max_bound"]


def write_plan_csv(plan: CoverPlan, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(PLAN_COLUMNS)
    for i, spec in enumerate(plan.copies):
        bound = "" if spec.verified_max_bound is None else str(round_up(spec.verified_max_bound, 6))
        writer.writerow([i, str(spec.r_L), str(spec.r_min), str(spec.r_max), bound])
