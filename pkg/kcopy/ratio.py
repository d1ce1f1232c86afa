"""
Closed-form competitive-ratio analysis of PH3.

Lower bounds on OPT, the instance ratio r_L*, the asymptotic bound of PH3 as a
function of (r_L, r_L*), its two linear envelopes, the optimal single copy, and
an exhaustive OPT oracle for small instances.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

from .config import BRUTE_FORCE_MAX_ITEMS
from .domain import DomainError, Instance, ItemClass, ONE_THIRD, ceil_fraction, parse_rational
from .packers import PackingResult, run_ffd

logger = logging.getLogger(__name__)

THREE_HALVES = Fraction(3, 2)


@dataclass(frozen=True)
class OptBounds:
    lb_count: int
    lb_pairs: Fraction
    lb_size: Fraction
    lb: int
    ub_ffd: int

    def __post_init__(self):
        if self.lb > self.ub_ffd:
            raise DomainError(f"lower bound {self.lb} exceeds FFD bound {self.ub_ffd}")


@dataclass(frozen=True)
class RatioBound:
    r_L: Fraction
    r_L_star: Fraction
    delta: Fraction
    value: Fraction

    @property
    def regime(self) -> str:
        """Which side of the guess PH3 is on, and which min-branch binds."""
        side = "over" if self.delta > 0 else "under" if self.delta < 0 else "exact"
        band = "r*<=1/3" if self.r_L_star <= ONE_THIRD else "r*>1/3"
        return f"{side},{band}"


def opt_bounds(instance: Instance) -> OptBounds:
    n_xl = instance.count(ItemClass.XL)
    n_l = instance.count(ItemClass.L)
    n_m = instance.count(ItemClass.M)
    lb_count = n_xl + n_l
    lb_pairs = n_xl + Fraction(n_m + n_l, 2)
    lb_size = instance.total_size
    lb = ceil_fraction(max(Fraction(lb_count), lb_pairs, lb_size))
    return OptBounds(lb_count, lb_pairs, lb_size, lb, run_ffd(instance).bins_used)


def r_star(instance: Instance) -> Fraction:
    """min(|I_L| / (6 size(I_S)), 1); an instance without small items gets 1."""
    small = sum((item.size for item in instance.items if item.is_small), Fraction(0))
    if small == 0:
        return Fraction(1)
    return min(Fraction(instance.count(ItemClass.L)) / (6 * small), Fraction(1))


def _unit_interval(name: str, value) -> Fraction:
    value = parse_rational(value)
    if value < 0 or value > 1:
        raise DomainError(f"{name} must lie in [0, 1], got {value}")
    return value


def theorem1_bound(r_L, r_L_star) -> RatioBound:
    """Asymptotic competitive ratio of PH3 with ratio r_L on inputs whose ideal ratio is r_L*.

    At r_L* = 0 the 1/(4 r*) and 3/(4 r*) terms are treated as infinite, so the
    other branch of the min applies.
    """
    r_L = _unit_interval("r_L", r_L)
    r = _unit_interval("r_L_star", r_L_star)
    delta = r_L - r
    if delta == 0:
        value = THREE_HALVES
    elif delta < 0:
        # r > r_L >= 0 here, so r is never zero on this branch
        slope = min(1 / (4 * r), 3 / (6 * r + 2))
        value = THREE_HALVES + slope * -delta
    else:
        slope = Fraction(9) / (6 * r + 2)
        if r > 0:
            slope = min(3 / (4 * r), slope)
        value = THREE_HALVES + slope * delta
    return RatioBound(r_L, r, delta, value)


def envelope_bounds(r_L) -> Tuple[Fraction, Fraction]:
    r_L = _unit_interval("r_L", r_L)
    return Fraction(7, 4) - r_L / 4, THREE_HALVES + Fraction(9, 2) * r_L


def one_copy_optimum() -> Tuple[Fraction, Fraction]:
    # 7/4 - r/4 = 3/2 + 9r/2  =>  r = (7/4 - 3/2) / (9/2 + 1/4)
    r = (Fraction(7, 4) - THREE_HALVES) / (Fraction(9, 2) + Fraction(1, 4))
    return r, THREE_HALVES + Fraction(9, 2) * r


def empirical_ratio(result: PackingResult, bounds: OptBounds) -> Tuple[Fraction, Fraction]:
    """Certified bracket (bins / FFD, bins / lb) on the ratio attained on one instance."""
    if bounds.lb == 0:
        raise DomainError("empirical ratio is undefined on an empty instance")
    return Fraction(result.bins_used, bounds.ub_ffd), Fraction(result.bins_used, bounds.lb)


def ratio_curve(r_L, points: int = 100) -> List[Tuple[Fraction, Fraction]]:
    """Bound of one copy sampled at r_L* = i/points for i = 0..points."""
    if points < 1:
        raise DomainError(f"points must be positive, got {points}")
    return [
        (Fraction(i, points), theorem1_bound(r_L, Fraction(i, points)).value)
        for i in range(points + 1)
    ]


def brute_force_opt(instance: Instance, max_items: Optional[int] = None) -> int:
    """Exact OPT by branch and bound over bin assignments.

    Items are placed largest first into an existing bin or one new bin; a
    branch is cut when its bin count plus the unpacked volume cannot beat the
    incumbent, which starts at the FFD count.
    """
    limit = BRUTE_FORCE_MAX_ITEMS if max_items is None else max_items
    if len(instance) > limit:
        raise DomainError(f"brute force is limited to {limit} items, got {len(instance)}")
    if not len(instance):
        return 0

    # integer weights over a common denominator keep the search exact and fast
    denom = math.lcm(*(item.size.denominator for item in instance.items))
    weights = sorted((item.size.numerator * (denom // item.size.denominator)
                      for item in instance.items), reverse=True)
    suffix = [0] * (len(weights) + 1)
    for i in range(len(weights) - 1, -1, -1):
        suffix[i] = suffix[i + 1] + weights[i]

    best = run_ffd(instance).bins_used
    loads: List[int] = []

    def search(i: int) -> None:
        nonlocal best
        if i == len(weights):
            best = min(best, len(loads))
            return
        free = len(loads) * denom - sum(loads)
        extra = max(0, -(-(suffix[i] - free) // denom))
        if len(loads) + extra >= best:
            return
        w = weights[i]
        seen = set()
        for b, load in enumerate(loads):
            if load + w <= denom and load not in seen:
                seen.add(load)
                loads[b] += w
                search(i + 1)
                loads[b] -= w
        if len(loads) + 1 < best:
            loads.append(w)
            search(i + 1)
            loads.pop()

    search(0)
    logger.debug(f"brute force OPT of {len(instance)} items: {best}")
    return best
