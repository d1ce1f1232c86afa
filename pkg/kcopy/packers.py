"""
Online packers (PH3, Next Fit, First Fit, Best Fit) and the offline FFD oracle.
"""
from __future__ import annotations

import bisect
import csv
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, List, Optional, Union

from pydantic import BaseModel, ConfigDict, field_validator

from .domain import (
    Bin,
    BinCategory,
    DomainError,
    Instance,
    Item,
    ItemClass,
    parse_rational,
)

logger = logging.getLogger(__name__)


class PH3Config(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    r_L: Fraction

    @field_validator("r_L", mode="before")
    @classmethod
    def _exact_ratio(cls, value):
        r = parse_rational(value)
        if r < 0 or r > 1:
            raise ValueError(f"r_L must lie in [0, 1], got {r}")
        return r


@dataclass
class TraceEntry:
    item_index: int
    size: Fraction
    item_class: ItemClass
    decision: str
    bin_id: int


@dataclass
class PackingState:
    bins_XL: List[Bin] = field(default_factory=list)
    bins_L: List[Bin] = field(default_factory=list)
    bins_M: List[Bin] = field(default_factory=list)
    bins_S: List[Bin] = field(default_factory=list)
    open_S: Optional[int] = None
    open_M: Optional[int] = None
    # next-fit cursor over the 1/3-sub-bins of bins_L
    next_fit_L: int = 0
    # first L-bin whose 2/3-sub-bin is still empty
    next_large_L: int = 0
    small_total: Fraction = Fraction(0)
    small_into_L: Fraction = Fraction(0)
    opened: int = 0
    steps: int = 0
    trace: Optional[List[TraceEntry]] = None

    @property
    def bins_used(self) -> int:
        return len(self.bins_XL) + len(self.bins_L) + len(self.bins_M) + len(self.bins_S)

    @property
    def all_bins(self) -> List[Bin]:
        return sorted(
            self.bins_XL + self.bins_L + self.bins_M + self.bins_S, key=lambda b: b.bin_id
        )

    def _new_bin(self, category: BinCategory) -> Bin:
        if category is BinCategory.L:
            b = Bin.split_large(self.opened)
        else:
            b = Bin.unit(category, self.opened)
        self.opened += 1
        return b

    def _log(self, item: Item, decision: str, b: Bin) -> None:
        if self.trace is not None:
            self.trace.append(TraceEntry(self.steps, item.size, item.item_class, decision, b.bin_id))


@dataclass
class PackingResult:
    bins_used: int
    bins: List[Bin]
    state: Optional[PackingState] = None
    trace: Optional[List[TraceEntry]] = None


def routes_to_large(state: PackingState, config: PH3Config) -> bool:
    """PH3's routing predicate for the next small item.

    Both totals are taken before the item is placed. r_L = 1 sends every small
    item to L-bins.
    """
    if config.r_L == 1:
        return True
    return state.small_into_L < config.r_L * state.small_total


def ph3_step(state: PackingState, config: PH3Config, item: Item) -> PackingState:
    cls = item.item_class
    if cls is ItemClass.XL:
        b = state._new_bin(BinCategory.XL)
        b.main.add(item)
        b.main.close()
        state.bins_XL.append(b)
        state._log(item, "open-XL", b)

    elif cls is ItemClass.L:
        if state.next_large_L < len(state.bins_L):
            b = state.bins_L[state.next_large_L]
            decision = "large-into-reserved-L"
        else:
            b = state._new_bin(BinCategory.L)
            state.bins_L.append(b)
            decision = "open-L"
        state.next_large_L += 1
        b.main.add(item)
        b.main.close()
        state._log(item, decision, b)

    elif cls is ItemClass.M:
        if state.open_M is not None:
            b = state.bins_M[state.open_M]
            b.main.add(item)
            b.main.close()
            state.open_M = None
            state._log(item, "close-M", b)
        else:
            b = state._new_bin(BinCategory.M)
            b.main.add(item)
            state.bins_M.append(b)
            state.open_M = len(state.bins_M) - 1
            state._log(item, "open-M", b)

    else:
        if routes_to_large(state, config):
            b = _place_small_in_large(state, item)
            state.small_into_L += item.size
            state._log(item, "small-into-L", b)
        else:
            b = _place_small_in_small(state, item)
            state._log(item, "small-into-S", b)
        state.small_total += item.size

    state.steps += 1
    return state


def _place_small_in_large(state: PackingState, item: Item) -> Bin:
    if state.next_fit_L == len(state.bins_L):
        state.bins_L.append(state._new_bin(BinCategory.L))
    b = state.bins_L[state.next_fit_L]
    if not b.small_part.fits(item):
        b.small_part.close()
        state.next_fit_L += 1
        if state.next_fit_L == len(state.bins_L):
            state.bins_L.append(state._new_bin(BinCategory.L))
        b = state.bins_L[state.next_fit_L]
    b.small_part.add(item)
    return b


def _place_small_in_small(state: PackingState, item: Item) -> Bin:
    if state.open_S is not None:
        b = state.bins_S[state.open_S]
        if b.main.fits(item):
            b.main.add(item)
            return b
        b.main.close()
    b = state._new_bin(BinCategory.S)
    b.main.add(item)
    state.bins_S.append(b)
    state.open_S = len(state.bins_S) - 1
    return b


def run_ph3(config: PH3Config, instance: Instance, trace: bool = False) -> PackingResult:
    state = PackingState(trace=[] if trace else None)
    for item in instance.items:
        ph3_step(state, config, item)
    return PackingResult(state.bins_used, state.all_bins, state, state.trace)


class _Recorder:
    def __init__(self, trace: bool):
        self.bins: List[Bin] = []
        self.trace: Optional[List[TraceEntry]] = [] if trace else None

    def open(self, item: Item, index: int) -> Bin:
        b = Bin.unit(BinCategory.GENERIC, len(self.bins))
        b.main.add(item)
        self.bins.append(b)
        self.log(item, index, "open", b)
        return b

    def put(self, b: Bin, item: Item, index: int) -> None:
        b.main.add(item)
        self.log(item, index, "fit", b)

    def log(self, item: Item, index: int, decision: str, b: Bin) -> None:
        if self.trace is not None:
            self.trace.append(TraceEntry(index, item.size, item.item_class, decision, b.bin_id))

    def result(self) -> PackingResult:
        return PackingResult(len(self.bins), self.bins, None, self.trace)


def next_fit(instance: Instance, trace: bool = False) -> PackingResult:
    rec = _Recorder(trace)
    active: Optional[Bin] = None
    for index, item in enumerate(instance.items):
        if active is not None and active.main.fits(item):
            rec.put(active, item, index)
            continue
        if active is not None:
            active.main.close()
        active = rec.open(item, index)
    return rec.result()


class _CapacityTree:
    """Max segment tree over residual capacities; finds the first bin with room."""

    def __init__(self, size: int = 1):
        self.size = 1
        while self.size < size:
            self.size *= 2
        self.tree = [Fraction(-1)] * (2 * self.size)
        self.count = 0

    def _grow(self) -> None:
        leaves = self.tree[self.size:self.size + self.count]
        self.size *= 2
        self.tree = [Fraction(-1)] * (2 * self.size)
        for i, residual in enumerate(leaves):
            self.tree[self.size + i] = residual
        for i in range(self.size - 1, 0, -1):
            self.tree[i] = max(self.tree[2 * i], self.tree[2 * i + 1])

    def append(self, residual: Fraction) -> int:
        if self.count == self.size:
            self._grow()
        index = self.count
        self.count += 1
        self.update(index, residual)
        return index

    def update(self, index: int, residual: Fraction) -> None:
        pos = self.size + index
        self.tree[pos] = residual
        pos //= 2
        while pos:
            self.tree[pos] = max(self.tree[2 * pos], self.tree[2 * pos + 1])
            pos //= 2

    def first_fit(self, size: Fraction) -> Optional[int]:
        if self.tree[1] < size:
            return None
        pos = 1
        while pos < self.size:
            pos = 2 * pos if self.tree[2 * pos] >= size else 2 * pos + 1
        return pos - self.size


def first_fit(instance: Instance, trace: bool = False) -> PackingResult:
    return _first_fit(list(enumerate(instance.items)), trace)


def _first_fit(indexed_items, trace: bool) -> PackingResult:
    rec = _Recorder(trace)
    tree = _CapacityTree(max(1, len(indexed_items) // 2))
    for index, item in indexed_items:
        slot = tree.first_fit(item.size)
        if slot is None:
            b = rec.open(item, index)
            tree.append(1 - item.size)
        else:
            b = rec.bins[slot]
            rec.put(b, item, index)
            tree.update(slot, b.main.capacity - b.main.load)
    return rec.result()


def best_fit(instance: Instance, trace: bool = False) -> PackingResult:
    rec = _Recorder(trace)
    # (residual, bin index), ascending; the first entry with residual >= size is the fullest fit
    residuals: list = []
    for index, item in enumerate(instance.items):
        pos = bisect.bisect_left(residuals, (item.size, -1))
        if pos == len(residuals):
            b = rec.open(item, index)
        else:
            _, slot = residuals.pop(pos)
            b = rec.bins[slot]
            rec.put(b, item, index)
        residual = b.main.capacity - b.main.load
        if residual > 0:
            bisect.insort(residuals, (residual, b.bin_id))
    return rec.result()


def run_ffd(instance: Instance, trace: bool = False) -> PackingResult:
    """First Fit Decreasing; ties in size keep the original arrival order."""
    ordered = sorted(enumerate(instance.items), key=lambda pair: (-pair[1].size, pair[0]))
    return _first_fit(ordered, trace)


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    r_L: Optional[Fraction] = None

    @classmethod
    def ph3(cls, r_L) -> "AlgorithmSpec":
        return cls("ph3", PH3Config(r_L=r_L).r_L)

    @property
    def label(self) -> str:
        if self.name == "ph3":
            return f"ph3:{self.r_L}"
        return self.name

    @property
    def is_online(self) -> bool:
        return self.name != "ffd"


_BASELINES = {"nf": next_fit, "ff": first_fit, "bf": best_fit}


def parse_algorithm(spec: str) -> AlgorithmSpec:
    name, _, arg = spec.strip().lower().partition(":")
    if name == "ph3":
        if not arg:
            raise DomainError("ph3 needs a ratio, e.g. ph3:1/19")
        try:
            return AlgorithmSpec.ph3(arg)
        except ValueError as e:
            raise DomainError(f"bad ph3 ratio {arg!r}: {e}")
    if name in _BASELINES or name == "ffd":
        if arg:
            raise DomainError(f"{name} takes no argument")
        return AlgorithmSpec(name)
    raise DomainError(f"unknown algorithm {spec!r} (expected nf|ff|bf|ffd|ph3:<r_L>)")


def run_online(
    algorithm: Union[AlgorithmSpec, PH3Config], instance: Instance, trace: bool = False
) -> PackingResult:
    if isinstance(algorithm, PH3Config):
        return run_ph3(algorithm, instance, trace)
    if algorithm.name == "ph3":
        return run_ph3(PH3Config(r_L=algorithm.r_L), instance, trace)
    if algorithm.name in _BASELINES:
        return _BASELINES[algorithm.name](instance, trace)
    raise DomainError(f"{algorithm.label} is not an online algorithm")


def pack(algorithm: AlgorithmSpec, instance: Instance, trace: bool = False) -> PackingResult:
    if algorithm.name == "ffd":
        return run_ffd(instance, trace)
    return run_online(algorithm, instance, trace)


TRACE_COLUMNS = ["item_index", "size", "class", "decision", "bin_id"]


def write_trace_csv(trace: List[TraceEntry], out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for entry in trace:
        writer.writerow(
            [entry.item_index, str(entry.size), entry.item_class.value, entry.decision, entry.bin_id]
        )
