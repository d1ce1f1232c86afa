"""
Exact-arithmetic domain types shared by the packers, the analysis and the planner.

All sizes are `fractions.Fraction`; nothing in classification or packing ever
goes through floating point.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, List, Tuple, Union

logger = logging.getLogger(__name__)

ONE_THIRD = Fraction(1, 3)
ONE_HALF = Fraction(1, 2)
TWO_THIRDS = Fraction(2, 3)

RationalLike = Union[Fraction, int, str, float]


class DomainError(ValueError):
    """A value lies outside the domain an operation is defined on."""


class InstanceParseError(DomainError):
    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def parse_rational(value: RationalLike) -> Fraction:
    """Convert "p/q", decimal literals, ints and floats to an exact Fraction.

    Decimal strings are converted exactly ("0.25" -> 1/4). Floats go through
    their shortest repr so 1e-7 becomes 1/10000000 rather than the binary
    approximation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    if not isinstance(value, str):
        raise DomainError(f"not a rational: {value!r}")
    text = value.strip()
    try:
        result = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise DomainError(f"not a rational: {value!r}")
    return result


class ItemClass(enum.Enum):
    S = "S"
    M = "M"
    L = "L"
    XL = "XL"

    @property
    def rank(self) -> int:
        return _CLASS_ORDER[self]


_CLASS_ORDER = {ItemClass.S: 0, ItemClass.M: 1, ItemClass.L: 2, ItemClass.XL: 3}


def classify(size: Fraction) -> ItemClass:
    # S = [0, 1/3], M = (1/3, 1/2], L = (1/2, 2/3), XL = [2/3, 1]
    if size <= 0 or size > 1:
        raise DomainError(f"item size {size} outside (0, 1]")
    if size <= ONE_THIRD:
        return ItemClass.S
    if size <= ONE_HALF:
        return ItemClass.M
    if size < TWO_THIRDS:
        return ItemClass.L
    return ItemClass.XL


@dataclass(frozen=True)
class Item:
    size: Fraction
    item_class: ItemClass = field(init=False, compare=False)

    def __post_init__(self):
        size = parse_rational(self.size)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "item_class", classify(size))

    @property
    def is_small(self) -> bool:
        return self.item_class is ItemClass.S


def size_of(items: Iterable[Item]) -> Fraction:
    return sum((item.size for item in items), Fraction(0))


def ceil_fraction(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


class SubBinStatus(enum.Enum):
    OPEN = "open"
    CLOSED = "closed"


@dataclass
class SubBin:
    capacity: Fraction
    contents: List[Item] = field(default_factory=list)
    status: SubBinStatus = SubBinStatus.OPEN
    load: Fraction = Fraction(0)

    def fits(self, item: Item) -> bool:
        return self.load + item.size <= self.capacity

    def add(self, item: Item) -> None:
        if not self.fits(item):
            raise DomainError(
                f"item {item.size} does not fit sub-bin with load {self.load}/{self.capacity}"
            )
        self.contents.append(item)
        self.load += item.size

    def close(self) -> None:
        self.status = SubBinStatus.CLOSED

    @property
    def is_empty(self) -> bool:
        return not self.contents


class BinCategory(enum.Enum):
    XL = "XL-bin"
    L = "L-bin"
    M = "M-bin"
    S = "S-bin"
    GENERIC = "generic"


@dataclass
class Bin:
    category: BinCategory
    sub_bins: List[SubBin]
    bin_id: int = 0

    @classmethod
    def unit(cls, category: BinCategory = BinCategory.GENERIC, bin_id: int = 0) -> "Bin":
        return cls(category, [SubBin(Fraction(1))], bin_id)

    @classmethod
    def split_large(cls, bin_id: int = 0) -> "Bin":
        """An L-bin: a 2/3-sub-bin for the large item and a 1/3-sub-bin for small items."""
        return cls(BinCategory.L, [SubBin(TWO_THIRDS), SubBin(ONE_THIRD)], bin_id)

    @property
    def main(self) -> SubBin:
        return self.sub_bins[0]

    @property
    def small_part(self) -> SubBin:
        if self.category is not BinCategory.L:
            raise DomainError(f"{self.category.value} has no 1/3-sub-bin")
        return self.sub_bins[1]

    @property
    def load(self) -> Fraction:
        return sum((sub.load for sub in self.sub_bins), Fraction(0))

    @property
    def items(self) -> List[Item]:
        return [item for sub in self.sub_bins for item in sub.contents]

    @property
    def capacity(self) -> Fraction:
        return sum((sub.capacity for sub in self.sub_bins), Fraction(0))


@dataclass(frozen=True)
class Instance:
    items: Tuple[Item, ...] = ()
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))

    @classmethod
    def from_sizes(cls, sizes: Iterable[RationalLike], label: str = "") -> "Instance":
        return cls([Item(parse_rational(s)) for s in sizes], label)

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def of_class(self, item_class: ItemClass) -> List[Item]:
        return [item for item in self.items if item.item_class is item_class]

    def count(self, item_class: ItemClass) -> int:
        return sum(1 for item in self.items if item.item_class is item_class)

    @property
    def total_size(self) -> Fraction:
        return size_of(self.items)


def parse_instance(text: Union[bytes, str], label: str = "") -> Instance:
    """Parse the instance format: one size per line, '#' comments, blank lines ignored."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise InstanceParseError(0, f"not UTF-8 ({e})")
    items = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            size = parse_rational(line)
        except DomainError:
            raise InstanceParseError(line_no, f"cannot parse size {line!r}")
        if size <= 0 or size > 1:
            raise InstanceParseError(line_no, f"size {line} outside (0, 1]")
        items.append(Item(size))
    return Instance(items, label)


def load_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    instance = parse_instance(path.read_bytes(), label=path.stem)
    logger.debug(f"Loaded {len(instance)} items from {path}")
    return instance


def format_instance(instance: Instance) -> str:
    lines = []
    if instance.label:
        lines.append(f"# {instance.label}")
    lines.extend(str(item.size) for item in instance.items)
    return "\n".join(lines) + "\n"
