from pydantic import BaseModel, ConfigDict, Field, PlainSerializer, PlainValidator, model_validator
from datetime import datetime
from fractions import Fraction
from typing import Annotated, List, Optional, Tuple

from .domain import DomainError, ONE_THIRD, ceil_fraction, parse_rational


def _unit_ratio(value) -> Fraction:
    r = parse_rational(value)
    if r < 0 or r > 1:
        raise DomainError(f"{r} is outside [0, 1]")
    return r


# Exact rationals travel as "p/q" strings in JSON and CSV
Ratio = Annotated[Fraction, PlainValidator(parse_rational), PlainSerializer(str, return_type=str)]
UnitRatio = Annotated[Fraction, PlainValidator(_unit_ratio), PlainSerializer(str, return_type=str)]


class AdversaryParams(BaseModel):
    """Parameters of one tightness instance; epsilon and the block counts are derived."""
    model_config = ConfigDict(frozen=True)

    N: int = Field(ge=1)
    r_L: UnitRatio
    r_L_star: UnitRatio

    @property
    def epsilon(self) -> Fraction:
        return Fraction(1, 12 * self.N + 2)

    @property
    def delta(self) -> Fraction:
        return self.r_L - self.r_L_star

    @property
    def n_L(self) -> int:
        return ceil_fraction(4 * self.r_L_star * self.N)

    @property
    def n_M(self) -> int:
        if self.r_L_star <= ONE_THIRD:
            return 0
        return int((6 * self.r_L_star - 2) * self.N)

    @property
    def n_SS(self) -> int:
        return ceil_fraction((1 - self.r_L) * self.N)

    @property
    def n_SL(self) -> int:
        return ceil_fraction(4 * self.r_L * self.N)


class PredictedCounts(BaseModel):
    ph3_lower: Ratio
    ffd_upper: Ratio
    ffd_bound_applies: bool = True

    @property
    def ratio(self) -> Fraction:
        return self.ph3_lower / self.ffd_upper


class AdversarySidecar(BaseModel):
    params: AdversaryParams
    epsilon: Ratio
    n_L: int
    n_M: int
    n_SS: int
    n_SL: int
    predicted: PredictedCounts
    realized_r_star: Ratio
    instance_path: str


DEFAULT_GRID_VALUES = (Fraction(0), Fraction(1, 19), Fraction(1, 3), Fraction(1, 2), Fraction(1))


class VerifyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    grid: Optional[List[Tuple[UnitRatio, UnitRatio]]] = None
    n_values: List[Annotated[int, Field(ge=1)]] = Field(default_factory=lambda: [50, 200, 500])
    tolerance_pct: Ratio = Fraction(3)
    plan_R: Ratio = Fraction("1.5815")
    plan_widen: UnitRatio = Fraction(0)
    ratio_min_n: int = Field(default=500, ge=1)
    fuzz_instances: int = Field(default=0, ge=0)
    fuzz_max_items: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _non_negative_tolerance(self):
        if self.tolerance_pct < 0:
            raise ValueError("tolerance_pct must be non-negative")
        return self

    def effective_grid(self) -> List[Tuple[Fraction, Fraction]]:
        if self.grid is not None:
            return list(self.grid)
        return [(r_L, r) for r_L in DEFAULT_GRID_VALUES for r in DEFAULT_GRID_VALUES]


class RunReport(BaseModel):
    label: str
    algorithm: str
    bins_used: int = Field(ge=0)
    opt_lb: int = Field(ge=0)
    ffd_ub: int = Field(ge=0)
    ratio_low: Optional[Ratio] = None   # unset on empty instances
    ratio_high: Optional[Ratio] = None
    wall_time: Optional[float] = None

    @model_validator(mode="after")
    def _bracket_ordered(self):
        if self.ratio_low is not None and self.ratio_high is not None:
            if self.ratio_low > self.ratio_high:
                raise ValueError("ratio bracket is not ordered")
        return self


class RunRecordOut(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    label: str
    algorithm: str
    bins_used: int
    opt_lb: int
    ffd_ub: int
    ratio_low: Optional[str]
    ratio_high: Optional[str]
    wall_time: Optional[float]
    recorded_at: datetime


class PaginatedRuns(BaseModel):
    items: List[RunRecordOut]
    total: int
    limit: int
    offset: int
