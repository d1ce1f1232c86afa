"""k-copy PH3: online bin packing with parallel copies, ratio analysis and cover planning."""
from .domain import DomainError, Instance, Item, ItemClass, classify, load_instance, parse_instance
from .packers import PH3Config, pack, parse_algorithm, run_ph3
from .planner import CoverPlan, best_ratio, plan_cover, run_kcopy
from .ratio import opt_bounds, r_star, theorem1_bound

__all__ = [
    "CoverPlan",
    "DomainError",
    "Instance",
    "Item",
    "ItemClass",
    "PH3Config",
    "best_ratio",
    "classify",
    "load_instance",
    "opt_bounds",
    "pack",
    "parse_algorithm",
    "parse_instance",
    "plan_cover",
    "r_star",
    "run_kcopy",
    "run_ph3",
    "theorem1_bound",
]
