"""
Tightness instances for PH3.

The small part of the instance interleaves two block streams: SL blocks
(1/6 - e, 3e) and SS blocks (1/3 - 2e, 1/6 - e, 1/6 - e, 12e). A shadow PH3
run with the attacked r_L decides, before every small item, which stream
feeds it: when PH3 would route the next small item into an L-bin, the item
comes from SL. Medium items 1/3 + e/2 and large items 1/2 + e/2 follow.
"""
from __future__ import annotations

import logging
from collections import deque
from fractions import Fraction
from pathlib import Path
from typing import Optional, Tuple, Union

from .domain import Instance, Item, format_instance
from .packers import PackingState, PH3Config, ph3_step, routes_to_large
from .ratio import r_star
from .schemas import AdversaryParams, AdversarySidecar, PredictedCounts

logger = logging.getLogger(__name__)


def _blocks(pattern, times: int) -> deque:
    return deque(Item(size) for _ in range(times) for size in pattern)


def generate(
    params: AdversaryParams,
    target_interval: Optional[Tuple[Fraction, Fraction]] = None,
) -> Instance:
    eps = params.epsilon
    sixth = Fraction(1, 6)
    large_stream = _blocks((sixth - eps, 3 * eps), params.n_SL)
    small_stream = _blocks((Fraction(1, 3) - 2 * eps, sixth - eps, sixth - eps, 12 * eps), params.n_SS)

    config = PH3Config(r_L=params.r_L)
    shadow = PackingState()
    items = []
    while large_stream or small_stream:
        if large_stream and (not small_stream or routes_to_large(shadow, config)):
            item = large_stream.popleft()
        else:
            item = small_stream.popleft()
        ph3_step(shadow, config, item)
        items.append(item)

    items.extend(Item(Fraction(1, 3) + eps / 2) for _ in range(params.n_M))
    items.extend(Item(Fraction(1, 2) + eps / 2) for _ in range(params.n_L))

    label = f"adversary N={params.N} r_L={params.r_L} r_L*={params.r_L_star}"
    instance = Instance(items, label)

    if target_interval is not None:
        realized = r_star(instance)
        lo, hi = target_interval
        if not lo <= realized <= hi:
            logger.warning(
                f"Realized r_L*={float(realized):.6f} falls outside the target interval "
                f"[{float(lo):.6f}, {float(hi):.6f}] for N={params.N}"
            )
    return instance


def predicted_counts(params: AdversaryParams) -> PredictedCounts:
    """Closed-form lower bound on PH3's bins and upper bound on FFD's bins for this instance."""
    N, r, delta = params.N, params.r_L_star, params.delta
    ph3 = 3 * r * N + max(delta, Fraction(0)) * 4 * N + Fraction(params.n_M, 2) + N - delta * N
    ffd = ((12 * r + 4) * N + 2 * params.n_M + 20) / Fraction(6)
    return PredictedCounts(ph3_lower=ph3, ffd_upper=ffd, ffd_bound_applies=ffd_bound_applies(params))


def ffd_bound_applies(params: AdversaryParams) -> bool:
    """Whether there are enough 1/6 - e items to fill the gaps FFD leaves beside large items.

    Bins with a large and a medium item take one of them; bins with a lone
    large item take (1/3 - 2e, 1/6 - e) or three of them. With fewer, those
    gaps stay empty and the closed-form FFD bound no longer holds.
    """
    lone_large = max(params.n_L - params.n_M, 0)
    paired = min(params.n_SS, lone_large)
    demand = min(params.n_M, params.n_L) + paired + 3 * (lone_large - paired)
    supply = params.n_SL + 2 * params.n_SS
    return supply >= demand


def sidecar_path(path: Union[str, Path]) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".meta.jsonl")


def write_adversary(
    params: AdversaryParams,
    path: Union[str, Path],
    target_interval: Optional[Tuple[Fraction, Fraction]] = None,
) -> Tuple[Path, Path]:
    path = Path(path)
    instance = generate(params, target_interval)
    path.write_text(format_instance(instance), encoding="utf-8")

    meta = AdversarySidecar(
        params=params,
        epsilon=params.epsilon,
        n_L=params.n_L,
        n_M=params.n_M,
        n_SS=params.n_SS,
        n_SL=params.n_SL,
        predicted=predicted_counts(params),
        realized_r_star=r_star(instance),
        instance_path=str(path),
    )
    meta_path = sidecar_path(path)
    meta_path.write_text(meta.model_dump_json() + "\n", encoding="utf-8")
    logger.info(f"Wrote {len(instance)} items to {path} (sidecar {meta_path})")
    return path, meta_path
