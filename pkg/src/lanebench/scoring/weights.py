"""Rank-sensitive weighting shared by the ranking and multi-object rubrics.

For n ground-truth objects and importance ratio R > 1, the positional weight of
rank i (1-based) is  p_i = n*R/(R-1) - i,  strictly positive and strictly
decreasing. An object flagged special (role or dangerous) multiplies its
positional weight by the special base weight. Hallucinated extras are charged
p_n / extra_ratio each, which always lands strictly between 0 and min(p).
"""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ScoreWeights:
    importance_ratio: float = 5.0   # R, must be > 1
    extra_ratio: float = 2.0        # divisor for the extra-object penalty weight
    special_base: float = 3.0       # base weight for role/dangerous objects
    plain_base: float = 1.0

    def __post_init__(self) -> None:
        if self.importance_ratio <= 1.0:
            raise ValueError("importance_ratio must be > 1")
        if self.extra_ratio <= 0.0:
            raise ValueError("extra_ratio must be > 0")


def position_weights(n: int, weights: ScoreWeights) -> list[float]:
    r = weights.importance_ratio
    return [n * r / (r - 1.0) - i for i in range(1, n + 1)]


def extra_penalty_weight(n: int, weights: ScoreWeights) -> float:
    if n <= 0:
        return weights.plain_base / weights.extra_ratio
    return position_weights(n, weights)[-1] / weights.extra_ratio


def importance_weights(gt: list[tuple[str, bool]], weights: ScoreWeights) -> list[float]:
    """Per-object weights for (object_id, is_special) in ground-truth order."""
    pos = position_weights(len(gt), weights)
    return [
        p * (weights.special_base if special else weights.plain_base)
        for p, (_, special) in zip(pos, gt)
    ]
