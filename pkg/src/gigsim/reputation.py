"""Public reputation: discounted Beta evidence with a community base rate.

Each (agent, task) pair carries a positive mass r and a negative mass s.
Both decay by the forgetting factor once per round; a completed job with
quality y adds y to r and (1-y) to s. The displayed score shrinks the
evidence toward the task's community base rate a with prior strength W:

    R = (r + W*a) / (r + s + W)

so an unknown agent starts at the community average and converges to its
own discounted track record as evidence accumulates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class ReputationParams:
    forgetting: float = 0.85
    prior_strength: float = 1.0
    window: int = 10
    initial_base_rate: float = 0.5

    def validate(self) -> None:
        if not 0.0 <= self.forgetting <= 1.0:
            raise ValueError("forgetting must lie in [0, 1]")
        if self.prior_strength < 0:
            raise ValueError("prior_strength must be nonnegative")
        if self.window < 1:
            raise ValueError("window must be at least 1")
        if not 0.0 <= self.initial_base_rate <= 1.0:
            raise ValueError("initial_base_rate must lie in [0, 1]")


def update_evidence(
    r: float, s: float, forgetting: float, completed: bool, quality: float = 0.0
) -> tuple[float, float]:
    """One round of evidence decay, plus the round's completion if any."""
    if completed:
        return forgetting * r + quality, forgetting * s + (1.0 - quality)
    return forgetting * r, forgetting * s


def fold_evidence(
    r: float, s: float, forgetting: float, qualities: Iterable[float]
) -> tuple[float, float]:
    """Decay once, then absorb every completion of the round in order.

    Several jobs on the same task within one round share a single decay
    step; the recursion is indexed by round, not by completion events.
    """
    r, s = forgetting * r, forgetting * s
    for quality in qualities:
        r += quality
        s += 1.0 - quality
    return r, s


def community_base_rate(window: Sequence[float], initial: float) -> float:
    """Mean of the recent cross-agent performances; prior when empty."""
    if not window:
        return initial
    return math.fsum(window) / len(window)


def reputation(r: float, s: float, prior_strength: float, base_rate: float) -> float:
    """Shrinkage posterior mean in [0, 1].

    With no prior mass and no evidence the ratio is 0/0; the limit along
    vanishing evidence is the base rate, so that is the defined value.
    """
    denom = r + s + prior_strength
    if denom == 0.0:
        return base_rate
    return (r + prior_strength * base_rate) / denom


def to_stars(score: float) -> float:
    """Display rating on a 0-5 scale, one decimal, halves rounding up.

    Works in decimal digits (via the float's shortest repr) so boundary
    cases like 0.97 -> 4.85 -> 4.9 do not fall to binary representation
    error.
    """
    from decimal import ROUND_HALF_UP, Decimal

    scaled = Decimal(repr(score)) * 5
    return float(scaled.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


def format_stars(score: float) -> str:
    """Star text as shown to agents, e.g. '4.7*'."""
    return f"{to_stars(score):.1f}*"
