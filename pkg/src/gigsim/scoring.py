"""Client-side scoring of bids and stochastic reranking.

A bid is scored by aggregating the bidder's task reputation with its price
relative to the posted budget, then squashed to (0, 1). Ranking candidates
by score plus scaled Gumbel noise samples a softmax ordering; at zero
temperature the ranking is the exact descending sort.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .rng import RngStream

COBB_DOUGLAS = "cobb_douglas"
CES = "ces"

Numeric = int | float | Fraction


@dataclass(frozen=True)
class ScoreParams:
    """Market-wide scoring knobs.

    reputation_weight is the weight on reputation; the price weight is its
    complement, so the two always sum to one. ces_rho = 0 makes the CES
    variant fall back to Cobb-Douglas (its limiting case).
    """

    reputation_weight: float = 0.5
    ces_rho: float = 1.0
    price_elasticity: float = 1.0
    gumbel_temperature: float = 0.0
    variant: str = COBB_DOUGLAS

    @property
    def price_weight(self) -> float:
        return 1.0 - self.reputation_weight

    def validate(self) -> None:
        if not 0.0 < self.reputation_weight < 1.0:
            raise ValueError("reputation_weight must lie strictly between 0 and 1")
        if self.price_elasticity <= 0.0:
            raise ValueError("price_elasticity must be positive")
        if self.gumbel_temperature < 0.0:
            raise ValueError("gumbel_temperature must be nonnegative")
        if self.variant not in (COBB_DOUGLAS, CES):
            raise ValueError(f"unknown score variant: {self.variant!r}")


def _price_ratio(price: Numeric, budget: Numeric) -> float:
    if price <= 0:
        raise ValueError("price must be positive")
    if budget <= 0:
        raise ValueError("budget must be positive")
    if isinstance(price, Fraction) or isinstance(budget, Fraction):
        return float(Fraction(price) / Fraction(budget))
    return float(price) / float(budget)


def _check_reputation(reputation: float) -> None:
    if not 0.0 <= reputation <= 1.0:
        raise ValueError("reputation must lie in [0, 1]")


def cobb_douglas_score(
    reputation: float, price: Numeric, budget: Numeric, params: ScoreParams
) -> float:
    """Score = U / (1 + U) with U = q^w * (price/budget)^-(1-w).

    Zero reputation annihilates the product.
    """
    ratio = _price_ratio(price, budget)
    _check_reputation(reputation)
    if reputation == 0.0:
        return 0.0
    utility = reputation**params.reputation_weight * ratio ** (-params.price_weight)
    return utility / (1.0 + utility)


def ces_score(reputation: float, price: Numeric, budget: Numeric, params: ScoreParams) -> float:
    """CES aggregate of reputation and price attractiveness.

    The price term is (price/budget)^-elasticity; rho = 0 dispatches to the
    Cobb-Douglas special case.
    """
    ratio = _price_ratio(price, budget)
    _check_reputation(reputation)
    rho = params.ces_rho
    if rho == 0.0:
        return cobb_douglas_score(reputation, price, budget, params)
    if reputation == 0.0 and rho < 0.0:
        return 0.0  # limit of the aggregate as reputation -> 0
    w = params.reputation_weight
    price_term = ratio ** (-params.price_elasticity)
    utility = (w * reputation**rho + (1.0 - w) * price_term**rho) ** (1.0 / rho)
    return utility / (1.0 + utility)


def score(reputation: float, price: Numeric, budget: Numeric, params: ScoreParams) -> float:
    if params.variant == CES:
        return ces_score(reputation, price, budget, params)
    return cobb_douglas_score(reputation, price, budget, params)


def gumbel_rerank(
    scored: Sequence[tuple[str, float]],
    temperature: float,
    rng: RngStream | None = None,
) -> list[str]:
    """Rank candidate ids by score, optionally perturbed by Gumbel noise.

    temperature = 0 sorts by score descending with lexicographic id
    tie-break. Otherwise candidates are ranked by log(score)/temperature
    plus an i.i.d. Gumbel(0, 1) draw; zero-score candidates cannot enter
    the log and are appended last, in id order.

    Noise draws are consumed in candidate id order, one per positive-score
    candidate, so the stream layout is reproducible.
    """
    ordered = sorted(scored, key=lambda cs: cs[0])
    if temperature == 0.0:
        return [cid for cid, _ in sorted(ordered, key=lambda cs: (-cs[1], cs[0]))]
    if rng is None:
        raise ValueError("positive temperature requires an rng stream")
    keyed: list[tuple[float, str]] = []
    excluded: list[str] = []
    for cid, s in ordered:
        if s <= 0.0:
            excluded.append(cid)
            continue
        keyed.append((math.log(s) / temperature + rng.gumbel(), cid))
    keyed.sort(key=lambda kc: (-kc[0], kc[1]))
    return [cid for _, cid in keyed] + excluded
