from __future__ import annotations

from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gigsim.rng import RngBank
from gigsim.scoring import (
    CES,
    COBB_DOUGLAS,
    ScoreParams,
    ces_score,
    cobb_douglas_score,
    gumbel_rerank,
    score,
)

CD = ScoreParams()
CES_UNIT = ScoreParams(variant=CES, ces_rho=1.0, price_elasticity=1.0)


def test_cobb_douglas_reference_point():
    # q = 0.8 at par pricing: U = sqrt(0.8), S = U / (1 + U).
    got = cobb_douglas_score(0.8, 10, 10, CD)
    u = mpmath.mpf(0.8) ** mpmath.mpf(0.5)
    want = u / (1 + u)
    assert abs(got - float(want)) < 1e-12
    assert abs(got - 0.4721) < 5e-5


def test_ces_reference_point():
    # rho = 1 is the arithmetic mean: U = 0.5*0.8 + 0.5*(10/8) = 1.025.
    got = ces_score(0.8, 8, 10, CES_UNIT)
    assert abs(got - 1.025 / 2.025) < 1e-12
    assert abs(got - 0.50617) < 5e-6


def test_ces_rho_zero_is_cobb_douglas():
    params = ScoreParams(variant=CES, ces_rho=0.0)
    assert ces_score(0.7, 9, 10, params) == cobb_douglas_score(0.7, 9, 10, CD)


def test_ces_limit_approaches_cobb_douglas():
    near_zero = ScoreParams(variant=CES, ces_rho=1e-6)
    worst = 0.0
    for q in (0.1, 0.25, 0.5, 0.8, 1.0):
        for ratio in (0.5, 0.8, 1.0, 1.25, 2.0):
            gap = abs(ces_score(q, ratio, 1, near_zero) - cobb_douglas_score(q, ratio, 1, CD))
            worst = max(worst, gap)
    assert worst < 1e-4


def test_zero_reputation_scores_zero():
    assert cobb_douglas_score(0.0, 5, 10, CD) == 0.0
    assert ces_score(0.0, 5, 10, ScoreParams(variant=CES, ces_rho=-2.0)) == 0.0


def test_variant_dispatch():
    assert score(0.8, 8, 10, CES_UNIT) == ces_score(0.8, 8, 10, CES_UNIT)
    assert score(0.8, 8, 10, CD) == cobb_douglas_score(0.8, 8, 10, CD)
    assert CD.variant == COBB_DOUGLAS


@pytest.mark.parametrize("bad", [(-0.1, 5, 10), (1.1, 5, 10), (0.5, 0, 10), (0.5, 5, 0), (0.5, -1, 10), (0.5, 5, -1)])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        cobb_douglas_score(*bad, CD)
    with pytest.raises(ValueError):
        ces_score(*bad, CES_UNIT)


def test_params_validate():
    with pytest.raises(ValueError):
        ScoreParams(reputation_weight=0.0).validate()
    with pytest.raises(ValueError):
        ScoreParams(price_elasticity=0.0).validate()
    with pytest.raises(ValueError):
        ScoreParams(gumbel_temperature=-1.0).validate()
    with pytest.raises(ValueError):
        ScoreParams(variant="nested_logit").validate()
    ScoreParams().validate()


reputations = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
cents = st.integers(min_value=1, max_value=10000).map(lambda c: Fraction(c, 100))


@given(q=reputations, price=cents, budget=cents)
def test_score_stays_in_unit_interval(q, price, budget):
    for params in (CD, CES_UNIT):
        s = score(q, price, budget, params)
        assert 0.0 <= s < 1.0


@given(q=st.floats(min_value=0.01, max_value=1.0), price=cents, budget=cents, k=st.integers(min_value=2, max_value=9))
def test_score_is_scale_invariant(q, price, budget, k):
    for params in (CD, CES_UNIT):
        assert score(q, price * k, budget * k, params) == score(q, price, budget, params)


@given(lo=reputations, hi=reputations, price=cents, budget=cents)
def test_score_monotone_in_reputation(lo, hi, price, budget):
    if lo > hi:
        lo, hi = hi, lo
    for params in (CD, CES_UNIT):
        assert score(lo, price, budget, params) <= score(hi, price, budget, params)


@given(q=st.floats(min_value=0.01, max_value=1.0), p_lo=cents, p_hi=cents, budget=cents)
def test_score_monotone_in_price(q, p_lo, p_hi, budget):
    if p_lo > p_hi:
        p_lo, p_hi = p_hi, p_lo
    for params in (CD, CES_UNIT):
        assert score(q, p_hi, budget, params) <= score(q, p_lo, budget, params)


def test_rerank_zero_temperature_sorts_descending():
    scored = [("c", 0.2), ("a", 0.9), ("b", 0.9), ("d", 0.0)]
    assert gumbel_rerank(scored, 0.0) == ["a", "b", "c", "d"]


def test_rerank_zero_scores_trail_in_id_order():
    bank = RngBank(seed=0)
    scored = [("z", 0.0), ("m", 0.5), ("a", 0.0)]
    ranking = gumbel_rerank(scored, 1.0, bank.stream(0, "gumbel"))
    assert ranking == ["m", "a", "z"]


def test_rerank_requires_rng_when_noisy():
    with pytest.raises(ValueError):
        gumbel_rerank([("a", 0.5)], 1.0)


def test_rerank_input_order_is_immaterial():
    scored = [("a", 0.9), ("b", 0.5), ("c", 0.2)]
    first = gumbel_rerank(scored, 1.0, RngBank(seed=5).stream(0, "gumbel"))
    second = gumbel_rerank(list(reversed(scored)), 1.0, RngBank(seed=5).stream(0, "gumbel"))
    assert first == second


def test_rerank_equal_scores_split_evenly():
    """At equal scores the noisy ranking is a fair coin between the pair."""
    bank = RngBank(seed=123)
    wins = 0
    trials = 10_000
    for i in range(trials):
        ranking = gumbel_rerank([("a", 0.5), ("b", 0.5)], 1.0, bank.stream(i, "gumbel"))
        wins += ranking[0] == "a"
    assert abs(wins / trials - 0.5) < 0.02


def test_rerank_temperature_orders_softness():
    """Low temperature follows scores almost surely; high temperature mixes."""
    scored = [("best", 0.9), ("worst", 0.3)]
    trials = 2_000

    def upset_rate(temperature: float, purpose_seed: int) -> float:
        bank = RngBank(seed=purpose_seed)
        upsets = 0
        for i in range(trials):
            ranking = gumbel_rerank(scored, temperature, bank.stream(i, "gumbel"))
            upsets += ranking[0] == "worst"
        return upsets / trials

    assert upset_rate(0.05, 7) < 0.01
    assert 0.05 < upset_rate(5.0, 8) < 0.5
