"""Agent- and market-level metrics over persisted trace records.

Every function here consumes the canonical round records (plus the final
record for end-of-run skill vectors), never live engine state, so
recomputing metrics from a trace file reproduces the in-run values
exactly.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .money import Money, format_money, parse_money

DEFAULT_PERIOD = 10


@dataclass(frozen=True)
class AgentSummary:
    agent_id: str
    kind: str
    reward: Money
    market_share: float
    avg_rank: float
    final_rank: int
    win_rate: float
    win_priority: float | None
    recovery: int
    rank_jump: int
    rank_jump_defined: bool
    top_base_price: float | None
    avg_base_price: float | None
    all_bids_norm: float | None
    winning_bids_norm: float | None
    train_pct: float
    train_targets: float | None
    specialization: float | None
    rep_avg_stars: float
    rep_max_stars: float


@dataclass(frozen=True)
class RoundRates:
    round: int
    unemployment: float | None
    vacancy: float | None
    availability: float
    avg_winning_bid: float | None
    output: float
    payout_total: Money
    client_utility: Money


def _wins_of(record: Mapping, agent: str) -> list[str]:
    return [job for job, winner in record["assignment"].items() if winner == agent]


def _accepted_bids(record: Mapping, agent: str) -> list[tuple[str, Money]]:
    action = record["actions"][agent]
    if action["intent"] != "BID":
        return []
    return [(job, parse_money(price)) for job, price in action["accepted"]]


def win_rate(records: Sequence[Mapping], agent: str, capacity: int) -> float:
    """Percent of possible wins taken, averaged over rounds (0/0 = 0)."""
    if not records:
        return 0.0
    total = 0.0
    for record in records:
        bids = len(_accepted_bids(record, agent))
        if bids == 0:
            continue
        total += len(_wins_of(record, agent)) / min(capacity, bids)
    return 100.0 * total / len(records)


def rank_series(records: Sequence[Mapping]) -> dict[str, list[int]]:
    """Per-agent rank (1 = best) by cumulative reward after each round.

    Ties break by agent id, so ranks are always a permutation of 1..m.
    """
    agents = sorted(records[0]["rewards"]) if records else []
    cumulative = {agent: Fraction(0) for agent in agents}
    series: dict[str, list[int]] = {agent: [] for agent in agents}
    for record in records:
        for agent in agents:
            cumulative[agent] += parse_money(record["rewards"][agent])
        board = sorted(agents, key=lambda a: (-cumulative[a], a))
        for position, agent in enumerate(board):
            series[agent].append(position + 1)
    return series


def recovery(series: Sequence[int]) -> int:
    """Improvement from the worst observed rank to the final rank."""
    if not series:
        raise ValueError("rank series must be nonempty")
    return max(series) - series[-1]


def rank_jump(series: Sequence[int], period: int = DEFAULT_PERIOD) -> tuple[int, bool]:
    """Best period-over-period rank improvement.

    Returns (value, defined); shorter-than-two-period series report
    (0, False) rather than failing.
    """
    ends = [series[p * period - 1] for p in range(1, len(series) // period + 1)]
    if len(ends) < 2:
        return 0, False
    return max(ends[i - 1] - ends[i] for i in range(1, len(ends))), True


def specialization(skills: Mapping[str, float]) -> float | None:
    """1 - H(normalized skills)/log K; None when all skills are zero."""
    if len(skills) < 2:
        raise ValueError("specialization needs at least two task types")
    total = math.fsum(skills.values())
    if total == 0.0:
        return None
    entropy = 0.0
    for value in skills.values():
        p = value / total
        if p > 0.0:
            entropy -= p * math.log(p)
    return 1.0 - entropy / math.log(len(skills))


def gini(shares: Sequence[float]) -> float:
    """Mean absolute difference over twice the mean; 0 for no activity."""
    n = len(shares)
    if n == 0:
        return 0.0
    if any(s < 0 for s in shares):
        raise ValueError("shares must be nonnegative")
    mean = math.fsum(shares) / n
    if mean == 0.0:
        return 0.0
    mad = math.fsum(abs(a - b) for a in shares for b in shares) / (n * n)
    return mad / (2.0 * mean)


def market_rates(record: Mapping) -> RoundRates:
    """The round's labor-market rates; undefined denominators yield None."""
    agents = sorted(record["rewards"])
    bidders = [a for a in agents if _accepted_bids(record, a)]
    matched = {winner for winner in record["assignment"].values() if winner is not None}
    unemployed = [a for a in bidders if a not in matched]
    listed = len(record["listings"])
    unfilled = sum(1 for winner in record["assignment"].values() if winner is None)
    budgets = {ln["job"]: parse_money(ln["budget"]) for ln in record["listings"]}
    ratios = [
        parse_money(record["prices"][job]) / budgets[job]
        for job, winner in record["assignment"].items()
        if winner is not None
    ]
    output = math.fsum(record["performances"].values())
    payout_total = sum(
        (parse_money(p) for p in record["payouts"].values()), Fraction(0)
    )
    return RoundRates(
        round=record["round"],
        unemployment=len(unemployed) / len(bidders) if bidders else None,
        vacancy=unfilled / listed if listed else None,
        availability=len(bidders) / len(agents) if agents else 0.0,
        avg_winning_bid=float(sum(ratios) / len(ratios)) if ratios else None,
        output=output,
        payout_total=payout_total,
        client_utility=client_utility(record),
    )


def client_utility(record: Mapping) -> Money:
    """Sum over matched jobs of budget*performance minus the amount paid."""
    budgets = {ln["job"]: parse_money(ln["budget"]) for ln in record["listings"]}
    total = Fraction(0)
    for job, winner in record["assignment"].items():
        if winner is None:
            continue
        value = budgets[job] * Fraction(record["performances"][job])
        total += value - parse_money(record["payouts"][job])
    return total


def market_shares(rewards: Mapping[str, Money]) -> tuple[dict[str, float], bool]:
    """Percent of total rewards per agent; (zeros, False) when nothing was
    ever paid out."""
    total = sum(rewards.values(), Fraction(0))
    if total == 0:
        return {agent: 0.0 for agent in rewards}, False
    return {agent: float(100 * value / total) for agent, value in rewards.items()}, True


def market_series(records: Sequence[Mapping]) -> list[RoundRates]:
    return [market_rates(record) for record in records]


def agent_summaries(
    records: Sequence[Mapping],
    final_skills: Mapping[str, Mapping[str, float]],
    kinds: Mapping[str, str],
    capacity: int,
    period: int = DEFAULT_PERIOD,
) -> list[AgentSummary]:
    """Full per-agent summary table for one run, in agent id order."""
    agents = sorted(records[0]["rewards"]) if records else []
    ranks = rank_series(records)
    rewards = {
        agent: sum((parse_money(r["rewards"][agent]) for r in records), Fraction(0))
        for agent in agents
    }
    shares, _defined = market_shares(rewards)
    out: list[AgentSummary] = []
    for agent in agents:
        budgets_first: list[Fraction] = []
        budgets_all: list[Fraction] = []
        norm_all: list[Fraction] = []
        norm_won: list[Fraction] = []
        priorities: list[int] = []
        train_rounds = 0
        period_targets: dict[int, set[str]] = {}
        for record in records:
            budgets = {ln["job"]: parse_money(ln["budget"]) for ln in record["listings"]}
            action = record["actions"][agent]
            if action["intent"] == "TRAIN":
                train_rounds += 1
                index = record["round"] // period
                period_targets.setdefault(index, set()).update(action["accepted"])
                continue
            accepted = _accepted_bids(record, agent)
            if accepted:
                budgets_first.append(budgets[accepted[0][0]])
            for position, (job, price) in enumerate(accepted):
                budgets_all.append(budgets[job])
                norm_all.append(price / budgets[job])
                if record["assignment"].get(job) == agent:
                    norm_won.append(price / budgets[job])
                    priorities.append(position + 1)
        series = ranks[agent]
        jump, jump_defined = rank_jump(series, period)
        spec_index = specialization(final_skills[agent]) if len(final_skills[agent]) >= 2 else None
        last_rep = records[-1]["reputation"][agent]
        stars = [last_rep[task]["stars"] for task in sorted(last_rep)]
        out.append(
            AgentSummary(
                agent_id=agent,
                kind=kinds.get(agent, ""),
                reward=rewards[agent],
                market_share=shares[agent],
                avg_rank=sum(series) / len(series),
                final_rank=series[-1],
                win_rate=win_rate(records, agent, capacity),
                win_priority=sum(priorities) / len(priorities) if priorities else None,
                recovery=recovery(series),
                rank_jump=jump,
                rank_jump_defined=jump_defined,
                top_base_price=float(sum(budgets_first) / len(budgets_first)) if budgets_first else None,
                avg_base_price=float(sum(budgets_all) / len(budgets_all)) if budgets_all else None,
                all_bids_norm=float(sum(norm_all) / len(norm_all)) if norm_all else None,
                winning_bids_norm=float(sum(norm_won) / len(norm_won)) if norm_won else None,
                train_pct=100.0 * train_rounds / len(records) if records else 0.0,
                train_targets=(
                    sum(len(v) for v in period_targets.values()) / len(period_targets)
                    if period_targets
                    else None
                ),
                specialization=spec_index,
                rep_avg_stars=sum(stars) / len(stars),
                rep_max_stars=max(stars),
            )
        )
    return out


AGENT_TABLE_COLUMNS = (
    "agent",
    "kind",
    "reward",
    "market_share",
    "avg_rank",
    "final_rank",
    "win_rate",
    "win_priority",
    "recovery",
    "rank_jump",
    "rank_jump_defined",
    "top_base_price",
    "avg_base_price",
    "all_bids_norm",
    "winning_bids_norm",
    "train_pct",
    "train_targets",
    "specialization",
    "rep_avg_stars",
    "rep_max_stars",
)

MARKET_TABLE_COLUMNS = (
    "round",
    "unemployment",
    "vacancy",
    "availability",
    "avg_winning_bid",
    "output",
    "payouts",
    "client_utility",
)


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return format_money(value)
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_agent_table(path: str | Path, summaries: Sequence[AgentSummary]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(AGENT_TABLE_COLUMNS)
        for s in summaries:
            writer.writerow(
                [
                    s.agent_id,
                    s.kind,
                    _cell(s.reward),
                    _cell(s.market_share),
                    _cell(s.avg_rank),
                    s.final_rank,
                    _cell(s.win_rate),
                    _cell(s.win_priority),
                    s.recovery,
                    s.rank_jump,
                    _cell(s.rank_jump_defined),
                    _cell(s.top_base_price),
                    _cell(s.avg_base_price),
                    _cell(s.all_bids_norm),
                    _cell(s.winning_bids_norm),
                    _cell(s.train_pct),
                    _cell(s.train_targets),
                    _cell(s.specialization),
                    _cell(s.rep_avg_stars),
                    _cell(s.rep_max_stars),
                ]
            )


def write_market_table(path: str | Path, series: Sequence[RoundRates]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(MARKET_TABLE_COLUMNS)
        for row in series:
            writer.writerow(
                [
                    row.round,
                    _cell(row.unemployment),
                    _cell(row.vacancy),
                    _cell(row.availability),
                    _cell(row.avg_winning_bid),
                    _cell(row.output),
                    _cell(row.payout_total),
                    _cell(row.client_utility),
                ]
            )


def read_market_table(path: str | Path) -> list[dict]:
    """Parse a market table back into typed rows (None for blank cells)."""
    out: list[dict] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            typed: dict = {"round": int(row["round"])}
            for key in ("unemployment", "vacancy", "availability", "avg_winning_bid", "output"):
                typed[key] = float(row[key]) if row[key] != "" else None
            for key in ("payouts", "client_utility"):
                typed[key] = parse_money(row[key]) if row[key] != "" else None
            out.append(typed)
    return out


@dataclass(frozen=True)
class HyperbolicFit:
    """u = a / (v + b) + c, with goodness of fit."""

    a: float
    b: float
    c: float
    r_squared: float


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


# Frozen fit recipe. Downstream renderers recompute these numbers from the
# CSV tables alone and must agree, so the recipe never changes silently.
HYPERBOLA_P0 = (0.1, 0.1, 0.0)
HYPERBOLA_MAXFEV = 20000


def _r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    mean = math.fsum(actual) / len(actual)
    ss_res = math.fsum((a - p) ** 2 for a, p in zip(actual, predicted))
    ss_tot = math.fsum((a - mean) ** 2 for a in actual)
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_beveridge(vacancy: Sequence[float], unemployment: Sequence[float]) -> HyperbolicFit:
    """Least-squares hyperbola through pooled per-round (v, u) points."""
    v = np.asarray(vacancy, dtype=float)
    u = np.asarray(unemployment, dtype=float)
    if v.size < 4:
        raise ValueError("need at least 4 points for a 3-parameter fit")

    def curve(x, a, b, c):
        return a / (x + b) + c

    (a, b, c), _ = curve_fit(curve, v, u, p0=HYPERBOLA_P0, maxfev=HYPERBOLA_MAXFEV)
    predicted = curve(v, a, b, c)
    return HyperbolicFit(float(a), float(b), float(c), _r_squared(u.tolist(), predicted.tolist()))


def macro_point(series: Sequence[RoundRates]) -> tuple[float | None, float]:
    """Whole-run mean unemployment and total output.

    One run collapses to a single point so that growth comparisons across
    runs see market conditions, not round-to-round sampling noise.
    """
    rates = [r.unemployment for r in series if r.unemployment is not None]
    mean_u = math.fsum(rates) / len(rates) if rates else None
    return mean_u, math.fsum(r.output for r in series)


def okun_deltas(points: Sequence[tuple[float, float]]) -> tuple[list[float], list[float]]:
    """Consecutive changes between per-run (unemployment, output) points.

    Returns unemployment changes in percentage points and output growth in
    percent. Pairs with an undefined rate or nonpositive base output are
    skipped.
    """
    du: list[float] = []
    dy: list[float] = []
    for (u_prev, o_prev), (u_next, o_next) in zip(points, points[1:]):
        if u_prev is None or u_next is None or o_prev <= 0.0:
            continue
        du.append(100.0 * (u_next - u_prev))
        dy.append(100.0 * (o_next - o_prev) / o_prev)
    return du, dy


def fit_okun(du: Sequence[float], dy: Sequence[float]) -> LinearFit:
    """Ordinary least squares of output growth on unemployment change."""
    if len(du) != len(dy):
        raise ValueError("mismatched series")
    if len(du) < 2:
        raise ValueError("need at least 2 points for a line")
    slope, intercept = np.polyfit(np.asarray(du, dtype=float), np.asarray(dy, dtype=float), 1)
    predicted = [slope * x + intercept for x in du]
    return LinearFit(float(slope), float(intercept), _r_squared(list(dy), predicted))
