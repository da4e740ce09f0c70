"""Domain types and the market engine: one timestep end to end.

A round runs seven phases in a fixed order: post jobs, collect actions,
score bids, allocate, realize performance, pay rewards, transition state
(skills first, then reputation). Each stochastic phase draws from its own
(round, purpose) substream, and every per-agent loop walks agents in id
order, so a run is a pure function of (config, seed).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import scenarios as _scn
from .dynamics import INTENT_BID, INTENT_TRAIN, SkillParams, realize_performance, update_skill
from .errors import ConfigError
from .matching import Allocation, allocate
from .money import Money, format_money, quantize_cents, to_money
from .reputation import ReputationParams, community_base_rate, fold_evidence, reputation, to_stars
from .rng import INIT_ROUND, RngBank
from .scoring import ScoreParams, gumbel_rerank, score
from .scenarios import FLAT, OPEN, PERFORMANCE, SEALED, JobListing, Scenario

FIXED = "FIXED"
GREEDY = "GREEDY"
RANDOM = "RANDOM"
EXTERNAL = "EXTERNAL"
AGENT_KINDS = (FIXED, GREEDY, RANDOM, EXTERNAL)

TERMINATION_FIXED = "fixed"
TERMINATION_GEOMETRIC = "geometric"


@dataclass(frozen=True)
class AgentSpec:
    agent_id: str
    kind: str = RANDOM
    preferred_task: str | None = None
    command: tuple[str, ...] = ()


@dataclass(frozen=True)
class AgentAction:
    """One round's intent: an ordered bid list or an ordered training list.

    targets holds (job_id, price) pairs when bidding and task ids when
    training. note carries runner-side annotations (e.g. a bridge fault
    that forced this action).
    """

    intent: str
    targets: tuple = ()
    memo: str = ""
    note: str = ""


def bid_action(entries: Iterable[tuple[str, object]], memo: str = "", note: str = "") -> AgentAction:
    pairs = tuple((job, to_money(price)) for job, price in entries)
    return AgentAction(INTENT_BID, pairs, memo, note)


def train_action(tasks: Iterable[str], memo: str = "", note: str = "") -> AgentAction:
    return AgentAction(INTENT_TRAIN, tuple(tasks), memo, note)


@dataclass
class MarketState:
    """Everything that persists between rounds."""

    round: int
    skills: dict[str, dict[str, float]]
    evidence: dict[str, dict[str, tuple[float, float]]]
    windows: dict[str, tuple[float, ...]]

    def base_rates(self, params: ReputationParams) -> dict[str, float]:
        return {
            task: community_base_rate(window, params.initial_base_rate)
            for task, window in self.windows.items()
        }

    def reputation_scores(self, params: ReputationParams) -> dict[str, dict[str, float]]:
        base = self.base_rates(params)
        return {
            agent: {
                task: reputation(r, s, params.prior_strength, base[task])
                for task, (r, s) in by_task.items()
            }
            for agent, by_task in self.evidence.items()
        }


@dataclass(frozen=True)
class SimConfig:
    agents: tuple[AgentSpec, ...]
    tasks: tuple[str, ...] = ("SK-A", "SK-B", "SK-C", "SK-D")
    jobs_per_task: int = 4
    total_jobs: int | None = None
    budget_schedule: tuple[Money, ...] = (
        Fraction(10),
        Fraction(8),
        Fraction(6),
        Fraction(4),
    )
    horizon: int = 100
    termination: str = TERMINATION_FIXED
    end_probability: float = 0.01
    capacity: int = 3
    max_action_entries: int = 5
    score: ScoreParams = ScoreParams()
    skill: SkillParams = SkillParams()
    reputation: ReputationParams = ReputationParams()
    payment: str = FLAT
    disclosure: str = OPEN
    scenarios: tuple[Scenario, ...] = ()
    seed: int = 0
    discount: float = 0.99  # agents' own planning horizon; the market never reads it
    collect_baselines: bool = True
    activity_window: int = 10

    def agent_ids(self) -> list[str]:
        return sorted(spec.agent_id for spec in self.agents)

    def validate(self) -> None:
        if not self.agents:
            raise ConfigError("agents", "roster must not be empty")
        ids = [spec.agent_id for spec in self.agents]
        if len(set(ids)) != len(ids):
            raise ConfigError("agents", "agent ids must be unique")
        for spec in self.agents:
            if spec.kind not in AGENT_KINDS:
                raise ConfigError("agents.kind", f"unknown kind {spec.kind!r}")
            if spec.preferred_task is not None and spec.preferred_task not in self.tasks:
                raise ConfigError(
                    "agents.preferred_task", f"unknown task {spec.preferred_task!r}"
                )
            if spec.kind == EXTERNAL and not spec.command:
                raise ConfigError("agents.command", "EXTERNAL agents need a launch command")
        if not self.tasks:
            raise ConfigError("tasks", "at least one task type required")
        if len(set(self.tasks)) != len(self.tasks):
            raise ConfigError("tasks", "task ids must be unique")
        if self.jobs_per_task < 0:
            raise ConfigError("jobs_per_task", "must be nonnegative")
        if self.total_jobs is not None and self.total_jobs < 0:
            raise ConfigError("total_jobs", "must be nonnegative")
        if not self.budget_schedule:
            raise ConfigError("budget_schedule", "must not be empty")
        if any(b < 0 for b in self.budget_schedule):
            raise ConfigError("budget_schedule", "budgets must be nonnegative")
        if self.horizon < 1:
            raise ConfigError("horizon", "must be at least 1")
        if self.termination not in (TERMINATION_FIXED, TERMINATION_GEOMETRIC):
            raise ConfigError("termination", f"unknown mode {self.termination!r}")
        if not 0.0 <= self.end_probability <= 1.0:
            raise ConfigError("end_probability", "must lie in [0, 1]")
        if self.capacity < 1:
            raise ConfigError("capacity", "must be at least 1")
        if self.max_action_entries < 1:
            raise ConfigError("max_action_entries", "must be at least 1")
        try:
            self.score.validate()
        except ValueError as err:
            raise ConfigError("score", str(err)) from err
        try:
            self.skill.validate()
        except ValueError as err:
            raise ConfigError("skill", str(err)) from err
        try:
            self.reputation.validate()
        except ValueError as err:
            raise ConfigError("reputation", str(err)) from err
        if self.payment not in (FLAT, PERFORMANCE):
            raise ConfigError("payment", "must be FLAT or PERFORMANCE")
        if self.disclosure not in (OPEN, SEALED):
            raise ConfigError("disclosure", "must be OPEN or SEALED")
        for scenario in self.scenarios:
            scenario.validate(self.horizon, self.tasks)
        _scn.resolve_overrides(self.scenarios)
        if not 0.0 < self.discount <= 1.0:
            raise ConfigError("discount", "must lie in (0, 1]")
        if self.activity_window < 1:
            raise ConfigError("activity_window", "must be at least 1")

    def effective(self) -> "SimConfig":
        """Fold run-wide scenario rule switches into the config."""
        overrides = _scn.resolve_overrides(self.scenarios)
        out = self
        weight = overrides.get("reputation_weight")
        if weight is not None and weight != self.score.reputation_weight:
            out = replace(out, score=replace(self.score, reputation_weight=weight))
        disclosure = overrides.get("disclosure")
        if disclosure is not None and disclosure != out.disclosure:
            out = replace(out, disclosure=disclosure)
        payment = overrides.get("payment")
        if payment is not None and payment != out.payment:
            out = replace(out, payment=payment)
        return out


def default_roster(count: int, kind: str = RANDOM) -> tuple[AgentSpec, ...]:
    width = max(2, len(str(max(count - 1, 0))))
    return tuple(AgentSpec(f"AG-{i:0{width}d}", kind) for i in range(count))


def default_config(seed: int = 0, *, agent_count: int = 50, **overrides) -> SimConfig:
    """Baseline market: 4 task types, 16 jobs, stochastic agents."""
    config = SimConfig(agents=default_roster(agent_count), seed=seed)
    if overrides:
        config = replace(config, **overrides)
    return config


def _task_suffix(task: str) -> str:
    return task.split("-", 1)[1] if "-" in task else task


def post_jobs(config: SimConfig, round_index: int) -> list[JobListing]:
    """The round's job board, scenario transforms applied.

    Pure in (config, round_index): the engine and any observer calling it
    for the same round see the same board.
    """
    config = config.effective()
    schedule = config.budget_schedule
    base: list[JobListing] = []
    if config.total_jobs is None:
        for task in config.tasks:
            suffix = _task_suffix(task)
            for j in range(config.jobs_per_task):
                base.append(JobListing(f"JB-{suffix}{j}", task, schedule[j % len(schedule)]))
    else:
        counters = {task: 0 for task in config.tasks}
        for i in range(config.total_jobs):
            task = config.tasks[i % len(config.tasks)]
            j = counters[task]
            counters[task] = j + 1
            base.append(JobListing(f"JB-{_task_suffix(task)}{j}", task, schedule[j % len(schedule)]))
    return _scn.apply_to_listings(
        config.scenarios, round_index, base, config.tasks, schedule
    )


def initialize(config: SimConfig, rng: RngBank) -> MarketState:
    """Fresh market state: low random skills, one benchmark performance
    per agent per task folded into reputation and the community windows.

    collect_baselines=False skips the benchmarks, leaving every displayed
    reputation at the prior base rate (useful in unit tests).
    """
    config.validate()
    config = config.effective()
    agents = config.agent_ids()
    skill_stream = rng.stream(INIT_ROUND, "init_skill")
    skills = {
        agent: {task: skill_stream.uniform(0.0, config.skill.skill_cap / 4.0) for task in config.tasks}
        for agent in agents
    }
    evidence: dict[str, dict[str, tuple[float, float]]] = {
        agent: {task: (0.0, 0.0) for task in config.tasks} for agent in agents
    }
    windows: dict[str, list[float]] = {task: [] for task in config.tasks}
    if config.collect_baselines:
        bench = rng.stream(INIT_ROUND, "init_performance")
        for agent in agents:
            for task in config.tasks:
                y = realize_performance(skills[agent][task], config.skill, bench)
                evidence[agent][task] = fold_evidence(
                    0.0, 0.0, config.reputation.forgetting, [y]
                )
                windows[task].append(y)
    bound = config.reputation.window
    return MarketState(
        round=0,
        skills=skills,
        evidence=evidence,
        windows={task: tuple(vals[-bound:]) for task, vals in windows.items()},
    )


def init_record(state: MarketState, config: SimConfig, rng: RngBank) -> dict:
    """Canonical snapshot of the freshly initialized market."""
    config = config.effective()
    agents = config.agent_ids()
    return {
        "type": "init",
        "skills": {agent: dict(state.skills[agent]) for agent in agents},
        "reputation": _reputation_snapshot(
            state.evidence, state.windows, config.reputation, agents, config.tasks
        ),
        "windows": {task: list(vals) for task, vals in state.windows.items()},
        "draws": rng.draws_for_round(INIT_ROUND),
    }


def job_payout(price: Money, quality: float, mode: str) -> Money:
    """What the client actually pays for one completed job."""
    if mode == PERFORMANCE:
        return quantize_cents(price * Fraction(quality))
    return price


def compute_rewards(
    alloc: Allocation,
    performances: Mapping[str, float],
    mode: str,
    agents: Iterable[str] = (),
) -> dict[str, Money]:
    """Per-agent round reward: the sum of payouts over jobs held."""
    rewards: dict[str, Money] = {agent: Fraction(0) for agent in agents}
    for job, winner in alloc.assignment.items():
        if winner is None:
            continue
        payout = job_payout(alloc.price[job], performances[job], mode)
        rewards[winner] = rewards.get(winner, Fraction(0)) + payout
    return rewards


@dataclass
class RoundTrace:
    round: int
    listings: list[JobListing]
    base_rates: dict[str, float]
    actions: dict[str, dict]
    scores: dict[str, dict[str, float]]
    ranking: dict[str, list[str]]
    allocation: Allocation
    performances: dict[str, float]
    payouts: dict[str, Money]
    rewards: dict[str, Money]
    reputation: dict[str, dict[str, dict[str, float]]]
    windows: dict[str, tuple[float, ...]]
    draws: dict[str, int]
    notes: list[str] = field(default_factory=list)

    def record(self) -> dict:
        """Canonically ordered, JSON-ready view of the round."""
        return {
            "type": "round",
            "round": self.round,
            "listings": [
                {"job": ln.job_id, "task": ln.task, "budget": format_money(ln.budget)}
                for ln in self.listings
            ],
            "base_rates": dict(self.base_rates),
            "actions": self.actions,
            "scores": {job: dict(by) for job, by in self.scores.items()},
            "ranking": {job: list(rank) for job, rank in self.ranking.items()},
            "assignment": dict(self.allocation.assignment),
            "prices": {job: format_money(p) for job, p in self.allocation.price.items()},
            "performances": dict(self.performances),
            "payouts": {job: format_money(p) for job, p in self.payouts.items()},
            "rewards": {agent: format_money(r) for agent, r in self.rewards.items()},
            "reputation": self.reputation,
            "windows": {task: list(vals) for task, vals in self.windows.items()},
            "draws": dict(self.draws),
            "notes": list(self.notes),
        }


def _serialize_targets(action: AgentAction) -> list:
    if action.intent == INTENT_BID:
        return [[job, format_money(price)] for job, price in action.targets]
    return list(action.targets)


def _sanitize_action(
    action: AgentAction,
    job_ids: Sequence[str],
    tasks: Sequence[str],
    limit: int,
) -> tuple[AgentAction, list[dict]]:
    """Drop malformed entries (unknown ids, bad prices, duplicates) and
    enforce the entry limit; every drop is reported, never fatal."""
    rejected: list[dict] = []
    if action.intent == INTENT_TRAIN:
        kept_tasks: list[str] = []
        for task in action.targets:
            if task not in tasks:
                rejected.append({"entry": task, "reason": "unknown task"})
            elif len(kept_tasks) >= limit:
                rejected.append({"entry": task, "reason": "over entry limit"})
            else:
                kept_tasks.append(task)
        return replace(action, targets=tuple(kept_tasks)), rejected
    if action.intent != INTENT_BID:
        raise ValueError(f"unknown intent: {action.intent!r}")
    kept: list[tuple[str, Money]] = []
    seen: set[str] = set()
    known = set(job_ids)
    for job, price in action.targets:
        price = to_money(price)
        if job not in known:
            rejected.append({"entry": [job, format_money(price)], "reason": "unknown job"})
        elif price <= 0:
            rejected.append({"entry": [job, format_money(price)], "reason": "price not positive"})
        elif job in seen:
            rejected.append({"entry": [job, format_money(price)], "reason": "duplicate job"})
        elif len(kept) >= limit:
            rejected.append({"entry": [job, format_money(price)], "reason": "over entry limit"})
        else:
            kept.append((job, price))
            seen.add(job)
    return replace(action, targets=tuple(kept)), rejected


def _reputation_snapshot(
    evidence: Mapping[str, Mapping[str, tuple[float, float]]],
    windows: Mapping[str, Sequence[float]],
    params: ReputationParams,
    agents: Sequence[str],
    tasks: Sequence[str],
) -> dict[str, dict[str, dict[str, float]]]:
    base = {task: community_base_rate(windows[task], params.initial_base_rate) for task in tasks}
    out: dict[str, dict[str, dict[str, float]]] = {}
    for agent in agents:
        out[agent] = {}
        for task in tasks:
            r, s = evidence[agent][task]
            value = reputation(r, s, params.prior_strength, base[task])
            out[agent][task] = {
                "positive": r,
                "negative": s,
                "score": value,
                "stars": to_stars(value),
            }
    return out


def step(
    state: MarketState,
    actions: Mapping[str, AgentAction],
    config: SimConfig,
    rng: RngBank,
) -> tuple[MarketState, RoundTrace]:
    """Advance the market one round."""
    config = config.effective()
    agents = config.agent_ids()
    if set(actions) != set(agents):
        raise ValueError("actions must cover exactly the configured roster")
    if state.round >= config.horizon:
        raise ValueError("round is past the configured horizon")
    rnd = state.round
    notes: list[str] = []

    # 1. post jobs
    listings = post_jobs(config, rnd)
    job_ids = [ln.job_id for ln in listings]
    by_id = {ln.job_id: ln for ln in listings}

    # 2. collect and sanitize actions
    sanitized: dict[str, AgentAction] = {}
    action_records: dict[str, dict] = {}
    for agent in agents:
        action = actions[agent]
        clean, rejected = _sanitize_action(action, job_ids, config.tasks, config.max_action_entries)
        sanitized[agent] = clean
        record: dict = {
            "intent": action.intent,
            "targets": _serialize_targets(action),
            "accepted": _serialize_targets(clean),
            "rejected": rejected,
        }
        if action.memo:
            record["memo"] = action.memo
        if action.note:
            record["note"] = action.note
        action_records[agent] = record
        if clean.intent == INTENT_TRAIN and not clean.targets:
            notes.append(f"{agent}: training no-op (no valid targets)")

    # 3. score bids per job; reputation and base rates are start-of-round
    base_rates = {
        task: community_base_rate(state.windows[task], config.reputation.initial_base_rate)
        for task in config.tasks
    }
    rep_now: dict[str, dict[str, float]] = {
        agent: {
            task: reputation(
                state.evidence[agent][task][0],
                state.evidence[agent][task][1],
                config.reputation.prior_strength,
                base_rates[task],
            )
            for task in config.tasks
        }
        for agent in agents
    }
    bidders_by_job: dict[str, list[str]] = {job: [] for job in job_ids}
    for agent in agents:
        action = sanitized[agent]
        if action.intent != INTENT_BID:
            continue
        for job, _price in action.targets:
            bidders_by_job[job].append(agent)
    scores: dict[str, dict[str, float]] = {}
    ranking: dict[str, list[str]] = {}
    gumbel_stream = rng.stream(rnd, "gumbel")
    bid_price = {
        (agent, job): price
        for agent in agents
        if sanitized[agent].intent == INTENT_BID
        for job, price in sanitized[agent].targets
    }
    for job in job_ids:
        listing = by_id[job]
        if listing.budget <= 0:
            scores[job] = {}
            ranking[job] = []
            if bidders_by_job[job]:
                notes.append(f"{job}: zero budget, bids not scoreable")
            continue
        scored = [
            (
                agent,
                score(rep_now[agent][listing.task], bid_price[(agent, job)], listing.budget, config.score),
            )
            for agent in sorted(bidders_by_job[job])
        ]
        scores[job] = {agent: s for agent, s in scored}
        ranking[job] = gumbel_rerank(scored, config.score.gumbel_temperature, gumbel_stream)

    # 4. allocate
    bids = {
        agent: list(sanitized[agent].targets)
        for agent in agents
        if sanitized[agent].intent == INTENT_BID and sanitized[agent].targets
    }
    alloc = allocate(job_ids, bids, ranking, config.capacity)
    notes.extend(alloc.notes)

    # 5. realize performance (listing order; unassigned jobs score 0)
    perf_stream = rng.stream(rnd, "performance")
    performances: dict[str, float] = {}
    for ln in listings:
        winner = alloc.assignment[ln.job_id]
        if winner is None:
            performances[ln.job_id] = 0.0
        else:
            performances[ln.job_id] = realize_performance(
                state.skills[winner][ln.task], config.skill, perf_stream
            )

    # 6. rewards
    payouts = {
        ln.job_id: (
            job_payout(alloc.price[ln.job_id], performances[ln.job_id], config.payment)
            if alloc.assignment[ln.job_id] is not None
            else Fraction(0)
        )
        for ln in listings
    }
    rewards = compute_rewards(alloc, performances, config.payment, agents)

    # 7a. skill transition (agent id order)
    skill_stream = rng.stream(rnd, "skill")
    won_by_agent: dict[str, list[str]] = {agent: [] for agent in agents}
    for ln in listings:
        winner = alloc.assignment[ln.job_id]
        if winner is not None:
            won_by_agent[winner].append(ln.job_id)
    new_skills: dict[str, dict[str, float]] = {}
    for agent in agents:
        action = sanitized[agent]
        if action.intent == INTENT_TRAIN:
            new_skills[agent] = update_skill(
                state.skills[agent], INTENT_TRAIN, (), None, (), config.skill,
                skill_stream, training=action.targets,
            )
            continue
        won = won_by_agent[agent]
        if won:
            matched_tasks = [by_id[job].task for job in won]
            qualities = [performances[job] for job in won]
            new_skills[agent] = update_skill(
                state.skills[agent], INTENT_BID, matched_tasks, None, qualities,
                config.skill, skill_stream,
            )
        else:
            top_pref = by_id[action.targets[0][0]].task if action.targets else None
            new_skills[agent] = update_skill(
                state.skills[agent], INTENT_BID, (), top_pref, (), config.skill,
                skill_stream,
            )

    # 7b. reputation transition: decay everyone once, fold completions,
    # then extend community windows (agent id order within the round)
    completions: dict[str, dict[str, list[float]]] = {
        agent: {task: [] for task in config.tasks} for agent in agents
    }
    for ln in listings:
        winner = alloc.assignment[ln.job_id]
        if winner is not None:
            completions[winner][ln.task].append(performances[ln.job_id])
    new_evidence: dict[str, dict[str, tuple[float, float]]] = {}
    for agent in agents:
        new_evidence[agent] = {}
        for task in config.tasks:
            r, s = state.evidence[agent][task]
            new_evidence[agent][task] = fold_evidence(
                r, s, config.reputation.forgetting, completions[agent][task]
            )
    bound = config.reputation.window
    new_windows: dict[str, tuple[float, ...]] = {}
    for task in config.tasks:
        extended = list(state.windows[task])
        for agent in agents:
            extended.extend(completions[agent][task])
        new_windows[task] = tuple(extended[-bound:])

    next_state = MarketState(
        round=rnd + 1, skills=new_skills, evidence=new_evidence, windows=new_windows
    )
    trace = RoundTrace(
        round=rnd,
        listings=listings,
        base_rates=base_rates,
        actions=action_records,
        scores=scores,
        ranking=ranking,
        allocation=alloc,
        performances=performances,
        payouts=payouts,
        rewards=rewards,
        reputation=_reputation_snapshot(
            new_evidence, new_windows, config.reputation, agents, config.tasks
        ),
        windows=new_windows,
        draws=rng.draws_for_round(rnd),
        notes=notes,
    )
    return next_state, trace
