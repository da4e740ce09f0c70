"""Experiment runner: configs, full simulations, persistence, aggregation.

A run is: resolve the config, simulate one trace per seed, persist each
trace plus its agent/market tables, then write aggregate tables (mean and
standard deviation across seeds). Seeds are independent; a single seed
rerun is byte-identical.
"""
from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Callable, Mapping, Sequence

from . import metrics as _metrics
from . import trace_io
from .agents import Observation, build_observation, policy_action, resolve_preferences
from .bridge import BridgeAgent
from .core import (
    EXTERNAL,
    AgentAction,
    AgentSpec,
    MarketState,
    SimConfig,
    default_config,
    default_roster,
    init_record,
    initialize,
    post_jobs,
    step,
)
from .errors import ConfigError
from .money import Money, format_money, to_money
from .rng import RngBank
from .scenarios import Scenario, apply_to_listings  # re-exported: scenario transforms
from .scoring import ScoreParams
from .dynamics import SkillParams
from .reputation import ReputationParams

Controller = Callable[[str, Observation], AgentAction]


# -- config files -----------------------------------------------------------

def config_to_dict(config: SimConfig) -> dict:
    return {
        "agents": [
            {
                "id": spec.agent_id,
                "kind": spec.kind,
                "preferred_task": spec.preferred_task,
                "command": list(spec.command),
            }
            for spec in config.agents
        ],
        "tasks": list(config.tasks),
        "jobs_per_task": config.jobs_per_task,
        "total_jobs": config.total_jobs,
        "budget_schedule": [format_money(b) for b in config.budget_schedule],
        "horizon": config.horizon,
        "termination": config.termination,
        "end_probability": config.end_probability,
        "capacity": config.capacity,
        "max_action_entries": config.max_action_entries,
        "score": {
            "reputation_weight": config.score.reputation_weight,
            "ces_rho": config.score.ces_rho,
            "price_elasticity": config.score.price_elasticity,
            "gumbel_temperature": config.score.gumbel_temperature,
            "variant": config.score.variant,
        },
        "skill": {
            "skill_cap": config.skill.skill_cap,
            "learning_rate": config.skill.learning_rate,
            "halfpoint": config.skill.halfpoint,
            "concentration": config.skill.concentration,
            "practice_rate": config.skill.practice_rate,
        },
        "reputation": {
            "forgetting": config.reputation.forgetting,
            "prior_strength": config.reputation.prior_strength,
            "window": config.reputation.window,
            "initial_base_rate": config.reputation.initial_base_rate,
        },
        "payment": config.payment,
        "disclosure": config.disclosure,
        "scenarios": [
            {
                "kind": s.kind,
                "start": s.start,
                "stop": s.stop,
                "budget_floor": s.budget_floor,
                "job_count": s.job_count,
                "task": s.task,
                "budget_multiplier": s.budget_multiplier,
                "extra_jobs": s.extra_jobs,
                "reputation_weight": s.reputation_weight,
                "disclosure": s.disclosure,
                "payment": s.payment,
            }
            for s in config.scenarios
        ],
        "seed": config.seed,
        "discount": config.discount,
        "collect_baselines": config.collect_baselines,
        "activity_window": config.activity_window,
    }


def _agents_from(data) -> tuple[AgentSpec, ...]:
    if isinstance(data, Mapping):
        return default_roster(int(data.get("count", 50)), data.get("kind", "RANDOM"))
    specs = []
    for item in data:
        specs.append(
            AgentSpec(
                agent_id=item["id"],
                kind=item.get("kind", "RANDOM"),
                preferred_task=item.get("preferred_task"),
                command=tuple(item.get("command", ())),
            )
        )
    return tuple(specs)


def config_from_dict(data: Mapping) -> SimConfig:
    """Build a config from a plain mapping; absent keys keep defaults, so
    {} is the paper-baseline market."""
    known = {
        "agents", "tasks", "jobs_per_task", "total_jobs", "budget_schedule",
        "horizon", "termination", "end_probability", "capacity",
        "max_action_entries", "score", "skill", "reputation", "payment",
        "disclosure", "scenarios", "seed", "discount", "collect_baselines",
        "activity_window",
    }
    for key in data:
        if key not in known:
            raise ConfigError(key, "unknown configuration field")
    base = default_config(seed=int(data.get("seed", 0)))
    out = base
    if "agents" in data:
        out = replace(out, agents=_agents_from(data["agents"]))
    if "tasks" in data:
        out = replace(out, tasks=tuple(data["tasks"]))
    for key in ("jobs_per_task", "horizon", "capacity", "max_action_entries", "activity_window"):
        if key in data:
            out = replace(out, **{key: int(data[key])})
    if "total_jobs" in data:
        value = data["total_jobs"]
        out = replace(out, total_jobs=None if value is None else int(value))
    if "budget_schedule" in data:
        out = replace(out, budget_schedule=tuple(to_money(b) for b in data["budget_schedule"]))
    if "termination" in data:
        out = replace(out, termination=data["termination"])
    if "end_probability" in data:
        out = replace(out, end_probability=float(data["end_probability"]))
    if "score" in data:
        out = replace(out, score=ScoreParams(**data["score"]))
    if "skill" in data:
        out = replace(out, skill=SkillParams(**data["skill"]))
    if "reputation" in data:
        out = replace(out, reputation=ReputationParams(**data["reputation"]))
    if "payment" in data:
        out = replace(out, payment=data["payment"])
    if "disclosure" in data:
        out = replace(out, disclosure=data["disclosure"])
    if "scenarios" in data:
        out = replace(
            out,
            scenarios=tuple(Scenario(**{k: v for k, v in s.items()}) for s in data["scenarios"]),
        )
    if "discount" in data:
        out = replace(out, discount=float(data["discount"]))
    if "collect_baselines" in data:
        out = replace(out, collect_baselines=bool(data["collect_baselines"]))
    return out


def load_config(path: str | Path) -> SimConfig:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as err:
            raise ConfigError("config", f"not valid JSON: {err}") from err
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be an object")
    config = config_from_dict(data)
    config.validate()
    return config


# -- single simulation ------------------------------------------------------

class Simulation:
    """One seeded run, driven round by round.

    controllers overrides action selection per agent id (used by tests
    and experiments with scripted behavior); EXTERNAL agents exchange
    messages over their bridge; everything else uses its built-in policy.
    """

    def __init__(self, config: SimConfig, controllers: Mapping[str, Controller] | None = None):
        config.validate()
        self.config = config.effective()
        self.controllers = dict(controllers or {})
        self.rng = RngBank(config.seed)
        self.preferences = resolve_preferences(self.config, self.rng)
        self.state: MarketState = initialize(self.config, self.rng)
        self.agent_ids = self.config.agent_ids()
        self._specs = {spec.agent_id: spec for spec in self.config.agents}
        self.memos: dict[str, str] = {agent: "" for agent in self.agent_ids}
        self.cumulative: dict[str, Money] = {agent: Fraction(0) for agent in self.agent_ids}
        self.round_records: list[dict] = []
        self.records: list[dict] = [
            trace_io.header_record(config.seed, config_to_dict(config)),
            init_record(self.state, self.config, self.rng),
        ]
        self._bridges: dict[str, BridgeAgent] = {}
        self.stop_reason: str | None = None

    def observation(self, agent_id: str) -> Observation:
        listings = post_jobs(self.config, self.state.round)
        last = self.records[-1]  # init or latest round record
        stars = {
            task: last["reputation"][agent_id][task]["stars"] for task in self.config.tasks
        }
        history = self.round_records[-self.config.activity_window:]
        return build_observation(
            agent_id,
            self.state.round,
            listings,
            history,
            self.cumulative,
            stars,
            self.config.disclosure,
            memo=self.memos[agent_id],
        )

    def _bridge(self, spec: AgentSpec) -> BridgeAgent:
        agent = self._bridges.get(spec.agent_id)
        if agent is None:
            agent = BridgeAgent(spec.agent_id, spec.command)
            agent.start()
            self._bridges[spec.agent_id] = agent
        return agent

    def collect_actions(self) -> dict[str, AgentAction]:
        actions: dict[str, AgentAction] = {}
        for index, agent_id in enumerate(self.agent_ids):
            obs = self.observation(agent_id)
            controller = self.controllers.get(agent_id)
            spec = self._specs[agent_id]
            if controller is not None:
                actions[agent_id] = controller(agent_id, obs)
            elif spec.kind == EXTERNAL:
                actions[agent_id] = self._bridge(spec).act(obs, self.config.disclosure)
            else:
                stream = self.rng.stream(self.state.round, "policy", key=index)
                actions[agent_id] = policy_action(spec, obs, self.config, self.preferences, stream)
        return actions

    def run_round(self, actions: Mapping[str, AgentAction] | None = None) -> dict:
        """Advance one round; returns the round's canonical record."""
        if actions is None:
            actions = self.collect_actions()
        self.state, trace = step(self.state, actions, self.config, self.rng)
        for agent_id, action in actions.items():
            if action.memo:
                self.memos[agent_id] = action.memo
        for agent_id, reward in trace.rewards.items():
            self.cumulative[agent_id] += reward
        record = trace.record()
        self.round_records.append(record)
        self.records.append(record)
        return record

    def _should_stop(self) -> bool:
        if self.state.round >= self.config.horizon:
            self.stop_reason = "horizon"
            return True
        if self.config.termination == "geometric" and self.state.round > 0:
            draw = self.rng.stream(self.state.round, "termination").random()
            if draw < self.config.end_probability:
                self.stop_reason = "geometric"
                return True
        return False

    def finalize(self) -> dict:
        record = {
            "type": "final",
            "rounds": len(self.round_records),
            "reason": self.stop_reason or "stopped",
            "preferences": dict(sorted(self.preferences.items())),
            "skills": {agent: dict(self.state.skills[agent]) for agent in self.agent_ids},
            "cumulative_rewards": {
                agent: format_money(self.cumulative[agent]) for agent in self.agent_ids
            },
        }
        self.records.append(record)
        for agent in self._bridges.values():
            agent.close()
        self._bridges.clear()
        return record

    def run(self) -> list[dict]:
        """Play out the whole run; returns every trace record in order."""
        try:
            while not self._should_stop():
                self.run_round()
        finally:
            self.finalize()
        return self.records


# -- multi-seed runs --------------------------------------------------------

@dataclass(frozen=True)
class RunBundle:
    config: dict
    seeds: tuple[int, ...]
    trace_paths: tuple[Path, ...]
    agent_table_paths: tuple[Path, ...]
    market_table_paths: tuple[Path, ...]
    aggregate_agent_path: Path
    aggregate_market_path: Path


def write_tables(
    records: list[dict], out_dir: Path, tag: str
) -> tuple[Path, Path, list[_metrics.AgentSummary], list[_metrics.RoundRates]]:
    """Compute and persist both summary tables for one trace."""
    rounds = trace_io.round_records(records)
    header = trace_io.header_of(records)
    final = trace_io.final_of(records)
    kinds = {spec["id"]: spec["kind"] for spec in header["config"]["agents"]}
    summaries = _metrics.agent_summaries(
        rounds, final["skills"], kinds, header["config"]["capacity"]
    )
    agent_path = out_dir / f"agents_{tag}.csv"
    _metrics.write_agent_table(agent_path, summaries)
    series = _metrics.market_series(rounds)
    market_path = out_dir / f"market_{tag}.csv"
    _metrics.write_market_table(market_path, series)
    return agent_path, market_path, summaries, series


def write_run_outputs(
    records: list[dict], out_dir: Path, tag: str
) -> tuple[Path, Path, Path, list[_metrics.AgentSummary], list[_metrics.RoundRates]]:
    """Persist one run: the trace and its two summary tables."""
    trace_path = out_dir / f"trace_{tag}.ndjson"
    with trace_io.TraceWriter(trace_path) as writer:
        for record in records:
            writer.write(record)
    agent_path, market_path, summaries, series = write_tables(records, out_dir, tag)
    return trace_path, agent_path, market_path, summaries, series


_AGG_AGENT_METRICS = (
    "reward",
    "market_share",
    "avg_rank",
    "final_rank",
    "win_rate",
    "win_priority",
    "recovery",
    "rank_jump",
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

_AGG_MARKET_METRICS = (
    "unemployment",
    "vacancy",
    "availability",
    "avg_winning_bid",
    "output",
    "payout_total",
    "client_utility",
)


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = statistics.fmean(values)
    std = statistics.stdev(values) if len(values) > 1 else 0.0
    return mean, std


def write_aggregate_tables(
    per_seed_agents: list[list[_metrics.AgentSummary]],
    per_seed_market: list[list[_metrics.RoundRates]],
    out_dir: Path,
) -> tuple[Path, Path]:
    """Cross-seed mean and standard deviation for every metric."""
    import csv

    agg_agents = out_dir / "aggregate_agents.csv"
    agents = [s.agent_id for s in per_seed_agents[0]]
    kinds = {s.agent_id: s.kind for s in per_seed_agents[0]}
    with open(agg_agents, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        header = ["agent", "kind"]
        for name in _AGG_AGENT_METRICS:
            header.extend([f"{name}_mean", f"{name}_std"])
        writer.writerow(header)
        for agent in agents:
            row: list = [agent, kinds[agent]]
            for name in _AGG_AGENT_METRICS:
                values = []
                for summaries in per_seed_agents:
                    value = getattr(next(s for s in summaries if s.agent_id == agent), name)
                    if value is None:
                        continue
                    values.append(float(value))
                mean, std = _mean_std(values)
                row.extend(["" if mean is None else repr(mean), "" if std is None else repr(std)])
            writer.writerow(row)

    agg_market = out_dir / "aggregate_market.csv"
    with open(agg_market, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["metric", "mean", "std"])
        for name in _AGG_MARKET_METRICS:
            values = []
            for series in per_seed_market:
                for row_ in series:
                    value = getattr(row_, name)
                    if value is None:
                        continue
                    values.append(float(value))
            mean, std = _mean_std(values)
            writer.writerow([name, "" if mean is None else repr(mean), "" if std is None else repr(std)])
    return agg_agents, agg_market


def run(
    config: SimConfig | str | Path,
    seeds: Sequence[int],
    out_dir: str | Path,
    controllers: Mapping[str, Controller] | None = None,
) -> RunBundle:
    """Execute one simulation per seed and persist traces plus tables."""
    if not isinstance(config, SimConfig):
        config = load_config(config)
    config.validate()
    if not seeds:
        raise ConfigError("seeds", "at least one seed required")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    try:
        probe.write_text("")
        probe.unlink()
    except OSError as err:
        raise ConfigError("out", f"output directory not writable: {err}") from err

    trace_paths: list[Path] = []
    agent_paths: list[Path] = []
    market_paths: list[Path] = []
    per_seed_agents: list[list[_metrics.AgentSummary]] = []
    per_seed_market: list[list[_metrics.RoundRates]] = []
    for seed in seeds:
        seeded = replace(config, seed=int(seed))
        sim = Simulation(seeded, controllers=controllers)
        records = sim.run()
        tag = f"seed{int(seed)}"
        trace_path, agent_path, market_path, summaries, series = write_run_outputs(
            records, out, tag
        )
        trace_paths.append(trace_path)
        agent_paths.append(agent_path)
        market_paths.append(market_path)
        per_seed_agents.append(summaries)
        per_seed_market.append(series)
    agg_agents, agg_market = write_aggregate_tables(per_seed_agents, per_seed_market, out)
    return RunBundle(
        config=config_to_dict(config),
        seeds=tuple(int(s) for s in seeds),
        trace_paths=tuple(trace_paths),
        agent_table_paths=tuple(agent_paths),
        market_table_paths=tuple(market_paths),
        aggregate_agent_path=agg_agents,
        aggregate_market_path=agg_market,
    )


def apply_scenario(
    schedule: Sequence[Scenario],
    round_index: int,
    listings,
    tasks,
    budget_schedule,
):
    """Board-level scenario application (rule switches are folded into the
    effective config instead; see SimConfig.effective)."""
    return apply_to_listings(schedule, round_index, listings, tasks, budget_schedule)
