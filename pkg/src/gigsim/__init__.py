"""gigsim: a deterministic, seed-reproducible simulator of a skill-based
gig marketplace for autonomous agents."""
from __future__ import annotations

from .core import (
    AgentAction,
    AgentSpec,
    MarketState,
    RoundTrace,
    SimConfig,
    bid_action,
    compute_rewards,
    default_config,
    default_roster,
    initialize,
    post_jobs,
    step,
    train_action,
)
from .errors import ConfigError
from .experiments import RunBundle, Simulation, load_config, run
from .matching import Allocation, allocate, is_stable
from .money import Money, format_money, parse_money, quantize_cents, to_money
from .rng import RngBank, RngStream
from .scenarios import JobListing, Scenario
from .scoring import ScoreParams, cobb_douglas_score, ces_score, gumbel_rerank
from .dynamics import SkillParams, realize_performance, update_skill
from .reputation import ReputationParams, community_base_rate, reputation, to_stars

__version__ = "0.1.0"

__all__ = [
    "AgentAction",
    "AgentSpec",
    "Allocation",
    "ConfigError",
    "JobListing",
    "MarketState",
    "Money",
    "ReputationParams",
    "RngBank",
    "RngStream",
    "RoundTrace",
    "RunBundle",
    "Scenario",
    "ScoreParams",
    "SimConfig",
    "Simulation",
    "SkillParams",
    "allocate",
    "bid_action",
    "ces_score",
    "cobb_douglas_score",
    "community_base_rate",
    "compute_rewards",
    "default_config",
    "default_roster",
    "format_money",
    "gumbel_rerank",
    "initialize",
    "is_stable",
    "load_config",
    "parse_money",
    "post_jobs",
    "quantize_cents",
    "realize_performance",
    "reputation",
    "run",
    "step",
    "to_money",
    "to_stars",
    "train_action",
    "update_skill",
]
