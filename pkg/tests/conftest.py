from __future__ import annotations

import pytest

from gigsim import AgentSpec, SimConfig, default_roster


@pytest.fixture
def make_config():
    """Factory for small test configs; collect_baselines off by default so
    reputations start at the prior."""

    def build(
        agent_count: int = 2,
        tasks: tuple[str, ...] = ("SK-A", "SK-B", "SK-C", "SK-D"),
        kind: str = "RANDOM",
        **overrides,
    ) -> SimConfig:
        settings = {
            "agents": default_roster(agent_count, kind),
            "tasks": tasks,
            "collect_baselines": False,
            "horizon": 10,
        }
        settings.update(overrides)
        return SimConfig(**settings)

    return build


@pytest.fixture
def mixed_roster():
    def build(fixed: int, greedy: int, random: int = 0) -> tuple[AgentSpec, ...]:
        specs = []
        for i in range(fixed):
            specs.append(AgentSpec(f"FX-{i:02d}", "FIXED"))
        for i in range(greedy):
            specs.append(AgentSpec(f"GR-{i:02d}", "GREEDY"))
        for i in range(random):
            specs.append(AgentSpec(f"RN-{i:02d}", "RANDOM"))
        return tuple(specs)

    return build
