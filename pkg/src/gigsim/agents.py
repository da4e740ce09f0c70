"""Built-in policy agents and the observation the market exposes.

Observations are deliberately partial: an agent sees listings, recent
market activity (winners, their star ratings, and prices only under open
disclosure), the earnings leaderboard, and its own record. No latent
skill, its own included, is ever present.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import AgentAction, AgentSpec, SimConfig, bid_action, train_action
from .money import Money, format_money
from .rng import INIT_ROUND, RngBank, RngStream
from .scenarios import OPEN, JobListing

TOP_BID_FACTOR = Fraction(9, 10)
AGGRESSIVE_BID_FACTOR = Fraction(4, 5)
DEFAULT_TRAIN_CHANCE = 0.2


@dataclass(frozen=True)
class JobView:
    job_id: str
    task: str
    budget: Money


@dataclass(frozen=True)
class ActivityEntry:
    """One job of one recent round, as visible to everyone."""

    round: int
    job_id: str
    task: str
    winner: str | None
    winner_stars: float | None
    price: str | None  # None when sealed or unassigned


@dataclass(frozen=True)
class OwnRound:
    """The agent's own past round: what it tried, what it got."""

    round: int
    intent: str
    targets: tuple
    won: tuple[str, ...]
    reward: str


@dataclass(frozen=True)
class Observation:
    round: int
    listings: tuple[JobView, ...]
    activity: tuple[ActivityEntry, ...]
    leaderboard: tuple[tuple[int, str, str], ...]  # (rank, agent, earned)
    reputation: Mapping[str, float]  # own stars per task
    recent: tuple[OwnRound, ...]
    memo: str = ""

    def to_request(self) -> dict:
        """Wire form of the observation (one JSON object, no newlines)."""
        activity = []
        for entry in self.activity:
            item: dict = {
                "round": entry.round,
                "job": entry.job_id,
                "task": entry.task,
                "winner": entry.winner,
                "stars": entry.winner_stars,
            }
            if entry.price is not None:
                item["price"] = entry.price
            activity.append(item)
        return {
            "type": "observe",
            "round": self.round,
            "listings": [
                {"job": v.job_id, "task": v.task, "budget": format_money(v.budget)}
                for v in self.listings
            ],
            "activity": activity,
            "leaderboard": [
                {"rank": rank, "agent": agent, "earned": earned}
                for rank, agent, earned in self.leaderboard
            ],
            "self": {
                "reputation": {task: stars for task, stars in self.reputation.items()},
                "recent": [
                    {
                        "round": own.round,
                        "intent": own.intent,
                        "targets": list(own.targets),
                        "won": list(own.won),
                        "reward": own.reward,
                    }
                    for own in self.recent
                ],
                "memo": self.memo,
            },
        }


def build_observation(
    agent_id: str,
    round_index: int,
    listings: Sequence[JobListing],
    history: Sequence[dict],
    cumulative: Mapping[str, Money],
    own_stars: Mapping[str, float],
    disclosure: str,
    memo: str = "",
) -> Observation:
    """Assemble one agent's view from public data and its own record.

    history holds the most recent round records (oldest first), already
    canonicalized; prices of other agents' wins are included only under
    open disclosure.
    """
    views = tuple(JobView(ln.job_id, ln.task, ln.budget) for ln in listings)
    activity: list[ActivityEntry] = []
    for record in history:
        for ln in record["listings"]:
            job = ln["job"]
            winner = record["assignment"][job]
            stars = None
            price = None
            if winner is not None:
                stars = record["reputation"][winner][ln["task"]]["stars"]
                if disclosure == OPEN:
                    price = record["prices"][job]
            activity.append(
                ActivityEntry(record["round"], job, ln["task"], winner, stars, price)
            )
    board = sorted(cumulative.items(), key=lambda kv: (-kv[1], kv[0]))
    leaderboard = tuple(
        (position + 1, agent, format_money(earned))
        for position, (agent, earned) in enumerate(board)
    )
    recent: list[OwnRound] = []
    for record in history:
        mine = record["actions"][agent_id]
        won = tuple(
            job for job, winner in record["assignment"].items() if winner == agent_id
        )
        recent.append(
            OwnRound(
                round=record["round"],
                intent=mine["intent"],
                targets=tuple(tuple(t) if isinstance(t, list) else t for t in mine["accepted"]),
                won=won,
                reward=record["rewards"][agent_id],
            )
        )
    return Observation(
        round=round_index,
        listings=views,
        activity=tuple(activity),
        leaderboard=leaderboard,
        reputation=dict(own_stars),
        recent=tuple(recent),
        memo=memo,
    )


def assert_information_hiding(request: dict, disclosure: str) -> None:
    """Schema-level guard: no latent skill ever, no prices when sealed."""
    text = str(request)
    if "skill" in text or "theta" in text:
        raise AssertionError("observation leaks latent skill")
    if disclosure != OPEN:
        for entry in request.get("activity", ()):
            if "price" in entry:
                raise AssertionError("sealed observation leaks a winning price")


def fixed_policy(obs: Observation, preferred_task: str, capacity: int) -> AgentAction:
    """Bid 0.9x budget on the best-paying jobs of one preferred task;
    train that task when it has no listings."""
    mine = [v for v in obs.listings if v.task == preferred_task]
    if not mine:
        return train_action([preferred_task])
    mine.sort(key=lambda v: (-v.budget, v.job_id))
    return bid_action((v.job_id, v.budget * TOP_BID_FACTOR) for v in mine[:capacity])


def greedy_policy(obs: Observation, capacity: int, rng: RngStream | None = None) -> AgentAction:
    """Chase the biggest budgets anywhere at 0.8x; never trains unless the
    board is empty, then picks a uniformly random task (first task if no
    rng is supplied)."""
    if not obs.listings:
        tasks = sorted(obs.reputation)
        if rng is None:
            return train_action(tasks[:1])
        return train_action([tasks[rng.integers(0, len(tasks))]])
    ordered = sorted(obs.listings, key=lambda v: (-v.budget, v.job_id))
    return bid_action((v.job_id, v.budget * AGGRESSIVE_BID_FACTOR) for v in ordered[:capacity])


def random_policy(
    obs: Observation,
    capacity: int,
    rng: RngStream,
    train_chance: float = DEFAULT_TRAIN_CHANCE,
) -> AgentAction:
    """Train with fixed probability, otherwise bid on a uniform sample of
    jobs at a uniform fraction of budget."""
    tasks = sorted(obs.reputation)
    if rng.random() < train_chance or not obs.listings:
        return train_action([tasks[rng.integers(0, len(tasks))]])
    count = min(capacity, len(obs.listings))
    picks = rng.sample_indices(len(obs.listings), count)
    entries = []
    for index in picks:
        view = obs.listings[index]
        entries.append((view.job_id, view.budget * Fraction(rng.uniform(0.5, 1.0))))
    return bid_action(entries)


def resolve_preferences(config: SimConfig, rng: RngBank) -> dict[str, str]:
    """Assign each policy agent its fixed preferred task, drawing uniform
    tasks (in agent id order) for the ones left unspecified."""
    stream = rng.stream(INIT_ROUND, "roster")
    out: dict[str, str] = {}
    for spec in sorted(config.agents, key=lambda s: s.agent_id):
        if spec.kind != "FIXED":
            continue
        if spec.preferred_task is not None:
            out[spec.agent_id] = spec.preferred_task
        else:
            out[spec.agent_id] = config.tasks[stream.integers(0, len(config.tasks))]
    return out


def policy_action(
    spec: AgentSpec,
    obs: Observation,
    config: SimConfig,
    preferences: Mapping[str, str],
    rng: RngStream,
) -> AgentAction:
    """Dispatch to the right built-in policy for one roster entry."""
    if spec.kind == "FIXED":
        return fixed_policy(obs, preferences[spec.agent_id], config.capacity)
    if spec.kind == "GREEDY":
        return greedy_policy(obs, config.capacity, rng)
    if spec.kind == "RANDOM":
        return random_policy(obs, config.capacity, rng)
    raise ValueError(f"no built-in policy for agent kind {spec.kind!r}")
