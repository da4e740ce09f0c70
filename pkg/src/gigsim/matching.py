"""Job allocation via deferred acceptance with agent capacity.

Jobs propose down their ranked bidder lists; an agent tentatively holds up
to `capacity` jobs, ranked by the order of its own submitted bid list, and
bumps the least preferred excess. The result is the client-optimal stable
matching for the given rankings. All stochasticity lives upstream in the
ranking step; this procedure is deterministic.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .money import Money

UNASSIGNED = None


@dataclass(frozen=True)
class Allocation:
    """Partial matching of jobs to agents with agreed prices.

    assignment maps every listed job to an agent id or None; price is the
    winning bid, 0 exactly when the job is unassigned.
    """

    assignment: dict[str, str | None]
    price: dict[str, Money]
    notes: list[str] = field(default_factory=list)

    def jobs_won_by(self, agent_id: str) -> list[str]:
        return [job for job, winner in self.assignment.items() if winner == agent_id]


def _agent_rank_maps(
    bids: Mapping[str, Sequence[tuple[str, Money]]],
    job_prefs: Mapping[str, Sequence[str]],
    job_order: Sequence[str],
) -> tuple[dict[str, dict[str, int]], list[str]]:
    """Position of each job in each agent's preference order.

    A job an agent bid on (per job_prefs) but left out of its list is
    appended at the end, in listing order; each repair is reported.
    """
    ranks: dict[str, dict[str, int]] = {}
    notes: list[str] = []
    for agent, entries in bids.items():
        ranks[agent] = {}
        for position, (job, _price) in enumerate(entries):
            ranks[agent].setdefault(job, position)
    for job in job_order:
        for agent in job_prefs.get(job, ()):
            agent_ranks = ranks.setdefault(agent, {})
            if job not in agent_ranks:
                agent_ranks[job] = len(agent_ranks)
                notes.append(f"preference repaired: {agent} bid on {job} but omitted it")
    return ranks, notes


def allocate(
    listings: Sequence[str],
    bids: Mapping[str, Sequence[tuple[str, Money]]],
    job_prefs: Mapping[str, Sequence[str]],
    capacity: int,
) -> Allocation:
    """Deferred acceptance with jobs proposing.

    listings: job ids in posting order. bids: per-agent ordered
    (job_id, price) lists; earlier entries are preferred. job_prefs: per-job
    ranked agent ids (best first), containing only that job's bidders.
    """
    bid_price: dict[tuple[str, str], Money] = {}
    for agent, entries in bids.items():
        for job, price in entries:
            bid_price.setdefault((agent, job), price)

    agent_rank, notes = _agent_rank_maps(bids, job_prefs, listings)

    next_choice = {job: 0 for job in listings}
    held: dict[str, list[str]] = {agent: [] for agent in agent_rank}
    proposers = deque(job for job in listings if job_prefs.get(job))
    while proposers:
        job = proposers.popleft()
        prefs = job_prefs.get(job, ())
        while next_choice[job] < len(prefs):
            agent = prefs[next_choice[job]]
            next_choice[job] += 1
            slots = held.setdefault(agent, [])
            if len(slots) < capacity:
                slots.append(job)
                break
            worst = max(slots, key=lambda j: agent_rank[agent][j])
            if agent_rank[agent][job] < agent_rank[agent][worst]:
                slots.remove(worst)
                slots.append(job)
                proposers.append(worst)
                break
            # rejected outright; keep walking down this job's list

    assignment: dict[str, str | None] = {job: UNASSIGNED for job in listings}
    price: dict[str, Money] = {job: Fraction(0) for job in listings}
    for agent, slots in held.items():
        for job in slots:
            assignment[job] = agent
            # a repaired preference has no submitted price behind it
            price[job] = bid_price.get((agent, job), Fraction(0))
    return Allocation(assignment=assignment, price=price, notes=notes)


def is_stable(
    alloc: Allocation,
    bids: Mapping[str, Sequence[tuple[str, Money]]],
    job_prefs: Mapping[str, Sequence[str]],
    capacity: int,
) -> bool:
    """Exhaustive blocking-pair scan (test oracle).

    A pair (job, agent) blocks when the agent bid on the job, the job is
    unassigned or ranks the agent above its current winner, and the agent
    has a free slot or prefers the job to one it holds.
    """
    agent_rank, _ = _agent_rank_maps(bids, job_prefs, list(alloc.assignment))
    load: dict[str, list[str]] = {}
    for job, winner in alloc.assignment.items():
        if winner is not None:
            load.setdefault(winner, []).append(job)

    for job, prefs in job_prefs.items():
        winner = alloc.assignment.get(job)
        job_rank = {agent: i for i, agent in enumerate(prefs)}
        for agent in prefs:
            if winner is not None and job_rank[agent] >= job_rank.get(winner, len(prefs)):
                continue  # job does not prefer this agent
            if agent == winner:
                continue
            slots = load.get(agent, [])
            if len(slots) < capacity:
                return False
            if any(agent_rank[agent][job] < agent_rank[agent][held] for held in slots):
                return False
    return True
