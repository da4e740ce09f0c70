"""Scenario schedules: timed market shocks and run-wide rule switches.

A scenario either reshapes the job board during a span of rounds
(RECESSION, DEMAND_SHIFT) or flips one market rule for the whole run
(PRICE_SENSITIVITY, DISCLOSURE, PAYMENT). Transforms are pure functions
of (round, base listings), so replays are stable.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .errors import ConfigError
from .money import Money, quantize_cents, to_money

BASELINE = "BASELINE"
RECESSION = "RECESSION"
DEMAND_SHIFT = "DEMAND_SHIFT"
PRICE_SENSITIVITY = "PRICE_SENSITIVITY"
DISCLOSURE = "DISCLOSURE"
PAYMENT = "PAYMENT"
KINDS = (BASELINE, RECESSION, DEMAND_SHIFT, PRICE_SENSITIVITY, DISCLOSURE, PAYMENT)

OPEN = "OPEN"
SEALED = "SEALED"
FLAT = "FLAT"
PERFORMANCE = "PERFORMANCE"


@dataclass(frozen=True)
class JobListing:
    """One posted job: symbolic id, task type, nonnegative budget."""

    job_id: str
    task: str
    budget: Money


@dataclass(frozen=True)
class Scenario:
    """One scheduled intervention; unused fields stay at their defaults.

    start/stop bound the affected rounds (stop exclusive; None = end of
    run). Rule switches (reputation_weight, disclosure, payment) ignore
    the bounds and apply run-wide.
    """

    kind: str
    start: int = 0
    stop: int | None = None
    budget_floor: float | str = 1.0
    job_count: int = 2
    task: str = ""
    budget_multiplier: float = 1.0
    extra_jobs: int = 0
    reputation_weight: float | None = None
    disclosure: str | None = None
    payment: str | None = None

    def validate(self, horizon: int, tasks: Sequence[str]) -> None:
        if self.kind not in KINDS:
            raise ConfigError("scenario.kind", f"unknown kind {self.kind!r}")
        if not 0 <= self.start <= horizon:
            raise ConfigError("scenario.start", "round range must lie within the horizon")
        if self.stop is not None and not self.start <= self.stop <= horizon:
            raise ConfigError("scenario.stop", "round range must lie within the horizon")
        if self.kind == RECESSION and self.job_count < 0:
            raise ConfigError("scenario.job_count", "must be nonnegative")
        if self.kind == DEMAND_SHIFT:
            if self.task not in tasks:
                raise ConfigError("scenario.task", f"unknown task {self.task!r}")
            if self.budget_multiplier <= 0:
                raise ConfigError("scenario.budget_multiplier", "must be positive")
            if self.extra_jobs < 0:
                raise ConfigError("scenario.extra_jobs", "must be nonnegative")
        if self.kind == PRICE_SENSITIVITY:
            if self.reputation_weight is None or not 0.0 < self.reputation_weight < 1.0:
                raise ConfigError(
                    "scenario.reputation_weight", "override must lie strictly in (0, 1)"
                )
        if self.kind == DISCLOSURE and self.disclosure not in (OPEN, SEALED):
            raise ConfigError("scenario.disclosure", "must be OPEN or SEALED")
        if self.kind == PAYMENT and self.payment not in (FLAT, PERFORMANCE):
            raise ConfigError("scenario.payment", "must be FLAT or PERFORMANCE")

    def active(self, round_index: int) -> bool:
        if round_index < self.start:
            return False
        return self.stop is None or round_index < self.stop


def resolve_overrides(schedule: Sequence[Scenario]) -> dict[str, object]:
    """Collapse run-wide rule switches into one override mapping.

    Two scenarios overriding the same rule to different values is a
    configuration error, not a silent last-wins.
    """
    out: dict[str, object] = {}
    for scenario in schedule:
        for field in ("reputation_weight", "disclosure", "payment"):
            value = getattr(scenario, field)
            if value is None:
                continue
            if field in out and out[field] != value:
                raise ConfigError(
                    f"scenario.{field}",
                    f"conflicting overrides: {out[field]!r} vs {value!r}",
                )
            out[field] = value
    return out


def _scaled(budget: Money, multiplier: float) -> Money:
    return quantize_cents(budget * Fraction(repr(float(multiplier))))


def _recession(
    listings: list[JobListing],
    scenario: Scenario,
    round_index: int,
    tasks: Sequence[str],
) -> list[JobListing]:
    floor = to_money(scenario.budget_floor)
    clamped = [ln if ln.budget <= floor else replace(ln, budget=floor) for ln in listings]
    by_task: dict[str, list[JobListing]] = {task: [] for task in tasks}
    for ln in clamped:
        by_task.setdefault(ln.task, []).append(ln)
    # rotate the task order by round so a shrunken board cycles fairly
    shift = round_index % len(tasks) if tasks else 0
    order = list(tasks[shift:]) + list(tasks[:shift])
    kept: list[JobListing] = []
    depth = 0
    while len(kept) < scenario.job_count:
        row = [by_task[t][depth] for t in order if depth < len(by_task[t])]
        if not row:
            break
        kept.extend(row[: scenario.job_count - len(kept)])
        depth += 1
    return kept


def _demand_shift(
    listings: list[JobListing],
    scenario: Scenario,
    budget_schedule: Sequence[Money],
) -> list[JobListing]:
    out: list[JobListing] = []
    count = 0
    for ln in listings:
        if ln.task == scenario.task:
            out.append(replace(ln, budget=_scaled(ln.budget, scenario.budget_multiplier)))
            count += 1
        else:
            out.append(ln)
    suffix = scenario.task.split("-", 1)[-1]
    for extra in range(scenario.extra_jobs):
        base = budget_schedule[(count + extra) % len(budget_schedule)]
        out.append(
            JobListing(
                job_id=f"JB-{suffix}{count + extra}",
                task=scenario.task,
                budget=_scaled(base, scenario.budget_multiplier),
            )
        )
    return out


def apply_to_listings(
    schedule: Sequence[Scenario],
    round_index: int,
    listings: Sequence[JobListing],
    tasks: Sequence[str],
    budget_schedule: Sequence[Money],
) -> list[JobListing]:
    """Apply every active board-shaping scenario, in schedule order."""
    out = list(listings)
    for scenario in schedule:
        if not scenario.active(round_index):
            continue
        if scenario.kind == RECESSION:
            out = _recession(out, scenario, round_index, tasks)
        elif scenario.kind == DEMAND_SHIFT:
            out = _demand_shift(out, scenario, budget_schedule)
    return out
