"""Performance realization and skill growth.

Latent skill maps to an expected quality through the saturating curve
m = skill / (skill + halfpoint); realized quality is Beta-distributed
around m with concentration kappa. Skill rises along a plateauing curve:
each learning event adds learning_rate * (1 - skill / skill_cap), scaled
by how well (or whether) the attempt went.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .rng import RngStream

INTENT_BID = "BID"
INTENT_TRAIN = "TRAIN"


@dataclass(frozen=True)
class SkillParams:
    skill_cap: float = 10.0
    learning_rate: float = 0.5
    halfpoint: float = 2.0
    concentration: float = 10.0
    practice_rate: float = 0.1

    def validate(self) -> None:
        if self.skill_cap <= 0:
            raise ValueError("skill_cap must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be nonnegative")
        if self.halfpoint <= 0:
            raise ValueError("halfpoint must be positive")
        if self.concentration <= 0:
            raise ValueError("concentration must be positive")
        if not 0.0 <= self.practice_rate <= 1.0:
            raise ValueError("practice_rate must lie in [0, 1]")


def expected_quality(skill: float, params: SkillParams) -> float:
    """Saturating mean quality in [0, 1)."""
    if skill < 0:
        raise ValueError("skill must be nonnegative")
    return skill / (skill + params.halfpoint)


def realize_performance(skill: float, params: SkillParams, rng: RngStream) -> float:
    """Draw realized quality ~ Beta(kappa*m, kappa*(1-m)) with m the
    expected quality.

    Zero skill short-circuits to exactly 0.0 without consuming a draw; the
    Beta's first shape parameter would be 0, outside its domain.
    """
    m = expected_quality(skill, params)
    if m == 0.0:
        return 0.0
    return float(rng.beta(params.concentration * m, params.concentration * (1.0 - m)))


def skill_gain(skill: float, params: SkillParams) -> float:
    """Marginal gain factor, linear in remaining headroom; zero at the cap."""
    return params.learning_rate * (1.0 - skill / params.skill_cap)


def train_targets(targets: Sequence[str]) -> list[str]:
    """Distinct training targets in submitted order.

    An empty result means the round's training action is a recorded no-op.
    """
    seen: list[str] = []
    for task in targets:
        if task not in seen:
            seen.append(task)
    return seen


def update_skill(
    skills: Mapping[str, float],
    intent: str,
    matched_tasks: Sequence[str],
    top_pref_task: str | None,
    performances: Sequence[float],
    params: SkillParams,
    rng: RngStream,
    training: Sequence[str] = (),
) -> dict[str, float]:
    """One round of skill transition for a single agent.

    TRAIN applies a full gain step to each distinct task in `training`.
    BID with matched jobs flips an independent practice coin per job (in
    the given order) and, on success, adds gain scaled by that job's
    realized quality. BID with no matches practices the top preferred
    task with the same coin, scaled by a fresh uniform draw (unfocused
    development); the uniform is consumed only when the coin lands.
    """
    out = dict(skills)

    def bump(task: str, scale: float) -> None:
        level = out[task]
        out[task] = min(params.skill_cap, level + skill_gain(level, params) * scale)

    if intent == INTENT_TRAIN:
        for task in train_targets(training):
            bump(task, 1.0)
        return out

    if matched_tasks:
        if len(matched_tasks) != len(performances):
            raise ValueError("one performance per matched task required")
        for task, quality in zip(matched_tasks, performances):
            if rng.random() < params.practice_rate:
                bump(task, quality)
        return out

    if top_pref_task is not None and rng.random() < params.practice_rate:
        bump(top_pref_task, rng.random())
    return out
