"""Seeded randomness with per-round, per-purpose substreams.

Every random draw in a run comes from a stream addressed by
(round, purpose[, key]) and derived from the single master seed, so adding
draws in one phase of the timestep never perturbs any other phase. Streams
count the variates they hand out; the counts are recorded in traces.
"""
from __future__ import annotations

import numpy as np

# Stable purpose codes; order is part of the trace format, do not reorder.
PURPOSES = (
    "roster",
    "init_skill",
    "init_performance",
    "posting",
    "policy",
    "gumbel",
    "performance",
    "skill",
    "benchmark",
    "tiebreak",
    "termination",
)
_PURPOSE_CODE = {name: i for i, name in enumerate(PURPOSES)}

INIT_ROUND = -1


class RngStream:
    """Counting wrapper over a numpy Generator."""

    def __init__(self, generator: np.random.Generator):
        self._gen = generator
        self.draws = 0

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        self.draws += 1
        return float(self._gen.uniform(low, high))

    def random(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def beta(self, a: float, b: float) -> float:
        self.draws += 1
        return float(self._gen.beta(a, b))

    def gumbel(self) -> float:
        self.draws += 1
        return float(self._gen.gumbel())

    def integers(self, low: int, high: int) -> int:
        """One integer in [low, high)."""
        self.draws += 1
        return int(self._gen.integers(low, high))

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), in draw order."""
        self.draws += k
        return [int(i) for i in self._gen.choice(n, size=k, replace=False)]


class RngBank:
    """Hands out deterministic substreams keyed by (round, purpose, key).

    Repeated requests for the same address return the same stream object,
    so draw counts accumulate within a round.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._streams: dict[tuple[int, str, int], RngStream] = {}

    def stream(self, round_index: int, purpose: str, key: int = 0) -> RngStream:
        if purpose not in _PURPOSE_CODE:
            raise ValueError(f"unknown rng purpose: {purpose!r}")
        address = (round_index, purpose, key)
        found = self._streams.get(address)
        if found is not None:
            return found
        seq = np.random.SeedSequence(
            entropy=self.seed,
            spawn_key=(_PURPOSE_CODE[purpose], round_index + 2**16, key),
        )
        stream = RngStream(np.random.Generator(np.random.PCG64(seq)))
        self._streams[address] = stream
        return stream

    def draws_for_round(self, round_index: int) -> dict[str, int]:
        """Total variates drawn per purpose at one round, zero-count purposes omitted."""
        counts: dict[str, int] = {}
        for (rnd, purpose, _key), stream in self._streams.items():
            if rnd == round_index and stream.draws:
                counts[purpose] = counts.get(purpose, 0) + stream.draws
        return dict(sorted(counts.items(), key=lambda kv: _PURPOSE_CODE[kv[0]]))
