"""Typed readers for the simulator's CSV tables.

The tables are the only coupling to the simulator: these readers pin the
documented header rows and fail loudly when a file does not carry them.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path


class SchemaError(ValueError):
    """A table is missing a documented column or holds no data."""


MARKET_COLUMNS = (
    "round",
    "unemployment",
    "vacancy",
    "availability",
    "avg_winning_bid",
    "output",
    "payouts",
    "client_utility",
)

AGENT_COLUMNS = (
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


@dataclass(frozen=True)
class MarketRow:
    round: int
    unemployment: float | None
    vacancy: float | None
    availability: float
    avg_winning_bid: float | None
    output: float


def _rows_of(path: Path, expected: tuple[str, ...]) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames or []
        for column in expected:
            if column not in header:
                raise SchemaError(f"{path}: missing column {column!r}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _optional(path: Path, row: dict, key: str) -> float | None:
    cell = row[key]
    if cell == "":
        return None
    try:
        return float(cell)
    except ValueError as err:
        raise SchemaError(f"{path}: bad {key} value {cell!r}") from err


def _required(path: Path, row: dict, key: str) -> float:
    value = _optional(path, row, key)
    if value is None:
        raise SchemaError(f"{path}: empty {key} cell")
    return value


def read_market_table(path: str | Path) -> list[MarketRow]:
    """One row per round; empty cells (undefined rates) become None."""
    path = Path(path)
    out: list[MarketRow] = []
    for row in _rows_of(path, MARKET_COLUMNS):
        out.append(
            MarketRow(
                round=int(row["round"]),
                unemployment=_optional(path, row, "unemployment"),
                vacancy=_optional(path, row, "vacancy"),
                availability=_required(path, row, "availability"),
                avg_winning_bid=_optional(path, row, "avg_winning_bid"),
                output=_required(path, row, "output"),
            )
        )
    return out


def read_market_shares(path: str | Path) -> list[float]:
    """Per-agent market shares (percent) from an agent summary table."""
    path = Path(path)
    return [_required(path, row, "market_share") for row in _rows_of(path, AGENT_COLUMNS)]
