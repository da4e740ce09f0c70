"""Synthetic CSV tables shaped like the simulator's outputs."""
from __future__ import annotations

import csv
from pathlib import Path

from gigfigs.tables import AGENT_COLUMNS, MARKET_COLUMNS


def write_market_table(path, rows) -> Path:
    """rows: (round, unemployment, vacancy, availability, avg_winning_bid,
    output) tuples. None becomes an empty cell, matching how the simulator
    writes undefined rates."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(MARKET_COLUMNS)
        for round_index, *values in rows:
            cells = [round_index]
            cells.extend("" if v is None else repr(float(v)) for v in values)
            cells.extend(["0.00", "0.00"])
            writer.writerow(cells)
    return Path(path)


def write_agent_table(path, shares) -> Path:
    """Agent summary table with the given market_share column; every other
    column is filler, which the readers must ignore."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(AGENT_COLUMNS)
        for i, share in enumerate(shares):
            row = dict.fromkeys(AGENT_COLUMNS, "0")
            row["agent"] = f"AG-{i:02d}"
            row["kind"] = "RANDOM"
            row["market_share"] = repr(float(share))
            writer.writerow([row[column] for column in AGENT_COLUMNS])
    return Path(path)
