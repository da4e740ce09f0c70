"""Figure rendering: one image plus one text sidecar per call.

All inputs are read and validated before anything is written, so a bad
table never leaves a half-finished figure behind. The sidecar carries the
fitted numbers in full precision, one "key value" line each.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import fits
from .tables import MarketRow, read_market_shares, read_market_table

KINDS = ("beveridge", "okun", "gini", "price-paths", "train-rate", "recession")


@dataclass(frozen=True)
class TableGroup:
    """One labeled set of input tables (a single series or bar)."""

    label: str
    paths: tuple[Path, ...]


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    groups: tuple[TableGroup, ...]
    image_path: Path
    window: tuple[int, int] | None = None  # recession rounds [start, stop)


def sidecar_path(image_path: Path) -> Path:
    return image_path.with_suffix(".txt")


def _key(label: str) -> str:
    return "_".join(label.split()) or "series"


def _train_rate(rows: list[MarketRow]) -> list[float]:
    # availability counts agents with accepted bids; the rest trained
    # (or had every entry rejected, which scripted rosters never do).
    return [1.0 - row.availability for row in rows]


def _mean(values: list[float]) -> float | None:
    return fsum(values) / len(values) if values else None


def _pooled_rates(groups: tuple[TableGroup, ...]) -> tuple[list[float], list[float]]:
    unemployment: list[float] = []
    vacancy: list[float] = []
    for group in groups:
        for path in group.paths:
            for row in read_market_table(path):
                if row.unemployment is not None and row.vacancy is not None:
                    unemployment.append(row.unemployment)
                    vacancy.append(row.vacancy)
    return vacancy, unemployment


def _draw_beveridge(spec: FigureSpec, ax) -> dict[str, object]:
    vacancy, unemployment = _pooled_rates(spec.groups)
    fit = fits.fit_hyperbola(vacancy, unemployment)
    ax.scatter(vacancy, unemployment, s=8, alpha=0.35, edgecolors="none")
    grid = np.linspace(min(vacancy), max(vacancy), 200)
    grid = grid[grid + fit.b > 1e-9]
    ax.plot(grid, fit.a / (grid + fit.b) + fit.c, linewidth=1.5)
    ax.set_xlabel("vacancy rate")
    ax.set_ylabel("unemployment rate")
    ax.set_title(f"fit r2 = {fit.r_squared:.3f}")
    return {"n": fit.n, "a": fit.a, "b": fit.b, "c": fit.c, "r_squared": fit.r_squared}


def _draw_okun(spec: FigureSpec, ax) -> dict[str, object]:
    points = []
    for group in spec.groups:
        for path in group.paths:
            points.append(fits.macro_point(read_market_table(path)))
    du, dy = fits.growth_deltas(points)
    fit = fits.fit_line(du, dy)
    ax.scatter(du, dy, s=20)
    grid = np.linspace(min(du), max(du), 2)
    ax.plot(grid, fit.slope * grid + fit.intercept, linewidth=1.5)
    ax.set_xlabel("unemployment change (points)")
    ax.set_ylabel("output growth (%)")
    ax.set_title(f"slope = {fit.slope:.3f}, r2 = {fit.r_squared:.3f}")
    return {
        "n": fit.n,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
    }


def _draw_gini(spec: FigureSpec, ax) -> dict[str, object]:
    sidecar: dict[str, object] = {}
    labels, means, scatter = [], [], []
    for group in spec.groups:
        values = [fits.gini(read_market_shares(path)) for path in group.paths]
        labels.append(group.label)
        means.append(_mean(values))
        scatter.append(values)
        sidecar[f"mean_gini_{_key(group.label)}"] = means[-1]
        sidecar[f"runs_{_key(group.label)}"] = len(values)
    positions = np.arange(len(labels))
    ax.bar(positions, means, width=0.6, alpha=0.7)
    for pos, values in zip(positions, scatter):
        ax.plot([pos] * len(values), values, "k.", markersize=4)
    ax.set_xticks(positions, labels)
    ax.set_ylabel("gini of market shares")
    return sidecar


def _draw_paths(spec: FigureSpec, ax, value_of, ylabel: str) -> dict[str, object]:
    sidecar: dict[str, object] = {}
    for group in spec.groups:
        rows = read_market_table(group.paths[0])
        series = [value_of(row) for row in rows]
        xs = [row.round for row in rows]
        ax.plot(xs, [np.nan if v is None else v for v in series], label=group.label)
        sidecar[f"mean_{_key(group.label)}"] = _mean([v for v in series if v is not None])
    ax.set_xlabel("round")
    ax.set_ylabel(ylabel)
    ax.legend()
    return sidecar


def _draw_recession(spec: FigureSpec, fig) -> dict[str, object]:
    if spec.window is None:
        raise ValueError("recession figures need a (start, stop) round window")
    start, stop = spec.window
    sidecar: dict[str, object] = {"window_start": start, "window_stop": stop}
    axes = fig.subplots(len(spec.groups), 1, sharex=True, squeeze=False)[:, 0]
    for ax, group in zip(axes, spec.groups):
        rows = read_market_table(group.paths[0])
        rates = _train_rate(rows)
        ax.plot([row.round for row in rows], rates)
        phases = {
            "before": [r for row, r in zip(rows, rates) if row.round < start],
            "during": [r for row, r in zip(rows, rates) if start <= row.round < stop],
            "after": [r for row, r in zip(rows, rates) if row.round >= stop],
        }
        for phase, values in phases.items():
            sidecar[f"{_key(group.label)}_{phase}"] = _mean(values)
        ax.axvspan(start, stop - 1, alpha=0.15, color="grey")
        ax.set_ylabel(group.label)
    axes[-1].set_xlabel("round")
    return sidecar


def render(spec: FigureSpec) -> tuple[Path, Path]:
    """Draw one figure and write its sidecar; returns both paths."""
    if spec.kind not in KINDS:
        raise ValueError(f"unknown figure kind {spec.kind!r}")
    if not spec.groups or not all(group.paths for group in spec.groups):
        raise ValueError("every figure needs at least one input table")
    if spec.kind in ("price-paths", "train-rate", "recession"):
        if any(len(group.paths) != 1 for group in spec.groups):
            raise ValueError("trajectory figures take exactly one table per series")

    fig = plt.figure(figsize=(6.0, 4.0), layout="constrained")
    try:
        if spec.kind == "recession":
            sidecar = _draw_recession(spec, fig)
        else:
            ax = fig.subplots()
            if spec.kind == "beveridge":
                sidecar = _draw_beveridge(spec, ax)
            elif spec.kind == "okun":
                sidecar = _draw_okun(spec, ax)
            elif spec.kind == "gini":
                sidecar = _draw_gini(spec, ax)
            elif spec.kind == "price-paths":
                sidecar = _draw_paths(
                    spec, ax, lambda row: row.avg_winning_bid, "mean winning bid over budget"
                )
            else:
                sidecar = _draw_paths(
                    spec, ax, lambda row: 1.0 - row.availability, "share of agents training"
                )

        image = Path(spec.image_path)
        image.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(image, dpi=150)
    finally:
        plt.close(fig)

    lines = [f"kind {spec.kind}"]
    for key, value in sidecar.items():
        lines.append(f"{key} {value!r}" if isinstance(value, float) else f"{key} {value}")
    side = sidecar_path(image)
    side.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return image, side


def read_sidecar(path: str | Path) -> dict[str, str]:
    """Sidecar lines back into a key to text mapping."""
    out: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition(" ")
        out[key] = value
    return out
