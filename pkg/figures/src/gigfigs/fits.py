"""Frozen fit recipe for the sidecar numbers.

Sidecar values must be recomputable from the tables alone and agree with
the simulator's own metrics to 1e-6, so everything numeric here is pinned:
the hyperbola initial guess and iteration cap, plain polyfit for lines,
and fsum-based aggregation. Do not tweak without versioning the sidecars.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import fsum
from typing import Sequence

import numpy as np
from scipy.optimize import curve_fit

from .tables import MarketRow

HYPERBOLA_P0 = (0.1, 0.1, 0.0)
HYPERBOLA_MAXFEV = 20000


@dataclass(frozen=True)
class HyperbolaFit:
    """y = a / (x + b) + c over n points."""

    a: float
    b: float
    c: float
    r_squared: float
    n: int


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    r_squared: float
    n: int


def r_squared(actual: Sequence[float], predicted: Sequence[float]) -> float:
    mean = fsum(actual) / len(actual)
    ss_res = fsum((a - p) ** 2 for a, p in zip(actual, predicted))
    ss_tot = fsum((a - mean) ** 2 for a in actual)
    if ss_tot == 0.0:
        return 1.0 if ss_res == 0.0 else 0.0
    return 1.0 - ss_res / ss_tot


def fit_hyperbola(x: Sequence[float], y: Sequence[float]) -> HyperbolaFit:
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.size < 4:
        raise ValueError("need at least 4 points for a 3-parameter fit")

    def curve(v, a, b, c):
        return a / (v + b) + c

    (a, b, c), _ = curve_fit(curve, xs, ys, p0=HYPERBOLA_P0, maxfev=HYPERBOLA_MAXFEV)
    predicted = curve(xs, a, b, c)
    return HyperbolaFit(
        float(a), float(b), float(c), r_squared(ys.tolist(), predicted.tolist()), int(xs.size)
    )


def fit_line(x: Sequence[float], y: Sequence[float]) -> LineFit:
    if len(x) != len(y):
        raise ValueError("mismatched series")
    if len(x) < 2:
        raise ValueError("need at least 2 points for a line")
    slope, intercept = np.polyfit(np.asarray(x, dtype=float), np.asarray(y, dtype=float), 1)
    predicted = [slope * v + intercept for v in x]
    return LineFit(float(slope), float(intercept), r_squared(list(y), predicted), len(x))


def macro_point(rows: Sequence[MarketRow]) -> tuple[float | None, float]:
    """Whole-run mean unemployment and total output for one table."""
    rates = [r.unemployment for r in rows if r.unemployment is not None]
    mean_u = fsum(rates) / len(rates) if rates else None
    return mean_u, fsum(r.output for r in rows)


def growth_deltas(
    points: Sequence[tuple[float | None, float]]
) -> tuple[list[float], list[float]]:
    """Consecutive per-run changes: unemployment in percentage points,
    output growth in percent. Undefined rates and nonpositive base output
    drop the pair."""
    du: list[float] = []
    dy: list[float] = []
    for (u_prev, o_prev), (u_next, o_next) in zip(points, points[1:]):
        if u_prev is None or u_next is None or o_prev <= 0.0:
            continue
        du.append(100.0 * (u_next - u_prev))
        dy.append(100.0 * (o_next - o_prev) / o_prev)
    return du, dy


def gini(shares: Sequence[float]) -> float:
    """Mean absolute difference over twice the mean; 0 for no activity."""
    values = list(shares)
    n = len(values)
    if n == 0:
        return 0.0
    if any(s < 0 for s in values):
        raise ValueError("shares must be nonnegative")
    mean = fsum(values) / n
    if mean == 0.0:
        return 0.0
    mad = fsum(abs(a - b) for a in values for b in values) / (n * n)
    return mad / (2.0 * mean)
