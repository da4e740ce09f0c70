"""End-to-end check against freshly regenerated simulator tables.

The sweep fixture rebuilds the ten-run job sweep through the simulator's
CLI, so everything here flows through the documented interfaces: CSV in,
image plus sidecar out. Each sidecar number is then recomputed from the
raw CSV with scipy/numpy directly, bypassing this package's own fit code.
"""
from __future__ import annotations

import csv
from math import fsum

import numpy as np
import pytest
from scipy.optimize import curve_fit

from gigfigs.render import FigureSpec, TableGroup, read_sidecar, render, sidecar_path

HYPERBOLA_P0 = (0.1, 0.1, 0.0)
HYPERBOLA_MAXFEV = 20000


def _raw_rows(path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return list(csv.DictReader(f))


def _r2(actual, predicted) -> float:
    mean = fsum(actual) / len(actual)
    ss_res = fsum((a - p) ** 2 for a, p in zip(actual, predicted))
    ss_tot = fsum((a - mean) ** 2 for a in actual)
    return 1.0 - ss_res / ss_tot


def test_beveridge_sidecar_is_recomputable(sweep_tables, tmp_path):
    image = tmp_path / "beveridge.png"
    render(FigureSpec("beveridge", (TableGroup("all", tuple(sweep_tables)),), image))
    side = read_sidecar(sidecar_path(image))

    vacancy: list[float] = []
    unemployment: list[float] = []
    for path in sweep_tables:
        for row in _raw_rows(path):
            if row["unemployment"] != "" and row["vacancy"] != "":
                vacancy.append(float(row["vacancy"]))
                unemployment.append(float(row["unemployment"]))

    def curve(v, a, b, c):
        return a / (v + b) + c

    (a, b, c), _ = curve_fit(
        curve,
        np.asarray(vacancy),
        np.asarray(unemployment),
        p0=HYPERBOLA_P0,
        maxfev=HYPERBOLA_MAXFEV,
    )
    expected_r2 = _r2(unemployment, [curve(v, a, b, c) for v in vacancy])

    assert int(side["n"]) == len(vacancy)
    assert float(side["a"]) == pytest.approx(a, abs=1e-6)
    assert float(side["b"]) == pytest.approx(b, abs=1e-6)
    assert float(side["c"]) == pytest.approx(c, abs=1e-6)
    assert float(side["r_squared"]) == pytest.approx(expected_r2, abs=1e-6)
    assert float(side["r_squared"]) >= 0.5


def test_okun_sidecar_is_recomputable(sweep_tables, tmp_path):
    image = tmp_path / "okun.png"
    render(FigureSpec("okun", (TableGroup("all", tuple(sweep_tables)),), image))
    side = read_sidecar(sidecar_path(image))

    points: list[tuple[float | None, float]] = []
    for path in sweep_tables:
        rows = _raw_rows(path)
        rates = [float(r["unemployment"]) for r in rows if r["unemployment"] != ""]
        mean_u = fsum(rates) / len(rates) if rates else None
        points.append((mean_u, fsum(float(r["output"]) for r in rows)))

    du: list[float] = []
    dy: list[float] = []
    for (u_prev, o_prev), (u_next, o_next) in zip(points, points[1:]):
        if u_prev is None or u_next is None or o_prev <= 0.0:
            continue
        du.append(100.0 * (u_next - u_prev))
        dy.append(100.0 * (o_next - o_prev) / o_prev)
    slope, intercept = np.polyfit(du, dy, 1)
    expected_r2 = _r2(dy, [slope * x + intercept for x in du])

    assert int(side["n"]) == len(du) == 9
    assert float(side["slope"]) == pytest.approx(slope, abs=1e-6)
    assert float(side["intercept"]) == pytest.approx(intercept, abs=1e-6)
    assert float(side["r_squared"]) == pytest.approx(expected_r2, abs=1e-6)
    assert -4.0 <= float(side["slope"]) <= -0.5
    assert float(side["r_squared"]) >= 0.2
