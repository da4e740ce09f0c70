from __future__ import annotations

import json
import subprocess
import sys

import pytest

JOB_SWEEP = (30, 37, 45, 52, 60, 68, 75, 83, 91, 100)


@pytest.fixture(scope="session")
def sweep_tables(tmp_path_factory):
    """Market tables for the ten-run job sweep, regenerated through the
    simulator CLI so only the documented interfaces are exercised."""
    root = tmp_path_factory.mktemp("sweep")
    paths = []
    for seed, jobs in zip(range(10), JOB_SWEEP):
        config = root / f"config{seed}.json"
        config.write_text(json.dumps({"total_jobs": jobs}), encoding="utf-8")
        out = root / f"run{seed}"
        result = subprocess.run(
            [
                sys.executable, "-m", "gigsim", "run",
                "--config", str(config),
                "--seeds", str(seed),
                "--out", str(out),
            ],
            capture_output=True,
            text=True,
        )
        assert result.returncode == 0, result.stderr
        paths.append(out / f"market_seed{seed}.csv")
    return paths
