"""Trace persistence: newline-delimited JSON records, byte-stable.

A trace file is a versioned header record, an init record, one record per
round, and a final record. Records are serialized with compact separators
and the field order fixed by their builders, so identical runs produce
identical bytes.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Iterator, Mapping

TRACE_VERSION = 1


def dumps_record(record: Mapping) -> str:
    return json.dumps(record, separators=(",", ":"), allow_nan=False)


def header_record(seed: int, config: Mapping) -> dict:
    return {"type": "header", "version": TRACE_VERSION, "seed": seed, "config": dict(config)}


class TraceWriter:
    """Streams records to a file, one JSON object per line."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._file = open(self.path, "w", encoding="utf-8", newline="\n")

    def write(self, record: Mapping) -> None:
        self._file.write(dumps_record(record))
        self._file.write("\n")

    def close(self) -> None:
        self._file.close()

    def __enter__(self) -> "TraceWriter":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def iter_trace(path: str | Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                yield json.loads(line)


def read_trace(path: str | Path) -> list[dict]:
    return list(iter_trace(path))


def round_records(records: list[dict]) -> list[dict]:
    return [r for r in records if r.get("type") == "round"]


def header_of(records: list[dict]) -> dict:
    head = records[0]
    if head.get("type") != "header":
        raise ValueError("trace does not start with a header record")
    if head.get("version") != TRACE_VERSION:
        raise ValueError(f"unsupported trace version: {head.get('version')!r}")
    return head


def final_of(records: list[dict]) -> dict:
    tail = records[-1]
    if tail.get("type") != "final":
        raise ValueError("trace does not end with a final record")
    return tail


def trace_hash(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()
