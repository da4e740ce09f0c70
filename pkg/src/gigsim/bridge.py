"""Wire bridge to external agent processes.

An external agent is any executable that speaks the line protocol: one
JSON request per round on stdin ({"type": "observe", ...}), one JSON
reply on stdout ({"type": "act", "memo": ..., "action": "bid"|"train",
"targets": [...]}). The bridge never trusts the endpoint: timeouts,
dead processes, and malformed bytes all degrade to a fallback training
action, recorded as a fault in the trace, and the run continues.
"""
from __future__ import annotations

import json
import queue
import subprocess
import threading
from typing import Sequence

from .core import AgentAction, bid_action, train_action
from .agents import Observation, assert_information_hiding
from .trace_io import dumps_record

BRIDGE_FAULT = "BRIDGE_FAULT"
DEFAULT_TIMEOUT = 5.0


class BridgeError(RuntimeError):
    pass


def fallback_action(obs: Observation, reason: str) -> AgentAction:
    """Train the agent's current best-reputation task (ties to the
    lexicographically first task)."""
    best = sorted(obs.reputation.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
    return train_action([best], note=f"{BRIDGE_FAULT}: {reason}")


def parse_reply(line: str) -> AgentAction:
    """Turn one reply line into an action; malformed structure raises."""
    try:
        data = json.loads(line)
    except json.JSONDecodeError as err:
        raise BridgeError(f"reply is not valid JSON: {err}") from err
    if not isinstance(data, dict) or data.get("type") != "act":
        raise BridgeError("reply is not an act message")
    memo = data.get("memo", "")
    if not isinstance(memo, str):
        raise BridgeError("memo must be a string")
    action = data.get("action")
    targets = data.get("targets", [])
    if not isinstance(targets, list):
        raise BridgeError("targets must be a list")
    if action == "train":
        if not all(isinstance(t, str) for t in targets):
            raise BridgeError("train targets must be task ids")
        return train_action(targets, memo=memo)
    if action == "bid":
        entries = []
        for item in targets:
            if not isinstance(item, (list, tuple)) or len(item) != 2 or not isinstance(item[0], str):
                raise BridgeError("bid targets must be [job_id, price] pairs")
            job, price = item
            if not isinstance(price, (int, float, str)):
                raise BridgeError("bid price must be a number or string")
            try:
                entries.append((job, price))
            except (ValueError, ArithmeticError) as err:
                raise BridgeError(f"unparseable price: {err}") from err
        try:
            return bid_action(entries, memo=memo)
        except (ValueError, ArithmeticError) as err:
            raise BridgeError(f"unparseable price: {err}") from err
    raise BridgeError(f"unknown action {action!r}")


class BridgeAgent:
    """Owns one endpoint subprocess and exchanges one message per round."""

    def __init__(self, agent_id: str, command: Sequence[str], timeout: float = DEFAULT_TIMEOUT):
        self.agent_id = agent_id
        self.command = list(command)
        self.timeout = timeout
        self._process: subprocess.Popen | None = None
        self._lines: "queue.Queue[str]" = queue.Queue()
        self._reader: threading.Thread | None = None

    def start(self) -> None:
        self._process = subprocess.Popen(
            self.command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            text=True,
            bufsize=1,
        )
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        assert self._process is not None and self._process.stdout is not None
        for line in self._process.stdout:
            self._lines.put(line)

    def act(self, obs: Observation, disclosure: str) -> AgentAction:
        """One observe/act exchange; any fault yields the fallback."""
        request = obs.to_request()
        assert_information_hiding(request, disclosure)
        try:
            if self._process is None:
                self.start()
            assert self._process is not None and self._process.stdin is not None
            while True:  # discard stale unsolicited output
                try:
                    self._lines.get_nowait()
                except queue.Empty:
                    break
            self._process.stdin.write(dumps_record(request) + "\n")
            self._process.stdin.flush()
            line = self._lines.get(timeout=self.timeout)
            return parse_reply(line)
        except queue.Empty:
            return fallback_action(obs, "timeout")
        except BridgeError as err:
            return fallback_action(obs, str(err))
        except OSError as err:
            return fallback_action(obs, f"endpoint io error: {err}")

    def close(self) -> None:
        if self._process is None:
            return
        try:
            if self._process.stdin is not None:
                self._process.stdin.close()
            self._process.terminate()
            self._process.wait(timeout=2.0)
        except (OSError, subprocess.TimeoutExpired):
            self._process.kill()
        self._process = None

    def __enter__(self) -> "BridgeAgent":
        if self._process is None:
            self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.close()
