"""Failure detection: heartbeat counters and the trusted-set oracle.

The broadcast state machine consumes both through an immutable
`DetectorView` snapshot taken once per iteration. Heartbeat counters
self-repair through max-folds on received HEARTBEAT packets; the trusted
set is backed by the simulator's delayed crash oracle and is overwritten
wholesale on every `reconcile`, which removes corruption in either
direction within one iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .wire import Heartbeat


@dataclass(frozen=True, slots=True)
class DetectorView:
    """Per-iteration snapshot of the detector outputs. Index 0 of `hb` is unused."""

    trusted: frozenset[int]
    hb: tuple[int, ...]


class HeartbeatState:
    """Per-peer liveness counters: bounded for crashed peers, unbounded for live ones."""

    def __init__(self, self_id: int, n: int):
        self.self_id = self_id
        self.n = n
        self.hb = [0] * (n + 1)  # index 0 unused

    def tick(self) -> list[tuple[int, Heartbeat]]:
        """Increment own counter and emit a heartbeat to every peer."""
        self.hb[self.self_id] += 1
        own = self.hb[self.self_id]
        return [
            (j, Heartbeat(sender_count=own, dst_count=self.hb[j]))
            for j in range(1, self.n + 1)
            if j != self.self_id
        ]

    def on_heartbeat(self, sender_count: int, dst_count: int, from_id: int) -> None:
        """Max-fold the received counters; the echoed own entry repairs local regressions."""
        if sender_count > self.hb[from_id]:
            self.hb[from_id] = sender_count
        if dst_count > self.hb[self.self_id]:
            self.hb[self.self_id] = dst_count

    def reset(self) -> None:
        self.hb = [0] * (self.n + 1)

    def snapshot(self) -> tuple[int, ...]:
        return tuple(self.hb)


class ThetaState:
    """Trusted-set detector: trusted = all nodes minus the suspected set."""

    def __init__(self, self_id: int, n: int):
        self.self_id = self_id
        self.n = n
        self.suspected: set[int] = set()

    def on_crash_notice(self, crashed: int) -> None:
        self.suspected.add(crashed)

    def reconcile(self, oracle_crashed: set[int]) -> None:
        """Overwrite with the (delayed) ground truth; repairs corrupted suspicion."""
        self.suspected = set(oracle_crashed)

    def trusted_view(self) -> frozenset[int]:
        return frozenset(k for k in range(1, self.n + 1) if k not in self.suspected)
