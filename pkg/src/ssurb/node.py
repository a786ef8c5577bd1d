"""The broadcast protocol state machine for one node.

Every operation is a deterministic transition on `NodeState`: the public
broadcast operation, the record-merging `update` procedure, one full
iteration of the repair/deliver/gossip loop, and the three packet
handlers. Transitions never perform I/O and never read ambient time, so
a (state, detector view, input) triple always produces bit-identical
results; the simulator owns scheduling, channels and tracing.

The iteration must be total on arbitrary states: corrupted buffers,
regressed counters and skewed windows are repaired, never rejected.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .detectors import DetectorView
from .wire import Gossip, Msg, MsgAck, WireMessage

NORMAL = "normal"
DISABLED = "disabled"
RESETTING = "resetting"


@dataclass(slots=True)
class BufferRecord:
    """One in-flight broadcast: payload, identity, delivery flag, ack set, heartbeat marks."""

    payload: str | None
    sender: int
    seq: int
    delivered: bool
    rec_by: set[int]
    prev_hb: list[int]  # length n+1, index 0 unused, entries start at -1


@dataclass(slots=True)
class IterationResult:
    outgoing: list[tuple[int, WireMessage]] = field(default_factory=list)
    delivered: list[tuple[int, int]] = field(default_factory=list)
    accepted: list[tuple[tuple[int, int], str]] = field(default_factory=list)


def _record_key(r: BufferRecord) -> tuple[int, int]:
    return (r.sender, r.seq)


class NodeState:
    def __init__(
        self,
        self_id: int,
        n: int,
        buffer_unit_size: int,
        fifo: bool = False,
        maxint: int | None = None,
    ):
        self.self_id = self_id
        self.n = n
        self.buffer_unit_size = buffer_unit_size
        self.fifo = fifo
        self.maxint = maxint
        self.seq = 0
        self.buffer: list[BufferRecord] = []
        self.rx_obs = [0] * (n + 1)
        self.tx_obs = [0] * (n + 1)
        self.next_deliver = [1] * (n + 1)
        self.pending: deque[str] = deque()
        self.reset_phase = NORMAL
        # state as of the last completed repair pass; snapshots and the
        # consistency checker observe nodes here, between-iteration handler
        # effects (late acks, gossip folds) become visible one pass later
        self.observed: dict = self._observe(list(range(1, n + 1)))

    # -- macros -------------------------------------------------------

    def max_seq(self, k: int) -> int:
        """Highest sequence number buffered for sender k (0 if none).

        FIFO mode also counts next_deliver[k] - 1, so a skewed delivery
        cursor is visible to the gossip repair path.
        """
        best = self.next_deliver[k] - 1 if self.fifo else 0
        for r in self.buffer:
            if r.sender == k and r.seq > best:
                best = r.seq
        return best

    def _max_seq_map(self) -> list[int]:
        m = [0] * (self.n + 1)
        if self.fifo:
            for k in range(1, self.n + 1):
                m[k] = self.next_deliver[k] - 1
        for r in self.buffer:
            if r.seq > m[r.sender]:
                m[r.sender] = r.seq
        return m

    def min_tx_obs(self, trusted: frozenset[int]) -> int:
        """Slowest trusted receiver's obsolete watermark; own seq if nobody is trusted."""
        if not trusted:
            return self.seq
        return min(self.tx_obs[k] for k in trusted)

    def is_obsolete(self, r: BufferRecord, trusted: frozenset[int]) -> bool:
        return (
            self.rx_obs[r.sender] + 1 == r.seq
            and trusted.issubset(r.rec_by)
            and r.delivered
        )

    # -- operation and procedure --------------------------------------

    def urb_broadcast(self, view: DetectorView, payload: str) -> tuple[int, int] | None:
        """Accept the broadcast if the flow-control window has room, else queue it.

        Returns the assigned message identity on acceptance, None when deferred.
        """
        if payload is None:
            raise ValueError("cannot broadcast a null payload")
        if self.reset_phase != NORMAL:
            self.pending.append(payload)
            return None
        if self.seq < self.min_tx_obs(view.trusted) + self.buffer_unit_size:
            self.seq += 1
            self.update(payload, self.self_id, self.seq, self.self_id)
            return (self.self_id, self.seq)
        self.pending.append(payload)
        return None

    def update(self, payload: str | None, j: int, s: int, k: int) -> None:
        """Merge knowledge of message (j, s): insert a fresh record or grow its ack set."""
        if s <= self.rx_obs[j]:
            return
        exists = any(r.sender == j and r.seq == s for r in self.buffer)
        if not exists and payload is not None:
            self.buffer.append(
                BufferRecord(
                    payload=payload,
                    sender=j,
                    seq=s,
                    delivered=False,
                    rec_by={j, k},
                    prev_hb=[-1] * (self.n + 1),
                )
            )
        else:
            for r in self.buffer:
                if r.sender == j and r.seq == s:
                    r.rec_by.add(j)
                    r.rec_by.add(k)

    # -- the do-forever iteration --------------------------------------

    def do_forever_iteration(self, view: DetectorView) -> IterationResult:
        out = IterationResult()
        b = self.buffer_unit_size
        trusted = view.trusted

        # (a) purge: a null payload or a duplicated identity voids the whole buffer
        seen: set[tuple[int, int]] = set()
        poisoned = False
        for r in self.buffer:
            key = (r.sender, r.seq)
            if r.payload is None or key in seen:
                poisoned = True
                break
            seen.add(key)
        if poisoned:
            self.buffer = []

        # (b) repair the send window when own records do not cover (mS, seq]
        ms = self.min_tx_obs(trusted)
        window_ok = ms <= self.seq <= ms + b
        if window_ok and self.seq > ms:
            own_seqs = {r.seq for r in self.buffer if r.sender == self.self_id}
            window_ok = all(s in own_seqs for s in range(ms + 1, self.seq + 1))
        if not window_ok:
            self.tx_obs = [self.seq] * (self.n + 1)

        # (c) clamp receive watermarks to the buffered horizon
        for k in range(1, self.n + 1):
            horizon = self.max_seq(k) - b
            if horizon > self.rx_obs[k]:
                self.rx_obs[k] = horizon
            if self.fifo and self.rx_obs[k] + 1 > self.next_deliver[k]:
                self.next_deliver[k] = self.rx_obs[k] + 1

        # (d) advance watermarks over obsolete records, ascending (sender, seq)
        self.buffer.sort(key=_record_key)
        progress = True
        while progress:
            progress = False
            for r in self.buffer:
                if self.is_obsolete(r, trusted):
                    self.rx_obs[r.sender] += 1
                    progress = True
        if self.fifo:
            # keep the delivery cursor ahead of the obsolete watermark before
            # the delivery pass runs
            for k in range(1, self.n + 1):
                if self.rx_obs[k] + 1 > self.next_deliver[k]:
                    self.next_deliver[k] = self.rx_obs[k] + 1

        # (e) trim: own records stay while some trusted receiver still needs them,
        # foreign records stay while inside the receive window
        ms = self.min_tx_obs(trusted)
        max_map = self._max_seq_map()
        self.buffer = [
            r
            for r in self.buffer
            if (
                ms < r.seq
                if r.sender == self.self_id
                else self.rx_obs[r.sender] < r.seq and max_map[r.sender] - b <= r.seq
            )
        ]

        self.observed = self._observe(sorted(trusted))

        # (f) deliver and (re)transmit, ascending (sender, seq)
        u = view.hb
        for r in self.buffer:
            if (
                trusted.issubset(r.rec_by)
                and not r.delivered
                and (not self.fifo or r.seq == self.next_deliver[r.sender])
            ):
                r.delivered = True
                out.delivered.append((r.sender, r.seq))
                if self.fifo:
                    self.next_deliver[r.sender] += 1
            for k in range(1, self.n + 1):
                if (
                    k not in r.rec_by
                    or (r.sender == self.self_id and r.seq == self.tx_obs[k] + 1)
                ) and r.prev_hb[k] < u[k]:
                    r.prev_hb[k] = u[k]
                    out.outgoing.append((k, Msg(r.payload, r.sender, r.seq)))

        # (g) gossip the flow-control triple to every peer; fold the own triple
        # locally (the self-addressed gossip without a packet)
        max_map = self._max_seq_map()
        for k in range(1, self.n + 1):
            if k != self.self_id:
                out.outgoing.append(
                    (k, Gossip(max_map[k], self.rx_obs[k], self.tx_obs[k]))
                )
        me = self.self_id
        self.on_gossip(max_map[me], self.rx_obs[me], self.tx_obs[me], me)
        # corrupted entries that no gossip refreshed still need the seq floor
        floor = max(self.tx_obs[1:])
        if floor > self.seq:
            self.seq = floor

        # (h) drain deferred broadcasts that now fit the window
        if self.reset_phase == NORMAL and self.pending:
            limit = self.min_tx_obs(trusted) + b
            while self.pending and self.seq < limit:
                payload = self.pending.popleft()
                self.seq += 1
                self.update(payload, me, self.seq, me)
                out.accepted.append(((me, self.seq), payload))

        if self.fifo:
            # final cursor normalization: the obsolete walk and the local
            # gossip fold may have moved watermarks past the clamp of (c)
            for k in range(1, self.n + 1):
                if self.rx_obs[k] + 1 > self.next_deliver[k]:
                    self.next_deliver[k] = self.rx_obs[k] + 1

        return out

    # -- packet handlers ------------------------------------------------

    def on_msg(self, payload: str, j: int, s: int, from_id: int) -> MsgAck:
        """Store/ack an incoming broadcast copy. The ack is unconditional."""
        self.update(payload, j, s, from_id)
        return MsgAck(j, s)

    def on_msg_ack(self, j: int, s: int, from_id: int) -> None:
        self.update(None, j, s, from_id)

    def on_gossip(self, max_seq: int, rx_obs: int, tx_obs: int, from_id: int) -> None:
        """Max-fold the sender's triple: its first field raises our seq, the other
        two refresh what we know the sender has seen/declared obsolete. An
        obsolete watermark over own messages is evidence of past seq values
        (like a buffered record or the FIFO cursor), so seq is floored at the
        folded entry; a watermark inflated past seq by a transient fault would
        otherwise silently swallow the next broadcasts."""
        self.seq, self.tx_obs[from_id], self.rx_obs[from_id] = (
            max(max_seq, self.seq),
            max(rx_obs, self.tx_obs[from_id]),
            max(tx_obs, self.rx_obs[from_id]),
        )
        if self.tx_obs[from_id] > self.seq:
            self.seq = self.tx_obs[from_id]

    # -- bounded-counter mode -------------------------------------------

    def check_overflow(self) -> bool:
        """True iff any counter reached MAXINT; disables new broadcasts."""
        if self.maxint is None:
            return False
        m = self.maxint
        over = self.seq >= m
        if not over:
            over = any(r.seq >= m for r in self.buffer)
        if not over:
            over = any(
                v >= m
                for arr in (self.rx_obs, self.tx_obs, self.next_deliver)
                for v in arr[1:]
            )
        if over and self.reset_phase == NORMAL:
            self.reset_phase = DISABLED
        return over

    def perform_global_reset(self) -> None:
        """Reinitialize all protocol counters; queued broadcasts survive."""
        self.seq = 0
        self.buffer = []
        self.rx_obs = [0] * (self.n + 1)
        self.tx_obs = [0] * (self.n + 1)
        self.next_deliver = [1] * (self.n + 1)
        self.reset_phase = NORMAL
        self.observed = self._observe(list(range(1, self.n + 1)))

    # -- serialization ----------------------------------------------------

    def snapshot(self) -> dict:
        """Canonical dict form of the live state."""
        return self._observe(sorted(k for k in range(1, self.n + 1)))

    def _observe(self, trusted: list[int]) -> dict:
        return {
            "id": self.self_id,
            "seq": self.seq,
            "buffer": [
                {
                    "payload": r.payload,
                    "sender": r.sender,
                    "seq": r.seq,
                    "delivered": r.delivered,
                    "rec_by": sorted(r.rec_by),
                    "prev_hb": list(r.prev_hb[1:]),
                }
                for r in sorted(self.buffer, key=_record_key)
            ],
            "rx_obs": list(self.rx_obs[1:]),
            "tx_obs": list(self.tx_obs[1:]),
            "next": list(self.next_deliver[1:]),
            "pending": len(self.pending),
            "reset_phase": self.reset_phase,
            "trusted": trusted,
        }
