"""In-process message passing between search workers.

Three interchangeable transports share one contract: ``send`` never blocks,
``poll`` returns the oldest visible message or ``None``, messages between
one sender/receiver pair stay in order, and nothing is lost.

* :class:`AsyncTransport` delivers immediately (the buffered-send analogue).
* :class:`SyncTransport` adds ``send_sync``: the sender holds a ticket that
  only clears once the receiver has dequeued the message.
* :class:`DelayTransport` holds each message back for a seeded number of
  scheduler steps; used for reproducible termination tests.
"""

from __future__ import annotations

import random
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

PROBE = "termination-probe"
INCUMBENT = "incumbent-broadcast"
THRESHOLD = "threshold-announce"
ABORT = "abort"


class TransportError(RuntimeError):
    pass


@dataclass(frozen=True)
class WorkMessage:
    """Batch of routed states.

    ``states`` holds ``(packed state, g, aux, zobrist key)``; ``aux`` is the
    parent state for A*-style search or the move string for TDS.
    ``epoch``/``threshold`` tag the TDS iteration the states belong to.
    """

    states: tuple
    timestamp: int
    sender: int
    epoch: int = 0
    threshold: int | None = None


@dataclass(frozen=True)
class ControlMessage:
    kind: str
    sender: int
    probe: object = None
    cost: int | None = None
    threshold: int | None = None
    iteration: int = 0
    reason: str = ""


class PackingBuffer:
    """Per-destination batches; ``emit(dest, entries)`` sends one message."""

    def __init__(self, num_workers: int, pack_size: int, emit: Callable[[int, list], None]):
        if pack_size < 1:
            raise ValueError("pack_size must be positive")
        self.pack_size = pack_size
        self.buffers: list[list] = [[] for _ in range(num_workers)]
        self.emit = emit
        self.pending = 0

    def add(self, dest: int, entry) -> None:
        buf = self.buffers[dest]
        buf.append(entry)
        self.pending += 1
        if len(buf) >= self.pack_size:
            self.buffers[dest] = []
            self.pending -= len(buf)
            self.emit(dest, buf)

    def flush_all(self) -> None:
        for dest, buf in enumerate(self.buffers):
            if buf:
                self.buffers[dest] = []
                self.emit(dest, buf)
        self.pending = 0

    def take_all(self) -> list[tuple[int, list]]:
        """Remove pending entries without sending them (abort drain)."""
        out = [(d, b) for d, b in enumerate(self.buffers) if b]
        self.buffers = [[] for _ in self.buffers]
        self.pending = 0
        return out


def send_state(buf: PackingBuffer, dest: int, entry) -> None:
    buf.add(dest, entry)


def flush_all(buf: PackingBuffer) -> None:
    buf.flush_all()


class TransportAudit:
    """Work-message counters; rows are written only by the owning side."""

    def __init__(self, p: int):
        self.p = p
        self.messages_sent = [[0] * p for _ in range(p)]  # [src][dst]
        self.states_sent = [[0] * p for _ in range(p)]
        self.messages_received = [[0] * p for _ in range(p)]  # [src][dst]
        self.states_received = [[0] * p for _ in range(p)]

    def on_send(self, src: int, dst: int, msg) -> None:
        if isinstance(msg, WorkMessage):
            self.messages_sent[src][dst] += 1
            self.states_sent[src][dst] += len(msg.states)

    def on_receive(self, src: int, dst: int, msg) -> None:
        if isinstance(msg, WorkMessage):
            self.messages_received[src][dst] += 1
            self.states_received[src][dst] += len(msg.states)

    def total_states_sent(self) -> int:
        return sum(map(sum, self.states_sent))

    def total_states_received(self) -> int:
        return sum(map(sum, self.states_received))


class Ticket:
    __slots__ = ("delivered",)

    def __init__(self):
        self.delivered = False


class AsyncTransport:
    name = "async"
    supports_audit = True

    def __init__(self, num_workers: int):
        self.p = num_workers
        self.inboxes = [deque() for _ in range(num_workers)]
        self.audit = TransportAudit(num_workers)
        self.closed = False
        self.now = 0

    def _check(self, dest: int) -> None:
        if self.closed:
            raise TransportError("transport shut down")
        if not 0 <= dest < self.p:
            raise TransportError(f"no such worker {dest}")

    def send(self, src: int, dest: int, msg) -> None:
        self._check(dest)
        self.audit.on_send(src, dest, msg)
        self.inboxes[dest].append((msg, None))

    def poll(self, worker: int):
        inbox = self.inboxes[worker]
        try:
            msg, ticket = inbox.popleft()
        except IndexError:
            return None
        self.audit.on_receive(msg.sender, worker, msg)
        if ticket is not None:
            ticket.delivered = True
        return msg

    def has_pending(self, worker: int) -> bool:
        return bool(self.inboxes[worker])

    def drain(self, worker: int) -> list:
        """Remove every queued message for ``worker`` regardless of visibility."""
        out = []
        while True:
            msg = self.poll(worker)
            if msg is None:
                return out
            out.append(msg)

    def in_flight_work(self) -> list[WorkMessage]:
        return [m for inbox in self.inboxes for m, _ in list(inbox) if isinstance(m, WorkMessage)]

    def tick(self) -> None:
        self.now += 1

    def shutdown(self) -> None:
        self.closed = True


class SyncTransport(AsyncTransport):
    name = "sync"

    def send_sync(self, src: int, dest: int, msg) -> Ticket:
        """Enqueue ``msg``; the returned ticket clears when ``dest`` dequeues it."""
        self._check(dest)
        self.audit.on_send(src, dest, msg)
        ticket = Ticket()
        self.inboxes[dest].append((msg, ticket))
        return ticket


def send_sync(dest: int, message, transport: SyncTransport, src: int | None = None) -> Ticket:
    return transport.send_sync(message.sender if src is None else src, dest, message)


def poll(transport, worker: int):
    return transport.poll(worker)


class DelayTransport(AsyncTransport):
    """Seeded per-message delays measured in scheduler steps.

    A message becomes visible at ``max(sent_at + delay, previous visible time
    on the same pair)`` so per-pair order is preserved.  Among visible
    messages the receiver gets the earliest (visible time, send sequence).
    """

    name = "delay"

    def __init__(self, num_workers: int, seed: int = 0, max_delay: int = 6, log: bool = False):
        super().__init__(num_workers)
        self.seed = seed
        self.max_delay = max_delay
        self.rng = random.Random(seed)
        # queues[dst][src] -> deque of (visible_at, seq, msg)
        self.queues = [[deque() for _ in range(num_workers)] for _ in range(num_workers)]
        self.last_visible = [[0] * num_workers for _ in range(num_workers)]
        self.seq = 0
        self._lock = threading.Lock()
        self.schedule: list | None = [] if log else None

    def send(self, src: int, dest: int, msg) -> None:
        self._check(dest)
        with self._lock:
            at = max(self.now + self.rng.randint(0, self.max_delay), self.last_visible[src][dest])
            self.last_visible[src][dest] = at
            self.seq += 1
            self.queues[dest][src].append((at, self.seq, msg))
            if self.schedule is not None:
                self.schedule.append((self.seq, src, dest, self.now, at, type(msg).__name__))
        self.audit.on_send(src, dest, msg)

    def _head(self, worker: int, ignore_time: bool = False):
        best = None
        for src, q in enumerate(self.queues[worker]):
            if q:
                at, seq, _ = q[0]
                if (ignore_time or at <= self.now) and (best is None or (at, seq) < best[0]):
                    best = ((at, seq), src)
        return best

    def poll(self, worker: int, ignore_time: bool = False):
        with self._lock:
            best = self._head(worker, ignore_time)
            if best is None:
                return None
            _, _, msg = self.queues[worker][best[1]].popleft()
        self.audit.on_receive(msg.sender, worker, msg)
        return msg

    def has_pending(self, worker: int) -> bool:
        return self._head(worker) is not None

    def drain(self, worker: int) -> list:
        out = []
        while True:
            msg = self.poll(worker, ignore_time=True)
            if msg is None:
                return out
            out.append(msg)

    def in_flight_work(self) -> list[WorkMessage]:
        return [
            m for per_src in self.queues for q in per_src for _, _, m in list(q) if isinstance(m, WorkMessage)
        ]


def make_transport(spec: str, num_workers: int):
    """``"async"``, ``"sync"`` or ``"delay:<seed>"``."""
    if spec == "async":
        return AsyncTransport(num_workers)
    if spec == "sync":
        return SyncTransport(num_workers)
    if spec.startswith("delay"):
        _, _, seed = spec.partition(":")
        return DelayTransport(num_workers, seed=int(seed or 0))
    raise ValueError(f"unknown transport {spec!r}")
