"""Worker loop shared by the distributed searches, plus the schedulers.

A worker is a generator: each ``next()`` performs one unit of work (handle one
message, expand one node, flush buffers, or idle) and yields a status.  The
deterministic scheduler steps all workers round-robin in one thread; the
threaded scheduler gives each worker its own thread.
"""

from __future__ import annotations

import threading
import time
from dataclasses import asdict, dataclass

from .metrics import WorkerStats
from .termination import Probe, TerminationState, Verdict, handle_probe, initiate_probe, next_ring
from .transport import (
    ABORT,
    INCUMBENT,
    PROBE,
    THRESHOLD,
    ControlMessage,
    DelayTransport,
    PackingBuffer,
    TransportError,
    WorkMessage,
    make_transport,
)

IDLE, BUSY, BLOCKED = 0, 1, 2


class SearchAborted(RuntimeError):
    pass


@dataclass
class SearchConfig:
    pack_size: int = 100
    node_budget: int | None = None  # total stored states, split evenly per worker
    tt_capacity: int | None = None  # total TDS table entries; defaults to node_budget
    stack_cap: int | None = None  # per-worker TDS stack limit
    transport: str = "async"
    runner: str = "auto"  # "sim", "threads" or "auto" (sim for delay transports)
    seed: int = 0  # random work distribution
    zobrist_seed: int = 0x5EED
    trace: bool = False
    audit: bool = False  # check global state at every verdict (sim only)
    max_steps: int | None = 50_000_000  # sim watchdog
    timeout: float | None = 600.0  # threaded watchdog, seconds
    sync_watchdog: int = 2_000_000  # spins a rendezvous may wait
    max_backoff: int = 32  # idle steps between failed probes

    def snapshot(self) -> dict:
        return asdict(self)

    def runner_kind(self) -> str:
        if self.runner != "auto":
            return self.runner
        return "sim" if self.transport.startswith("delay") else "threads"


def per_worker(total: int | None, p: int) -> int | None:
    if total is None:
        return None
    return max(1, -(-total // p))


class Worker:
    """Messaging and termination-detection skeleton.

    Subclasses provide ``has_work``, ``do_work`` (a generator), ``integrate``
    (one received :class:`WorkMessage`) and ``on_success``.
    """

    def __init__(self, wid: int, p: int, transport, config: SearchConfig):
        self.id = wid
        self.p = p
        self.transport = transport
        self.config = config
        self.ts = TerminationState()
        self.stats = WorkerStats()
        self.incumbent: int | None = None
        self.iteration = 0
        self.buffer = PackingBuffer(p, config.pack_size, self._emit)
        self.done = False
        self.stop_requested = False
        self.result: tuple | None = None
        self.abort_reason = ""
        self.verdict_hook = None
        self.probe_log: list = []
        self._probe_out = False
        self._backoff = 0
        self._countdown = 0

    # --- hooks ------------------------------------------------------------
    def has_work(self) -> bool:
        raise NotImplementedError

    def do_work(self):
        raise NotImplementedError

    def integrate(self, msg: WorkMessage) -> None:
        raise NotImplementedError

    def on_success(self, probe: Probe) -> None:
        raise NotImplementedError

    def min_pruned_f(self) -> int | None:
        return None

    def blocked(self) -> bool:
        return False

    # --- messaging --------------------------------------------------------
    def _emit(self, dest: int, entries: list) -> None:
        msg = WorkMessage(
            tuple(entries), self.ts.clock, self.id, self.iteration, getattr(self, "threshold", None)
        )
        self.ts.on_send(len(entries))
        self.stats.messages_sent += 1
        self.stats.states_sent += len(entries)
        self.transport.send(self.id, dest, msg)

    def _send_control(self, dest: int, msg: ControlMessage) -> None:
        self.transport.send(self.id, dest, msg)

    def broadcast(self, msg: ControlMessage) -> None:
        for d in range(self.p):
            if d != self.id:
                self._send_control(d, msg)

    def broadcast_incumbent(self, cost: int) -> bool:
        """Adopt and announce ``cost`` if it beats the current incumbent."""
        if self.incumbent is not None and cost >= self.incumbent:
            return False
        self.incumbent = cost
        self.broadcast(ControlMessage(INCUMBENT, self.id, cost=cost))
        return True

    def abort_all(self, reason: str) -> None:
        self.abort_reason = reason
        self.broadcast(ControlMessage(ABORT, self.id, reason=reason))
        self.done = True

    def receive(self, msg) -> None:
        if isinstance(msg, WorkMessage):
            self.ts.on_receive(msg.timestamp, len(msg.states))
            self.stats.messages_received += 1
            self.stats.states_received += len(msg.states)
            self.integrate(msg)
            return
        kind = msg.kind
        if kind == PROBE:
            self._on_probe(msg.probe)
        elif kind == INCUMBENT:
            if self.incumbent is None or msg.cost < self.incumbent:
                self.incumbent = msg.cost
        elif kind == THRESHOLD:
            self.on_threshold(msg.iteration, msg.threshold)
        elif kind == ABORT:
            self.abort_reason = self.abort_reason or msg.reason
            self.done = True

    def on_threshold(self, iteration: int, threshold: int) -> None:
        pass

    # --- termination ------------------------------------------------------
    def quiescent(self) -> bool:
        return (
            not self.transport.has_pending(self.id)
            and not self.buffer.pending
            and not self.blocked()
            and not self.has_work()
        )

    def _maybe_probe(self) -> None:
        if self._probe_out:
            return
        if self._countdown > 0:
            self._countdown -= 1
            return
        probe = initiate_probe(
            self.id, self.ts, self.quiescent(), self.incumbent, self.min_pruned_f(), self.iteration
        )
        if probe is not None:
            self._probe_out = True
            self._send_control(next_ring(self.id, self.p), ControlMessage(PROBE, self.id, probe=probe))

    def _on_probe(self, probe: Probe) -> None:
        out = handle_probe(
            self.id, probe, self.ts, self.quiescent(), self.incumbent, self.min_pruned_f(), self.iteration
        )
        if isinstance(out, Verdict):
            self._probe_out = False
            self.probe_log.append(out)
            if self.verdict_hook is not None:
                self.verdict_hook(self, out)
            if out.terminate:
                self._backoff = 0
                self.on_success(out.probe)
            else:
                self._backoff = min(max(1, self._backoff * 2), self.config.max_backoff)
                self._countdown = self._backoff
            return
        self._send_control(next_ring(self.id, self.p), ControlMessage(PROBE, self.id, probe=out))

    # --- main loop --------------------------------------------------------
    def run(self):
        t0 = time.perf_counter()
        try:
            while not self.done and not self.stop_requested:
                msg = self.transport.poll(self.id)
                if msg is not None:
                    # drain everything visible before expanding again
                    while msg is not None and not self.done:
                        self.receive(msg)
                        msg = self.transport.poll(self.id) if not self.done else None
                    yield BUSY
                    continue
                if self.has_work():
                    self._backoff = 0
                    yield from self.do_work()
                    continue
                if self.buffer.pending:
                    self.buffer.flush_all()
                    yield BUSY
                    continue
                self._maybe_probe()
                yield IDLE
        finally:
            self.stats.wall_time = time.perf_counter() - t0


def run_simulated(workers: list[Worker], transport, max_steps: int | None = None) -> int:
    """Round-robin every live worker one step per round; returns rounds taken."""
    gens = [w.run() for w in workers]
    alive = list(range(len(workers)))
    rounds = 0
    while alive:
        still = []
        for i in alive:
            try:
                next(gens[i])
                still.append(i)
            except StopIteration:
                pass
        alive = still
        transport.tick()
        rounds += 1
        if max_steps is not None and rounds > max_steps:
            for g in gens:
                g.close()
            raise SearchAborted(f"simulation exceeded {max_steps} rounds")
    return rounds


def run_threaded(workers: list[Worker], transport, timeout: float | None = None) -> None:
    errors: list[BaseException] = []

    def body(w: Worker) -> None:
        try:
            for status in w.run():
                if status != BUSY:
                    time.sleep(0.00005)
        except BaseException as exc:  # surfaced to the caller below
            errors.append(exc)
            for other in workers:
                other.stop_requested = True

    threads = [threading.Thread(target=body, args=(w,), daemon=True, name=f"worker-{w.id}") for w in workers]
    for t in threads:
        t.start()
    deadline = None if timeout is None else time.monotonic() + timeout
    for t in threads:
        t.join(None if deadline is None else max(0.0, deadline - time.monotonic()))
    if any(t.is_alive() for t in threads):
        for w in workers:
            w.stop_requested = True
        for t in threads:
            t.join(5.0)
        raise SearchAborted(f"threaded run exceeded {timeout}s")
    if errors:
        raise errors[0]


def execute(workers: list[Worker], transport, config: SearchConfig) -> None:
    """Run workers to completion with the configured scheduler."""
    if config.runner_kind() == "sim":
        run_simulated(workers, transport, config.max_steps)
    else:
        if isinstance(transport, DelayTransport):
            raise ValueError("the delay transport needs the deterministic scheduler")
        run_threaded(workers, transport, config.timeout)


__all__ = [
    "BLOCKED",
    "BUSY",
    "IDLE",
    "SearchAborted",
    "SearchConfig",
    "TransportError",
    "Worker",
    "execute",
    "make_transport",
    "per_worker",
    "run_simulated",
    "run_threaded",
]
