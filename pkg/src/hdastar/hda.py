"""Hash-Distributed A* and its contrast variants.

* ``hda_star``: successors go to ``owner(zobrist key)``, asynchronously and
  packed ``pack_size`` to a message.
* ``hda_star_random``: successors go to a uniformly random worker, so
  duplicates are only caught when they happen to land on the same worker.
* ``pra_star_sync``: hash routing, but every state is its own message and the
  sender waits until the receiver has dequeued it.

States owned by the generating worker are integrated directly rather than
sent to itself.
"""

from __future__ import annotations

import random
import time
from collections import deque

from .metrics import ABORTED, MEMORY_FAILURE, SOLVED, UNSOLVABLE, RunReport
from .puzzle import TileState, geometry, path_moves
from .runtime import BLOCKED, BUSY, SearchAborted, SearchConfig, Worker, execute, per_worker
from .serial import SearchSpace, reconstruct
from .termination import Probe
from .transport import SyncTransport, TransportError, WorkMessage, make_transport
from .zobrist import ZobristTable, owner

HASH, RANDOM = "zobrist-hash", "random"


class HdaWorker(Worker):
    def __init__(self, wid, p, transport, config, *, geo, heuristic, zobrist, policy=HASH, sync=False):
        super().__init__(wid, p, transport, config)
        self.geo = geo
        self.goal = geo.goal
        self.zobrist = zobrist
        self.policy = policy
        self.sync = sync
        self.space = SearchSpace(heuristic, self.stats)
        self.keys: dict[bytes, int] = {}
        self.budget = per_worker(config.node_budget, p)
        self.rng = random.Random((config.seed << 8) ^ wid) if policy == RANDOM else None
        self.pending_sync: deque = deque()
        self.ticket = None
        self.goal_cost: int | None = None

    # --- routing ----------------------------------------------------------
    def destination(self, key: int) -> int:
        if self.policy == RANDOM:
            return self.rng.randrange(self.p)
        return owner(key, self.p)

    def accept(self, state: bytes, g: int, parent: bytes | None, key: int) -> None:
        status = self.space.integrate(state, g, parent)
        if status != "duplicate":
            self.keys[state] = key

    def integrate(self, msg: WorkMessage) -> None:
        for state, g, parent, key in msg.states:
            self.accept(state, g, parent, key)
        self._check_budget()

    def _check_budget(self) -> None:
        if self.budget is not None and len(self.space) > self.budget and not self.done:
            self.result = ("memory",)
            self.abort_all(f"worker {self.id} stored {len(self.space)} states > budget {self.budget}")

    # --- loop hooks -------------------------------------------------------
    def has_work(self) -> bool:
        m = self.space.min_f()
        return m is not None and (self.incumbent is None or m < self.incumbent)

    def blocked(self) -> bool:
        return self.ticket is not None or bool(self.pending_sync)

    def do_work(self):
        item = self.space.pop(self.incumbent)
        if item is None:
            yield BUSY
            return
        state, rec = item
        if state == self.goal:
            if self.goal_cost is None or rec.g < self.goal_cost:
                self.goal_cost = rec.g
            self.broadcast_incumbent(rec.g)
            yield BUSY
            return
        if rec.expansions:
            self.stats.reexpansions += 1
        rec.expansions += 1
        self.stats.record_expansion(state, rec.g, rec.g + rec.h, self.config.trace)
        key = self.keys[state]
        g1 = rec.g + 1
        for child, tile, frm, to, _ in self.geo.successors(state):
            self.stats.generated += 1
            ckey = self.zobrist.update(key, tile, frm, to)
            dest = self.destination(ckey)
            entry = (child, g1, state, ckey)
            if dest == self.id:
                self.accept(child, g1, state, ckey)
            elif self.sync:
                self.pending_sync.append((dest, entry))
            else:
                self.buffer.add(dest, entry)
        self._check_budget()
        yield BUSY
        if self.sync:
            yield from self._drain_sync()

    def _drain_sync(self):
        """Hand each pending state over by rendezvous, servicing our inbox meanwhile."""
        spins = 0
        while self.pending_sync and not self.done and not self.stop_requested:
            dest, entry = self.pending_sync.popleft()
            msg = WorkMessage((entry,), self.ts.clock, self.id)
            self.ts.on_send(1)
            self.stats.messages_sent += 1
            self.stats.states_sent += 1
            self.ticket = self.transport.send_sync(self.id, dest, msg)
            while not self.ticket.delivered:
                if self.done or self.stop_requested:
                    return
                incoming = self.transport.poll(self.id)
                if incoming is not None:
                    self.receive(incoming)
                spins += 1
                if spins > self.config.sync_watchdog:
                    raise TransportError(
                        f"worker {self.id}: rendezvous with worker {dest} not completed after {spins} polls"
                    )
                yield BLOCKED
            self.ticket = None

    def on_success(self, probe: Probe) -> None:
        if probe.incumbent is None:
            self.result = ("unsolvable",)
        else:
            self.result = ("solved", probe.incumbent)
        self.abort_all("terminated")


def _audit_hook(workers, transport, report):
    """Check the global state at each verdict; only valid single-threaded."""

    seen: set[int] = set()

    def hook(worker, verdict):
        # concurrent initiators can each close the same iteration; later
        # verdicts see workers that have already moved on
        if not verdict.terminate or verdict.probe.iteration in seen:
            return
        seen.add(verdict.probe.iteration)
        problems = []
        inflight = transport.in_flight_work()
        if inflight:
            problems.append(f"{len(inflight)} work messages undelivered")
        for w in workers:
            if w.buffer.pending or getattr(w, "pending_sync", None) or getattr(w, "ticket", None):
                problems.append(f"worker {w.id} holds unsent states")
        inc = verdict.probe.incumbent
        for w in workers:
            if hasattr(w, "space"):
                m = w.space.min_f()
                if m is not None and (inc is None or m < inc):
                    problems.append(f"worker {w.id} open min f {m} < incumbent {inc}")
            if getattr(w, "stack", None):
                problems.append(f"worker {w.id} stack not empty")
        if transport.audit.total_states_sent() != transport.audit.total_states_received():
            problems.append("state counters unbalanced")
        if verdict.probe.states_sent != verdict.probe.states_received:
            problems.append("probe state counters unbalanced")
        report.audit_violations.extend(problems)

    return hook


def _drain_after_abort(workers: list[HdaWorker], transport) -> None:
    """Fold every undelivered or unsent state into its destination's open list."""
    for w in workers:
        for dest, batch in w.buffer.take_all():
            for state, g, parent, key in batch:
                workers[dest].accept(state, g, parent, key)
        while w.pending_sync:
            dest, (state, g, parent, key) = w.pending_sync.popleft()
            workers[dest].accept(state, g, parent, key)
    for w in workers:
        for msg in transport.drain(w.id):
            if isinstance(msg, WorkMessage):
                for state, g, parent, key in msg.states:
                    w.accept(state, g, parent, key)


def run_best_first(
    algorithm: str,
    start: TileState,
    heuristic,
    p: int,
    config: SearchConfig | None = None,
    policy: str = HASH,
    sync: bool = False,
    instance: str = "",
) -> RunReport:
    config = config or SearchConfig()
    if p < 1:
        raise ValueError("need at least one worker")
    geo = geometry(start.width, start.height)
    zt = ZobristTable(start.width, start.height, config.zobrist_seed)
    transport = make_transport(config.transport, p)
    if sync and not isinstance(transport, SyncTransport):
        raise ValueError("synchronous variant needs the sync transport")
    workers = [
        HdaWorker(i, p, transport, config, geo=geo, heuristic=heuristic, zobrist=zt, policy=policy, sync=sync)
        for i in range(p)
    ]
    report = RunReport(algorithm=algorithm, p=p, instance=instance, config=config.snapshot())
    if config.audit:
        hook = _audit_hook(workers, transport, report)
        for w in workers:
            w.verdict_hook = hook

    packed = start.packed()
    key = zt.hash(packed)
    first = workers[owner(key, p) if policy == HASH else 0]
    t0 = time.perf_counter()
    first.accept(packed, 0, None, key)
    try:
        execute(workers, transport, config)
    except (SearchAborted, TransportError) as exc:
        report.outcome = ABORTED
        report.diagnostic = str(exc)
    report.wall_time = time.perf_counter() - t0
    report.per_worker = [w.stats for w in workers]
    report.probe_log = [v for w in workers for v in w.probe_log]

    if report.diagnostic:
        return report
    results = [w.result for w in workers if w.result is not None]
    if any(r[0] == "memory" for r in results):
        _drain_after_abort(workers, transport)
        mins = [m for m in (w.space.min_f() for w in workers) if m is not None]
        goals = [w.goal_cost for w in workers if w.goal_cost is not None]
        report.outcome = MEMORY_FAILURE
        report.f_min = min(mins + goals) if (mins or goals) else None
        report.diagnostic = next(w.abort_reason for w in workers if w.result and w.result[0] == "memory")
    elif any(r[0] == "solved" for r in results):
        cost = min(r[1] for r in results if r[0] == "solved")
        report.outcome = SOLVED
        report.cost = cost

        def lookup(s):
            if policy == HASH:
                return workers[owner(zt.hash(s), p)].space.closed.get(s)
            recs = [r for r in (w.space.closed.get(s) for w in workers) if r is not None]
            return min(recs, key=lambda r: r.g) if recs else None

        states = reconstruct(geo.goal, lookup)
        report.path = path_moves(states, start.width, start.height)
        if len(report.path) != cost or states[0] != packed:
            report.outcome = ABORTED
            report.diagnostic = f"path reconstruction gave {len(report.path)} moves for cost {cost}"
    elif any(r[0] == "unsolvable" for r in results):
        report.outcome = UNSOLVABLE
    else:
        report.outcome = ABORTED
        report.diagnostic = "workers stopped without a verdict"
    report.extras["workers"] = workers if config.trace else None
    return report


def hda_star(start: TileState, heuristic, p: int, config: SearchConfig | None = None, instance: str = "") -> RunReport:
    return run_best_first("hda", start, heuristic, p, config, HASH, instance=instance)


def hda_star_random(
    start: TileState, heuristic, p: int, config: SearchConfig | None = None, seed: int | None = None, instance: str = ""
) -> RunReport:
    config = config or SearchConfig()
    if seed is not None:
        config = SearchConfig(**{**config.snapshot(), "seed": seed})
    return run_best_first("hda-random", start, heuristic, p, config, RANDOM, instance=instance)


def pra_star_sync(start: TileState, heuristic, p: int, config: SearchConfig | None = None, instance: str = "") -> RunReport:
    config = config or SearchConfig(transport="sync")
    if config.transport != "sync":
        config = SearchConfig(**{**config.snapshot(), "transport": "sync"})
    return run_best_first("pra-sync", start, heuristic, p, config, HASH, sync=True, instance=instance)


def receive_and_integrate(ctx: HdaWorker, message: WorkMessage) -> None:
    ctx.receive(message)
