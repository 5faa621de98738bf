"""Transposition-Driven Scheduling: distributed IDA*.

Every generated state is routed to the owner of its Zobrist key.  The owner
checks the iteration bound, then its transposition-table shard, and only then
pushes the state on its local LIFO stack.  An iteration ends when a
termination probe finds every stack empty and every message delivered; the
probe also carries the smallest f that exceeded the bound, which becomes the
next bound.
"""

from __future__ import annotations

import time

from .metrics import ABORTED, MEMORY_FAILURE, SOLVED, UNSOLVABLE, RunReport
from .puzzle import TileState, geometry
from .runtime import BUSY, SearchAborted, SearchConfig, Worker, execute, per_worker
from .serial import TranspositionTable
from .termination import Probe
from .transport import THRESHOLD, ControlMessage, TransportError, WorkMessage, make_transport
from .zobrist import ZobristTable, owner

PUSHED, PRUNED_DUPLICATE, PRUNED_THRESHOLD = "pushed", "pruned-duplicate", "pruned-threshold"


class TdsWorker(Worker):
    def __init__(self, wid, p, transport, config, *, geo, heuristic, zobrist, start, threshold):
        super().__init__(wid, p, transport, config)
        self.geo = geo
        self.goal = geo.goal
        self.heuristic = heuristic
        self.zobrist = zobrist
        self.start = start
        self.start_key = zobrist.hash(start)
        cap = config.tt_capacity if config.tt_capacity is not None else config.node_budget
        self.tt = TranspositionTable(per_worker(cap, p))
        self.stack: list = []
        self.stack_cap = config.stack_cap
        self.threshold = threshold
        self.min_pruned: int | None = None
        self.thresholds: list[int] = []
        self.inserted: list[list[bytes]] = []
        self.found: tuple[int, str] | None = None
        self.iteration = -1
        self.enter_iteration(0, threshold)

    def enter_iteration(self, iteration: int, threshold: int) -> None:
        if iteration <= self.iteration:
            return
        self.iteration = iteration
        self.threshold = threshold
        self.min_pruned = None
        self.thresholds.append(threshold)
        if self.config.trace:
            self.inserted.append([])
        if owner(self.start_key, self.p) == self.id:
            self.route_and_check(self.start, 0, "", self.start_key)

    def on_threshold(self, iteration: int, threshold: int) -> None:
        self.enter_iteration(iteration, threshold)

    def route_and_check(self, state: bytes, g: int, moves: str, key: int) -> str:
        self.stats.heuristic_calls += 1
        f = g + self.heuristic(state)
        if f > self.threshold:
            if self.min_pruned is None or f < self.min_pruned:
                self.min_pruned = f
            return PRUNED_THRESHOLD
        if self.tt.prunes(state, g, self.iteration):
            self.stats.duplicates_received += 1
            return PRUNED_DUPLICATE
        self.tt.store(state, g, self.iteration)
        if self.config.trace:
            self.inserted[-1].append(state)
        self.stack.append((state, g, f, moves, key))
        if self.stack_cap is not None and len(self.stack) > self.stack_cap and not self.done:
            self.result = ("memory",)
            self.abort_all(f"worker {self.id} stack exceeded {self.stack_cap}")
        return PUSHED

    def integrate(self, msg: WorkMessage) -> None:
        if msg.epoch > self.iteration:
            self.enter_iteration(msg.epoch, msg.threshold)
        elif msg.epoch < self.iteration:
            return
        for state, g, moves, key in msg.states:
            self.route_and_check(state, g, moves, key)

    def min_pruned_f(self) -> int | None:
        return self.min_pruned

    def has_work(self) -> bool:
        return bool(self.stack)

    def do_work(self):
        state, g, f, moves, key = self.stack.pop()
        if self.incumbent is not None and f >= self.incumbent:
            yield BUSY
            return
        entry = self.tt.entries.get(state)
        if entry is not None and entry.epoch == self.iteration and entry.g < g:
            # a cheaper copy of this state arrived after we pushed this one
            yield BUSY
            return
        if state == self.goal:
            if self.found is None or g < self.found[0]:
                self.found = (g, moves)
            self.broadcast_incumbent(g)
            yield BUSY
            return
        self.stats.record_expansion(state, g, f, self.config.trace)
        g1 = g + 1
        for child, tile, frm, to, letter in self.geo.successors(state):
            self.stats.generated += 1
            ckey = self.zobrist.update(key, tile, frm, to)
            dest = owner(ckey, self.p)
            if dest == self.id:
                self.route_and_check(child, g1, moves + letter, ckey)
            else:
                self.buffer.add(dest, (child, g1, moves + letter, ckey))
        yield BUSY

    def on_success(self, probe: Probe) -> None:
        if probe.incumbent is not None:
            self.result = ("solved", probe.incumbent)
            self.abort_all("terminated")
            return
        nxt = next_threshold([probe.min_pruned_f], self.threshold)
        if nxt is None:
            self.result = ("unsolvable",)
            self.abort_all("terminated")
            return
        it = self.iteration + 1
        self.broadcast(ControlMessage(THRESHOLD, self.id, threshold=nxt, iteration=it))
        self.enter_iteration(it, nxt)


def next_threshold(min_pruned_values, current: int | None = None) -> int | None:
    """Smallest pruned f over all workers; ``None`` means nothing was pruned."""
    vals = [v for v in min_pruned_values if v is not None]
    if not vals:
        return None
    nxt = min(vals)
    if current is not None and nxt <= current:
        raise ValueError(f"next threshold {nxt} does not exceed current {current}")
    return nxt


def tds_route_and_check(ctx: TdsWorker, state: bytes, g: int, moves: str = "", key: int | None = None) -> str:
    if key is None:
        key = ctx.zobrist.hash(state)
    return ctx.route_and_check(state, g, moves, key)


def tds(
    start: TileState,
    heuristic,
    p: int,
    config: SearchConfig | None = None,
    initial_threshold: int | None = None,
    instance: str = "",
) -> RunReport:
    config = config or SearchConfig()
    if p < 1:
        raise ValueError("need at least one worker")
    geo = geometry(start.width, start.height)
    zt = ZobristTable(start.width, start.height, config.zobrist_seed)
    transport = make_transport(config.transport, p)
    packed = start.packed()
    h0 = heuristic(packed)
    threshold = h0 if initial_threshold is None else max(h0, initial_threshold)
    report = RunReport(algorithm="tds", p=p, instance=instance, config=config.snapshot())
    t0 = time.perf_counter()
    workers = [
        TdsWorker(i, p, transport, config, geo=geo, heuristic=heuristic, zobrist=zt, start=packed, threshold=threshold)
        for i in range(p)
    ]
    if config.audit:
        from .hda import _audit_hook

        hook = _audit_hook(workers, transport, report)
        for w in workers:
            w.verdict_hook = hook
    try:
        execute(workers, transport, config)
    except (SearchAborted, TransportError) as exc:
        report.outcome = ABORTED
        report.diagnostic = str(exc)
    report.wall_time = time.perf_counter() - t0
    report.per_worker = [w.stats for w in workers]
    report.probe_log = [v for w in workers for v in w.probe_log]
    report.thresholds = max((w.thresholds for w in workers), key=len)
    report.extras["iterations"] = len(report.thresholds)
    report.extras["tt_replacements"] = sum(w.tt.replacements for w in workers)
    if config.trace:
        n = len(report.thresholds)
        report.extras["inserted"] = [
            [s for w in workers if i < len(w.inserted) for s in w.inserted[i]] for i in range(n)
        ]
        report.extras["workers"] = workers
    if report.diagnostic:
        return report
    results = [w.result for w in workers if w.result is not None]
    if any(r[0] == "memory" for r in results):
        report.outcome = MEMORY_FAILURE
        report.diagnostic = next(w.abort_reason for w in workers if w.result and w.result[0] == "memory")
    elif any(r[0] == "solved" for r in results):
        found = min((w.found for w in workers if w.found is not None), key=lambda x: x[0])
        report.outcome = SOLVED
        report.cost, report.path = found
        cost = min(r[1] for r in results if r[0] == "solved")
        if cost != report.cost:
            report.outcome = ABORTED
            report.diagnostic = f"verdict cost {cost} differs from best goal {report.cost}"
    elif any(r[0] == "unsolvable" for r in results):
        report.outcome = UNSOLVABLE
    else:
        report.outcome = ABORTED
        report.diagnostic = "workers stopped without a verdict"
    return report
