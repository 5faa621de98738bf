"""One-wave (time algorithm) distributed termination detection.

Every worker keeps a logical clock and counts the work messages it sent and
received.  Work messages carry the sender's clock.  A probe started by a
locally quiescent worker travels the ring ``0, 1, ..., p-1, 0``; at each hop
the worker raises its clock to the probe's time ``T``, adds its counters and
ANDs in its own quiescence.  A worker that has ever received a work message
stamped ``>= T`` fails the probe: such a message was sent after its sender
had already been visited, so the counters can no longer be trusted.  Back at
the initiator the check succeeds only if nothing failed and the accumulated
sent and received counts are equal.

Quiescence here also includes the optimality condition (no open entry below
the incumbent), so a successful probe proves both that nothing is in flight
and that no cheaper solution remains.
"""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass
class TerminationState:
    clock: int = 0
    sent: int = 0
    received: int = 0
    states_sent: int = 0
    states_received: int = 0
    max_received_timestamp: int = -1
    probe_epoch: int = 0

    def on_send(self, n_states: int) -> int:
        """Count an outgoing work message; returns its timestamp."""
        self.sent += 1
        self.states_sent += n_states
        return self.clock

    def on_receive(self, timestamp: int, n_states: int) -> None:
        self.received += 1
        self.states_received += n_states
        if timestamp > self.max_received_timestamp:
            self.max_received_timestamp = timestamp


@dataclass(frozen=True)
class Probe:
    initiator: int
    epoch: int
    T: int
    sent: int
    received: int
    states_sent: int
    states_received: int
    ok: bool = True
    incumbent: int | None = None
    min_pruned_f: int | None = None
    iteration: int = 0
    # initiator's own counters at launch; rechecked on return
    init_sent: int = 0
    init_received: int = 0
    hops: int = 0


@dataclass(frozen=True)
class Verdict:
    terminate: bool
    probe: Probe


def _min_opt(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def initiate_probe(
    worker: int,
    ts: TerminationState,
    quiescent: bool,
    incumbent: int | None = None,
    min_pruned_f: int | None = None,
    iteration: int = 0,
) -> Probe | None:
    """Start a check if this worker is locally quiescent, else ``None``.

    The clock is incremented first, so the probe carries ``T = C + 1``.
    """
    if not quiescent:
        return None
    ts.clock += 1
    ts.probe_epoch += 1
    return Probe(
        initiator=worker,
        epoch=ts.probe_epoch,
        T=ts.clock,
        sent=ts.sent,
        received=ts.received,
        states_sent=ts.states_sent,
        states_received=ts.states_received,
        incumbent=incumbent,
        min_pruned_f=min_pruned_f,
        iteration=iteration,
        init_sent=ts.sent,
        init_received=ts.received,
    )


def handle_probe(
    worker: int,
    probe: Probe,
    ts: TerminationState,
    quiescent: bool,
    incumbent: int | None = None,
    min_pruned_f: int | None = None,
    iteration: int = 0,
) -> Probe | Verdict:
    """Process a probe: a forwarded probe at other workers, a verdict at the initiator."""
    if ts.clock < probe.T:
        ts.clock = probe.T
    if probe.initiator == worker:
        still_idle = (
            quiescent
            and iteration == probe.iteration
            and ts.sent == probe.init_sent
            and ts.received == probe.init_received
        )
        ok = probe.ok and still_idle and probe.sent == probe.received
        return Verdict(ok, replace(probe, incumbent=_min_opt(probe.incumbent, incumbent)))
    ok = (
        probe.ok
        and quiescent
        and ts.max_received_timestamp < probe.T
        and iteration == probe.iteration
    )
    return replace(
        probe,
        sent=probe.sent + ts.sent,
        received=probe.received + ts.received,
        states_sent=probe.states_sent + ts.states_sent,
        states_received=probe.states_received + ts.states_received,
        ok=ok,
        incumbent=_min_opt(probe.incumbent, incumbent),
        min_pruned_f=_min_opt(probe.min_pruned_f, min_pruned_f),
        hops=probe.hops + 1,
    )


def next_ring(worker: int, p: int) -> int:
    return (worker + 1) % p
