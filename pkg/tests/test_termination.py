from hdastar.termination import Probe, TerminationState, Verdict, handle_probe, initiate_probe, next_ring


def ring(states, quiescent, initiator=0, **kw):
    """Carry one probe round the ring; returns the verdict."""
    p = len(states)
    probe = initiate_probe(initiator, states[initiator], quiescent[initiator], **kw)
    assert probe is not None
    at = next_ring(initiator, p)
    while True:
        out = handle_probe(at, probe, states[at], quiescent[at])
        if isinstance(out, Verdict):
            return out
        probe = out
        at = next_ring(at, p)


def test_not_quiescent_no_probe():
    assert initiate_probe(0, TerminationState(), False) is None


def test_probe_carries_clock_plus_one():
    ts = TerminationState(clock=4)
    probe = initiate_probe(0, ts, True)
    assert probe.T == 5 and ts.clock == 5


def test_single_worker_terminates():
    v = ring([TerminationState()], [True])
    assert v.terminate


def test_balanced_idle_ring_terminates():
    a, b, c = TerminationState(), TerminationState(), TerminationState()
    a.on_send(3)
    b.on_receive(a.clock, 3)
    v = ring([a, b, c], [True] * 3)
    assert v.terminate
    assert v.probe.states_sent == v.probe.states_received == 3


def test_message_in_flight_blocks_termination():
    a, b = TerminationState(), TerminationState()
    a.on_send(1)
    assert not ring([a, b], [True, True]).terminate


def test_busy_worker_blocks_termination():
    assert not ring([TerminationState()] * 1 + [TerminationState()], [True, False]).terminate


def test_late_message_fails_probe():
    # worker 1 was visited, then sent to worker 2 which is visited afterwards;
    # counts balance, but the timestamp reveals the message crossed the wave
    s = [TerminationState() for _ in range(3)]
    probe = initiate_probe(0, s[0], True)
    probe = handle_probe(1, probe, s[1], True)
    ts = s[1].on_send(1)
    s[2].on_receive(ts, 1)
    probe = handle_probe(2, probe, s[2], True)
    assert not probe.ok


def test_initiator_activity_during_wave_fails():
    s = [TerminationState() for _ in range(2)]
    probe = initiate_probe(0, s[0], True)
    probe = handle_probe(1, probe, s[1], True)
    s[0].on_receive(0, 1)
    s[1].on_send(1)
    v = handle_probe(0, probe, s[0], True)
    assert isinstance(v, Verdict) and not v.terminate


def test_probe_accumulates_minima():
    s = [TerminationState() for _ in range(3)]
    probe = initiate_probe(0, s[0], True, incumbent=30, min_pruned_f=25)
    probe = handle_probe(1, probe, s[1], True, incumbent=28, min_pruned_f=None)
    probe = handle_probe(2, probe, s[2], True, incumbent=None, min_pruned_f=23)
    v = handle_probe(0, probe, s[0], True, incumbent=30)
    assert v.terminate
    assert (v.probe.incumbent, v.probe.min_pruned_f) == (28, 23)


def test_iteration_mismatch_fails():
    s = [TerminationState() for _ in range(2)]
    probe = initiate_probe(0, s[0], True, iteration=1)
    probe = handle_probe(1, probe, s[1], True, iteration=2)
    assert not probe.ok


def test_next_ring_wraps():
    assert [next_ring(i, 4) for i in range(4)] == [1, 2, 3, 0]


def test_scripted_delayed_message_scenario():
    from hdastar.transport import DelayTransport, WorkMessage

    t = DelayTransport(2, seed=0, max_delay=0)
    t.now = 0
    s = [TerminationState(), TerminationState()]
    # worker 0 sends a state that arrives only after the probe has gone round
    t.last_visible[0][1] = 50
    t.send(0, 1, WorkMessage(((b"x", 3, None, 0),), s[0].on_send(1), 0))
    assert not t.has_pending(1) and len(t.in_flight_work()) == 1
    v = ring(s, [True, not t.has_pending(1)])
    assert not v.terminate
    for _ in range(50):
        t.tick()
    m = t.poll(1)
    s[1].on_receive(m.timestamp, len(m.states))
    assert t.in_flight_work() == []
    assert ring(s, [True, True]).terminate
