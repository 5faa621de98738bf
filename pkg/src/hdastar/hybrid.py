"""HDA* under a memory budget, falling back to TDS when it runs out.

TDS does not start from ``h(start)``: every state HDA* left on its open lists
had ``f >= f_min``, so no solution is cheaper than ``f_min`` and the
iterations below it can be skipped.
"""

from __future__ import annotations

from dataclasses import replace

from .hda import hda_star
from .metrics import MEMORY_FAILURE, RunReport
from .puzzle import TileState
from .runtime import SearchConfig
from .tds import tds


def hybrid(start: TileState, heuristic, p: int, config: SearchConfig | None = None, instance: str = "") -> RunReport:
    config = config or SearchConfig()
    first = hda_star(start, heuristic, p, config, instance=instance)
    first.phase = "hda"
    if first.outcome != MEMORY_FAILURE:
        return first
    if first.f_min is None:
        # nothing was left open anywhere, yet the budget was hit: no bound to hand over
        first.diagnostic = f"{first.diagnostic}; no frontier left for the TDS phase"
        return first

    # phase 2 gets the whole budget for its table; HDA*'s structures are gone
    tds_config = replace(config, tt_capacity=config.tt_capacity or config.node_budget)
    second = tds(start, heuristic, p, tds_config, initial_threshold=first.f_min, instance=instance)
    second.phase = "tds"

    report = RunReport(
        algorithm="hybrid",
        p=p,
        instance=instance,
        outcome=second.outcome,
        cost=second.cost,
        path=second.path,
        per_worker=[a + b for a, b in zip(first.per_worker, second.per_worker)],
        config=config.snapshot(),
        wall_time=first.wall_time + second.wall_time,
        f_min=first.f_min,
        thresholds=list(second.thresholds),
        phase="tds",
        phases=[first, second],
        diagnostic=second.diagnostic,
    )
    report.probe_log = first.probe_log + second.probe_log
    report.audit_violations = first.audit_violations + second.audit_violations
    report.extras["phase1_diagnostic"] = first.diagnostic
    return report
