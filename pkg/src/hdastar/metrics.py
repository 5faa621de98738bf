"""Run statistics and the parallel-search evaluation metrics.

All aggregation here is pure: it consumes finished :class:`RunReport` objects.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field, fields
from typing import Iterable, Mapping, Sequence

REPORT_VERSION = 1

SOLVED = "solved"
MEMORY_FAILURE = "memory-failure"
UNSOLVABLE = "unsolvable"
ABORTED = "aborted"


class MetricError(ValueError):
    pass


@dataclass
class WorkerStats:
    expanded: int = 0
    generated: int = 0
    duplicates_received: int = 0
    reexpansions: int = 0
    f_histogram: Counter = field(default_factory=Counter)
    heuristic_calls: int = 0
    messages_sent: int = 0
    messages_received: int = 0
    states_sent: int = 0
    states_received: int = 0
    wall_time: float = 0.0
    # (packed state, g, f) per expansion; only filled when tracing
    trace: list = field(default_factory=list, repr=False)

    def record_expansion(self, state: bytes, g: int, f: int, tracing: bool) -> None:
        self.expanded += 1
        self.f_histogram[f] += 1
        if tracing:
            self.trace.append((state, g, f))

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            if f.name == "trace":
                continue
            v = getattr(self, f.name)
            if f.name == "f_histogram":
                v = {str(k): v[k] for k in sorted(v)}
            out[f.name] = v
        return out

    @classmethod
    def from_dict(cls, d: Mapping) -> "WorkerStats":
        kw = dict(d)
        kw["f_histogram"] = Counter({int(k): v for k, v in d.get("f_histogram", {}).items()})
        return cls(**{k: v for k, v in kw.items() if k in {f.name for f in fields(cls)}})

    def __add__(self, other: "WorkerStats") -> "WorkerStats":
        out = WorkerStats()
        for f in fields(self):
            if f.name in ("trace",):
                continue
            setattr(out, f.name, getattr(self, f.name) + getattr(other, f.name))
        return out


@dataclass
class RunReport:
    algorithm: str
    p: int = 1
    instance: str = ""
    outcome: str = ABORTED
    cost: int | None = None
    path: str | None = None
    per_worker: list[WorkerStats] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0
    f_min: int | None = None
    thresholds: list[int] = field(default_factory=list)
    phase: str | None = None
    phases: list["RunReport"] = field(default_factory=list)
    diagnostic: str = ""
    # probe outcomes and audit findings, kept for tests; not serialized
    probe_log: list = field(default_factory=list, repr=False)
    audit_violations: list = field(default_factory=list, repr=False)
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def solved(self) -> bool:
        return self.outcome == SOLVED

    @property
    def total_expanded(self) -> int:
        return sum(w.expanded for w in self.per_worker)

    @property
    def total_reexpansions(self) -> int:
        return sum(w.reexpansions for w in self.per_worker)

    def merged_histogram(self) -> Counter:
        out: Counter = Counter()
        for w in self.per_worker:
            out.update(w.f_histogram)
        return out

    def derived(self) -> dict:
        d: dict = {
            "expanded": self.total_expanded,
            "generated": sum(w.generated for w in self.per_worker),
            "reexpansions": self.total_reexpansions,
            "messages_sent": sum(w.messages_sent for w in self.per_worker),
            "states_sent": sum(w.states_sent for w in self.per_worker),
        }
        if self.total_expanded > 0:
            d["load_balance"] = load_balance([w.expanded for w in self.per_worker])
            if self.wall_time > 0:
                d["expansion_rate"] = expansion_rate(self.total_expanded, self.wall_time, self.p)
        if self.cost is not None and self.total_expanded > 0:
            r_lt, r_eq, r_gt, r_r = r_metrics(
                [w.f_histogram for w in self.per_worker], self.total_reexpansions, self.cost
            )
            d.update(R_lt=r_lt, R_eq=r_eq, R_gt=r_gt, R_r=r_r)
        return d

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "algorithm": self.algorithm,
            "instance": self.instance,
            "p": self.p,
            "outcome": self.outcome,
            "cost": self.cost,
            "path": self.path,
            "f_min": self.f_min,
            "thresholds": list(self.thresholds),
            "phase": self.phase,
            "per_worker": [w.to_dict() for w in self.per_worker],
            "derived": self.derived(),
            "config": dict(self.config),
            "wall_time_s": self.wall_time,
            "diagnostic": self.diagnostic,
            "phases": [ph.to_dict() for ph in self.phases],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RunReport":
        return cls(
            algorithm=d["algorithm"],
            p=d["p"],
            instance=d.get("instance", ""),
            outcome=d["outcome"],
            cost=d.get("cost"),
            path=d.get("path"),
            per_worker=[WorkerStats.from_dict(w) for w in d.get("per_worker", [])],
            config=dict(d.get("config", {})),
            wall_time=d.get("wall_time_s", 0.0),
            f_min=d.get("f_min"),
            thresholds=list(d.get("thresholds", [])),
            phase=d.get("phase"),
            phases=[cls.from_dict(x) for x in d.get("phases", [])],
            diagnostic=d.get("diagnostic", ""),
        )

    def csv_row(self) -> dict:
        """Flat mapping; per-worker counters get ``_w<i>`` suffixes."""
        row = {
            "report_version": REPORT_VERSION,
            "algorithm": self.algorithm,
            "instance": self.instance,
            "p": self.p,
            "outcome": self.outcome,
            "cost": "" if self.cost is None else self.cost,
            "path": self.path or "",
            "f_min": "" if self.f_min is None else self.f_min,
            "wall_time_s": self.wall_time,
        }
        for k, v in self.derived().items():
            row[k] = v
        for i, w in enumerate(self.per_worker):
            for k, v in w.to_dict().items():
                if k == "f_histogram":
                    continue
                row[f"{k}_w{i}"] = v
        for k, v in sorted(self.config.items()):
            row[f"config_{k}"] = v
        return row


# --- formulas -------------------------------------------------------------

def search_overhead(parallel_expanded: int, baseline_expanded: int) -> float:
    """Percentage of extra expansions over the baseline (may be negative)."""
    if baseline_expanded <= 0:
        raise MetricError("search overhead undefined for a zero baseline")
    return 100.0 * (parallel_expanded / baseline_expanded - 1.0)


def load_balance(expanded: Sequence[int]) -> float:
    """Max per-worker expansions over the mean."""
    if not expanded:
        raise MetricError("no workers")
    total = sum(expanded)
    if total <= 0:
        raise MetricError("load balance undefined when nothing was expanded")
    return max(expanded) / (total / len(expanded))


def relative_speedup_efficiency(t_min: float, p_min: int, t_n: float, n: int) -> tuple[float, float]:
    if min(t_min, t_n) <= 0 or min(p_min, n) <= 0:
        raise MetricError("times and core counts must be positive")
    s = t_min / t_n
    return s, s / (n / p_min)


def r_metrics(
    histograms: Iterable[Mapping[int, int]], reexpansions: int, c_star: int
) -> tuple[float, float, float, float]:
    """(R_<, R_=, R_>, R_r): expansion fractions by f relative to c*."""
    below = equal = above = 0
    for hist in histograms:
        for f, n in hist.items():
            if f < c_star:
                below += n
            elif f == c_star:
                equal += n
            else:
                above += n
    total = below + equal + above
    if total <= 0:
        raise MetricError("no expansions")
    return below / total, equal / total, above / total, reexpansions / total


def expansion_rate(total_expanded: int, wall_time: float, p: int) -> float:
    """Expansions per core-second (wall time multiplied by p)."""
    if wall_time <= 0:
        raise MetricError("wall time must be positive")
    return total_expanded / (wall_time * p)


def expansion_rate_ratio(rate_p: float, rate_p_min: float) -> float:
    if rate_p_min <= 0:
        raise MetricError("baseline expansion rate must be positive")
    return rate_p / rate_p_min


# --- suite aggregation ----------------------------------------------------

def p_min_of(reports: Iterable[RunReport]) -> int | None:
    solved = [r.p for r in reports if r.solved]
    return min(solved) if solved else None


@dataclass
class SuiteReport:
    runs: list[RunReport]
    # (instance, algorithm) -> p_min
    p_min: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "report_version": REPORT_VERSION,
            "runs": [r.to_dict() for r in self.runs],
            "p_min": [{"instance": i, "algorithm": a, "p_min": v} for (i, a), v in sorted(self.p_min.items())],
            "tables": self.tables,
        }


def _mean(xs: Sequence[float]) -> float:
    return sum(xs) / len(xs)


def build_suite_report(runs: Sequence[RunReport], baseline_algorithm: str = "astar") -> SuiteReport:
    """Group runs by (instance, algorithm), find p_min, derive relative tables.

    When several seeds/pack sizes share a (instance, algorithm, p) cell, the
    cell uses the mean wall time and mean expansion count of its solved runs.
    """
    cells: dict = defaultdict(list)
    for r in runs:
        cells[(r.instance, r.algorithm, r.p)].append(r)

    by_pair: dict = defaultdict(list)
    for (inst, algo, p), rs in cells.items():
        by_pair[(inst, algo)].extend(rs)

    p_mins = {}
    for key, rs in by_pair.items():
        p_mins[key] = p_min_of(rs)

    baseline_expanded = {}
    for (inst, algo, p), rs in cells.items():
        if algo == baseline_algorithm:
            solved = [r for r in rs if r.solved]
            if solved:
                baseline_expanded[inst] = _mean([r.total_expanded for r in solved])

    rows = []
    for (inst, algo, p), rs in sorted(cells.items()):
        solved = [r for r in rs if r.solved]
        pm = p_mins.get((inst, algo))
        row = {"instance": inst, "algorithm": algo, "p": p, "p_min": pm, "runs": len(rs), "solved": len(solved)}
        if solved and pm is not None:
            base = [r for r in cells[(inst, algo, pm)] if r.solved]
            t_n = _mean([r.wall_time for r in solved])
            t_min = _mean([r.wall_time for r in base])
            n_exp = _mean([r.total_expanded for r in solved])
            row["wall_time_s"] = t_n
            row["expanded"] = n_exp
            if t_n > 0 and t_min > 0:
                s, e = relative_speedup_efficiency(t_min, pm, t_n, p)
                row["speedup"] = s
                row["efficiency"] = e
            row["search_overhead_vs_pmin"] = search_overhead(n_exp, _mean([r.total_expanded for r in base]))
            if inst in baseline_expanded:
                row["search_overhead_vs_baseline"] = search_overhead(n_exp, baseline_expanded[inst])
            row["load_balance"] = _mean([load_balance([w.expanded for w in r.per_worker]) for r in solved])
            rs_metrics = [r.derived() for r in solved]
            for k in ("R_lt", "R_eq", "R_gt", "R_r"):
                vals = [d[k] for d in rs_metrics if k in d]
                if vals:
                    row[k] = _mean(vals)
            rates = [expansion_rate(r.total_expanded, r.wall_time, r.p) for r in solved if r.wall_time > 0]
            if rates:
                row["expansion_rate"] = _mean(rates)
        rows.append(row)

    # A(p, p_min): mean expansion rate across instances sharing p_min; R = A(p)/A(p_min)
    grouped: dict = defaultdict(list)
    for row in rows:
        if row.get("expansion_rate") is not None and row["p_min"] is not None:
            grouped[(row["algorithm"], row["p_min"], row["p"])].append(row["expansion_rate"])
    rate_table = []
    for (algo, pm, p), rates in sorted(grouped.items()):
        a_p = _mean(rates)
        base = grouped.get((algo, pm, pm))
        entry = {"algorithm": algo, "p_min": pm, "p": p, "A": a_p}
        if base:
            entry["R"] = expansion_rate_ratio(a_p, _mean(base))
        rate_table.append(entry)

    eff: dict = defaultdict(list)
    for row in rows:
        if "efficiency" in row:
            eff[(row["algorithm"], row["p_min"], row["p"])].append(row["efficiency"])
    eff_table = [
        {"algorithm": a, "p_min": pm, "p": p, "efficiency": _mean(v)} for (a, pm, p), v in sorted(eff.items())
    ]

    return SuiteReport(
        runs=list(runs),
        p_min=p_mins,
        tables={"per_config": rows, "expansion_rate": rate_table, "efficiency_by_p_min": eff_table},
    )
