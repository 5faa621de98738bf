"""Command-line harness: ``solve`` runs one configuration, ``suite`` a matrix.

Exit codes for ``solve``: 0 solved, 1 aborted, 2 memory failure, 3 unsolvable,
4 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import traceback
from dataclasses import replace
from pathlib import Path

from .hda import hda_star, hda_star_random, pra_star_sync
from .heuristics import make_heuristic
from .hybrid import hybrid
from .metrics import ABORTED, MEMORY_FAILURE, SOLVED, UNSOLVABLE, RunReport, build_suite_report
from .pdb import PartitionError
from .puzzle import InstanceError, TileState, parse_instance, read_instances
from .runtime import SearchConfig
from .serial import astar, idastar_tt
from .tds import tds

log = logging.getLogger(__name__)

ALGORITHMS = ("astar", "idastar-tt", "hda", "hda-random", "pra-sync", "tds", "hybrid")
SERIAL = ("astar", "idastar-tt")
EXIT_CODES = {SOLVED: 0, ABORTED: 1, MEMORY_FAILURE: 2, UNSOLVABLE: 3}
EXIT_CONFIG = 4


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags, which we use for memory failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {v}")
    return v


def load_instance(path) -> TileState:
    """A file holding exactly one instance, on one line or laid out as a grid."""
    text = Path(path).read_text()
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    try:
        return parse_instance(body, allow_unsolvable=True)
    except InstanceError:
        states = read_instances(path, allow_unsolvable=True)
    if len(states) != 1:
        raise InstanceError(f"{path}: expected one instance, found {len(states)}")
    return states[0]


def check_transport(spec: str) -> str:
    if spec in ("async", "sync"):
        return spec
    if spec.startswith("delay:"):
        try:
            int(spec.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad delay seed in {spec!r}") from None
        return spec
    raise ConfigError(f"unknown transport {spec!r}")


def run_algorithm(algo: str, start: TileState, heuristic, p: int, config: SearchConfig, instance: str = "") -> RunReport:
    """Dispatch one run; serial algorithms ignore ``p``."""
    if algo not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {algo!r}")
    if not start.solvable():
        report = RunReport(algorithm=algo, p=1 if algo in SERIAL else p, instance=instance, config=config.snapshot())
        report.outcome = UNSOLVABLE
        report.diagnostic = "permutation parity puts the instance outside the goal's component"
        return report
    if algo == "astar":
        return astar(start, heuristic, node_budget=config.node_budget, trace=config.trace, instance=instance)
    if algo == "idastar-tt":
        cap = config.tt_capacity if config.tt_capacity is not None else config.node_budget
        return idastar_tt(start, heuristic, tt_capacity=cap, trace=config.trace, instance=instance)
    if algo == "pra-sync":
        if config.transport.startswith("delay"):
            raise ConfigError("pra-sync needs the sync transport")
        return pra_star_sync(start, heuristic, p, replace(config, transport="sync"), instance=instance)
    if algo == "hda":
        return hda_star(start, heuristic, p, config, instance=instance)
    if algo == "hda-random":
        return hda_star_random(start, heuristic, p, config, instance=instance)
    if algo == "tds":
        return tds(start, heuristic, p, config, instance=instance)
    if config.transport == "sync":
        raise ConfigError("hybrid runs over an asynchronous transport")
    return hybrid(start, heuristic, p, config, instance=instance)


def format_report(report: RunReport, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2, sort_keys=False)
    row = report.csv_row()
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(row), lineterminator="\n")
    writer.writeheader()
    writer.writerow(row)
    return buf.getvalue().rstrip("\n")


def cmd_solve(args) -> int:
    try:
        transport = check_transport(args.transport)
        start = load_instance(args.instance)
        heuristic = make_heuristic(args.heuristic, start.width, start.height)
    except (ConfigError, InstanceError, PartitionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    config = SearchConfig(
        pack_size=args.pack_size,
        node_budget=args.node_budget,
        transport=transport,
        seed=args.seed,
    )
    try:
        report = run_algorithm(args.algo, start, heuristic, args.workers, config, instance=str(args.instance))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(format_report(report, args.format))
    if report.diagnostic and report.outcome != SOLVED:
        print(f"{report.outcome}: {report.diagnostic}", file=sys.stderr)
    return EXIT_CODES.get(report.outcome, 1)


# --- suite ----------------------------------------------------------------

def _suite_instances(cfg: dict, base: Path) -> list[tuple[str, TileState]]:
    out = []
    for i, item in enumerate(cfg.get("instances", [])):
        if isinstance(item, dict):
            name = item.get("name", f"inline{i}")
            out.append((name, parse_instance(item["tiles"], allow_unsolvable=True)))
            continue
        path = Path(item)
        if not path.is_absolute():
            path = base / path
        states = read_instances(path, allow_unsolvable=True)
        if len(states) == 1:
            out.append((str(item), states[0]))
        else:
            out.extend((f"{item}#{j}", s) for j, s in enumerate(states))
    if not out:
        raise ConfigError("suite lists no instances")
    return out


def run_suite(cfg: dict, base: Path = Path(".")) -> dict:
    """Run every (instance, algorithm, p, seed, pack size) cell; crashes become aborted runs."""
    algos = cfg.get("algorithms", ["astar", "hda"])
    for a in algos:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {a!r}")
    workers = cfg.get("workers", [1, 2, 4])
    seeds = cfg.get("seeds", [0])
    packs = cfg.get("pack_sizes", [100])
    transport = check_transport(cfg.get("transport", "async"))
    total_budget = cfg.get("node_budget")
    per_worker_budget = cfg.get("node_budget_per_worker")
    if total_budget is not None and per_worker_budget is not None:
        raise ConfigError("give node_budget or node_budget_per_worker, not both")
    heuristic_spec = cfg.get("heuristic", "manhattan")
    instances = _suite_instances(cfg, base)
    heuristics: dict = {}

    runs = []
    for name, start in instances:
        key = (start.width, start.height)
        if key not in heuristics:
            heuristics[key] = make_heuristic(heuristic_spec, *key)
        h = heuristics[key]
        for algo in algos:
            for p in [1] if algo in SERIAL else workers:
                budget = per_worker_budget * p if per_worker_budget is not None else total_budget
                for seed in seeds if algo not in SERIAL else seeds[:1]:
                    for pack in packs if algo not in SERIAL else packs[:1]:
                        config = SearchConfig(pack_size=pack, node_budget=budget, transport=transport, seed=seed)
                        try:
                            report = run_algorithm(algo, start, h, p, config, instance=name)
                        except ConfigError:
                            raise
                        except Exception as exc:  # recorded, the suite goes on
                            log.warning("run %s/%s/p=%d crashed: %s", name, algo, p, exc)
                            report = RunReport(
                                algorithm=algo, p=p, instance=name, outcome=ABORTED, config=config.snapshot()
                            )
                            report.diagnostic = "".join(traceback.format_exception_only(type(exc), exc)).strip()
                        runs.append(report)
    return build_suite_report(runs).to_dict()


def cmd_suite(args) -> int:
    try:
        cfg = json.loads(Path(args.config).read_text())
        result = run_suite(cfg, Path(args.config).parent)
    except (ConfigError, InstanceError, PartitionError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.output or cfg.get("output") or "suite_report.json"
    Path(out).write_text(json.dumps(result, indent=2))
    print(out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdastar", description="Parallel best-first search on sliding-tile puzzles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="run one algorithm on one instance")
    s.add_argument("--algo", choices=ALGORITHMS, required=True)
    s.add_argument("--workers", type=_positive, default=1)
    s.add_argument("--pack-size", type=_positive, default=100)
    s.add_argument("--heuristic", default="manhattan", help="manhattan or pdb:<groups>, e.g. pdb:1,2,3;4,5,6")
    s.add_argument("--node-budget", type=_positive, default=None, help="total stored states, split per worker")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--transport", default="async", help="async, sync or delay:<seed>")
    s.add_argument("--instance", required=True, type=Path)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_solve)

    u = sub.add_parser("suite", help="run a configuration matrix from a JSON file")
    u.add_argument("config", type=Path)
    u.add_argument("--output", type=Path, default=None)
    u.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
