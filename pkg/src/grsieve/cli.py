"""Command-line front end: ``run``, ``bench``, ``oracle`` and ``list``.

Exit codes: 0 success, 1 usage error, 2 resource or budget exhaustion.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
import time
from dataclasses import dataclass
from typing import Optional, Sequence

from . import benchmarks
from .benchmarks import BenchmarkEntry, DimensionError, Registry, UnknownFunction
from .config import ConfigError, GrsConfig
from .oracle import DEFAULT_BUDGET, OracleBudgetExceeded, grid_search, lipschitz_estimates
from .pseudo_m import GrsResult, GrsStatus, run_grs
from .sieve import BoxBudgetExceeded, ObjectiveError, ObjectiveSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BUDGET = 2

DEFAULT_ATOL = 1e-6
DEFAULT_RTOL = 1e-4


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    function: str
    dimension: int
    m_final: float
    levels: int
    evals: int
    v: float
    enclosure_lo: float
    enclosure_hi: float
    clusters: list
    wall_ms: int
    status: str
    success_vs_truth: Optional[bool]

    @classmethod
    def fields(cls) -> list[str]:
        return [f.name for f in dataclasses.fields(cls)]

    def row(self) -> list[str]:
        out = []
        for name in self.fields():
            value = getattr(self, name)
            if name == "clusters":
                out.append(json.dumps(value))
            elif value is None:
                out.append("")
            elif isinstance(value, float):
                out.append(repr(value))
            else:
                out.append(str(value))
        return out

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self))


def is_success(result: GrsResult, spec: ObjectiveSpec, atol: float = DEFAULT_ATOL,
               rtol: float = DEFAULT_RTOL) -> Optional[bool]:
    """Minimum within tolerance and every known minimizer inside some cluster's ball.

    None when the objective carries no ground truth.
    """
    if spec.ground_truth_min is None:
        return None
    truth = spec.ground_truth_min
    if abs(result.v - truth) > max(atol, rtol * (1 + abs(truth))):
        return False
    for point in spec.ground_truth_minimizers or ():
        if not any(c.captures(point) for c in result.minimizer_clusters):
            return False
    return True


def make_record(spec: ObjectiveSpec, result: GrsResult, wall_ms: int,
                atol: float = DEFAULT_ATOL, rtol: float = DEFAULT_RTOL) -> RunRecord:
    return RunRecord(
        function=spec.name,
        dimension=spec.dimension,
        m_final=result.m_final,
        levels=result.levels,
        evals=result.total_evals,
        v=result.v,
        enclosure_lo=result.enclosure.lo,
        enclosure_hi=result.enclosure.hi,
        clusters=[c.to_dict() for c in result.minimizer_clusters],
        wall_ms=wall_ms,
        status=result.status.value,
        success_vs_truth=is_success(result, spec, atol, rtol),
    )


def failed_record(spec: ObjectiveSpec, status: str, wall_ms: int) -> RunRecord:
    """Placeholder for a run that raised before producing any result."""
    nan = float("nan")
    return RunRecord(spec.name, spec.dimension, nan, 0, 0, nan, nan, nan, [], wall_ms, status,
                     None if spec.ground_truth_min is None else False)


def format_records(records: Sequence[RunRecord], as_json: bool) -> str:
    if as_json:
        return "".join(r.to_json() + "\n" for r in records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(RunRecord.fields())
    for r in records:
        writer.writerow(r.row())
    return buf.getvalue()


# -- argument handling ----------------------------------------------------------

def _parse_split(text: str) -> tuple[int, Optional[int]]:
    parts = text.split("/")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad split {text!r}; use N or N/R") from None
    if len(values) > 2 or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"bad split {text!r}; use N or N/R with positive integers")
    return values[0], (values[1] if len(values) == 2 else None)


def _shared_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--function", help="registry name (case, '-' and '_' are ignored)")
    p.add_argument("--dim", type=int, help="dimension for scalable functions")
    p.add_argument("--m1", type=float, help="first pseudo-Lipschitz bound (skips the estimate)")
    p.add_argument("--m-growth", type=float, help="ratio between consecutive bounds (default 2)")
    p.add_argument("--split", type=_parse_split,
                   help="segments per side: N for the first partition, N/R to also set refinement")
    p.add_argument("--tol", type=float, default=1e-3, help="stopping threshold (default 0.001)")
    p.add_argument("--max-evals", type=int, help="evaluation cap per function")
    p.add_argument("--max-boxes", type=int, help="box cap per level")
    p.add_argument("--workers", type=int, default=1, help="threads for objective evaluation")
    p.add_argument("--output", help="write records to this file")
    p.add_argument("--json", action="store_true", help="one JSON object per line instead of CSV")
    p.add_argument("--filter", help="comma-separated tags an entry must all carry")
    p.add_argument("--functions", help="comma-separated registry names")
    p.add_argument("--timeout-s", type=int, default=0, help="wall-clock cutoff per function, 0 = off")
    p.add_argument("--atol", type=float, default=DEFAULT_ATOL, help="success tolerance, absolute")
    p.add_argument("--rtol", type=float, default=DEFAULT_RTOL, help="success tolerance, relative")
    p.add_argument("--corpus", help="extra corpus file: name, dimension, lower, upper, min, minimizers")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_flags()
    parser = argparse.ArgumentParser(prog="grsieve", description="Granular sieving global minimizer")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[shared], help="minimize one function")
    sub.add_parser("bench", parents=[shared], help="run the benchmark corpus")
    o = sub.add_parser("oracle", parents=[shared], help="dense grid minimum and Lipschitz estimate")
    o.add_argument("--points", type=int, default=101, help="grid points per dimension")
    o.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="largest grid allowed")
    sub.add_parser("list", parents=[shared], help="show the corpus")
    return parser


def config_from_args(args) -> GrsConfig:
    kw = {"tol": args.tol, "workers": args.workers}
    if args.m1 is not None:
        kw["m1_override"] = args.m1
    if args.m_growth is not None:
        kw["m_growth"] = args.m_growth
    if args.split is not None:
        kw["initial_split"], refine = args.split
        if refine is not None:
            kw["refine_split"] = refine
    if args.max_evals is not None:
        kw["max_evals"] = args.max_evals
    if args.max_boxes is not None:
        kw["max_boxes"] = args.max_boxes
    if args.timeout_s:
        if args.timeout_s < 0:
            raise UsageError("--timeout-s must be non-negative")
        kw["time_limit"] = float(args.timeout_s)
    try:
        return GrsConfig(**kw)
    except ConfigError as exc:
        raise UsageError(str(exc)) from None


def registry_from_args(args) -> Registry:
    if not args.corpus:
        return benchmarks.REGISTRY
    try:
        return benchmarks.REGISTRY.merged(benchmarks.load_corpus_file(args.corpus))
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError(f"cannot load corpus {args.corpus}: {exc}") from None


def _split_csv(text: Optional[str]) -> list[str]:
    return [t.strip() for t in (text or "").split(",") if t.strip()]


def resolve_spec(registry: Registry, name: Optional[str], dim: Optional[int]) -> ObjectiveSpec:
    if not name:
        raise UsageError("--function is required")
    try:
        return registry.lookup(name, dim)
    except (UnknownFunction, DimensionError) as exc:
        raise UsageError(exc.args[0] if exc.args else str(exc)) from None


def select_entries(registry: Registry, args) -> list[BenchmarkEntry]:
    names = _split_csv(args.functions)
    if names:
        try:
            entries = [registry.get(n) for n in names]
        except UnknownFunction as exc:
            raise UsageError(exc.args[0]) from None
        tags = set(_split_csv(args.filter))
        return [e for e in entries if tags <= e.tags]
    return registry.list_corpus(_split_csv(args.filter))


def _emit(records: Sequence[RunRecord], args, out) -> None:
    text = format_records(records, args.json)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        out.write(text)


def solve(spec: ObjectiveSpec, config: GrsConfig, atol: float = DEFAULT_ATOL,
          rtol: float = DEFAULT_RTOL) -> RunRecord:
    """Run the pseudo-M schedule on ``spec`` and wrap the outcome as a record.

    An objective error or a first partition over the caps becomes a record
    with a failure status instead of an exception.
    """
    started = time.perf_counter()
    try:
        result = run_grs(spec, config)
    except BoxBudgetExceeded:
        return failed_record(spec, GrsStatus.BUDGET_EXCEEDED.value, _ms(started))
    except ObjectiveError as exc:
        return failed_record(spec, f"ObjectiveError: {exc}", _ms(started))
    return make_record(spec, result, _ms(started), atol, rtol)


def _ms(started: float) -> int:
    return int(round((time.perf_counter() - started) * 1000))


# -- subcommands ----------------------------------------------------------------

def cmd_run(args, out=sys.stdout) -> int:
    registry = registry_from_args(args)
    spec = resolve_spec(registry, args.function, args.dim)
    config = config_from_args(args)
    record = solve(spec, config, args.atol, args.rtol)
    _emit([record], args, out)
    return EXIT_OK if record.status == GrsStatus.STABILIZED.value else EXIT_BUDGET


def summary_table(entries: Sequence[BenchmarkEntry], records: Sequence[RunRecord]) -> str:
    judged = [r for r in records if r.success_vs_truth is not None]
    good = sum(1 for r in judged if r.success_vs_truth)
    rate = 100.0 * good / len(judged) if judged else 0.0
    lines = [
        f"{'':10s} {'Tested':>8s} {'Successful':>11s} {'Success rate (%)':>17s}",
        f"{'Functions':10s} {len(judged):8d} {good:11d} {rate:17.2f}",
    ]
    hard = sorted((e.hardness_rank, e.name, r) for e, r in zip(entries, records)
                  if e.hardness_rank is not None)
    if hard:
        lines += ["", f"{'Rank':>4s}  {'Function':22s} {'Result':8s} {'v':>14s}"]
        for rank, name, r in hard:
            verdict = "Success" if r.success_vs_truth else "Failure"
            lines.append(f"{rank:4d}  {name:22s} {verdict:8s} {r.v:14.8g}")
    return "\n".join(lines) + "\n"


def cmd_bench(args, out=sys.stdout) -> int:
    registry = registry_from_args(args)
    entries = select_entries(registry, args)
    if not entries:
        raise UsageError("no corpus entries match the selection")
    config = config_from_args(args)
    records = []
    for entry in entries:
        spec = entry.spec(args.dim if entry.scalable else None)
        records.append(solve(spec, config, args.atol, args.rtol))
    if args.output:
        _emit(records, args, out)
    out.write(summary_table(entries, records))
    return EXIT_OK


def cmd_oracle(args, out=sys.stdout) -> int:
    registry = registry_from_args(args)
    spec = resolve_spec(registry, args.function, args.dim)
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    try:
        res = grid_search(spec, args.points, budget=args.budget)
        lip = lipschitz_estimates(spec, args.points, budget=args.budget)
    except OracleBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    report = {
        "function": spec.name,
        "dimension": spec.dimension,
        "points_per_dim": res.points_per_dim,
        "grid_spacing": res.grid_spacing,
        "v_hat": res.v_hat,
        "argmins": [list(p) for p in res.argmins],
        "lipschitz_raw": lip.raw,
        "lipschitz_conservative": lip.conservative,
    }
    if args.json:
        out.write(json.dumps(report) + "\n")
    else:
        for key, value in report.items():
            if key == "argmins":
                shown = value[:10]
                more = f" (+{len(value) - 10} more)" if len(value) > 10 else ""
                value = "; ".join(str(tuple(p)) for p in shown) + more
            out.write(f"{key}: {value}\n")
    return EXIT_OK


def cmd_list(args, out=sys.stdout) -> int:
    registry = registry_from_args(args)
    for e in registry.list_corpus(_split_csv(args.filter)):
        dim = f"{e.dimension}" if e.dimension else f"n (default {e.default_dim})"
        tags = ",".join(sorted(e.tags))
        rank = f" rank={e.hardness_rank}" if e.hardness_rank else ""
        out.write(f"{e.name:22s} dim={dim:14s} min={e.ground_truth()[0]:<14.10g} [{tags}]{rank}\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "bench": cmd_bench, "oracle": cmd_oracle, "list": cmd_list}


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
