"""Command line front end: run scenario manifests, generate request logs,
aggregate results into tables and figures.

Manifests and generator configs are flat key=value lines; '#' starts a
comment. `run` executes the full scenario grid (every combination of the
listed fleets, deadline modes, request counts, and policies, times the
trial count) and writes a metrics CSV, one per-request trace CSV per
trial, and a summary table. `gen` writes a single seeded request stream
to a replayable log. `report` aggregates metrics CSVs into summary and
policy-difference tables and renders the trend figures.

Trials are independent, so `run` fans them out over a thread pool; the
ODTA_THREADS environment variable caps the worker count. Rows are always
emitted in manifest order regardless of completion order, so outputs are
byte-stable for a fixed manifest and seed.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from . import report as report_mod
from .model import FleetLayout, write_request_log
from .sim import (
    DEFAULT_MAP,
    METRICS_HEADER,
    DeadlineMode,
    Metrics,
    Policy,
    ScenarioConfig,
    _scene,
    generate_requests,
    metrics_row,
    parse_fleet,
    run_trial,
    trace_rows,
    write_csv,
)

_RANGE_RE = re.compile(r"^(\d+)\s*\.\.\s*(\d+)(?:\s+step\s+(\d+))?$")

_MANIFEST_KEYS = frozenset({"n", "deadline", "fleet", "policy", "seed", "trials", "map"})
_GEN_KEYS = frozenset({"n", "deadline", "fleet", "seed", "map"})


def parse_kv(text: str) -> dict[str, str]:
    """Flat key=value lines; blank lines and '#' comments are skipped."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError("line %d: expected key=value, got %r" % (lineno, raw.strip()))
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key in out:
            raise ValueError("line %d: duplicate key %r" % (lineno, key))
        if not value:
            raise ValueError("line %d: empty value for %r" % (lineno, key))
        out[key] = value
    return out


def parse_counts(text: str) -> tuple[int, ...]:
    """Request counts: a single value, a comma list, or 'lo..hi step k'."""
    m = _RANGE_RE.match(text.strip())
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        step = int(m.group(3)) if m.group(3) else 1
        if step <= 0:
            raise ValueError("step must be positive")
        if hi < lo:
            raise ValueError("range end %d is below start %d" % (hi, lo))
        counts = tuple(range(lo, hi + 1, step))
    else:
        try:
            counts = tuple(int(part.strip()) for part in text.split(","))
        except ValueError:
            raise ValueError("bad request count list %r" % text) from None
    if any(n <= 0 for n in counts):
        raise ValueError("request counts must be positive")
    return counts


def _parse_list(text: str, one):
    return tuple(one(part.strip()) for part in text.split(","))


@dataclass(frozen=True)
class RunManifest:
    counts: tuple[int, ...]
    deadline_modes: tuple[DeadlineMode, ...] = (DeadlineMode.TWO_E,)
    fleets: tuple[FleetLayout, ...] = (FleetLayout.EQUAL,)
    policies: tuple[Policy, ...] = (Policy.HMRODTA,)
    seed: int = 0
    trials: int = 1
    map_path: str | None = None


def parse_manifest(text: str) -> RunManifest:
    kv = parse_kv(text)
    unknown = sorted(set(kv) - _MANIFEST_KEYS)
    if unknown:
        raise ValueError("unknown manifest keys: %s" % ", ".join(unknown))
    if "n" not in kv:
        raise ValueError("manifest needs an n= line")
    man = RunManifest(counts=parse_counts(kv["n"]))
    if "deadline" in kv:
        man = replace(man, deadline_modes=_parse_list(kv["deadline"], DeadlineMode.parse))
    if "fleet" in kv:
        man = replace(man, fleets=_parse_list(kv["fleet"], parse_fleet))
    if "policy" in kv:
        man = replace(man, policies=_parse_list(kv["policy"], Policy.parse))
    if "seed" in kv:
        man = replace(man, seed=int(kv["seed"]))
    if "trials" in kv:
        trials = int(kv["trials"])
        if trials <= 0:
            raise ValueError("trials must be positive")
        man = replace(man, trials=trials)
    if "map" in kv:
        man = replace(man, map_path=kv["map"])
    return man


@dataclass(frozen=True)
class Job:
    cfg: ScenarioConfig
    policy: Policy


def manifest_jobs(man: RunManifest) -> list[Job]:
    """One trial per job, in a fixed nesting order so output rows are
    stable: policy, fleet, deadline mode, request count, then seed."""
    jobs: list[Job] = []
    for policy in man.policies:
        for fleet in man.fleets:
            for mode in man.deadline_modes:
                for n in man.counts:
                    for trial in range(man.trials):
                        cfg = ScenarioConfig(
                            n_requests=n,
                            deadline_mode=mode,
                            fleet=fleet,
                            seed=man.seed + trial,
                            map_path=man.map_path,
                        )
                        jobs.append(Job(cfg, policy))
    return jobs


def thread_count() -> int:
    raw = os.environ.get("ODTA_THREADS")
    if raw is None:
        return min(8, os.cpu_count() or 1)
    try:
        n = int(raw)
    except ValueError:
        raise ValueError("ODTA_THREADS must be an integer, got %r" % raw) from None
    if n <= 0:
        raise ValueError("ODTA_THREADS must be positive")
    return n


def _trace_name(job: Job) -> str:
    cfg = job.cfg
    return "trace_%s_%s_%s_n%d_s%d.csv" % (
        job.policy.value, cfg.fleet.value, cfg.deadline_mode.value,
        cfg.n_requests, cfg.seed,
    )


def _run_job(job: Job) -> tuple[Metrics, list[tuple[str, ...]]]:
    world, matrix, _ = _scene(job.cfg.resolved_map())
    requests = generate_requests(job.cfg, world, matrix)
    m = run_trial(job.cfg, policy=job.policy, requests=requests)
    return m, trace_rows(requests, m)


def run_manifest(man: RunManifest, out_dir: Path) -> tuple[Path, list[str]]:
    """Execute every job, write metrics, traces, and the summary table.
    Returns the metrics path and any invariant violations observed."""
    jobs = manifest_jobs(man)
    out_dir.mkdir(parents=True, exist_ok=True)
    traces_dir = out_dir / "traces"
    traces_dir.mkdir(exist_ok=True)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(_run_job, jobs))
    violations: list[str] = []
    rows = [METRICS_HEADER]
    for job, (m, trace) in zip(jobs, results):
        rows.append(metrics_row(job.cfg, job.policy, m))
        write_csv(str(traces_dir / _trace_name(job)), trace)
        violations.extend("%s: %s" % (_trace_name(job), v) for v in m.violations)
    metrics_path = out_dir / "metrics.csv"
    write_csv(str(metrics_path), rows)
    df = report_mod.load_metrics(metrics_path)
    report_mod.summarize(df).to_csv(out_dir / "summary.csv", index=False)
    return metrics_path, violations


def _fail(msg: str) -> int:
    print("error: %s" % msg, file=sys.stderr)
    return 2


def cmd_run(args: argparse.Namespace) -> int:
    try:
        man = parse_manifest(Path(args.manifest).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail("cannot read manifest: %s" % exc)
    except ValueError as exc:
        return _fail(str(exc))
    if args.seed is not None:
        man = replace(man, seed=args.seed)
    if args.trials is not None:
        if args.trials <= 0:
            return _fail("trials must be positive")
        man = replace(man, trials=args.trials)
    if args.policy is not None:
        try:
            man = replace(man, policies=_parse_list(args.policy, Policy.parse))
        except ValueError as exc:
            return _fail(str(exc))
    map_path = man.map_path or str(DEFAULT_MAP)
    if not Path(map_path).is_file():
        return _fail("map file not found: %s" % map_path)
    out_dir = Path(args.out)
    try:
        metrics_path, violations = run_manifest(man, out_dir)
    except OSError as exc:
        return _fail("cannot write output: %s" % exc)
    n_rows = len(manifest_jobs(man))
    print("wrote %d metrics rows to %s" % (n_rows, metrics_path))
    print("summary at %s" % (out_dir / "summary.csv"))
    if violations:
        for v in violations:
            print("invariant violation: %s" % v, file=sys.stderr)
        return 1
    return 0


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        kv = parse_kv(Path(args.config).read_text(encoding="utf-8"))
    except OSError as exc:
        return _fail("cannot read config: %s" % exc)
    except ValueError as exc:
        return _fail(str(exc))
    unknown = sorted(set(kv) - _GEN_KEYS)
    if unknown:
        return _fail("unknown config keys: %s" % ", ".join(unknown))
    if "n" not in kv:
        return _fail("config needs an n= line")
    try:
        cfg = ScenarioConfig(
            n_requests=int(kv["n"]),
            deadline_mode=DeadlineMode.parse(kv["deadline"]) if "deadline" in kv else DeadlineMode.TWO_E,
            fleet=parse_fleet(kv["fleet"]) if "fleet" in kv else FleetLayout.EQUAL,
            seed=args.seed if args.seed is not None else int(kv.get("seed", "0")),
            map_path=kv.get("map"),
        )
    except ValueError as exc:
        return _fail(str(exc))
    map_path = cfg.resolved_map()
    if not Path(map_path).is_file():
        return _fail("map file not found: %s" % map_path)
    world, matrix, _ = _scene(map_path)
    try:
        requests = generate_requests(cfg, world, matrix)
    except ValueError as exc:
        return _fail(str(exc))
    out = Path(args.out)
    if out.parent != Path("."):
        out.parent.mkdir(parents=True, exist_ok=True)
    write_request_log(str(out), requests)
    print("wrote %d requests to %s" % (len(requests), out))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    try:
        df = report_mod.load_metrics(args.source)
    except (FileNotFoundError, ValueError) as exc:
        return _fail(str(exc))
    out_dir = Path(args.out) if args.out else Path(args.source)
    try:
        paths = report_mod.write_report(df, out_dir)
    except OSError as exc:
        return _fail("cannot write output: %s" % exc)
    print("summary at %s" % paths["summary"])
    print("policy differences at %s" % paths["percdiff"])
    for fig in paths["figures"]:
        print("figure at %s" % fig)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="odta",
        description="Auction-based online task allocation: scenario runner and report tool.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario manifest")
    p_run.add_argument("manifest", help="flat key=value manifest file")
    p_run.add_argument("--out", default="results", help="output directory (default: results)")
    p_run.add_argument("--seed", type=int, default=None, help="override the base seed")
    p_run.add_argument("--trials", type=int, default=None, help="override the trial count")
    p_run.add_argument("--policy", default=None, help="override the policy list (comma separated)")
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("gen", help="generate a request log from a config")
    p_gen.add_argument("config", help="flat key=value generator config")
    p_gen.add_argument("--out", default="requests.csv", help="request log path (default: requests.csv)")
    p_gen.add_argument("--seed", type=int, default=None, help="override the seed")
    p_gen.set_defaults(func=cmd_gen)

    p_rep = sub.add_parser("report", help="aggregate metrics CSVs into tables and figures")
    p_rep.add_argument("source", help="metrics CSV or a directory holding metrics*.csv")
    p_rep.add_argument("--out", default=None, help="output directory (default: alongside the input)")
    p_rep.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
