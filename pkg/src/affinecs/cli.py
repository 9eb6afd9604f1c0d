"""Configuration-driven experiment runner.

Every verification in the library is exposed as a subcommand that executes
a named experiment, prints one pass/fail line per check, and writes a JSON
report plus a flat CSV companion.  Reports are deterministic: rerunning
with the same seed and budget reproduces every numeric field byte for byte
(wall time is recorded outside the numeric payload).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigError
from .experiments import EXPERIMENTS, run_experiment

SCHEMA_VERSION = 1
MC_SUBCOMMANDS = {"kn", "resolution", "jacobian", "lower-symbol", "check-algebra", "verify-all"}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"could not read config {path!r}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    return cfg


def _report_payload(subcommand: str, seed: int, budget: str, threads: int,
                    rows) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "subcommand": subcommand,
        "seed": seed,
        "budget": budget,
        "threads": threads,
        "checks": [
            {
                "name": r.name,
                "value": repr(r.value),
                "target": repr(r.target),
                "stderr": repr(r.stderr),
                "tol": repr(r.tol),
                "passed": r.passed,
            }
            for r in rows
        ],
        "passed": all(r.passed for r in rows),
    }


def _csv_text(payload: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["name", "value", "target", "stderr", "tol", "passed"])
    for row in payload["checks"]:
        writer.writerow([row["name"], row["value"], row["target"],
                         row["stderr"], row["tol"], row["passed"]])
    return buf.getvalue()


def _write_reports(payload: dict, out: Path, wall_time_s: float) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    full = dict(payload)
    full["wall_time_s"] = wall_time_s
    with open(out, "w", encoding="utf-8") as fh:
        json.dump(full, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(out.with_suffix(".csv"), "w", encoding="utf-8") as fh:
        fh.write(_csv_text(payload))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="affinecs",
        description="Verification experiments for affine coherent states "
                    "over positive-definite matrices.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    names = sorted(EXPERIMENTS) + ["verify-all"]
    for name in names:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed")
        p.add_argument("--threads", type=int, default=None,
                       help="worker threads (default AFFINECS_THREADS or 1)")
        p.add_argument("--out", default=None, help="report path (.json)")
        p.add_argument("--budget", choices=("quick", "full"), default=None)
    return parser


def _resolve(args) -> tuple[str, int, str, int, Path]:
    cfg = _load_config(args.config)
    unknown = set(cfg) - {"seed", "budget", "threads", "out", "subcommand"}
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    seed = args.seed if args.seed is not None else cfg.get("seed")
    budget = args.budget or cfg.get("budget") or "quick"
    if budget not in ("quick", "full"):
        raise ConfigError(f"invalid budget {budget!r}")
    threads_env = os.environ.get("AFFINECS_THREADS")
    threads = args.threads if args.threads is not None else cfg.get(
        "threads", int(threads_env) if threads_env else 1)
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("threads must be a positive integer")
    if seed is None:
        if args.subcommand in MC_SUBCOMMANDS:
            raise ConfigError(f"{args.subcommand} requires --seed")
        seed = 0
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    out = Path(args.out or cfg.get("out") or f"report-{args.subcommand}.json")
    return args.subcommand, seed, budget, threads, out


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        subcommand, seed, budget, threads, out = _resolve(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    t0 = time.perf_counter()
    rows = []
    if subcommand == "verify-all":
        for i, name in enumerate(sorted(EXPERIMENTS)):
            sub_rows = run_experiment(name, seed=seed + 13 * i, budget=budget,
                                      threads=threads)
            rows.extend(
                type(r)(name=f"{name}/{r.name}", value=r.value, tol=r.tol,
                        passed=r.passed, target=r.target, stderr=r.stderr)
                for r in sub_rows
            )
    else:
        rows = run_experiment(subcommand, seed=seed, budget=budget, threads=threads)
    wall = time.perf_counter() - t0

    payload = _report_payload(subcommand, seed, budget, threads, rows)
    _write_reports(payload, out, wall)

    for r in rows:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.name}: value={r.value:.6g} tol={r.tol:.3g}")
    failing = [r.name for r in rows if not r.passed]
    print(f"report: {out} ({len(rows)} checks, wall {wall:.1f}s)")
    if failing:
        print(f"FAILED criteria: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
