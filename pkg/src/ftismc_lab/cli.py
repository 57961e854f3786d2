"""Command-line front end.

Subcommands:
  run        one scenario -> trajectory CSV + summary JSON
  benchmark  all six controllers on the same scenario -> comparison table
  bounds     theoretical settling-time bound report
  verify     randomized property suites

Exit codes: 0 success, 2 usage/config error, 3 runtime abort (singularity or
non-finite state), 4 assertion failure (benchmark ordering or verify suite).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .analysis import (bound_report_text, comparison_table, theoretical_bounds)
from .config import ConfigError, apply_overrides_raw, load_config
from .controllers import BENCHMARK_CONTROLLERS
from .simulation import LOG_COLUMNS, run_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_ASSERT = 4

# per-joint RMSE orderings the benchmark is expected to reproduce
ORDERINGS = (
    ("ftismc_bsp", "<", "ismc_bsp"),
    ("ismc_bsp", "<", "ismc_ctc"),
    ("ismc_ctc", "<=", "ctc"),
    ("ismc_pid", "<", "pid"),
)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftismc-lab",
                                description="fixed-time ISMC simulation laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run one scenario"),
                       ("benchmark", "run all six benchmark controllers"),
                       ("bounds", "compute theoretical settling-time bounds"),
                       ("verify", "run the randomized property suites")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="TOML scenario file")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (section.key=value, repeatable)")
        sp.add_argument("--controller", help="controller name (run only)")
        sp.add_argument("--seed", type=int, help="random seed")
    return p


def _load(args):
    overrides = list(args.set)
    if args.controller:
        overrides.append(f"controller.name={args.controller}")
    if args.seed is not None:
        overrides.append(f"simulation.seed={args.seed}")
    if args.config:
        if not os.path.isfile(args.config):
            raise ConfigError(f"config file not found: {args.config}")
        return load_config(args.config, overrides)
    return apply_overrides_raw({}, overrides)


def _write_log(path, log) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for row in log:
            w.writerow([format(v, ".17g") for v in row])


def _write_summary(path, summary) -> None:
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")


def _artifact(path) -> str:
    print(f"wrote {path}")
    return path


def _cmd_run(args) -> int:
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    res = run_scenario(cfg)
    base = os.path.join(args.out, f"run_{cfg.controller}")
    _write_log(base + ".csv", res.log)
    _artifact(base + ".csv")
    _write_summary(base + ".json", res.summary)
    _artifact(base + ".json")
    print(f"status: {res.summary['status']}  rmse: "
          f"{res.summary['rmse'][0]:.6g} / {res.summary['rmse'][1]:.6g}")
    return EXIT_OK if res.ok else EXIT_RUNTIME


def _cmd_benchmark(args) -> int:
    from dataclasses import replace
    cfg = _load(args)
    os.makedirs(args.out, exist_ok=True)
    summaries = {}
    for name in BENCHMARK_CONTROLLERS:
        res = run_scenario(replace(cfg, controller=name))
        base = os.path.join(args.out, f"run_{name}")
        _write_log(base + ".csv", res.log)
        _write_summary(base + ".json", res.summary)
        summaries[name] = res.summary
        print(f"{name:12s} status={res.summary['status']:10s} "
              f"rmse={res.summary['rmse'][0]:.6g} / {res.summary['rmse'][1]:.6g}")

    table = os.path.join(args.out, "comparison.csv")
    comparison_table(summaries, table)
    _artifact(table)

    if any(s["status"] != "ok" for s in summaries.values()):
        return EXIT_RUNTIME

    violated = []
    for axis in (0, 1):
        for left, op, right in ORDERINGS:
            a = summaries[left]["rmse"][axis]
            b = summaries[right]["rmse"][axis]
            ok = a < b if op == "<" else a <= b
            mark = "ok" if ok else "VIOLATED"
            print(f"axis {axis + 1}: {left} {op} {right}  "
                  f"({a:.6g} vs {b:.6g})  {mark}")
            if not ok:
                violated.append((axis, left, op, right))
    return EXIT_ASSERT if violated else EXIT_OK


def _cmd_bounds(args) -> int:
    cfg = _load(args)
    report = theoretical_bounds(cfg.gains)
    text = bound_report_text(report)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "bounds.txt")
    with open(path, "w") as fh:
        fh.write(text)
    _artifact(path)
    print(text, end="")
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import run_all
    results = run_all(seed=args.seed if args.seed is not None else 0)
    failed = 0
    for r in results:
        mark = "pass" if r.passed else "FAIL"
        print(f"[{mark}] {r.name}: {r.detail}")
        failed += not r.passed
    print(f"{len(results) - failed}/{len(results)} suites passed")
    return EXIT_OK if failed == 0 else EXIT_ASSERT


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        handler = {"run": _cmd_run, "benchmark": _cmd_benchmark,
                   "bounds": _cmd_bounds, "verify": _cmd_verify}[args.command]
        return handler(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, FloatingPointError) as exc:
        print(f"runtime abort: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
