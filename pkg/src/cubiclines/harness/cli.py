"""Command line front end.

Every subcommand takes its operation parameters as flags (``--c 1,-1``,
``--X 2`` or ``--X 25:200:2``) plus the shared flags for workers, budgets,
output format and file.  ``--config FILE`` reads a JSON object whose keys
mirror the flags; explicit flags win.

Exit status: 0 on success, 1 when a check fails, 2 for invalid input,
3 when a budget refuses the job.
"""

from __future__ import annotations

import argparse
import json
import sys

from .._limits import GIB, BudgetExceeded
from .acceptance import GROUPS, PROFILES, acceptance_suite
from .jobs import ALIASES, COMMANDS, JobError, JobSpec, run

SHARED = ("workers", "work_limit", "memory_limit", "format", "output", "seed", "dry_run", "timing")
SHARED_DEFAULTS = {"workers": 1, "work_limit": 1e10, "memory_limit": 8 * GIB, "format": "jsonl",
                   "output": None, "seed": 0, "dry_run": False, "timing": False}


def _shared_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("shared options")
    g.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    g.add_argument("--work-limit", dest="work_limit", type=float, help="elementary operation budget (default 1e10)")
    g.add_argument("--memory-limit", dest="memory_limit", type=float, help="memory budget in bytes (default 8 GiB)")
    g.add_argument("--format", choices=("jsonl", "csv", "json"), help="output format (default jsonl)")
    g.add_argument("--output", "-o", help="write the report here instead of stdout")
    g.add_argument("--config", help="JSON file with default values for any flag")
    g.add_argument("--seed", type=int, help="random seed where applicable")
    g.add_argument("--dry-run", dest="dry_run", action="store_const", const=True,
                   help="validate and print the cost estimate without running")
    g.add_argument("--timing", action="store_const", const=True, help="append wall times to the report")
    return p


def build_parser() -> argparse.ArgumentParser:
    shared = _shared_parser()
    parser = argparse.ArgumentParser(prog="cubiclines", description="Rational lines on diagonal cubic hypersurfaces.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, cmd in COMMANDS.items():
        aliases = [a for a, target in ALIASES.items() if target == name]
        sp = sub.add_parser(name, parents=[shared], help=cmd.help, description=cmd.help, aliases=aliases)
        for key, prm in cmd.params.items():
            flags = [f"--{key}"]
            if "_" in key:
                flags.append(f"--{key.replace('_', '-')}")
            sp.add_argument(*flags, dest=key, default=None, help=prm.help or None)
    acc = sub.add_parser("acceptance", parents=[shared], help="run the acceptance suite",
                         description="Run every acceptance group; exits nonzero if any check fails.")
    acc.add_argument("--profile", choices=tuple(PROFILES), default=None)
    acc.add_argument("--group", action="append", choices=tuple(GROUPS), help="restrict to these groups")
    acc.add_argument("--tolerance", action="append", default=None, metavar="NAME=VALUE",
                     help="override the tolerance of a check (or of every check in a group)")
    acc.add_argument("--no-determinism", dest="determinism", action="store_false", default=True,
                     help="skip the rerun with a different worker count")
    return parser


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise JobError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in data.items()}


def _merge(args: argparse.Namespace, config: dict, keys) -> dict:
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is None:
            v = config.get(k)
        out[k] = v
    return out


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _run_acceptance(args, config) -> int:
    shared = {k: v if v is not None else SHARED_DEFAULTS[k] for k, v in _merge(args, config, SHARED).items()}
    tolerances = dict(config.get("tolerances", {}))
    for item in args.tolerance or config.get("tolerance", []) or []:
        name, _, value = item.rpartition("=")
        if not name:
            raise JobError(f"tolerance override {item!r} must look like NAME=VALUE")
        tolerances[name] = float(value)
    profile = args.profile or config.get("profile", "quick")
    groups = args.group or config.get("group")

    def progress(line):
        print(line, file=sys.stderr, flush=True)

    report = acceptance_suite(profile, shared["seed"], shared["workers"], tolerances, groups,
                              args.determinism and config.get("determinism", True), progress)
    for ch in report.failures:
        print(f"FAILED {ch.name}: lhs={ch.lhs!r} rhs={ch.rhs!r} tol={ch.tolerance} {ch.detail}",
              file=sys.stderr)
    _emit(report.serialize(shared["format"], shared["timing"]), shared["output"])
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        if args.command == "acceptance":
            return _run_acceptance(args, config)
        args.command = ALIASES.get(args.command, args.command)
        cmd = COMMANDS[args.command]
        shared = {k: v if v is not None else SHARED_DEFAULTS[k] for k, v in _merge(args, config, SHARED).items()}
        params = {k: v for k, v in _merge(args, config.get("params", config), cmd.params).items() if v is not None}
        job = JobSpec(args.command, params, workers=int(shared["workers"]), work_limit=float(shared["work_limit"]),
                      memory_limit=float(shared["memory_limit"]), output=shared["output"],
                      format=shared["format"], seed=int(shared["seed"]))
        report = run(job, dry_run=bool(shared["dry_run"]))
    except JobError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BudgetExceeded as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OverflowError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    _emit(report.serialize(job.format, bool(shared["timing"])), job.output)
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
