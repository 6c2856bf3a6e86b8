"""Command line: ``infotrade run|validate|suite``.

Exit codes are 0 when every embedded check passes, 1 on a check failure
and 2 on a configuration error. Failures are reported as JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import PRESETS, ConfigError, dump_config, parse_config, preset_text

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


def _read(source: str) -> str:
    """Config text from a file path, or from a shipped preset name."""
    path = Path(source)
    if path.is_file():
        return path.read_text()
    if source in PRESETS:
        return preset_text(source)
    raise ConfigError([("<file>", f"no config file or preset named {source!r}")])


def _override(cfg, seed, paths, skip_without_mc=False):
    if seed is None and paths is None or (cfg.mc is None and skip_without_mc):
        return cfg
    if cfg.mc is None:
        raise ConfigError([("mc", "--seed/--paths given but this experiment has no mc section")])
    body = json.loads(dump_config(cfg))
    body["experiment"]["mc"].update({k: v for k, v in (("seed", seed), ("paths", paths)) if v is not None})
    # reparse so overrides obey the same rules as file values
    return parse_config(json.dumps(body))


def _config_failure(source, exc: ConfigError) -> dict:
    return {"status": "config-error", "config": source,
            "errors": [{"loc": loc, "msg": msg} for loc, msg in exc.errors]}


def _run_one(source: str, args, out_dir, suite=False) -> tuple[int, dict]:
    from .experiments import run_experiment

    try:
        cfg = _override(parse_config(_read(source)), args.seed, args.paths, suite)
    except ConfigError as exc:
        return EXIT_CONFIG, _config_failure(source, exc)
    res = run_experiment(cfg, out_dir)
    report = {
        "status": "pass" if res.passed else "check-failure",
        "config": source,
        "output_dir": str(res.output_dir),
        "manifest": str(res.manifest),
        "passed": sum(c.passed for c in res.checks),
        "failed": [{"name": c.name, "detail": c.detail} for c in res.failures()],
    }
    return (EXIT_OK if res.passed else EXIT_CHECK), report


def cmd_run(args) -> int:
    code, report = _run_one(args.config, args, args.out)
    print(json.dumps(report, indent=2))
    return code


def cmd_validate(args) -> int:
    try:
        cfg = parse_config(_read(args.config))
    except ConfigError as exc:
        print(json.dumps(_config_failure(args.config, exc), indent=2))
        return EXIT_CONFIG
    print(json.dumps({"status": "valid", "config": args.config, "kind": cfg.kind, "name": cfg.name}))
    return EXIT_OK


def cmd_suite(args) -> int:
    reports, worst = [], EXIT_OK
    for name in PRESETS:
        out = None if args.out is None else Path(args.out) / name
        code, report = _run_one(name, args, out, suite=True)
        reports.append(report)
        worst = max(worst, code)
        print(f"{name}: {report['status']}", file=sys.stderr)
    print(json.dumps({"status": "pass" if worst == EXIT_OK else "failure", "experiments": reports}, indent=2))
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infotrade", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, help="override the Monte Carlo base seed")
        p.add_argument("--paths", type=int, help="override the Monte Carlo path count")
        p.add_argument("--out", help="output directory (beats INFOTRADE_OUTPUT_DIR and the config)")

    p = sub.add_parser("run", help="run one experiment config or preset")
    p.add_argument("config", help="config file path or preset name")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", help="validate a config without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("suite", help="run every shipped preset")
    common(p)
    p.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
