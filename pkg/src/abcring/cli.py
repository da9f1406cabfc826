"""Command-line entry point: ``abcring run | validate | list-experiments``."""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import subprocess
import sys
import time
from importlib import metadata
from pathlib import Path

from .experiments import REGISTRY, ConfigError, default_threads, run_experiment, validate

EXIT_OK, EXIT_INVALID, EXIT_FAULT = 0, 2, 3


def version_string() -> str:
    try:
        base = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        base = "0+unknown"
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{base}-g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return base


def _columns_help() -> str:
    lines = ["output files per kind:"]
    for exp in REGISTRY.values():
        lines.append(f"  {exp.kind}: {exp.columns}")
    return "\n".join(lines)


def _load(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as err:
        raise ConfigError("--config", f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("--config", f"invalid JSON ({err.msg} at line {err.lineno})") from None


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abcring", description="ABC ring simulator and exact analytics")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run an experiment from a JSON config",
                         epilog=_columns_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    run.add_argument("--config", required=True, metavar="PATH")
    run.add_argument("--seed", type=int, help="override the config seed (unsigned 64-bit)")
    run.add_argument("--threads", type=int, help="worker threads (default: ABC_THREADS or all cores)")
    run.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("--config", required=True, metavar="PATH")
    sub.add_parser("list-experiments", help="print the experiment kinds and their options")
    return ap


def cmd_list() -> int:
    for exp in REGISTRY.values():
        print(f"{exp.kind}: {exp.summary}")
        print(f"  params required: {'yes' if exp.needs_params else 'no'}")
        for name, schema in exp.options.items():
            default = f" (default {schema['default']})" if "default" in schema else ""
            print(f"  option {name}: {schema.get('type', 'any')}{default}")
        print(f"  outputs: {exp.columns}")
    return EXIT_OK


def cmd_validate(path: str) -> int:
    try:
        cfg = validate(_load(path))
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_INVALID
    print(f"ok: {cfg['name']} ({cfg['kind']})")
    return EXIT_OK


def cmd_run(args) -> int:
    try:
        raw = _load(args.config)
        if args.seed is not None:
            raw = dict(raw, seed=args.seed)
        cfg = validate(raw)
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_INVALID
    out = Path(args.out or cfg.get("output") or f"results/{cfg['name']}")
    threads = args.threads if args.threads else default_threads()
    start = time.perf_counter()
    try:
        files = run_experiment(cfg, threads)
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            (out / name).write_text(text, encoding="utf-8")
    except Exception as err:  # reported as a runtime fault, not a traceback
        print(f"run failed: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_FAULT
    manifest = {
        "config": cfg,
        "version": version_string(),
        "wall_time_s": time.perf_counter() - start,
        "seed": cfg["seed"],
        "threads": threads,
        "files": sorted(files),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n",
                                       encoding="utf-8")
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list-experiments":
        return cmd_list()
    if args.command == "validate":
        return cmd_validate(args.config)
    return cmd_run(args)


if __name__ == "__main__":
    sys.exit(main())
