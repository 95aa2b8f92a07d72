"""Command line entry point: ``verify``, ``run`` and ``estimate``.

Exit codes: 0 success, 1 a check or experiment failed, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
import tempfile
import time
from collections.abc import Sequence
from dataclasses import asdict
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .errors import ConfigError, JackUStatError
from .simulation import RUNNERS, ExperimentConfig, write_csv
from .tdnn import RegressionDataset, TdnnConfig, studentized_ci, tdnn_jackknife
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parse_override(item: str) -> tuple[list[str], Any]:
    if "=" not in item:
        raise UsageError(f"override {item!r} is not of the form key=value")
    key, raw = item.split("=", 1)
    if not key:
        raise UsageError(f"override {item!r} has an empty key")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.split("."), value


def load_config(path: str | None, overrides: Sequence[str] = (), seed: int | None = None) -> ExperimentConfig:
    raw: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise UsageError(f"{path}: top level must be a JSON object")
    for item in overrides:
        keys, value = _parse_override(item)
        node = raw
        for k in keys[:-1]:
            node = node.setdefault(k, {})
            if not isinstance(node, dict):
                raise UsageError(f"override {item!r}: {k} is not an object")
        node[keys[-1]] = value
    if seed is not None:
        raw["seed"] = seed
    try:
        return ExperimentConfig.from_dict(raw)
    except ConfigError as exc:
        raise UsageError(f"config error: {exc}") from None


def _atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def cmd_verify(args: argparse.Namespace) -> int:
    checks = run_suite(args.suite)
    for check in checks:
        print(check.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    if args.config is None:
        raise UsageError("run needs --config PATH")
    cfg = load_config(args.config, args.overrides, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    outputs = {}
    for name in cfg.experiments:
        rows = RUNNERS[name](cfg, threads=args.threads)
        path = out / f"{name}.csv"
        write_csv(rows, path)
        outputs[name] = str(path)
        print(f"{name}: {len(rows)} rows -> {path}")
    finished = time.time()
    manifest = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "tool_version": __version__,
        "versions": {"python": platform.python_version(), "numpy": np.__version__},
        "started": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(started)),
        "finished": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(finished)),
        "wall_seconds": round(finished - started, 3),
        "threads": args.threads,
        "outputs": outputs,
    }
    _atomic_write(out / "manifest.json", json.dumps(manifest, indent=2) + "\n")
    return EXIT_OK


def read_regression_csv(path: str) -> RegressionDataset:
    """Header row, then ``k`` feature columns and one response column per row."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    with fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if not rows:
        raise UsageError(f"{path}: file is empty")
    header = rows[0]
    if len(header) < 2:
        raise UsageError(f"{path}: need at least one feature column and one response column")
    try:
        [float(cell) for cell in header]
    except ValueError:
        pass
    else:
        raise UsageError(f"{path}: missing header row (first row is numeric)")
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise UsageError(f"{path}:{lineno}: expected {len(header)} columns, found {len(row)}")
        parsed = []
        for col, cell in enumerate(row, start=1):
            try:
                v = float(cell)
            except ValueError:
                raise UsageError(f"{path}:{lineno}: column {col} ({header[col - 1]!r}) is not a number: {cell!r}") from None
            if not np.isfinite(v):
                raise UsageError(f"{path}:{lineno}: column {col} is not finite")
            parsed.append(v)
        values.append(parsed)
    if not values:
        raise UsageError(f"{path}: no data rows")
    arr = np.asarray(values)
    return RegressionDataset(arr[:, :-1], arr[:, -1])


def cmd_estimate(args: argparse.Namespace) -> int:
    data = read_regression_csv(args.data)
    try:
        x = [float(v) for v in args.x.split(",")]
    except ValueError:
        raise UsageError(f"--x must be comma-separated numbers, got {args.x!r}") from None
    if len(x) != data.k:
        raise UsageError(f"--x has {len(x)} coordinates but the data has k = {data.k}")
    try:
        cfg = TdnnConfig(args.s1, args.s2, x)
        report = tdnn_jackknife(x, data, cfg, args.d)
        result = studentized_ci(report.estimate, report.variance, args.level)
    except JackUStatError as exc:
        raise UsageError(str(exc)) from None
    payload = asdict(result)
    payload.update(n=len(data), s1=args.s1, s2=args.s2, d=args.d)
    print(json.dumps(payload))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jackustat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run oracle check suites")
    p.add_argument("suite", nargs="?", default="all", choices=[*SUITES, "all"])
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("run", help="run the experiments in a JSON config")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--out", metavar="DIR", default="results")
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int, default=1, help="worker threads; outputs do not depend on it")
    p.add_argument("overrides", nargs="*", metavar="key=value", help="override config fields, e.g. reps=50 dgp.k=2")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("estimate", help="TDNN estimate with jackknife confidence interval from a CSV")
    p.add_argument("data", metavar="CSV")
    p.add_argument("--x", required=True, help="query point, comma-separated")
    p.add_argument("--s1", type=int, required=True)
    p.add_argument("--s2", type=int, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--level", type=float, default=0.95)
    p.set_defaults(func=cmd_estimate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except JackUStatError as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
