"""Command-line batch runner.

Usage::

    coorbit --task frame-experiment --config run.cfg --seed 0 --out results/
    coorbit --task report --manifests a.manifest.json b.manifest.json --out merged/

Every task writes ``<task>.csv`` and ``<task>.manifest.json`` to the output
directory.  Exit status is 0 on success, 2 for bad parameters or inputs and
3 when a numerical check fails (branch drift, loss of contraction, or an
insufficient truncation).
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bergman import ParameterError
from .cocycle import BranchTrackingError
from .experiments import TASKS, ExperimentConfig, Outcome, parse_config_text, run_task
from .frames import DensityError, NonContractionError
from .group import DegenerateInputError, NumericDriftError, UnsupportedDimensionError
from .representation import InsufficientTruncationError

MANIFEST_SCHEMA = "coorbit.manifest/1"
REPORT_COLUMNS = ("s", "p", "alpha", "eps", "B_over_A", "recon_error", "C_eps")

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC = 0, 2, 3
NUMERIC_ERRORS = (NumericDriftError, NonContractionError, BranchTrackingError,
                  InsufficientTruncationError, DegenerateInputError, DensityError)


class SchemaError(ValueError):
    pass


def format_cell(v) -> str:
    """Stable text for a CSV cell: 15 significant digits for floats."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".15g")
    return str(v)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([format_cell(c) for c in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def write_outputs(out: Path, task: str, cfg_dict: dict, outcome: Outcome, wall: float) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{task}.csv"
    write_csv(csv_path, outcome.columns, outcome.rows)
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "version": __version__,
        "task": task,
        "config": cfg_dict,
        "csv": csv_path.name,
        "columns": list(outcome.columns),
        "rows": len(outcome.rows),
        "summary": outcome.summary,
        "details": outcome.extra,
        "wall_time_s": round(wall, 3),
    }
    mpath = out / f"{task}.manifest.json"
    mpath.write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")
    return mpath


def load_manifest(path: Path) -> tuple[dict, list[dict]]:
    try:
        m = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read manifest {path}: {exc}") from None
    if m.get("schema") != MANIFEST_SCHEMA:
        raise SchemaError(f"{path}: schema {m.get('schema')!r}, expected {MANIFEST_SCHEMA!r}")
    missing = [c for c in REPORT_COLUMNS if c not in m.get("columns", [])]
    if missing:
        raise SchemaError(f"{path}: columns {missing} absent (task {m.get('task')!r})")
    with open(Path(path).parent / m["csv"], newline="") as fh:
        rows = list(csv.DictReader(fh))
    return m, rows


def report(manifests) -> tuple[tuple, list]:
    """Merge frame-experiment tables, sorted by ``(s, p, alpha, eps)``."""
    if not manifests:
        raise SchemaError("report needs at least one manifest")
    merged = []
    for p in manifests:
        _, rows = load_manifest(p)
        merged += [tuple(r[c] for c in REPORT_COLUMNS) for r in rows]
    merged.sort(key=lambda r: tuple(float(v) for v in r[:4]))
    return REPORT_COLUMNS, merged


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="coorbit", description=__doc__.split("\n\n")[0])
    ap.add_argument("--config", type=Path, help="key = value configuration file")
    ap.add_argument("--task", choices=TASKS + ("report",), help="overrides the task in the config")
    ap.add_argument("--seed", type=int, help="overrides the seed in the config")
    ap.add_argument("--out", type=Path, help="output directory (default: results)")
    ap.add_argument("--reference-untwisted", action="store_true",
                    help="cross-check against the trivial-multiplier implementation (integer s)")
    ap.add_argument("--manifests", nargs="+", type=Path, default=[], help="inputs for --task report")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def _config_from_args(args) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if args.config is not None:
        try:
            text = args.config.read_text()
        except OSError as exc:
            raise ParameterError(f"cannot read config {args.config}: {exc.strerror or exc}") from None
        cfg = parse_config_text(text, cfg)
    if args.task:
        cfg = replace(cfg, task=args.task)
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, out=str(args.out))
    if args.reference_untwisted:
        cfg = replace(cfg, reference_untwisted=True)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        if args.task == "report":
            cols, rows = report(args.manifests)
            out = args.out or Path("results")
            outcome = Outcome(cols, rows, {"inputs": [str(p) for p in args.manifests]})
            path = write_outputs(out, "report", {"manifests": [str(p) for p in args.manifests]},
                                 outcome, time.perf_counter() - start)
        else:
            cfg = _config_from_args(args)
            outcome = run_task(cfg)
            path = write_outputs(Path(cfg.out), cfg.task, cfg.as_dict(), outcome,
                                 time.perf_counter() - start)
    except (ParameterError, SchemaError, UnsupportedDimensionError) as exc:
        print(f"coorbit: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except NUMERIC_ERRORS as exc:
        print(f"coorbit: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(f"wrote {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
