"""Command line entry point: ``xsbfem run [config.toml] [overrides]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..errors import ConfigError, XsbfemError
from .config import PROBLEMS, config_from_dict, default_config, load_config
from .report import emit_report
from .runner import run_benchmark


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="xsbfem", description="Crack benchmark runner.")
    sub = p.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a benchmark sweep")
    run.add_argument("config", nargs="?", help="TOML configuration file")
    run.add_argument("--problem", choices=PROBLEMS)
    run.add_argument("--mesh", nargs=2, type=int, metavar=("NX", "NY"),
                     help="run a single mesh instead of the configured sweep")
    run.add_argument("--layers", type=int, help="number of SBFEM element layers")
    run.add_argument("--sif-method", choices=("displacement", "stress", "all"))
    run.add_argument("--out", help="output path prefix (writes .csv and .json)")
    run.add_argument("--emit-modes", action="store_true",
                     help="write eigenvalue/mode diagnostics per run")
    run.add_argument("-v", "--verbose", action="store_true")
    return p


def _config(args):
    if args.config:
        cfg = load_config(args.config, args.problem)
    elif args.problem:
        cfg = default_config(args.problem)
    else:
        raise ConfigError("give a configuration file or --problem")
    doc = cfg.to_dict()
    if args.mesh:
        doc["meshes"] = [list(args.mesh)]
    if args.layers is not None:
        doc["layers"] = [args.layers]
        doc["layer_scaling"] = "fixed"
    if args.sif_method:
        doc["sif_methods"] = (["displacement", "stress"] if args.sif_method == "all"
                              else [args.sif_method])
    if args.out:
        doc["output"] = args.out
    if args.emit_modes:
        doc["emit_modes"] = True
    return config_from_dict(doc)


def _write_modes(meta: dict, base: Path) -> None:
    mode_dir = base.parent / (base.name + "_modes")
    mode_dir.mkdir(parents=True, exist_ok=True)
    for k, run in enumerate(meta["runs"]):
        text = run.pop("modes_csv", None)
        if text:
            name = f"{k:03d}_{run['nx']}x{run['ny']}_L{run['n_layers']}_{run['tip']}.csv"
            (mode_dir / name).write_text(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        rows, meta = run_benchmark(cfg)
        base = Path(cfg.output)
        if cfg.emit_modes:
            _write_modes(meta, base.with_suffix("") if base.suffix in (".csv", ".json") else base)
        else:
            for run in meta["runs"]:
                run.pop("modes_csv", None)
        csv_path, json_path = emit_report(rows, cfg.output, meta)
    except (XsbfemError, OSError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return 2
    print(json.dumps({"csv": str(csv_path), "json": str(json_path), "rows": len(rows)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
