"""Sweep driver turning a configuration into benchmark rows."""

from __future__ import annotations

import logging
from typing import Optional

import numpy as np

from ..errors import ConfigError
from ..fem import QUADRATURE_ORDERS
from .config import BenchmarkConfig
from .problems import BUILDERS, Outcome, run_setup
from .report import COLUMNS, add_rates

log = logging.getLogger(__name__)


def _relative_error(value: Optional[float], ref: float) -> Optional[float]:
    if value is None or ref == 0.0:
        return None
    return abs(value - ref) / abs(ref)


def _rows_from_outcome(cfg: BenchmarkConfig, out: Outcome, layer_setting: int,
                       sweep_name: str, sweep_value) -> tuple[list, list]:
    rows, runs = [], []
    mesh = out.setup.mesh
    for tip in out.tips:
        K_I_ref, K_II_ref = out.setup.reference[tip.label]
        row = {c: None for c in COLUMNS}
        row.update(problem=cfg.problem, tip=tip.label, nx=mesh.nx, ny=mesh.ny,
                   layer_setting=int(layer_setting), n_layers=out.setup.n_layers,
                   sweep_name=sweep_name, sweep_value=sweep_value,
                   h=float(max(mesh.hx, mesh.hy)), dofs=int(out.dofs),
                   K_I_ref=float(K_I_ref), K_II_ref=float(K_II_ref),
                   mu_1=float(np.real(tip.mu[0])), mu_2=float(np.real(tip.mu[1])),
                   L0=tip.L0, residual=out.residual)
        for method, res in tip.sif.items():
            row[f"K_I_{method}"] = res.K_I
            row[f"K_II_{method}"] = res.K_II
            row[f"err_I_{method}"] = _relative_error(res.K_I, K_I_ref)
            row[f"err_II_{method}"] = _relative_error(res.K_II, K_II_ref)
        if out.conditioning is not None:
            row["scaled_condition_number"] = out.conditioning.scaled_condition_number
            row["condition_number"] = out.conditioning.condition_number
        rows.append(row)
        runs.append({
            "problem": cfg.problem, "tip": tip.label, "nx": mesh.nx, "ny": mesh.ny,
            "n_layers": out.setup.n_layers, "sweep": {sweep_name: sweep_value} if sweep_name else {},
            "wall_time_s": out.wall_time,
            "mu": [[float(np.real(m)), float(np.imag(m))] for m in tip.mu],
            "sbfem_asymmetry": tip.asymmetry, "sbfem_imag_residue": tip.imag_residue,
            "pencil_residual": tip.pencil_residual, "hamiltonian_pairing_error": tip.pairing_error,
            "sif": {k: v.to_dict() for k, v in tip.sif.items()},
            "conditioning": out.conditioning.to_dict() if out.conditioning else None,
            "setup": out.setup.metadata,
            "modes_csv": tip.modes_csv,
        })
    return rows, runs


def run_benchmark(cfg: BenchmarkConfig) -> tuple[list, dict]:
    """Run every (mesh, layers, sweep value) point in order; return rows and metadata."""
    cfg.validate()
    build = BUILDERS[cfg.problem]
    (sweep_name, sweep_values), = cfg.sweep.items() if cfg.sweep else [(None, [None])]
    rows, runs = [], []
    for value in sweep_values:
        for setting in cfg.layers:
            for mi, (nx, ny) in enumerate(cfg.meshes):
                n_layers = cfg.layer_values(mi, setting)
                kwargs = dict(cfg.geometry)
                kwargs.update(cfg.material)
                kwargs["load"] = cfg.load
                kwargs["plane_state"] = cfg.plane_state
                if sweep_name:
                    kwargs[sweep_name] = value
                setup = build(int(nx), int(ny), n_layers, **kwargs)
                log.info("%s %dx%d layers=%d %s", cfg.problem, nx, ny, n_layers,
                         f"{sweep_name}={value}" if sweep_name else "")
                out = run_setup(setup, tuple(cfg.sif_methods), conditioning=cfg.conditioning,
                                emit_modes=cfg.emit_modes)
                r, m = _rows_from_outcome(cfg, out, setting, sweep_name, value)
                rows += r
                runs += m
    add_rates(rows, cfg.sif_methods)
    meta = {"config": cfg.to_dict(), "quadrature": QUADRATURE_ORDERS, "runs": runs,
            "notes": {
                "griffith": "crack half-length a sets the reference K_I = load*sqrt(pi*a); "
                            "the exact near-tip field is imposed on the whole outer edge",
                "rate": "least-squares slope of log(relative error) against log(h) per "
                        "(tip, layer setting, sweep value) group",
                "relative_error": "|K - K_ref| / |K_ref|; empty when K_ref = 0",
            }}
    return rows, meta


def run_griffith(cfg: BenchmarkConfig):
    return _checked(cfg, "griffith")


def run_edge_tension(cfg: BenchmarkConfig):
    return _checked(cfg, "edge_tension")


def run_edge_shear(cfg: BenchmarkConfig):
    return _checked(cfg, "edge_shear")


def run_orthotropic(cfg: BenchmarkConfig):
    if cfg.problem not in ("ortho_center", "ortho_edge"):
        raise ConfigError(f"expected an orthotropic problem, got {cfg.problem!r}")
    return run_benchmark(cfg)[0]


def _checked(cfg: BenchmarkConfig, name: str):
    if cfg.problem != name:
        raise ConfigError(f"expected problem {name!r}, got {cfg.problem!r}")
    return run_benchmark(cfg)[0]
