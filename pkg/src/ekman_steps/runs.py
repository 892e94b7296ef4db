"""Experiment drivers behind the command-line subcommands.

Every driver takes a validated :class:`ExperimentConfig`, writes its tables
into ``config.out_dir`` and returns a summary dict.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .analysis import (
    Solution,
    default_z_max,
    evaluate_psi,
    hodograph,
    limit_angle_suite,
    one_jump,
    solve,
    surface_deflection_angle,
)
from .config import ContinuousProfileSpec, ExperimentConfig, ensure_output_dir
from .profile import GeostrophicWind, StepViscosity, new_step_profile
from .solver import assemble_dense_system, system_residual, uniqueness_margin
from .verification import AGREEMENT_TOL, coefficient_disagreement, run_checks

logger = logging.getLogger(__name__)


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_table(path: Path, columns: Sequence[str], rows: Sequence[Sequence], config: ExperimentConfig) -> Path:
    """Write a CSV (with a leading comment line) or JSON table; returns the path written."""
    meta = f"config_sha256={config.digest()} version={__version__}"
    if config.format == "json":
        path = path.with_suffix(".json")
        doc = {
            "config_sha256": config.digest(),
            "version": __version__,
            "columns": list(columns),
            "rows": [[float(v) if isinstance(v, np.floating) else v for v in row] for row in rows],
        }
        path.write_text(json.dumps(doc, indent=1) + "\n")
        return path
    path = path.with_suffix(".csv")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {meta}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def _write_summary(out: Path, name: str, summary: dict) -> Path:
    path = out / f"{name}.json"
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def solve_configured(profile: StepViscosity, wind: GeostrophicWind, solver: str) -> tuple[Solution, dict]:
    """Solve with the requested solver; 'both' cross-checks dense against transfer."""
    if solver != "both":
        return solve(profile, wind, solver), {"provenance": solver}
    transfer = solve(profile, wind, "transfer")
    dense = solve(profile, wind, "dense")
    diff = coefficient_disagreement(transfer.coefficients.anchored, dense.coefficients.anchored)
    if diff > AGREEMENT_TOL:
        logger.warning("dense and transfer solutions differ by %.3e", diff)
    return transfer, {"provenance": "transfer+dense", "dense_transfer_difference": diff}


def run_profile(config: ExperimentConfig) -> dict:
    start = time.perf_counter()
    out = ensure_output_dir(config)
    spec = config.profile
    profile = new_step_profile(spec.jump_points, spec.viscosities)
    wind = GeostrophicWind(config.psi_g)
    sol, info = solve_configured(profile, wind, config.solver)
    margin = uniqueness_margin(profile)
    residual = system_residual(assemble_dense_system(profile, wind), sol.coefficients)

    z_max = config.z_max or default_z_max(profile)
    samples = hodograph(sol, z_max, config.count)
    spiral = write_table(out / "spiral", ("z", "u", "v", "gamma_deg", "deficit"),
                         [(s.z, s.u, s.v, math.degrees(s.gamma), s.deficit) for s in samples], config)
    hodo = write_table(out / "hodograph", ("u", "v", "z"), [(s.u, s.v, s.z) for s in samples], config)

    summary = {
        "gamma0_deg": math.degrees(surface_deflection_angle(sol)),
        "layers": profile.n_layers,
        "jump_points": list(profile.jump_points),
        "viscosities": list(profile.viscosities),
        "uniqueness_margin": {"mantissa": margin.mantissa, "exponent": margin.exponent,
                              "relative": margin.relative},
        "solver_residual": residual,
        "z_max": z_max,
        "config_sha256": config.digest(),
        "version": __version__,
        "tables": [spiral.name, hodo.name],
        **info,
    }
    summary["wall_time_s"] = time.perf_counter() - start
    _write_summary(out, "summary", summary)
    return summary


def run_sweep(config: ExperimentConfig) -> dict:
    out = ensure_output_dir(config)
    rows = []
    for l in config.sweep_l.values():
        for h in config.sweep_h.values():
            rows.append((l, h, math.degrees(surface_deflection_angle(one_jump(h, l, config.psi_g)))))
    table = write_table(out / "sweep", ("l", "h", "gamma0_deg"), rows, config)
    return {"table": table.name, "points": len(rows)}


def run_limits(config: ExperimentConfig) -> dict:
    out = ensure_output_dir(config)
    seqs = limit_angle_suite()
    rows = []
    for s in seqs:
        for p in s.points:
            rows.append((s.name, p.l, p.h, p.gamma0_deg, p.target, p.deviation, s.tolerance,
                         int(s.passed)))
    table = write_table(out / "limits",
                        ("sequence", "l", "h", "gamma0_deg", "target", "deviation", "tolerance", "passed"),
                        rows, config)
    return {"table": table.name, "passed": all(s.passed for s in seqs),
            "sequences": {s.name: s.final_deviation for s in seqs}}


def step_approximation(spec: ContinuousProfileSpec, n_steps: int) -> StepViscosity:
    """Midpoint-sampled steps on [0, z_cap]; the last step extends to infinity."""
    edges = np.linspace(0.0, spec.z_cap, n_steps + 1)
    mids = 0.5 * (edges[1:] + edges[:-1])
    return new_step_profile(edges[1:-1].tolist(), [spec.viscosity(float(m)) for m in mids])


def run_converge(config: ExperimentConfig) -> dict:
    out = ensure_output_dir(config)
    spec = config.continuous
    wind = GeostrophicWind(config.psi_g)
    z_max = config.z_max or spec.z_cap + 10.0 * math.sqrt(spec.viscosity(spec.z_cap))
    zs = np.linspace(0.0, z_max, config.count)

    def profile_values(n):
        profile = step_approximation(spec, n)
        sol, _ = solve_configured(profile, wind, config.solver)
        return profile, sol, np.array([evaluate_psi(sol, float(z)) for z in zs])

    _, _, reference = profile_values(2 * max(spec.steps))
    rows = []
    for n in spec.steps:
        profile, sol, values = profile_values(n)
        margin = uniqueness_margin(profile)
        if margin.relative < 1e-6:
            logger.warning("N=%d: uniqueness margin degraded to %s", n, margin)
        rows.append((n, float(np.max(np.abs(values - reference))),
                     math.degrees(surface_deflection_angle(sol)), margin.relative))
    table = write_table(out / "converge", ("N", "sup_deviation", "gamma0_deg", "margin_relative"),
                        rows, config)
    return {"table": table.name, "reference_steps": 2 * max(spec.steps), "rows": rows}


def run_verify(config: ExperimentConfig) -> dict:
    out = ensure_output_dir(config)
    profile = None
    if config.profile is not None:
        profile = new_step_profile(config.profile.jump_points, config.profile.viscosities)
    results = run_checks(config.seed, config.random_profiles, profile, GeostrophicWind(config.psi_g))
    report = {
        "passed": all(r.passed for r in results),
        "seed": config.seed,
        "config_sha256": config.digest(),
        "version": __version__,
        "checks": [r.to_dict() for r in results],
    }
    _write_summary(out, "verify", report)
    return report


RUNNERS = {
    "profile": run_profile,
    "sweep": run_sweep,
    "limits": run_limits,
    "converge": run_converge,
    "verify": run_verify,
}

