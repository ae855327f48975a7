"""Experiment runner: executes configured tasks and writes result artifacts.

Each task produces one JSON result (carrying the configuration hash) and,
where natural, a CSV data file for plotting.  CSV payloads are formatted
with 17 significant digits and newline line endings, so re-running an
identical configuration reproduces them byte for byte.  Timestamps live
only in the manifest.

Tasks are independent: a failure is recorded in the manifest and later
tasks still run.  The optional parallel mode runs tasks concurrently;
every task uses the seed derived from its index in both modes, so the
results are identical either way.
"""
from __future__ import annotations

import csv
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import (check_sign_definite, check_uniform_condition,
                       nodal_flux, positivity_vs_spectrum,
                       product_zero_modes_for, verify_zero_mode)
from .clifford import build_gamma_set
from .config import (ConfigError, ExperimentConfig, TaskConfig,
                     build_deformation_field, normalized_circle_profile)
from .geometry import ScalarField, norm
from .operators import hamiltonian
from .spectral import (DENSE_DIMENSION_GUARD, dense_spectrum, heat_traces,
                       index_checks, smallest_eigenpairs)

OUTPUT_ROOT_ENV = "DIRACLAB_OUTPUT_ROOT"

#: Convention note recorded in every result file.
CONVENTIONS = {"h_normalization": "profiles carry unit L2 norm over the torus"}


@dataclass
class RunManifest:
    config_hash: str
    artifacts: list[str] = field(default_factory=list)
    versions: dict = field(default_factory=dict)
    wall_clock: dict = field(default_factory=dict)
    task_status: dict = field(default_factory=dict)
    created: str = ""

    @property
    def failed(self) -> bool:
        return any(not s.startswith("ok") for s in self.task_status.values())

    def to_dict(self) -> dict:
        return {"config_hash": self.config_hash, "artifacts": self.artifacts,
                "versions": self.versions, "wall_clock": self.wall_clock,
                "task_status": self.task_status, "created": self.created}


def _resolve_output_dir(config: ExperimentConfig,
                        output_root: str | None = None) -> Path:
    root = output_root or os.environ.get(OUTPUT_ROOT_ENV)
    out = Path(config.output_dir)
    return Path(root) / out if root else out


def _write_json(path: Path, payload: dict) -> None:
    import json
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path: Path, header: list[str], rows: list[list],
               config_hash: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config_hash {config_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format(v, ".17g") if isinstance(v, float)
                             else v for v in row])


class _TaskContext:
    """Shared read-only inputs for one run."""

    def __init__(self, config: ExperimentConfig, out_dir: Path):
        self.config = config
        self.out_dir = out_dir
        self.geom = config.geometry.build()
        self.gammas = build_gamma_set(self.geom.dim)
        self.f = build_deformation_field(self.geom, config.deformation)
        self.hash = config.config_hash()

    def task_seed(self, index: int) -> int:
        return self.config.seed + index


def _task_spectrum(ctx: _TaskContext, task: TaskConfig, index: int,
                   files: list[str]) -> dict:
    p = task.params
    k = int(p.get("k", 8))
    tol = float(p.get("tol", 1e-9))
    solver = str(p.get("solver", "iterative"))
    ham = hamiltonian(ctx.geom, ctx.gammas, ctx.f)
    if solver == "dense":
        result = dense_spectrum(ham)
    elif solver == "iterative":
        result = smallest_eigenpairs(ham, k, tol=tol,
                                     max_iter=int(p.get("max_iter", 200)),
                                     seed=ctx.task_seed(index))
    else:
        raise ConfigError(f"spectrum.solver: unknown solver {solver!r}")
    payload = result.to_dict()
    payload["eigenvalues"] = payload["eigenvalues"][:max(k, 1)]
    payload["residuals"] = payload["residuals"][:max(k, 1)]
    if p.get("compare_dense", False):
        dense = dense_spectrum(ham)
        count = min(k, dense.eigenvalues.size, result.eigenvalues.size)
        payload["dense_eigenvalues"] = dense.eigenvalues[:count].tolist()
        payload["dense_gap"] = float(np.max(np.abs(
            result.eigenvalues[:count] - dense.eigenvalues[:count])))
    name = f"{index:02d}_spectrum.csv"
    _write_csv(ctx.out_dir / name, ["index", "eigenvalue", "residual"],
               [[i, float(ev), float(r)] for i, (ev, r) in
                enumerate(zip(payload["eigenvalues"], payload["residuals"]))],
               ctx.hash)
    files.append(name)
    return payload


def _task_positivity(ctx: _TaskContext, task: TaskConfig, index: int,
                     files: list[str]) -> dict:
    p = task.params
    report = positivity_vs_spectrum(ctx.geom, ctx.gammas, ctx.f,
                                    k=int(p.get("k", 4)),
                                    tol=float(p.get("tol", 1e-10)),
                                    seed=ctx.task_seed(index))
    return report.to_dict()


def _task_zero_mode(ctx: _TaskContext, task: TaskConfig, index: int,
                    files: list[str]) -> dict:
    modes = product_zero_modes_for(ctx.geom, ctx.gammas, ctx.f)
    report_minus = verify_zero_mode(ctx.geom, ctx.gammas, ctx.f,
                                    modes.mode_minus)
    report_plus = verify_zero_mode(ctx.geom, ctx.gammas, ctx.f,
                                   modes.mode_plus)
    return {
        "mode_minus": report_minus.to_dict(),
        "mode_plus": report_plus.to_dict(),
        "norm_factor_minus": modes.norm_minus,
        "norm_factor_plus": modes.norm_plus,
        "mode_minus_norm_sq": norm(modes.mode_minus) ** 2,
        "mode_plus_norm_sq": norm(modes.mode_plus) ** 2,
        "kernel_spinor_cross_norm_sq": modes.psi0_cross_norm_sq,
    }


def _task_heat_trace(ctx: _TaskContext, task: TaskConfig, index: int,
                     files: list[str]) -> dict:
    p = task.params
    t_grid = np.asarray([float(t) for t in p["t_grid"]])
    accuracy = float(p.get("accuracy", 1e-8))
    ham = hamiltonian(ctx.geom, ctx.gammas, ctx.f)
    if ham.dimension <= DENSE_DIMENSION_GUARD:
        spectrum = dense_spectrum(ham)
    else:
        spectrum = smallest_eigenpairs(ham, int(p.get("k", 64)),
                                       seed=ctx.task_seed(index))
    curve = heat_traces(spectrum, ctx.gammas, t_grid, accuracy=accuracy)
    name = f"{index:02d}_heat_trace.csv"
    _write_csv(ctx.out_dir / name, ["t", "theta", "psi", "tail_bound"],
               [[float(t), float(th), float(ps), float(bd)] for t, th, ps, bd
                in zip(curve.t_grid, curve.theta, curve.psi,
                       curve.truncation_bound)], ctx.hash)
    files.append(name)
    return curve.to_dict()


def _task_index_check(ctx: _TaskContext, task: TaskConfig, index: int,
                      files: list[str]) -> dict:
    p = task.params
    report = index_checks(ctx.geom, ctx.gammas, ctx.f,
                          t=float(p.get("t", 1.0)),
                          tol=float(p.get("tol", 1e-8)),
                          seed=ctx.task_seed(index))
    return report.to_dict()


def _task_flux(ctx: _TaskContext, task: TaskConfig, index: int,
               files: list[str]) -> dict:
    modes = product_zero_modes_for(ctx.geom, ctx.gammas, ctx.f)
    verification = verify_zero_mode(ctx.geom, ctx.gammas, ctx.f,
                                    modes.mode_minus)
    report = nodal_flux(ctx.geom, ctx.gammas, ctx.f, modes.mode_minus)
    payload = report.to_dict()
    payload["mode_verified"] = verification.verified
    return payload


def _task_positivity_sweep(ctx: _TaskContext, task: TaskConfig, index: int,
                           files: list[str]) -> dict:
    p = task.params
    defo = ctx.config.deformation
    if defo.kind != "circle_profile":
        raise ConfigError("positivity_sweep requires a circle_profile "
                          "deformation as the ramp baseline")
    h = normalized_circle_profile(ctx.geom, defo.profile)
    rows = []
    for tau in [float(t) for t in p["tau_values"]]:
        f_tau = ScalarField(ctx.geom, defo.mu + tau * h.values)
        uniform = check_uniform_condition(f_tau)
        sign = check_sign_definite(f_tau)
        ham = hamiltonian(ctx.geom, ctx.gammas, f_tau)
        spec = smallest_eigenpairs(ham, k=int(p.get("k", 2)),
                                   tol=float(p.get("tol", 1e-10)),
                                   seed=ctx.task_seed(index))
        rows.append({"tau": tau, "uniform_holds": uniform.holds,
                     "uniform_margin": uniform.margin,
                     "sign_holds": sign.holds, "sign_margin": sign.margin,
                     "lambda_min": float(spec.eigenvalues[0])})
    name = f"{index:02d}_positivity_sweep.csv"
    _write_csv(ctx.out_dir / name,
               ["tau", "uniform_holds", "uniform_margin", "sign_holds",
                "sign_margin", "lambda_min"],
               [[r["tau"], int(r["uniform_holds"]), r["uniform_margin"],
                 int(r["sign_holds"]), r["sign_margin"], r["lambda_min"]]
                for r in rows], ctx.hash)
    files.append(name)
    return {"mu": defo.mu, "profile": defo.profile, "sweep": rows}


_HANDLERS = {
    "spectrum": _task_spectrum,
    "positivity": _task_positivity,
    "zero_mode": _task_zero_mode,
    "heat_trace": _task_heat_trace,
    "index_check": _task_index_check,
    "flux": _task_flux,
    "positivity_sweep": _task_positivity_sweep,
}


def run(config: ExperimentConfig, parallel: bool = False,
        output_root: str | None = None) -> RunManifest:
    """Execute every task of the configuration and write all artifacts."""
    out_dir = _resolve_output_dir(config, output_root)
    out_dir.mkdir(parents=True, exist_ok=True)
    ctx = _TaskContext(config, out_dir)
    manifest = RunManifest(config_hash=ctx.hash)
    manifest.versions = {
        "diraclab": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": sys.version.split()[0],
    }

    def execute(item):
        index, task = item
        label = f"{index:02d}_{task.type}"
        files: list[str] = []
        start = time.perf_counter()
        try:
            payload = _HANDLERS[task.type](ctx, task, index, files)
            status = "ok"
        except Exception as exc:  # recorded, later tasks still run
            payload = {"error": f"{type(exc).__name__}: {exc}"}
            status = f"failed: {type(exc).__name__}: {exc}"
        elapsed = time.perf_counter() - start
        result_name = f"{label}.json"
        _write_json(out_dir / result_name, {
            "config_hash": ctx.hash,
            "task": task.to_dict(),
            "conventions": CONVENTIONS,
            "result": payload,
        })
        return label, status, elapsed, [result_name] + files

    items = list(enumerate(config.tasks))
    if parallel and len(items) > 1:
        with ThreadPoolExecutor(max_workers=min(4, len(items))) as pool:
            outcomes = list(pool.map(execute, items))
    else:
        outcomes = [execute(item) for item in items]
    for label, status, elapsed, artifact_names in outcomes:
        manifest.task_status[label] = status
        manifest.wall_clock[label] = elapsed
        manifest.artifacts.extend(artifact_names)
    manifest.created = time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())
    _write_json(out_dir / "run_manifest.json", manifest.to_dict())
    return manifest
