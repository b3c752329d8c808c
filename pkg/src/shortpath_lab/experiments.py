"""Reproducible experiment drivers: b-scans, overlap profiles, and the scaling study.

Every experiment is a pure function of its config. Instances are derived from
(master seed, n, instance index) through a counter-based generator, tasks are
executed in a fixed order (optionally on a process pool, gathered by index),
and CSV values are serialized with 17 significant digits, so identical configs
produce byte-identical CSV files.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import asdict, dataclass
from multiprocessing import get_context
from pathlib import Path

import numpy as np
import scipy.stats

from . import __version__
from .conditions import check_large_excited_energy, check_small_ground_energy_shift, evaluate_conditions
from .cost import (
    CostFunction,
    derive_seed,
    enumerate_spectrum,
    sample_k_spin,
    sample_random_kcnf,
    value_table,
)
from .spectral import EigensolverError, build_hb, ground_state

SCAN_B_GRID_DEFAULT = [round(0.01 * i, 2) for i in range(101)]  # 0 to 1 step 0.01


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment; hashable for provenance."""

    kind: str                      # spectrum-scan | overlap-scan | conditions | scaling
    ensemble: str = "kspin"        # kspin | kcnf
    n: int | None = None
    n_min: int | None = None       # scaling only
    n_max: int | None = None
    k: int = 3
    m: int | None = None           # clause count for kcnf
    eta: float = 0.5
    b: float = 0.7                 # scaling only
    b_grid: list[float] | None = None
    instances: int = 1
    seed: int = 0
    method: str = "auto"
    tol: float | None = None
    include_short_path: bool = False
    workers: int = 1

    KINDS = ("spectrum-scan", "overlap-scan", "conditions", "scaling")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"kind must be one of {self.KINDS}, got {self.kind!r}")
        if self.ensemble not in ("kspin", "kcnf"):
            raise ValueError(f"unknown ensemble {self.ensemble!r}")
        if self.ensemble == "kcnf" and self.m is None:
            raise ValueError("kcnf ensemble needs a clause count m")
        if self.kind == "scaling":
            if self.n_min is None or self.n_max is None or self.n_min > self.n_max:
                raise ValueError("scaling needs n_min <= n_max")
        elif self.n is None:
            raise ValueError(f"{self.kind} needs n")
        if self.b_grid is None and self.kind in ("spectrum-scan", "overlap-scan", "conditions"):
            self.b_grid = list(SCAN_B_GRID_DEFAULT)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json_file(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def canonical_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


def make_instance(config: ExperimentConfig, n: int, index: int) -> tuple[CostFunction, int]:
    instance_seed = derive_seed(config.seed, n, index)
    if config.ensemble == "kspin":
        return sample_k_spin(n, config.k, instance_seed), instance_seed
    return sample_random_kcnf(n, config.k, config.m, instance_seed), instance_seed


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


# -- b-scans -------------------------------------------------------------------

_SCAN_COLUMNS = {
    "spectrum-scan": ["master_seed", "instance_index", "instance_seed", "n", "k", "eta", "b",
                      "e0", "e1", "e2", "method", "tol", "converged"],
    "overlap-scan": ["master_seed", "instance_index", "instance_seed", "n", "k", "eta", "b",
                     "overlap_plus", "overlap_zstar", "overlap_opt", "method", "tol", "converged"],
    "conditions": ["master_seed", "instance_index", "instance_seed", "n", "k", "eta", "b",
                   "e_ground", "e_excited", "e_deflated", "cond_large_excited", "cond_small_shift",
                   "cond_short_path", "margin_large_excited", "margin_small_shift", "margin_short_path",
                   "method", "tol", "converged"],
}


def _scan_one(config: ExperimentConfig, index: int) -> list[dict]:
    cost, instance_seed = make_instance(config, config.n, index)
    table = enumerate_spectrum(cost)
    values = value_table(cost)
    rows = []
    base = {
        "master_seed": config.seed,
        "instance_index": index,
        "instance_seed": instance_seed,
        "n": config.n,
        "k": config.k,
        "eta": config.eta,
        "method": config.method,
    }
    for b in config.b_grid:
        op = build_hb(values, table.e_star, config.eta, b, table.optimal_assignments)
        row = dict(base, b=b)
        try:
            if config.kind == "spectrum-scan":
                summary = ground_state(op, method=config.method, tol=config.tol, n_excited=2, seed=config.seed)
                row.update(e0=summary.e_ground, e1=summary.excited_energies[0],
                           e2=summary.excited_energies[1], tol=summary.tol, converged=1)
            elif config.kind == "overlap-scan":
                summary = ground_state(op, method=config.method, tol=config.tol, seed=config.seed)
                row.update(overlap_plus=summary.overlap_plus,
                           overlap_zstar=max(summary.overlap_zstar, default=0.0),
                           overlap_opt=summary.overlap_opt, tol=summary.tol, converged=1)
            else:
                report = evaluate_conditions(op, method=config.method, tol=config.tol,
                                             include_short_path=config.include_short_path, seed=config.seed)
                row.update(
                    e_ground=report.e_ground, e_excited=report.e_excited,
                    e_deflated=report.deflated_energy if report.deflated_energy is not None else math.nan,
                    cond_large_excited=int(report.large_excited_energy.holds),
                    cond_small_shift=int(report.small_ground_energy_shift.holds),
                    cond_short_path=int(report.short_path.holds) if report.short_path else -1,
                    margin_large_excited=report.large_excited_energy.margin,
                    margin_small_shift=report.small_ground_energy_shift.margin,
                    margin_short_path=report.short_path.margin if report.short_path else math.nan,
                    tol=report.tolerances["solver"], converged=1,
                )
        except EigensolverError:
            # flagged, not dropped: keep the row with NaNs
            for c in _SCAN_COLUMNS[config.kind]:
                row.setdefault(c, math.nan)
            row["converged"] = 0
        rows.append(row)
    return rows


def run_scan(config: ExperimentConfig) -> tuple[list[dict], list[str]]:
    tasks = list(range(config.instances))
    if config.workers > 1:
        with get_context("fork").Pool(config.workers, initializer=_limit_threads) as pool:
            chunks = pool.starmap(_scan_one, [(config, i) for i in tasks])
    else:
        chunks = [_scan_one(config, i) for i in tasks]
    rows = [row for chunk in chunks for row in chunk]
    return rows, _SCAN_COLUMNS[config.kind]


# -- scaling study -------------------------------------------------------------

SCALING_COLUMNS = ["master_seed", "n", "instance_index", "instance_seed", "k", "eta", "b",
                   "e_star", "overlap_zstar", "inv_overlap", "cond_large_excited",
                   "cond_small_shift", "excluded", "method", "tol"]


@dataclass(frozen=True)
class FitResult:
    """OLS fit of log2(value) against n: value ~ amplitude * 2^(slope n)."""

    slope: float
    intercept_log2: float
    amplitude: float
    residual_sse: float
    stderr: float
    ci95: tuple[float, float]
    points: int

    def summary(self) -> str:
        return (f"slope={self.slope:.4f} (95% CI [{self.ci95[0]:.4f}, {self.ci95[1]:.4f}]), "
                f"amplitude={self.amplitude:.4f}, points={self.points}")


def fit_exponential(points: list[tuple[float, float]]) -> FitResult:
    """Least squares on (n, log2 value); CI from the t quantile at dof = points - 2."""
    if len(points) < 3:
        raise ValueError("need at least 3 points for a fit with a confidence interval")
    x = np.array([p[0] for p in points], dtype=np.float64)
    y = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(y <= 0):
        raise ValueError("values must be positive for a log fit")
    ylog = np.log2(y)
    coeffs, residuals, *_ = np.polyfit(x, ylog, 1, full=True)
    slope, intercept = float(coeffs[0]), float(coeffs[1])
    fitted = slope * x + intercept
    sse = float(np.sum((ylog - fitted) ** 2))
    dof = len(points) - 2
    sxx = float(np.sum((x - x.mean()) ** 2))
    stderr = math.sqrt(sse / dof / sxx) if dof > 0 and sxx > 0 else 0.0
    tq = float(scipy.stats.t.ppf(0.975, dof)) if dof > 0 else math.inf
    return FitResult(
        slope=slope,
        intercept_log2=intercept,
        amplitude=2.0**intercept,
        residual_sse=sse,
        stderr=stderr,
        ci95=(slope - tq * stderr, slope + tq * stderr),
        points=len(points),
    )


def _scaling_task(config: ExperimentConfig, n: int, index: int) -> dict:
    cost, instance_seed = make_instance(config, n, index)
    table = enumerate_spectrum(cost)
    values = value_table(cost)
    op = build_hb(values, table.e_star, config.eta, config.b, table.optimal_assignments)
    summary = ground_state(op, method=config.method, tol=config.tol, seed=config.seed)
    large = check_large_excited_energy(summary)
    small = check_small_ground_energy_shift(summary.e_ground, n, tol=summary.tol)
    overlap = max(summary.overlap_zstar, default=0.0)
    return {
        "master_seed": config.seed, "n": n, "instance_index": index, "instance_seed": instance_seed,
        "k": config.k, "eta": config.eta, "b": config.b, "e_star": table.e_star,
        "overlap_zstar": overlap, "inv_overlap": 1.0 / overlap if overlap > 0 else math.inf,
        "cond_large_excited": int(large.holds), "cond_small_shift": int(small.holds),
        "excluded": int(not large.holds), "method": summary.method, "tol": summary.tol,
    }


def _limit_threads():
    try:
        import numba

        numba.set_num_threads(1)
    except Exception:
        pass


@dataclass
class ScalingResult:
    rows: list[dict]
    medians: dict[int, float]
    excluded: int
    fit: FitResult


def scaling_study(config: ExperimentConfig) -> ScalingResult:
    """Per-instance inverse optimum overlaps, per-n medians, and the exponential fit.

    Instances failing the large-excited-energy condition at the working b are
    recorded and excluded from the fit (counted in `excluded`).
    """
    if config.kind != "scaling":
        raise ValueError("config.kind must be 'scaling'")
    tasks = [(config, n, i) for n in range(config.n_min, config.n_max + 1) for i in range(config.instances)]
    if config.workers > 1:
        with get_context("fork").Pool(config.workers, initializer=_limit_threads) as pool:
            rows = pool.starmap(_scaling_task, tasks)
    else:
        rows = [_scaling_task(*t) for t in tasks]
    medians: dict[int, float] = {}
    for n in range(config.n_min, config.n_max + 1):
        included = [r["inv_overlap"] for r in rows if r["n"] == n and not r["excluded"]]
        if included:
            medians[n] = float(np.median(included))
    excluded = sum(r["excluded"] for r in rows)
    fit = fit_exponential(sorted(medians.items()))
    return ScalingResult(rows=rows, medians=medians, excluded=excluded, fit=fit)


# -- output --------------------------------------------------------------------

def write_experiment(config: ExperimentConfig, out_dir) -> dict:
    """Run the configured experiment and write CSV + manifest into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.time()
    extra: dict = {}
    if config.kind == "scaling":
        result = scaling_study(config)
        rows, columns = result.rows, SCALING_COLUMNS
        extra = {
            "fit": {
                "slope": result.fit.slope,
                "intercept_log2": result.fit.intercept_log2,
                "amplitude": result.fit.amplitude,
                "ci95": list(result.fit.ci95),
                "stderr": result.fit.stderr,
                "residual_sse": result.fit.residual_sse,
            },
            "medians": {str(n): v for n, v in result.medians.items()},
            "excluded_instances": result.excluded,
        }
    else:
        rows, columns = run_scan(config)
    csv_text = rows_to_csv(rows, columns)
    csv_path = out / f"{config.kind}.csv"
    csv_path.write_text(csv_text)
    manifest = {
        "config": json.loads(config.canonical_json()),
        "config_sha256": config.digest(),
        "package_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "wall_time_s": time.time() - started,
        "outputs": [csv_path.name],
        **extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
