"""Parameter sweeps, CSV output and the canned figure sweeps."""
from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import (
    AnalyticInputs,
    attempt_rate,
    avg_aoi_closed_form,
    avg_paoi_closed_form,
    is_stable,
    optimal_probabilities,
    renewal_moments,
    s2_success_prob,
    service_probability,
)
from .channel import STRONG_MPR, WEAK_MPR, SuccessMatrix
from .config import DEFAULT_HORIZON, ExperimentSpec, validate
from .dpp import DppAoiPolicy, DppPaoiPolicy
from .engine import SimConfig, run
from .pra import PraPolicy

__all__ = [
    "CSV_COLUMNS",
    "ANALYZE_COLUMNS",
    "RUNNING_COLUMNS",
    "FIGURES",
    "Task",
    "expand",
    "simulate_task",
    "run_experiment",
    "analyze_point",
    "format_rows",
    "write_csv",
    "figure_specs",
    "running_average_rows",
    "run_figure",
]

CSV_COLUMNS = (
    "scenario", "policy", "mpr", "lambda", "delta", "q1", "q2", "V", "alpha_max", "xi",
    "horizon", "burn_in", "seed", "avg_aoi", "avg_paoi", "avg_q", "thpt1", "thpt2",
    "frac_11", "frac_10", "frac_01", "frac_00", "unstable",
)
ANALYZE_COLUMNS = (
    "mpr", "lambda", "delta", "q1", "q2", "feasible", "stable", "mu", "p2_bar",
    "avg_aoi", "avg_paoi", "e_t", "e_t2",
)
RUNNING_COLUMNS = ("scenario", "policy", "mpr", "lambda", "delta", "V", "horizon", "seed", "t", "running_avg_aoi")

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8")
FIG5_V = (20.0, 200.0, 2000.0)
_SEED_MOD = 2**64


@dataclass(frozen=True)
class Task:
    """One simulation: a grid point of a spec under one replication seed."""

    scenario: str
    policy: str
    mpr: str
    matrix: SuccessMatrix
    lam: float
    delta: float
    q1: float | None
    q2: float | None
    v: float
    alpha_max: float
    xi: float
    horizon: int
    burn_in: int
    seed: int
    point: int


def expand(spec: ExperimentSpec) -> list[Task]:
    """Tasks ordered by (grid point, seed). Point ``i`` under root seed ``s``
    runs with seed ``s + i`` so different policies at the same point share
    arrival sample paths."""
    tasks = []
    for i, p in enumerate(spec.points()):
        for root in spec.seeds:
            tasks.append(Task(
                scenario=spec.scenario, policy=spec.policy, mpr=spec.mpr, matrix=spec.matrix,
                lam=p["lam"], delta=p["delta"], q1=spec.q1, q2=spec.q2, v=p["v"],
                alpha_max=spec.alpha_max, xi=spec.xi, horizon=spec.horizon, burn_in=spec.burn_in,
                seed=(root + i) % _SEED_MOD, point=i,
            ))
    return tasks


def _policy_for(task: Task):
    if task.policy == "PRA":
        return PraPolicy(task.q1, task.q2), task.q1, task.q2
    if task.policy == "PRA-opt":
        opt = optimal_probabilities(task.lam, task.delta, task.matrix, task.xi)
        return PraPolicy(opt.q1_star, opt.q2_star), opt.q1_star, opt.q2_star
    if task.policy == "DPP-AoI":
        return DppAoiPolicy(task.matrix, task.v), None, None
    if task.policy == "DPP-PAoI":
        return DppPaoiPolicy(task.matrix, task.v, task.alpha_max), None, None
    raise ValueError(f"unknown policy {task.policy!r}")


def simulate_task(task: Task) -> dict:
    policy, q1, q2 = _policy_for(task)
    cfg = SimConfig(task.lam, task.delta, task.horizon, task.burn_in, task.seed)
    m = run(cfg, policy, task.matrix)
    is_pra = task.policy.startswith("PRA")
    return {
        "scenario": task.scenario,
        "policy": task.policy,
        "mpr": task.mpr,
        "lambda": task.lam,
        "delta": task.delta,
        "q1": q1,
        "q2": q2,
        "V": None if is_pra else task.v,
        "alpha_max": task.alpha_max if task.policy == "DPP-PAoI" else None,
        "xi": task.xi if task.policy == "PRA-opt" else None,
        "horizon": task.horizon,
        "burn_in": task.burn_in,
        "seed": task.seed,
        "avg_aoi": m.avg_aoi,
        "avg_paoi": m.avg_paoi,
        "avg_q": m.avg_q,
        "thpt1": m.throughput1,
        "thpt2": m.throughput2,
        "frac_11": m.fraction((1, 1)),
        "frac_10": m.fraction((1, 0)),
        "frac_01": m.fraction((0, 1)),
        "frac_00": m.fraction((0, 0)),
        "unstable": int(m.unstable),
    }


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map preserves input order, so output order is independent of completion order
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def default_workers() -> int:
    return max(1, os.cpu_count() or 1)


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> list[dict]:
    tasks = expand(spec)
    if spec.policy == "PRA-opt":
        for t in tasks:
            # fail fast, before spending time on other points
            optimal_probabilities(t.lam, t.delta, t.matrix, t.xi)
    rows = _map(simulate_task, tasks, workers)
    pairs = sorted(zip(tasks, rows), key=lambda p: (p[0].point, p[0].seed))
    return [r for _, r in pairs]


def analyze_point(matrix: SuccessMatrix, mpr: str, lam: float, delta: float,
                  q1: float, q2: float) -> dict:
    """Closed-form row for one PRA operating point; never raises for bad points."""
    row = dict.fromkeys(ANALYZE_COLUMNS)
    row.update({"mpr": mpr, "lambda": lam, "delta": delta, "q1": q1, "q2": q2})
    feasible = lam < matrix.p11
    row["feasible"] = int(feasible)
    inp = AnalyticInputs(lam, delta, q1, q2, matrix)
    row["mu"] = service_probability(inp)
    row["stable"] = int(is_stable(inp))
    if not (feasible and row["stable"]):
        return row
    row["p2_bar"] = s2_success_prob(inp)
    if attempt_rate(inp) > 0 and row["p2_bar"] > 0:
        row["avg_aoi"] = avg_aoi_closed_form(inp)
        row["avg_paoi"] = avg_paoi_closed_form(inp)
        mom = renewal_moments(inp)
        row["e_t"] = mom.e_t
        row["e_t2"] = mom.e_t2
    return row


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return f"{float(value):.10g}"
    return str(value)


def format_rows(rows, columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def write_csv(rows, path, columns=CSV_COLUMNS) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_rows(rows, columns))


# --------------------------------------------------------------------------
# canned sweeps

def _grid(start: float, stop: float, step: float) -> tuple:
    n = int(round((stop - start) / step))
    return tuple(round(start + k * step, 10) for k in range(n + 1))


LAMBDA_GRID = _grid(0.05, 0.9, 0.05)
DELTA_GRID = _grid(0.05, 1.0, 0.05)
MATRICES = (("weak", WEAK_MPR), ("strong", STRONG_MPR))


def _spec(scenario, policy, mpr, matrix, lam, delta, sweep, grid, seeds, horizon):
    return validate(ExperimentSpec(
        scenario=scenario, policy=policy, matrix=matrix, mpr=mpr, lam=lam, delta=delta,
        sweep_variable=sweep, grid=tuple(grid), seeds=tuple(seeds), horizon=horizon,
    ))


def figure_specs(fig: str, seeds=(1,), horizon: int = DEFAULT_HORIZON) -> list[tuple[str, list[ExperimentSpec]]]:
    """``[(csv_name, [spec, ...]), ...]`` for a figure id (fig5 excluded)."""
    if fig not in FIGURES:
        raise KeyError(fig)
    out = []
    for mpr, matrix in MATRICES:
        lam_grid = [x for x in LAMBDA_GRID if x < matrix.p11]
        if fig == "fig3":
            specs = [_spec("fig3", p, mpr, matrix, None, 0.6, "lambda", lam_grid, seeds, horizon)
                     for p in ("PRA-opt", "DPP-AoI")]
        elif fig == "fig4":
            specs = [_spec("fig4", "DPP-AoI", mpr, matrix, None, 0.6, "lambda", lam_grid, seeds, horizon)]
        elif fig == "fig7":
            specs = [_spec("fig7", p, mpr, matrix, None, 0.6, "lambda", lam_grid, seeds, horizon)
                     for p in ("PRA-opt", "DPP-PAoI")]
        elif fig in ("fig6", "fig8"):
            dpp = "DPP-AoI" if fig == "fig6" else "DPP-PAoI"
            specs = [_spec(fig, p, mpr, matrix, lam, None, "delta", DELTA_GRID, seeds, horizon)
                     for lam in (0.3, 0.7) for p in ("PRA-opt", dpp)]
        else:
            raise ValueError("fig5 is produced by running_average_rows")
        out.append((f"{fig}_{mpr}.csv", specs))
    return out


def _running_task(args):
    v, seed, horizon, every = args
    cfg = SimConfig(0.75, 0.6, horizon, 0, seed)
    m = run(cfg, DppAoiPolicy(STRONG_MPR, v), STRONG_MPR, checkpoint_every=every)
    return [
        {"scenario": "fig5", "policy": "DPP-AoI", "mpr": "strong", "lambda": 0.75, "delta": 0.6,
         "V": v, "horizon": horizon, "seed": seed, "t": int(t), "running_avg_aoi": y}
        for t, y in m.checkpoints
    ]


def running_average_rows(v_values=FIG5_V, seeds=(1,), horizon: int = DEFAULT_HORIZON,
                         every: int = 1000, workers: int = 1) -> list[dict]:
    """Running time-average age vs slot for DPP-AoI at lambda=0.75, delta=0.6, strong MPR."""
    jobs = [(float(v), s, horizon, every) for v in v_values for s in seeds]
    rows = []
    for chunk in _map(_running_task, jobs, workers):
        rows.extend(chunk)
    return rows


def run_figure(fig: str, out_dir, seeds=(1,), horizon: int = DEFAULT_HORIZON, workers: int = 1) -> list[str]:
    """Run a canned sweep and write its CSV file(s); returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    if fig == "fig5":
        path = os.path.join(out_dir, "fig5_strong.csv")
        write_csv(running_average_rows(seeds=seeds, horizon=horizon, workers=workers), path, RUNNING_COLUMNS)
        return [path]
    paths = []
    for name, specs in figure_specs(fig, seeds, horizon):
        rows = []
        for spec in specs:
            rows.extend(run_experiment(spec, workers))
        path = os.path.join(out_dir, name)
        write_csv(rows, path)
        paths.append(path)
    return paths
