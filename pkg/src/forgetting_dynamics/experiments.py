"""Experiment drivers: learning curves, forgetting heatmap, overshoot diagram.

Each driver produces a :class:`Report`: tidy rows under a fixed column
tuple, optional summary rows, and a ``meta`` block embedding the fully
resolved configuration (post-quantization ``r``, seeds, step sizes) so any
row can be regenerated bit-exactly.

The learning-curve driver runs the finite-size simulator over several
seeds, evaluates the closed forms, and integrates the overlap ODEs on the
same time grid.  Closed forms and integrator must agree to ``HARD_GATE_TOL``
on every emitted value; a violation aborts the report rather than shipping
inconsistent columns.

Named parameter presets reproduce the reference learning-curve settings
(``fig3a`` converges monotonically, the two ``fig3b`` variants overshoot;
the ``-caption`` and ``-text`` variants exist because the two published
descriptions of that run disagree) and the unit-variance heatmap setting
(``fig4``).
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import ode, theory
from .config import ContinualConfig, T1Mode, ValidatedConfig, validate, with_seed
from .errors import HardGateError, OutOfRangeError
from .simulator import Schedule, run_continual
from .theory import OvershootVariant

HARD_GATE_TOL = 1e-8
# A closed-form curve must clear its limit by this much to count as overshoot.
CLOSED_FORM_MARGIN = 1e-9

PRESETS = {
    "fig3a": ContinualConfig(
        n=3000, r=0.8, q=0.3, eta=1.0, sigma1_sq=0.8, sigma2_sq=0.8,
        sigma_b1=1.0, sigma_b2=1.0, sigma_j=1.0, seed=0, t1_mode=T1Mode("trained", 8.0),
    ),
    "fig3b-caption": ContinualConfig(
        n=3000, r=0.8, q=0.9, eta=1.0, sigma1_sq=1.7, sigma2_sq=1.7,
        sigma_b1=1.0, sigma_b2=1.0, sigma_j=11.0, seed=0, t1_mode=T1Mode("trained", 8.0),
    ),
    "fig3b-text": ContinualConfig(
        n=3000, r=0.8, q=0.7, eta=1.0, sigma1_sq=1.7, sigma2_sq=1.7,
        sigma_b1=1.0, sigma_b2=1.0, sigma_j=2.0, seed=0, t1_mode=T1Mode("trained", 8.0),
    ),
    "fig4": ContinualConfig(
        n=1500, r=0.8, q=0.5, eta=1.0, sigma1_sq=1.0, sigma2_sq=1.0,
        sigma_b1=1.0, sigma_b2=1.0, sigma_j=1.0, seed=0, t1_mode=T1Mode("exact_copy"),
    ),
}

CURVE_COLUMNS = (
    "phase", "t", "eg1_sim", "eg1_se", "eg2_sim", "eg2_se",
    "eg1_theory", "eg2_theory", "eg1_ode", "eg2_ode",
)
CURVE_SUMMARY_COLUMNS = ("phase", "metric", "sup_gap_theory_ode", "sup_gap_theory_sim")
HEATMAP_COLUMNS = ("r", "q", "gamma2", "forgetting_value", "status", "eg1_sim_end", "eg1_sim_se")
OVERSHOOT_COLUMNS = (
    "eta", "r", "sigma2_sq", "gamma2", "c1", "c2",
    "classification", "numerical_verdict", "peak_excess",
)


def preset(name: str) -> ContinualConfig:
    try:
        return PRESETS[name]
    except KeyError:
        raise OutOfRangeError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")


@dataclass(frozen=True)
class SweepAxis:
    """A uniform inclusive grid over one config field."""

    name: str
    lo: float
    hi: float
    count: int

    def __post_init__(self):
        if self.name not in ContinualConfig.FIELD_NAMES:
            raise OutOfRangeError(f"swept parameter {self.name!r} is not a config field")
        if self.count < 1:
            raise OutOfRangeError("axis count must be >= 1")
        if self.count > 1 and not self.hi > self.lo:
            raise OutOfRangeError("axis needs hi > lo when count > 1")

    def grid(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.lo])
        return np.linspace(self.lo, self.hi, self.count)


@dataclass(frozen=True)
class SweepSpec:
    """Axes swept over a fixed base config, with per-cell replicate count."""

    base: ContinualConfig
    axes: tuple
    replicates: int = 10
    out_path: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise OutOfRangeError("replicates must be >= 1")

    def cells(self):
        """Yield (axis-values dict, cell config) over the full grid."""
        grids = [axis.grid() for axis in self.axes]
        names = [axis.name for axis in self.axes]
        index = np.ndindex(*(len(g) for g in grids))
        for multi in index:
            values = {name: float(grid[i]) for name, grid, i in zip(names, grids, multi)}
            yield values, dataclasses.replace(self.base, **values)


@dataclass(frozen=True)
class Report:
    """Rows plus provenance; what the writers serialize."""

    kind: str
    columns: tuple
    rows: list
    meta: dict
    summary_columns: tuple | None = None
    summary_rows: list | None = field(default=None)


def _seed_list(cfg: ValidatedConfig, seeds: int) -> list[int]:
    return [cfg.seed + i for i in range(seeds)]


def run_seed_replicates(
    cfg: ValidatedConfig,
    schedule: Schedule,
    seeds: list[int],
    *,
    exact_similarity: bool = False,
    n_jobs: int = 1,
) -> list:
    """One trajectory per seed, optionally across a thread pool.

    Each trajectory is a pure function of its seed, so the result does not
    depend on ``n_jobs``; the heavy numpy/scipy calls release the GIL and
    threads give a real speedup.
    """
    configs = [with_seed(cfg, s) for s in seeds]
    if n_jobs > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            return list(pool.map(
                lambda c: run_continual(c, schedule, exact_similarity=exact_similarity),
                configs,
            ))
    return [run_continual(c, schedule, exact_similarity=exact_similarity) for c in configs]


def _stack_phase(runs: list, phase: int):
    """Align per-seed records of one phase onto their shared step grid."""
    per_seed = [[rec for rec in run if rec.phase == phase] for run in runs]
    steps = [rec.step for rec in per_seed[0]]
    for records in per_seed[1:]:
        if [rec.step for rec in records] != steps:
            raise RuntimeError("seeds produced different record grids")
    t = np.array([rec.t for rec in per_seed[0]])
    eg1 = np.array([[rec.eg1 for rec in records] for records in per_seed]).reshape(len(runs), -1)
    eg2 = np.array([[rec.eg2 for rec in records] for records in per_seed]).reshape(len(runs), -1)
    return t, eg1, eg2


def _mean_se(values: np.ndarray):
    mean = values.mean(axis=0)
    if values.shape[0] >= 2:
        se = values.std(axis=0, ddof=1) / math.sqrt(values.shape[0])
    else:
        se = np.zeros_like(mean)
    return mean, se


def _sup_gap(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(a - b))) if a.size else 0.0


def learning_curve_experiment(
    cfg: ContinualConfig | ValidatedConfig,
    schedule: Schedule | None = None,
    *,
    seeds: int = 10,
    t2: float = 6.0,
    record_dt: float = 0.1,
    dt: float = ode.DEFAULT_DT,
    exact_similarity: bool = False,
    n_jobs: int = 1,
) -> Report:
    """Three-way comparison of simulated, closed-form and integrated curves.

    Phase-1 closed forms describe training from the random init, so their
    columns stay empty when the config plants an exact task-1 copy instead
    of training.  Raises :class:`HardGateError` if closed forms and the
    integrator disagree anywhere beyond ``HARD_GATE_TOL``.
    """
    cfg = validate(cfg)
    if schedule is None:
        t1 = cfg.t1_mode.t_end if cfg.t1_mode.kind == "trained" else 0.0
        schedule = Schedule.from_time(cfg, t1, t2, record_dt)

    seed_values = _seed_list(cfg, seeds)
    runs = run_seed_replicates(cfg, schedule, seed_values,
                               exact_similarity=exact_similarity, n_jobs=n_jobs)

    rows: list[dict] = []
    summary_rows: list[dict] = []
    trained_phase1 = cfg.t1_mode.kind == "trained"

    for phase in (1, 2):
        t, eg1_runs, eg2_runs = _stack_phase(runs, phase)
        if t.size == 0:
            continue
        eg1_sim, eg1_se = _mean_se(eg1_runs)
        eg2_sim, eg2_se = _mean_se(eg2_runs)

        if phase == 1:
            if trained_phase1 and t.size > 1:
                eg1_th = np.asarray(theory.eg1_phase1(cfg, t))
                states = ode.integrate_to_times(
                    ode.phase1_system(cfg), ode.phase1_initial_state(cfg), cfg, t, dt=dt
                )
                eg1_num = ode.eg1_from_phase1(states, cfg)
            else:
                eg1_th = np.full(t.shape, np.nan)
                eg1_num = np.full(t.shape, np.nan)
            eg2_th = np.full(t.shape, np.nan)  # no closed form for the untrained task
            eg2_num = np.full(t.shape, np.nan)
        else:
            eg1_th = np.asarray(theory.eg1_phase2(cfg, t))
            eg2_th = np.asarray(theory.eg2_phase2(cfg, t))
            states = ode.integrate_to_times(
                ode.phase2_system(cfg), ode.phase2_initial_state(cfg), cfg, t, dt=dt
            )
            eg1_num = ode.eg1_from_phase2(states, cfg)
            eg2_num = ode.eg2_from_phase2(states, cfg)

        for metric, th, num, sim in (
            ("eg1", eg1_th, eg1_num, eg1_sim),
            ("eg2", eg2_th, eg2_num, eg2_sim),
        ):
            defined = np.isfinite(th)
            gap_ode = _sup_gap(th[defined], num[defined])
            gap_sim = _sup_gap(th[defined], sim[defined])
            if gap_ode > HARD_GATE_TOL:
                raise HardGateError(
                    f"phase {phase} {metric}: closed form and integrator differ by "
                    f"{gap_ode:.3g} (> {HARD_GATE_TOL:g})"
                )
            summary_rows.append({
                "phase": phase,
                "metric": metric,
                "sup_gap_theory_ode": gap_ode if defined.any() else math.nan,
                "sup_gap_theory_sim": gap_sim if defined.any() else math.nan,
            })

        for i in range(t.size):
            rows.append({
                "phase": phase,
                "t": float(t[i]),
                "eg1_sim": float(eg1_sim[i]),
                "eg1_se": float(eg1_se[i]),
                "eg2_sim": float(eg2_sim[i]),
                "eg2_se": float(eg2_se[i]),
                "eg1_theory": float(eg1_th[i]),
                "eg2_theory": float(eg2_th[i]),
                "eg1_ode": float(eg1_num[i]),
                "eg2_ode": float(eg2_num[i]),
            })

    # Phase-2 overshoot flags: classification plus the seed-noise-aware
    # verdict on the averaged curve.
    t2_grid, eg1_runs2, _ = _stack_phase(runs, 2)
    overshoot_sim = False
    eg1_end = None
    if t2_grid.size:
        eg1_mean2, eg1_se2 = _mean_se(eg1_runs2)
        eg1_end = float(eg1_mean2[-1])
        if t2_grid.size > 1:
            peak = int(np.argmax(eg1_mean2))
            margin = 3.0 * math.hypot(float(eg1_se2[peak]), float(eg1_se2[-1]))
            overshoot_sim = bool(eg1_mean2[peak] - eg1_mean2[-1] > margin)
    klass = theory.classify_overshoot(cfg)

    meta = {
        "config": cfg.to_dict(),
        "run": {
            "seeds": seed_values,
            "steps_task1": schedule.steps_task1,
            "steps_task2": schedule.steps_task2,
            "record_every": schedule.record_every,
            "dt": dt,
            "exact_similarity": exact_similarity,
        },
        "summary": {
            "overshoot_classification": klass.variant.value,
            "overshoot_detected": overshoot_sim,
            "forgetting_value": theory.forgetting_value(cfg) if cfg.gamma2_stable else None,
            "eg1_sim_end": eg1_end,
        },
    }
    return Report(
        kind="curve", columns=CURVE_COLUMNS, rows=rows, meta=meta,
        summary_columns=CURVE_SUMMARY_COLUMNS, summary_rows=summary_rows,
    )


def default_heatmap_sweep(base: ContinualConfig | None = None, grid: int = 26) -> SweepSpec:
    """(r, q) sweep over the unit square of similarities, unit-variance base."""
    return SweepSpec(
        base=base if base is not None else PRESETS["fig4"],
        axes=(SweepAxis("r", 0.5, 1.0, grid), SweepAxis("q", 0.0, 1.0, grid)),
        replicates=10,
    )


def forgetting_heatmap(
    sweep: SweepSpec,
    *,
    with_sim: bool = False,
    sim_t2: float = 10.0,
    record_dt: float = 0.5,
    n_jobs: int = 1,
) -> Report:
    """Analytic forgetting value over the sweep grid, optionally with
    simulated end-of-phase-2 values per cell.

    Cells at or beyond the stability limit are marked ``diverged`` and keep
    an empty value column rather than being dropped.
    """
    rows = []
    for values, cell in sweep.cells():
        vcfg = validate(cell, allow_divergent=True)
        diverged = not vcfg.gamma2_stable
        row = {
            "r": vcfg.r,
            "q": vcfg.q,
            "gamma2": vcfg.gamma2,
            "forgetting_value": math.nan if diverged else theory.forgetting_value(vcfg),
            "status": "diverged" if diverged else "ok",
            "eg1_sim_end": math.nan,
            "eg1_sim_se": math.nan,
        }
        if with_sim and not diverged:
            copy_cfg = validate(dataclasses.replace(cell, t1_mode=T1Mode("exact_copy")))
            schedule = Schedule.from_time(copy_cfg, 0.0, sim_t2, record_dt)
            runs = run_seed_replicates(copy_cfg, schedule,
                                       _seed_list(copy_cfg, sweep.replicates), n_jobs=n_jobs)
            finals = np.array([records[-1].eg1 for records in runs])
            mean, se = _mean_se(finals[:, None])
            row["eg1_sim_end"] = float(mean[0])
            row["eg1_sim_se"] = float(se[0])
        rows.append(row)

    meta = {
        "config": validate(sweep.base, allow_divergent=True).to_dict(),
        "run": {
            "axes": [dataclasses.asdict(a) for a in sweep.axes],
            "replicates": sweep.replicates,
            "with_sim": with_sim,
            "sim_t2": sim_t2,
        },
        "summary": {},
    }
    return Report(kind="heatmap", columns=HEATMAP_COLUMNS, rows=rows, meta=meta)


def _excess_scan_horizon(cfg: ValidatedConfig, klass) -> float:
    """Scan window that provably contains the excess-curve peak.

    The baseline is several slowest-mode decay constants.  Just above the
    critical rate the two slow modes nearly cancel and the curve only rises
    above its limit at the crossover time ln(2 a c1 / (b c2)) / (a - b)
    (a = gamma2, b = gamma2 (2 - gamma2)), so the window is stretched to
    cover that crossover plus the subsequent decay.
    """
    a = cfg.gamma2
    b = a * (2.0 - a)
    horizon = 20.0 / a
    if a > 1.0 and klass.c2 > 0.0 and a - b > 1e-9:
        ratio = 2.0 * a * klass.c1 / (b * klass.c2)
        if ratio > 1.0:
            cross = math.log(ratio) / (a - b)
            horizon = max(horizon, cross + 20.0 / b)
    return horizon


def default_overshoot_sweep(base: ContinualConfig | None = None) -> SweepSpec:
    """(r, sigma2_sq) grid at fixed eta spanning all overshoot classes."""
    return SweepSpec(
        base=base if base is not None else PRESETS["fig3a"],
        axes=(
            SweepAxis("eta", 1.0, 1.0, 1),
            SweepAxis("r", 0.5, 1.0, 11),
            SweepAxis("sigma2_sq", 0.2, 2.4, 12),
        ),
        replicates=10,
    )


def overshoot_phase_diagram(
    sweep: SweepSpec,
    *,
    with_sim: bool = False,
    grid_points: int = 2001,
    n_jobs: int = 1,
) -> Report:
    """Overshoot classification per cell plus a numerical verdict.

    The closed-form verdict scans the cancellation-free excess curve over a
    horizon long enough to contain the slow-mode crossover and compares its
    maximum against the margin: ``overshoot`` above the margin, ``marginal``
    for formally positive peaks below it (the near-critical regime, where
    the overshoot is physically negligible), ``no-overshoot`` when the curve
    never exceeds its limit.  With ``with_sim`` the verdict instead compares
    the seed-averaged simulated peak against a three-standard-error margin.
    Identically-flat curves (both curve constants zero) get the verdict
    ``flat``; divergent cells skip the numerical run entirely.
    """
    rows = []
    for values, cell in sweep.cells():
        vcfg = validate(cell, allow_divergent=True)
        klass = theory.classify_overshoot(vcfg)
        row = {
            "eta": vcfg.eta,
            "r": vcfg.r,
            "sigma2_sq": vcfg.sigma2_sq,
            "gamma2": vcfg.gamma2,
            "c1": klass.c1,
            "c2": klass.c2,
            "classification": klass.variant.value,
            "numerical_verdict": "",
            "peak_excess": math.nan,
        }
        if klass.variant is not OvershootVariant.DIVERGES:
            horizon = _excess_scan_horizon(vcfg, klass)
            if klass.c1 == 0.0 and klass.c2 == 0.0:
                row["numerical_verdict"] = "flat"
                row["peak_excess"] = 0.0
            elif with_sim:
                limit = theory.forgetting_value(vcfg)
                copy_cfg = validate(dataclasses.replace(cell, t1_mode=T1Mode("exact_copy")))
                schedule = Schedule.from_time(copy_cfg, 0.0, horizon, record_dt=horizon / 200.0)
                runs = run_seed_replicates(copy_cfg, schedule,
                                           _seed_list(copy_cfg, sweep.replicates), n_jobs=n_jobs)
                _, eg1_runs, _ = _stack_phase(runs, 2)
                mean, se = _mean_se(eg1_runs)
                peak = int(np.argmax(mean))
                excess = float(mean[peak] - limit)
                row["peak_excess"] = excess
                row["numerical_verdict"] = (
                    "overshoot" if excess > 3.0 * float(se[peak]) else "no-overshoot"
                )
            else:
                t = np.linspace(0.0, horizon, grid_points)
                excess = float(np.max(theory.eg1_phase2_excess(vcfg, t)))
                row["peak_excess"] = excess
                if excess > CLOSED_FORM_MARGIN:
                    row["numerical_verdict"] = "overshoot"
                elif excess > 0.0:
                    row["numerical_verdict"] = "marginal"
                else:
                    row["numerical_verdict"] = "no-overshoot"
                if (
                    klass.variant is OvershootVariant.OCCURS
                    and row["numerical_verdict"] == "no-overshoot"
                ):
                    raise HardGateError(
                        f"classification 'occurs' contradicts numerical verdict at "
                        f"eta={vcfg.eta}, r={vcfg.r}, sigma2_sq={vcfg.sigma2_sq}"
                    )
                if (
                    klass.variant is OvershootVariant.DOES_NOT_OCCUR
                    and row["numerical_verdict"] != "no-overshoot"
                ):
                    raise HardGateError(
                        f"classification 'does_not_occur' contradicts numerical verdict at "
                        f"eta={vcfg.eta}, r={vcfg.r}, sigma2_sq={vcfg.sigma2_sq}"
                    )
        rows.append(row)

    meta = {
        "config": validate(sweep.base, allow_divergent=True).to_dict(),
        "run": {
            "axes": [dataclasses.asdict(a) for a in sweep.axes],
            "replicates": sweep.replicates,
            "with_sim": with_sim,
            "grid_points": grid_points,
        },
        "summary": {},
    }
    return Report(kind="overshoot", columns=OVERSHOOT_COLUMNS, rows=rows, meta=meta)


def _cell_text(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return f"{value:.17g}"
    return str(value)


def _json_safe(value):
    if isinstance(value, float) and math.isnan(value):
        return None
    return value


def write_report(report: Report, outdir, fmt: str = "csv") -> list[str]:
    """Serialize a report; returns the written paths.

    ``csv`` writes ``<kind>.csv`` (+ ``summary.csv`` when present) next to a
    ``meta.json`` holding the resolved config; ``json`` writes a single
    ``<kind>.json`` with everything inline.
    """
    os.makedirs(outdir, exist_ok=True)
    paths = []
    if fmt == "csv":
        main_path = os.path.join(outdir, f"{report.kind}.csv")
        with open(main_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(report.columns)
            for row in report.rows:
                writer.writerow([_cell_text(row[c]) for c in report.columns])
        paths.append(main_path)
        if report.summary_rows is not None:
            summary_path = os.path.join(outdir, "summary.csv")
            with open(summary_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(report.summary_columns)
                for row in report.summary_rows:
                    writer.writerow([_cell_text(row[c]) for c in report.summary_columns])
            paths.append(summary_path)
        meta_path = os.path.join(outdir, "meta.json")
        with open(meta_path, "w") as fh:
            json.dump(report.meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        paths.append(meta_path)
    elif fmt == "json":
        payload = {
            "kind": report.kind,
            "meta": report.meta,
            "columns": list(report.columns),
            "rows": [{k: _json_safe(v) for k, v in row.items()} for row in report.rows],
        }
        if report.summary_rows is not None:
            payload["summary_columns"] = list(report.summary_columns)
            payload["summary_rows"] = [
                {k: _json_safe(v) for k, v in row.items()} for row in report.summary_rows
            ]
        path = os.path.join(outdir, f"{report.kind}.json")
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")
        paths.append(path)
    else:
        raise OutOfRangeError(f"format must be 'csv' or 'json', got {fmt!r}")
    return paths
