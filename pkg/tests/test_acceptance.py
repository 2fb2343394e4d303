"""End-to-end acceptance runs, one test per exit criterion.

Each test prints a single PASS/FAIL line (visible with ``pytest -s``) and
asserts the same condition, with every tolerance pinned here:

1. closed forms match the RK4 oracle to 1e-8 over t in [0, 10];
2. the reference forgetting value is 0.336 analytically and the simulated
   end-of-run value lands within 0.02 of it;
3. seed-averaged learning curves track theory within 5% relative or 0.02
   absolute, pointwise on a 0.1-time-unit grid, both phases;
4. the overshooting setting is classified as such, its closed-form curve
   peaks above the limit, and the simulated peak clears the final value by
   more than three standard errors;
5. structural zeros are exact: no forgetting at disjoint supports or for
   identical teachers, and the task-2 curve starts at zero;
6. the forgetting value is monotone across the full similarity grid;
7. the theory-simulation gap shrinks like a power of n with exponent near
   one half;
8. divergent settings are rejected up front, and a forced divergent run
   overflows quickly and loudly.
"""

import dataclasses
import math
import time

import numpy as np
import pytest

from forgetting_dynamics import (
    ContinualConfig,
    DivergentError,
    NonFiniteError,
    OvershootVariant,
    T1Mode,
    classify_overshoot,
    eg1_phase1,
    eg1_phase2,
    eg2_phase2,
    forgetting_value,
    validate,
    with_seed,
)
from forgetting_dynamics import ode, theory
from forgetting_dynamics.experiments import (
    default_heatmap_sweep,
    forgetting_heatmap,
    preset,
    run_seed_replicates,
)
from forgetting_dynamics.simulator import Schedule, run_continual

EXACT_COPY = T1Mode("exact_copy")
JOBS = 2


def report(criterion: int, ok: bool, detail: str) -> None:
    print(f"[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} -- {detail}")


def phase2_closed_form(cfg, t):
    s = theory.phase2_order_params(cfg, t)
    return np.stack([s.q2, s.r2_2, s.r12_1, s.r12_2, s.q12, s.r1_1, s.q1], axis=-1)


def seed_curves(cfg, schedule, seeds, phase=2):
    """Per-seed error curves on the shared record grid."""
    runs = run_seed_replicates(cfg, schedule, [cfg.seed + s for s in range(seeds)],
                               n_jobs=JOBS)
    eg1, eg2, t = [], [], None
    for run in runs:
        records = [r for r in run if r.phase == phase]
        eg1.append([r.eg1 for r in records])
        eg2.append([r.eg2 for r in records])
        t = np.array([r.t for r in records])
    return t, np.array(eg1), np.array(eg2)


def test_criterion_1_closed_forms_match_integrator():
    """Sup gap theory vs RK4 (dt=1e-3) below 1e-8 for every overlap and
    both error curves, on both reference presets, within 10 s."""
    started = time.perf_counter()
    worst = 0.0
    for name in ("fig3a", "fig3b-text"):
        cfg = validate(preset(name))
        times, states = ode.integrate(
            ode.phase1_system(cfg), ode.phase1_initial_state(cfg), cfg, t_end=10.0, dt=1e-3
        )
        r1_1, q1 = theory.phase1_order_params(cfg, times)
        worst = max(worst,
                    float(np.max(np.abs(states[:, 0] - q1))),
                    float(np.max(np.abs(states[:, 1] - r1_1))),
                    float(np.max(np.abs(ode.eg1_from_phase1(states, cfg)
                                        - eg1_phase1(cfg, times)))))
        times, states = ode.integrate(
            ode.phase2_system(cfg), ode.phase2_initial_state(cfg), cfg, t_end=10.0, dt=1e-3
        )
        worst = max(worst,
                    float(np.max(np.abs(states - phase2_closed_form(cfg, times)))),
                    float(np.max(np.abs(ode.eg1_from_phase2(states, cfg)
                                        - eg1_phase2(cfg, times)))),
                    float(np.max(np.abs(ode.eg2_from_phase2(states, cfg)
                                        - eg2_phase2(cfg, times)))))
    elapsed = time.perf_counter() - started
    ok = worst < 1e-8 and elapsed < 10.0
    report(1, ok, f"sup gap {worst:.2e} (tol 1e-8), {elapsed:.1f}s (limit 10s)")
    assert worst < 1e-8
    assert elapsed < 10.0


def test_criterion_2_forgetting_value_reference_run():
    """Analytic limit 0.336; simulated end of task-2 training within 0.02."""
    started = time.perf_counter()
    cfg = validate(dataclasses.replace(preset("fig3a"), t1_mode=EXACT_COPY))
    analytic = forgetting_value(cfg)
    schedule = Schedule.from_time(cfg, 0.0, 10.0)
    _, eg1_runs, _ = seed_curves(cfg, schedule, seeds=10)
    simulated = float(eg1_runs[:, -1].mean())
    elapsed = time.perf_counter() - started
    ok = (abs(analytic - 0.336) < 1e-12 and abs(simulated - 0.336) < 0.02
          and elapsed < 60.0)
    report(2, ok, f"analytic {analytic:.6f}, simulated {simulated:.4f} "
                  f"(target 0.336 +/- 0.02), {elapsed:.0f}s (limit 60s)")
    assert abs(analytic - 0.336) < 1e-12
    assert abs(simulated - 0.336) < 0.02
    assert elapsed < 60.0


def test_criterion_3_learning_curves_overlap():
    """Seed-averaged curves within 5% relative or 0.02 absolute of theory,
    pointwise on the 0.1-time-unit grid, both phases."""
    started = time.perf_counter()
    cfg = validate(preset("fig3a"))  # trained phase 1
    schedule = Schedule.from_time(cfg, 6.0, 6.0)
    seeds = 10

    t1_grid, eg1_p1, _ = seed_curves(cfg, schedule, seeds, phase=1)
    t2_grid, eg1_p2, eg2_p2 = seed_curves(cfg, schedule, seeds, phase=2)

    def within(sim_runs, th):
        sim = sim_runs.mean(axis=0)
        tol = np.maximum(0.02, 0.05 * np.abs(th))
        gap = np.abs(sim - th)
        return float(np.max(gap - tol)), float(np.max(gap))

    margins = [
        within(eg1_p1, np.asarray(eg1_phase1(cfg, t1_grid))),
        within(eg1_p2, np.asarray(eg1_phase2(cfg, t2_grid))),
        within(eg2_p2, np.asarray(eg2_phase2(cfg, t2_grid))),
    ]
    elapsed = time.perf_counter() - started
    worst_excess = max(m[0] for m in margins)
    worst_gap = max(m[1] for m in margins)
    ok = worst_excess <= 0.0 and elapsed < 60.0
    report(3, ok, f"worst gap {worst_gap:.4f}, worst tolerance excess {worst_excess:+.4f}, "
                  f"{elapsed:.0f}s (limit 60s)")
    assert worst_excess <= 0.0
    assert elapsed < 60.0


def test_criterion_4_overshoot_reproduction():
    """Overshooting preset: classified OCCURS, closed-form peak above the
    limit, simulated peak above the final value by > 3 standard errors."""
    cfg = validate(dataclasses.replace(preset("fig3b-text"), t1_mode=EXACT_COPY))
    klass = classify_overshoot(cfg)
    classified = klass.variant is OvershootVariant.OCCURS and abs(klass.gamma - 1.36) < 1e-12

    grid = np.linspace(0.0, 20.0 / cfg.gamma2, 4001)
    closed_margin = float(np.max(eg1_phase2(cfg, grid)) - forgetting_value(cfg))

    schedule = Schedule.from_time(cfg, 0.0, 8.0)
    t, eg1_runs, _ = seed_curves(cfg, schedule, seeds=10)
    mean = eg1_runs.mean(axis=0)
    se = eg1_runs.std(axis=0, ddof=1) / math.sqrt(eg1_runs.shape[0])
    peak = int(np.argmax(mean))
    sim_excess = float(mean[peak] - mean[-1])
    sim_noise = 3.0 * math.hypot(float(se[peak]), float(se[-1]))

    ok = classified and closed_margin > 0.0 and sim_excess > sim_noise
    report(4, ok, f"gamma2 {klass.gamma:.2f} -> {klass.variant.value}, closed-form peak "
                  f"excess {closed_margin:.4f}, simulated peak-final {sim_excess:.4f} "
                  f"> 3se {sim_noise:.4f}")
    assert classified
    assert closed_margin > 0.0
    assert sim_excess > sim_noise


def test_criterion_5_structural_zeros():
    """Exact zeros of the forgetting value and the curve's start."""
    disjoint = [
        forgetting_value(validate(ContinualConfig(n=100, r=0.5, q=q)))
        for q in np.linspace(-1.0, 1.0, 21)
    ]
    identical = forgetting_value(
        validate(ContinualConfig(n=100, r=0.9, q=1.0, sigma_b1=1.7, sigma_b2=1.7))
    )
    rng = np.random.default_rng(5)
    worst_start = 0.0
    for _ in range(1000):
        eta = float(rng.uniform(0.05, 1.5))
        cfg = validate(ContinualConfig(
            n=int(rng.integers(10, 5000)),
            r=float(rng.uniform(0.5, 1.0)),
            q=float(rng.uniform(-1.0, 1.0)),
            eta=eta,
            sigma1_sq=float(rng.uniform(0.05, 1.9 / eta)),
            sigma2_sq=float(rng.uniform(0.05, 1.9 / eta)),
            sigma_b1=float(rng.uniform(0.0, 3.0)),
            sigma_b2=float(rng.uniform(0.0, 3.0)),
            sigma_j=float(rng.uniform(0.0, 3.0)),
        ))
        worst_start = max(worst_start, abs(float(eg1_phase2(cfg, 0.0))))
    ok = all(v == 0.0 for v in disjoint) and identical == 0.0 and worst_start < 1e-12
    report(5, ok, f"disjoint-support zeros exact, identical-teacher zero exact, "
                  f"worst |curve(0)| {worst_start:.2e} over 1000 configs (tol 1e-12)")
    assert all(v == 0.0 for v in disjoint)
    assert identical == 0.0
    assert worst_start < 1e-12


def test_criterion_6_heatmap_monotone():
    """26x26 unit-variance grid: nonincreasing in q, nondecreasing in r."""
    report_grid = forgetting_heatmap(default_heatmap_sweep(grid=26))
    values = {(row["r"], row["q"]): row["forgetting_value"] for row in report_grid.rows}
    rs = sorted({k[0] for k in values})
    qs = sorted({k[1] for k in values})
    violations = 0
    for r in rs:
        col = [values[(r, q)] for q in qs]
        violations += sum(1 for a, b in zip(col, col[1:]) if a < b)
    for q in qs:
        row_vals = [values[(r, q)] for r in rs]
        violations += sum(1 for a, b in zip(row_vals, row_vals[1:]) if a > b)
    ok = violations == 0 and len(values) == 26 * 26
    report(6, ok, f"{len(values)} cells, {violations} monotonicity violations")
    assert len(values) == 26 * 26
    assert violations == 0


def test_criterion_7_finite_size_scaling():
    """Mean per-seed sup gap between simulation and theory follows n^-alpha
    with alpha in [0.3, 0.7] over n in {1500, 3000, 6000} (20 seeds)."""
    started = time.perf_counter()
    base = preset("fig3a")
    sizes = [1500, 3000, 6000]
    gaps = []
    for n in sizes:
        cfg = validate(dataclasses.replace(base, n=n, t1_mode=EXACT_COPY))
        schedule = Schedule.from_time(cfg, 0.0, 5.0)
        t, eg1_runs, _ = seed_curves(cfg, schedule, seeds=20)
        th = np.asarray(eg1_phase2(cfg, t))
        gaps.append(float(np.abs(eg1_runs - th).max(axis=1).mean()))
    alpha = -float(np.polyfit(np.log(sizes), np.log(gaps), 1)[0])
    elapsed = time.perf_counter() - started
    ok = 0.3 <= alpha <= 0.7 and elapsed < 300.0
    report(7, ok, f"gaps {[f'{g:.4f}' for g in gaps]} -> alpha {alpha:.3f} "
                  f"(window [0.3, 0.7]), {elapsed:.0f}s (limit 300s)")
    assert 0.3 <= alpha <= 0.7
    assert elapsed < 300.0


def test_criterion_8_divergence_guard():
    """gamma2 = 2.5 is rejected; a forced run overflows within 1e4 steps."""
    raw = ContinualConfig(n=10, r=1.0, sigma2_sq=2.5, t1_mode=EXACT_COPY)
    rejected = False
    try:
        validate(raw)
    except DivergentError:
        rejected = True

    cfg = validate(raw, allow_divergent=True)
    schedule = Schedule(steps_task1=0, steps_task2=10**4, record_every=10)
    overflowed = False
    try:
        run_continual(cfg, schedule)
    except NonFiniteError:
        overflowed = True
    ok = rejected and overflowed
    report(8, ok, f"gamma2 {cfg.gamma2:.2f}: rejected={rejected}, "
                  f"NON_FINITE within 1e4 steps={overflowed}")
    assert rejected
    assert overflowed
