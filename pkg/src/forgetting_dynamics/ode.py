"""Fixed-step numerical integration of the overlap ODEs.

This module is the independent arbiter for the closed forms in
:mod:`.theory`: it integrates the underlying ODE systems with classical
fourth-order Runge-Kutta and nothing else, so agreement between the two is
meaningful.  Both systems are autonomous and linear; with effective rates
bounded by the stability limit they are not stiff, and a fixed step keeps
runs deterministic.

Phase 1 evolves (Q1, R1^1) under task-1 updates:

    dQ1/dt   = a1^2 (T1^1 + Q1 - 2 R1^1) + 2 a1 (R1^1 - Q1)
    dR1^1/dt = a1 (T1^1 - R1^1),               a1 = eta r sigma1^2.

Phase 2 evolves (Q2, R2^2, R12^1, R12^2, Q12, R1^1, Q1) under task-2
updates, with constants T2^2 = r sb2^2, T12^2 = (2r-1) sb2^2 and
q' = (2r-1) q sb1 sb2:

    dQ2/dt    = a2^2 (T2^2 + Q2 - 2 R2^2) + 2 a2 (R2^2 - Q2)
    dR2^2/dt  = a2 (T2^2 - R2^2)
    dR12^1/dt = a2 (q' - R12^1)
    dR12^2/dt = a2 (T12^2 - R12^2)
    dQ12/dt   = 2 a2 (R12^2 - Q12) + (a2^2 (2r-1)/r)(T2^2 - 2 R2^2 + Q2)
    dR1^1/dt  = a2 (q' - R12^1)
    dQ1/dt    = dQ12/dt,                        a2 = eta r sigma2^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import ValidatedConfig
from .errors import NonFiniteError

PHASE1_LABELS = ("q1", "r1_1")
PHASE2_LABELS = ("q2", "r2_2", "r12_1", "r12_2", "q12", "r1_1", "q1")

DEFAULT_DT = 1e-3
DEFAULT_SAMPLE_EVERY = 1e-2


@dataclass(frozen=True)
class OdeSystem:
    """An autonomous overlap ODE system: phase tag, dimension, derivative map."""

    phase: int
    state_dim: int
    rhs: Callable[[np.ndarray, ValidatedConfig], np.ndarray]
    labels: tuple


def rhs_phase1(state: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    q1, r1_1 = state
    a = cfg.gamma1
    t1_1 = cfg.r * cfg.sigma_b1**2
    dq1 = a * a * (t1_1 + q1 - 2.0 * r1_1) + 2.0 * a * (r1_1 - q1)
    dr1_1 = a * (t1_1 - r1_1)
    return np.array([dq1, dr1_1])


def rhs_phase2(state: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    q2, r2_2, r12_1, r12_2, q12, r1_1, q1 = state
    a = cfg.gamma2
    r = cfg.r
    common = 2.0 * r - 1.0
    t2_2 = r * cfg.sigma_b2**2
    t12_2 = common * cfg.sigma_b2**2
    q_prime = common * cfg.q * cfg.sigma_b1 * cfg.sigma_b2

    task2_residual = t2_2 - 2.0 * r2_2 + q2
    dq2 = a * a * task2_residual + 2.0 * a * (r2_2 - q2)
    dr2_2 = a * (t2_2 - r2_2)
    dr12_1 = a * (q_prime - r12_1)
    dr12_2 = a * (t12_2 - r12_2)
    dq12 = 2.0 * a * (r12_2 - q12) + (a * a * common / r) * task2_residual
    dr1_1 = a * (q_prime - r12_1)
    dq1 = dq12
    return np.array([dq2, dr2_2, dr12_1, dr12_2, dq12, dr1_1, dq1])


def phase1_system(cfg: ValidatedConfig) -> OdeSystem:
    return OdeSystem(phase=1, state_dim=2, rhs=rhs_phase1, labels=PHASE1_LABELS)


def phase2_system(cfg: ValidatedConfig) -> OdeSystem:
    return OdeSystem(phase=2, state_dim=7, rhs=rhs_phase2, labels=PHASE2_LABELS)


def phase1_initial_state(cfg: ValidatedConfig) -> np.ndarray:
    """(Q1, R1^1) at the random student init."""
    return np.array([cfg.r * cfg.sigma_j**2, 0.0])


def phase2_initial_state(cfg: ValidatedConfig) -> np.ndarray:
    """Phase-2 state for a student that finished task 1 exactly."""
    r, q = cfg.r, cfg.q
    sb1, sb2, sj = cfg.sigma_b1, cfg.sigma_b2, cfg.sigma_j
    common = 2.0 * r - 1.0
    cross = q * sb1 * sb2
    return np.array([
        common * sb1**2 + (1.0 - r) * sj**2,  # q2
        common * cross,                       # r2_2
        common * sb1**2,                      # r12_1
        common * cross,                       # r12_2
        common * sb1**2,                      # q12
        r * sb1**2,                           # r1_1
        r * sb1**2,                           # q1
    ])


def integrate(
    system: OdeSystem,
    init: np.ndarray,
    cfg: ValidatedConfig,
    t_end: float,
    dt: float = DEFAULT_DT,
    sample_every: float = DEFAULT_SAMPLE_EVERY,
):
    """RK4 trajectory of ``system`` from ``init``; global error O(dt^4).

    Returns ``(times, states)`` with one row per sampling point (multiples
    of ``sample_every``, plus the endpoint).  ``t_end`` is rounded to a
    whole number of steps.

    Raises
    ------
    NonFiniteError
        A sampled state left the double range (expected when gamma >= 2).
    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if t_end < 0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")

    n_steps = int(round(t_end / dt))
    stride = max(1, int(round(sample_every / dt)))
    y = np.asarray(init, dtype=float).copy()
    if y.shape != (system.state_dim,):
        raise ValueError(f"init must have shape ({system.state_dim},), got {y.shape}")

    rhs = system.rhs
    times = [0.0]
    states = [y.copy()]
    # Divergent systems are allowed to overflow; the sample check turns the
    # overflow into NonFiniteError instead of a warning.
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = rhs(y, cfg)
            k2 = rhs(y + 0.5 * dt * k1, cfg)
            k3 = rhs(y + 0.5 * dt * k2, cfg)
            k4 = rhs(y + dt * k3, cfg)
            y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if step % stride == 0 or step == n_steps:
                if not np.all(np.isfinite(y)):
                    raise NonFiniteError(
                        f"phase-{system.phase} state left double range at t={step * dt:.6g}"
                    )
                times.append(step * dt)
                states.append(y.copy())
    return np.array(times), np.array(states)


def integrate_to_times(
    system: OdeSystem,
    init: np.ndarray,
    cfg: ValidatedConfig,
    times,
    dt: float = DEFAULT_DT,
) -> np.ndarray:
    """RK4 states at the exact, strictly increasing ``times`` (from t=0).

    Each segment between requested times is covered by uniform substeps no
    longer than ``dt``, so the endpoints are hit exactly and the global
    error stays O(dt^4).  Used to line the integrator up with a simulation's
    record grid, whose points need not be multiples of any fixed step.
    """
    times = np.asarray(times, dtype=float)
    if times.size and (times[0] < 0 or np.any(np.diff(times) <= 0)):
        raise ValueError("times must be strictly increasing and nonnegative")
    y = np.asarray(init, dtype=float).copy()
    if y.shape != (system.state_dim,):
        raise ValueError(f"init must have shape ({system.state_dim},), got {y.shape}")

    rhs = system.rhs
    out = np.empty((times.size, system.state_dim))
    t_now = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i, t_next in enumerate(times):
            span = t_next - t_now
            if span > 0:
                n_sub = max(1, int(np.ceil(span / dt - 1e-12)))
                h = span / n_sub
                for _ in range(n_sub):
                    k1 = rhs(y, cfg)
                    k2 = rhs(y + 0.5 * h * k1, cfg)
                    k3 = rhs(y + 0.5 * h * k2, cfg)
                    k4 = rhs(y + h * k3, cfg)
                    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t_now = t_next
            if not np.all(np.isfinite(y)):
                raise NonFiniteError(
                    f"phase-{system.phase} state left double range at t={t_next:.6g}"
                )
            out[i] = y
    return out


def eg1_from_phase1(states: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    """Task-1 error along a phase-1 trajectory."""
    t1_1 = cfg.r * cfg.sigma_b1**2
    q1, r1_1 = states[..., 0], states[..., 1]
    return 0.5 * cfg.sigma1_sq * (t1_1 - 2.0 * r1_1 + q1)


def eg1_from_phase2(states: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    """Task-1 error along a phase-2 trajectory."""
    t1_1 = cfg.r * cfg.sigma_b1**2
    r1_1, q1 = states[..., 5], states[..., 6]
    return 0.5 * cfg.sigma1_sq * (t1_1 - 2.0 * r1_1 + q1)


def eg2_from_phase2(states: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    """Task-2 error along a phase-2 trajectory."""
    t2_2 = cfg.r * cfg.sigma_b2**2
    q2, r2_2 = states[..., 0], states[..., 1]
    return 0.5 * cfg.sigma2_sq * (t2_2 - 2.0 * r2_2 + q2)
