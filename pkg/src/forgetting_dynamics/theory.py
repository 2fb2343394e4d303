"""Closed-form learning dynamics for the two-task linear student.

Both training phases reduce, in the large-n limit, to linear ODEs for the
masked overlaps of :mod:`.state`, and those ODEs solve in closed form.
Writing ``a = gamma = eta * r * sigma^2`` for the active task, every overlap
is a combination of the three decay modes

    exp(-a t),    exp(-2 a t),    exp(-a (2 - a) t),

so the error curves are sums of exponentials and everything here is a few
lines of arithmetic.

Phase 1 (training on task 1 from the random student init):

    R1^1(t) = r sb1^2 (1 - e^{-a1 t})
    Q1(t)   = r (sj^2 + sb1^2) e^{-a1 (2 - a1) t} - 2 r sb1^2 e^{-a1 t} + r sb1^2
    eg1(t)  = (s1^2 / 2) r (sb1^2 + sj^2) e^{-a1 (2 - a1) t}

Phase 2 (training on task 2, student assumed converged on task 1, time
restarted at zero) involves the common-block overlaps as well; its task-1
error takes the form

    eg1(t) = (s1^2 / 2) [C1 + (C1 - C2) e^{-2 a2 t}
                         + C2 e^{-a2 (2 - a2) t} - 2 C1 e^{-a2 t}]

with

    C1 = (2r - 1)(sb1^2 + sb2^2 - 2 q sb1 sb2)
    C2 = ((2r - 1) / r)(r sb2^2 + (2r - 1) sb1^2 + (1 - r) sj^2
                        - 2 (2r - 1) q sb1 sb2).

The t -> infinity limit of that curve, (s1^2 / 2) C1, is the residual
forgetting: it vanishes when the tasks share no input components (r = 1/2)
or when the teachers coincide (q = 1 with equal scales).  Whether the curve
overshoots that limit before settling is decided by the sign of the
slowest-decaying coefficient, which depends only on ``gamma2`` (and on
``C2 - 2 C1`` at the degenerate point ``gamma2 = 1``).

All functions accept scalar or ndarray ``t`` and require a validated config.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .config import STABILITY_LIMIT, ValidatedConfig
from .errors import DivergentError
from .state import OrderParamState

# Tolerance for deciding gamma2 == 1 in the overshoot case split.
GAMMA_EQUALITY_TOL = 1e-12


@dataclass(frozen=True)
class OvershootConstants:
    """Coefficients of the phase-2 task-1 error curve."""

    c1: float
    c2: float


class OvershootVariant(enum.Enum):
    MAY_NOT_OCCUR = "may_not_occur"
    DOES_NOT_OCCUR = "does_not_occur"
    OCCURS = "occurs"
    DIVERGES = "diverges"


@dataclass(frozen=True)
class OvershootClass:
    """Overshoot verdict together with the quantities that decide it."""

    variant: OvershootVariant
    gamma: float
    c1: float
    c2: float


def phase1_order_params(cfg: ValidatedConfig, t):
    """Overlaps (R1^1, Q1) while training task 1, from the random init."""
    a = cfg.gamma1
    r, sb1_sq, sj_sq = cfg.r, cfg.sigma_b1**2, cfg.sigma_j**2
    decay = np.exp(-a * np.asarray(t, dtype=float))
    slow = np.exp(-a * (2.0 - a) * np.asarray(t, dtype=float))
    r1_1 = r * sb1_sq * (1.0 - decay)
    q1 = r * (sj_sq + sb1_sq) * slow - 2.0 * r * sb1_sq * decay + r * sb1_sq
    return r1_1, q1


def eg1_phase1(cfg: ValidatedConfig, t):
    """Task-1 generalization error while training task 1."""
    a = cfg.gamma1
    amp = 0.5 * cfg.sigma1_sq * cfg.r * (cfg.sigma_b1**2 + cfg.sigma_j**2)
    return amp * np.exp(-a * (2.0 - a) * np.asarray(t, dtype=float))


def overshoot_constants(cfg: ValidatedConfig) -> OvershootConstants:
    """C1 and C2 of the phase-2 task-1 error curve."""
    r, q = cfg.r, cfg.q
    sb1, sb2, sj = cfg.sigma_b1, cfg.sigma_b2, cfg.sigma_j
    common = 2.0 * r - 1.0
    c1 = common * (sb1**2 + sb2**2 - 2.0 * q * sb1 * sb2)
    c2 = (common / r) * (
        r * sb2**2 + common * sb1**2 + (1.0 - r) * sj**2 - 2.0 * common * q * sb1 * sb2
    )
    return OvershootConstants(c1=c1, c2=c2)


def phase2_order_params(cfg: ValidatedConfig, t) -> OrderParamState:
    """All overlaps while training task 2, time measured from the switch.

    Assumes the student finished phase 1 exactly on task 1's support.  The
    side overlaps R2^1 and R1^2 decompose into a common-block part plus a
    single-task-block part; the latter follows the uniform elementwise
    teacher correlation used by the simulator's pair construction, so these
    two components are construction-dependent while everything else is not.
    """
    t = np.asarray(t, dtype=float)
    a = cfg.gamma2
    r, q = cfg.r, cfg.q
    sb1, sb2, sj = cfg.sigma_b1, cfg.sigma_b2, cfg.sigma_j
    common = 2.0 * r - 1.0
    cross = q * sb1 * sb2

    decay = np.exp(-a * t)
    decay2 = np.exp(-2.0 * a * t)
    slow = np.exp(-a * (2.0 - a) * t)

    c = overshoot_constants(cfg)

    t1_1 = r * sb1**2
    t2_2 = r * sb2**2
    t12_1 = common * sb1**2
    t12_2 = common * sb2**2
    q_prime = common * cross

    r2_2 = t2_2 + (common * cross - t2_2) * decay
    q2 = (
        (t2_2 + common * sb1**2 + (1.0 - r) * sj**2 - 2.0 * common * cross) * slow
        + 2.0 * (common * cross - t2_2) * decay
        + t2_2
    )
    r12_1 = q_prime + common * (sb1**2 - cross) * decay
    r12_2 = common * (sb2**2 + (cross - sb2**2) * decay)
    q12 = (
        2.0 * common * (cross - sb2**2) * decay
        + c.c2 * slow
        + (c.c1 - c.c2) * decay2
        + common * sb2**2
    )
    r1_1 = common * (sb1**2 - cross) * decay + t1_1 - common * (sb1**2 - cross)
    q1 = q12 + (1.0 - r) * sb1**2

    # Single-task blocks: the task-1-only block keeps the planted teacher
    # copy, the task-2-only block relaxes from the (vanishing) random-init
    # overlap toward the elementwise teacher correlation of that block.
    side = (1.0 - r) * cross
    r1_2 = r12_2 + side
    r2_1 = r12_1 + side * (1.0 - decay)

    return OrderParamState(
        q1=q1, q2=q2, q12=q12,
        r1_1=r1_1, r2_1=r2_1, r1_2=r1_2, r2_2=r2_2,
        r12_1=r12_1, r12_2=r12_2,
        t1_1=t1_1, t2_2=t2_2, t12_1=t12_1, t12_2=t12_2,
        q_prime=q_prime,
    )


def eg2_phase2(cfg: ValidatedConfig, t):
    """Task-2 generalization error while training task 2."""
    a = cfg.gamma2
    r, q = cfg.r, cfg.q
    sb1, sb2, sj = cfg.sigma_b1, cfg.sigma_b2, cfg.sigma_j
    common = 2.0 * r - 1.0
    amp = 0.5 * cfg.sigma2_sq * (
        r * sb2**2 + (1.0 - r) * sj**2 + common * sb1**2 - 2.0 * common * q * sb1 * sb2
    )
    return amp * np.exp(-a * (2.0 - a) * np.asarray(t, dtype=float))


def eg1_phase2(cfg: ValidatedConfig, t):
    """Task-1 generalization error while training task 2 (the forgetting curve)."""
    a = cfg.gamma2
    t = np.asarray(t, dtype=float)
    c = overshoot_constants(cfg)
    return 0.5 * cfg.sigma1_sq * (
        c.c1
        + (c.c1 - c.c2) * np.exp(-2.0 * a * t)
        + c.c2 * np.exp(-a * (2.0 - a) * t)
        - 2.0 * c.c1 * np.exp(-a * t)
    )


def eg1_phase2_excess(cfg: ValidatedConfig, t):
    """Forgetting curve minus its own limit, evaluated without cancellation.

    Algebraically ``eg1_phase2(cfg, t) - forgetting_value(cfg)``, but keeps
    only the decaying terms so excesses far below rounding size of the limit
    (the near-critical regime ``gamma2 -> 1+``) still carry their sign.
    """
    a = cfg.gamma2
    t = np.asarray(t, dtype=float)
    c = overshoot_constants(cfg)
    return 0.5 * cfg.sigma1_sq * (
        (c.c1 - c.c2) * np.exp(-2.0 * a * t)
        + c.c2 * np.exp(-a * (2.0 - a) * t)
        - 2.0 * c.c1 * np.exp(-a * t)
    )


def eg1_phase2_derivative(cfg: ValidatedConfig, t):
    """Time derivative of the forgetting curve."""
    a = cfg.gamma2
    t = np.asarray(t, dtype=float)
    c = overshoot_constants(cfg)
    return 0.5 * cfg.sigma1_sq * a * (
        -2.0 * (c.c1 - c.c2) * np.exp(-2.0 * a * t)
        - (2.0 - a) * c.c2 * np.exp(-a * (2.0 - a) * t)
        + 2.0 * c.c1 * np.exp(-a * t)
    )


def forgetting_value(cfg: ValidatedConfig) -> float:
    """Limit of the forgetting curve: (sigma1^2 / 2)(2r-1)(sb1^2 + sb2^2 - 2 q sb1 sb2).

    Raises
    ------
    DivergentError
        ``gamma2 >= 2``; the curve has no finite limit there.
    """
    if cfg.gamma2 >= STABILITY_LIMIT:
        raise DivergentError(
            f"gamma2 = {cfg.gamma2:.6g} >= {STABILITY_LIMIT}: no finite forgetting value"
        )
    return 0.5 * cfg.sigma1_sq * overshoot_constants(cfg).c1


def classify_overshoot(cfg: ValidatedConfig) -> OvershootClass:
    """Case split on ``gamma2`` deciding whether the forgetting curve overshoots.

    The curve approaches its limit along its slowest decay mode.  For
    ``gamma2 < 1`` the slowest coefficient is ``-2 C1 <= 0`` (approach from
    below, though a second extremum can still produce an overshoot); for
    ``1 < gamma2 < 2`` it is ``C2 >= 0`` (approach from above).  At
    ``gamma2 = 1`` the two modes merge and the sign of ``C2 - 2 C1``
    decides.  At ``gamma2 >= 2`` training diverges.
    """
    c = overshoot_constants(cfg)
    gamma = cfg.gamma2
    if gamma >= STABILITY_LIMIT:
        variant = OvershootVariant.DIVERGES
    elif abs(gamma - 1.0) <= GAMMA_EQUALITY_TOL:
        if c.c2 - 2.0 * c.c1 > 0:
            variant = OvershootVariant.OCCURS
        else:
            variant = OvershootVariant.DOES_NOT_OCCUR
    elif gamma > 1.0:
        variant = OvershootVariant.OCCURS
    else:
        variant = OvershootVariant.MAY_NOT_OCCUR
    return OvershootClass(variant=variant, gamma=gamma, c1=c.c1, c2=c.c2)
