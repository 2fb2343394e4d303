"""Macroscopic state containers and the step/time convention.

The macroscopic state of the system is the set of masked overlaps between
the student weight ``j`` and the teacher weights ``b1``/``b2``.  With
``I1`` the task-1 support projector, ``I2`` the task-2 projector and
``I1 I2`` their common block,

    Q1  = j' I1 j        Q2  = j' I2 j        Q12  = j' I1 I2 j
    R1^1 = b1' I1 j      R2^1 = b1' I2 j      R12^1 = b1' I1 I2 j
    R1^2 = b2' I1 j      R2^2 = b2' I2 j      R12^2 = b2' I1 I2 j
    T1^1 = b1' I1 b1     T2^2 = b2' I2 b2
    T12^1 = b1' I1 I2 b1 T12^2 = b2' I1 I2 b2
    q' = b1' I1 I2 b2

The T overlaps and q' involve only teacher weights, so they stay constant
while the student trains.  The generalization errors are exact functions of
this state for Gaussian masked inputs:

    eg1 = (sigma1^2 / 2) (T1^1 - 2 R1^1 + Q1)
    eg2 = (sigma2^2 / 2) (T2^2 - 2 R2^2 + Q2)

Normalized time is ``t = m / (r n)`` for SGD step count ``m``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import ValidatedConfig


@dataclass(frozen=True)
class OrderParamState:
    """The thirteen masked overlaps plus the common-block teacher overlap.

    Fields may hold scalars or equally-shaped arrays (a state sampled on a
    time grid).
    """

    q1: float
    q2: float
    q12: float
    r1_1: float
    r2_1: float
    r1_2: float
    r2_2: float
    r12_1: float
    r12_2: float
    t1_1: float
    t2_2: float
    t12_1: float
    t12_2: float
    q_prime: float

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def all_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.as_dict().values())

    def eg1(self, cfg: ValidatedConfig):
        """Task-1 generalization error implied by this state."""
        return 0.5 * cfg.sigma1_sq * (self.t1_1 - 2.0 * self.r1_1 + self.q1)

    def eg2(self, cfg: ValidatedConfig):
        """Task-2 generalization error implied by this state."""
        return 0.5 * cfg.sigma2_sq * (self.t2_2 - 2.0 * self.r2_2 + self.q2)


@dataclass(frozen=True)
class WeightTriple:
    """Finite-size teacher weights and the student weight, all length n."""

    b1: np.ndarray
    b2: np.ndarray
    j: np.ndarray

    def __post_init__(self):
        if not (self.b1.shape == self.b2.shape == self.j.shape):
            raise ValueError("b1, b2 and j must share one shape")


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sampled point of a finite-size training run.

    ``eg1``/``eg2`` are computed from ``order`` through the exact identities
    above, never from held-out data.  ``t`` restarts at zero when the trained
    task switches.
    """

    phase: int
    step: int
    t: float
    eg1: float
    eg2: float
    order: OrderParamState


def steps_to_time(steps: int, cfg: ValidatedConfig) -> float:
    """Normalized time after ``steps`` SGD updates, t = m / (r n)."""
    return steps / cfg.rn


def time_to_steps(t: float, cfg: ValidatedConfig) -> int:
    """Nearest SGD step count for normalized time ``t``."""
    return round(t * cfg.rn)
