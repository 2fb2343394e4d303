"""Finite-size online SGD on the two-task teacher-student problem.

The student is a linear unit ``s = j' x`` trained by plain SGD on one
freshly drawn input per step (each input is used once and discarded).
Task ``v`` draws inputs that are i.i.d. Gaussian on its support block and
exactly zero elsewhere: task 1 fills components ``[0, rn)``, task 2 fills
``[n - rn, n)``, and the two blocks overlap on ``(2r - 1) n`` components.

Randomness is fully pinned down so that trajectories are reproducible
across platforms and library versions: the bit generator is Philox
(counter-based, keyed through ``numpy.random.SeedSequence(seed)``) and
Gaussian deviates use the inverse-CDF transform on a centered 52-bit
uniform grid,

    z = ndtri((2 k + 1) * 2**-53),   k ~ uniform over [0, 2**52),

which is exactly antisymmetric and never hits the endpoints.  Replicates of
an experiment change only the config seed.

Teacher pairs with a prescribed cosine ``q`` are built by uniform
elementwise mixing, ``b2 = q (sb2/sb1) b1 + sqrt(1-q^2) xi``, which makes
every block's overlap concentrate on its share of ``q sb1 sb2``; the
optional exact-similarity mode additionally rotates and rescales the pair
block by block so the block norms and overlaps hit their targets to
rounding error rather than O(1/sqrt(n)).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import sqrt

import numpy as np
from scipy.special import ndtri

from .config import ValidatedConfig
from .errors import NonFiniteError
from .state import OrderParamState, TrajectoryRecord, WeightTriple, steps_to_time

# Steps of Gaussian inputs drawn per batch in the training loop.
_CHUNK = 1024

TRAJECTORY_COLUMNS = (
    "phase", "step", "t", "eg1", "eg2",
    "Q1", "Q2", "Q12", "R1_1", "R2_1", "R1_2", "R2_2", "R12_1", "R12_2",
    "q_prime", "seed",
)


def make_rng(seed: int) -> np.random.Generator:
    """The package-wide deterministic generator (Philox, counter-based)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def gaussian(rng: np.random.Generator, size, scale: float = 1.0) -> np.ndarray:
    """Gaussian draws via inverse CDF on a centered 52-bit uniform grid."""
    k = rng.integers(0, 1 << 52, size=size, dtype=np.int64)
    u = (2 * k + 1) * 2.0**-53
    return ndtri(u) * scale


def support_slice(task: int, cfg: ValidatedConfig) -> slice:
    """Index block where task ``task`` inputs are nonzero."""
    if task == 1:
        return slice(0, cfg.rn)
    if task == 2:
        return slice(cfg.n - cfg.rn, cfg.n)
    raise ValueError(f"task must be 1 or 2, got {task}")


def common_slice(cfg: ValidatedConfig) -> slice:
    """Index block shared by both task supports (may be empty)."""
    return slice(cfg.n - cfg.rn, cfg.rn)


def _task_sigma(task: int, cfg: ValidatedConfig) -> float:
    return sqrt(cfg.sigma1_sq if task == 1 else cfg.sigma2_sq)


def sample_input(task: int, cfg: ValidatedConfig, rng: np.random.Generator) -> np.ndarray:
    """One input vector for ``task``: Gaussian on its support, zero elsewhere."""
    x = np.zeros(cfg.n)
    sup = support_slice(task, cfg)
    x[sup] = gaussian(rng, sup.stop - sup.start, _task_sigma(task, cfg))
    return x


def gen_teachers(cfg: ValidatedConfig, rng: np.random.Generator, *, exact_similarity: bool = False):
    """Draw the teacher pair (b1, b2) with target cosine ``cfg.q``.

    Components are i.i.d. with variance ``sigma_b^2 / n``, so norms and the
    cosine land within O(1/sqrt(n)) of their targets; ``exact_similarity``
    enforces them exactly, block by block.
    """
    n = cfg.n
    b1 = gaussian(rng, n, cfg.sigma_b1 / sqrt(n))
    xi = gaussian(rng, n, cfg.sigma_b2 / sqrt(n))
    if cfg.sigma_b1 == 0.0:
        b2 = xi
    else:
        b2 = cfg.q * (cfg.sigma_b2 / cfg.sigma_b1) * b1 + sqrt(1.0 - cfg.q**2) * xi
    if exact_similarity:
        _enforce_exact_similarity(b1, b2, cfg)
    return b1, b2


def _blocks(cfg: ValidatedConfig):
    """Task-1-only, common, and task-2-only index blocks."""
    lo, hi = cfg.n - cfg.rn, cfg.rn
    return slice(0, lo), slice(lo, hi), slice(hi, cfg.n)


def _enforce_exact_similarity(b1: np.ndarray, b2: np.ndarray, cfg: ValidatedConfig) -> None:
    """Rescale/rotate the pair in place so each block hits its targets exactly.

    Every nonempty block ends with ``|b_v|^2`` equal to its share of
    ``sigma_bv^2`` and with overlap ``q sb1 sb2`` times that share, which
    makes the measured global cosine exactly ``q`` and pins the overlap
    constants the task-2 dynamics start from.
    """
    q, sb1, sb2 = cfg.q, cfg.sigma_b1, cfg.sigma_b2
    ortho = sqrt(max(0.0, 1.0 - q * q))
    for block in _blocks(cfg):
        size = block.stop - block.start
        if size == 0:
            continue
        # Target norm of each block is sqrt(size/n) times the global scale.
        share = sqrt(size / cfg.n)
        v1, v2 = b1[block], b2[block]
        if sb1 == 0.0 or sb2 == 0.0:
            for v, scale in ((v1, sb1), (v2, sb2)):
                norm = np.linalg.norm(v)
                v[:] = 0.0 if norm == 0.0 else v * (share * scale / norm)
            continue
        norm1 = np.linalg.norm(v1)
        if norm1 == 0.0:
            raise ValueError("degenerate zero-norm teacher block")
        v1 *= share * sb1 / norm1
        unit = v1 / (share * sb1)
        if ortho == 0.0:
            v2[:] = share * sb2 * q * unit
            continue
        if size < 2:
            raise ValueError("exact similarity with |q| < 1 needs every nonempty block to have >= 2 components")
        resid = v2 - np.dot(v2, unit) * unit
        norm_resid = np.linalg.norm(resid)
        if norm_resid == 0.0:
            raise ValueError("degenerate teacher draw: b2 block parallel to b1 block")
        v2[:] = share * sb2 * (q * unit + ortho * resid / norm_resid)


def init_student(cfg: ValidatedConfig, rng: np.random.Generator) -> np.ndarray:
    """Random student init with components of variance ``sigma_j^2 / n``."""
    return gaussian(rng, cfg.n, cfg.sigma_j / sqrt(cfg.n))


def apply_sgd_update(j: np.ndarray, x: np.ndarray, b: np.ndarray, cfg: ValidatedConfig) -> np.ndarray:
    """One SGD update with a given input: j + (eta/n) x (b'x - j'x)."""
    return j + (cfg.eta / cfg.n) * (np.dot(b, x) - np.dot(j, x)) * x


def sgd_step(
    j: np.ndarray,
    b: np.ndarray,
    task: int,
    cfg: ValidatedConfig,
    rng: np.random.Generator,
) -> np.ndarray:
    """One online step toward teacher ``b`` with a fresh task input (in place).

    Components outside the task's support never change because the input is
    exactly zero there.
    """
    sup = support_slice(task, cfg)
    x = gaussian(rng, sup.stop - sup.start, _task_sigma(task, cfg))
    jv, bv = j[sup], b[sup]
    jv += (cfg.eta / cfg.n) * np.dot(bv - jv, x) * x
    if not np.all(np.isfinite(jv)):
        raise NonFiniteError("student weights left double range")
    return j


def measure_order_params(triple: WeightTriple, cfg: ValidatedConfig) -> OrderParamState:
    """All masked overlaps, computed exactly from the weights."""
    m1 = support_slice(1, cfg)
    m2 = support_slice(2, cfg)
    cm = common_slice(cfg)
    b1, b2, j = triple.b1, triple.b2, triple.j
    return OrderParamState(
        q1=float(np.dot(j[m1], j[m1])),
        q2=float(np.dot(j[m2], j[m2])),
        q12=float(np.dot(j[cm], j[cm])),
        r1_1=float(np.dot(b1[m1], j[m1])),
        r2_1=float(np.dot(b1[m2], j[m2])),
        r1_2=float(np.dot(b2[m1], j[m1])),
        r2_2=float(np.dot(b2[m2], j[m2])),
        r12_1=float(np.dot(b1[cm], j[cm])),
        r12_2=float(np.dot(b2[cm], j[cm])),
        t1_1=float(np.dot(b1[m1], b1[m1])),
        t2_2=float(np.dot(b2[m2], b2[m2])),
        t12_1=float(np.dot(b1[cm], b1[cm])),
        t12_2=float(np.dot(b2[cm], b2[cm])),
        q_prime=float(np.dot(b1[cm], b2[cm])),
    )


@dataclass(frozen=True)
class Schedule:
    """Step counts of the two phases and the recording cadence."""

    steps_task1: int
    steps_task2: int
    record_every: int

    def __post_init__(self):
        if self.steps_task1 < 0 or self.steps_task2 < 0:
            raise ValueError("step counts must be >= 0")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")

    @classmethod
    def from_time(cls, cfg: ValidatedConfig, t1: float, t2: float, record_dt: float = 0.1) -> "Schedule":
        """Schedule from time horizons; cadence defaults to 0.1 time units."""
        return cls(
            steps_task1=round(t1 * cfg.rn),
            steps_task2=round(t2 * cfg.rn),
            record_every=max(1, round(record_dt * cfg.rn)),
        )


def _record(records, phase, step, triple, cfg):
    order = measure_order_params(triple, cfg)
    if not order.all_finite():
        raise NonFiniteError(
            f"phase-{phase} weights left double range by step {step}"
        )
    records.append(TrajectoryRecord(
        phase=phase,
        step=step,
        t=steps_to_time(step, cfg),
        eg1=float(order.eg1(cfg)),
        eg2=float(order.eg2(cfg)),
        order=order,
    ))


def _train_phase(records, triple, task, steps, record_every, cfg, rng):
    if steps == 0:
        return
    b = triple.b1 if task == 1 else triple.b2
    sup = support_slice(task, cfg)
    jv, bv = triple.j[sup], b[sup]
    width = sup.stop - sup.start
    sigma = _task_sigma(task, cfg)
    coef = cfg.eta / cfg.n

    _record(records, task, 0, triple, cfg)
    step = 0
    # Overflow is the expected failure mode beyond the stability limit; the
    # record hook reports it as NonFiniteError.
    with np.errstate(over="ignore", invalid="ignore"):
        while step < steps:
            block = min(_CHUNK, steps - step)
            z = gaussian(rng, (block, width), sigma)
            for i in range(block):
                x = z[i]
                jv += coef * np.dot(bv - jv, x) * x
                step += 1
                if step % record_every == 0 or step == steps:
                    _record(records, task, step, triple, cfg)


def run_continual(
    cfg: ValidatedConfig,
    schedule: Schedule,
    *,
    exact_similarity: bool = False,
) -> list[TrajectoryRecord]:
    """Train task 1 then task 2, recording the macroscopic state as it goes.

    Phase 1 either runs ``schedule.steps_task1`` SGD steps or, in
    ``exact_copy`` mode, plants the task-1 teacher on task 1's support and
    records that single endpoint.  Phase 2 always trains and restarts the
    time axis at zero.  The same seed yields a bit-identical record list.

    Raises
    ------
    NonFiniteError
        Weights overflowed (divergent effective learning rate).
    """
    rng = make_rng(cfg.seed)
    b1, b2 = gen_teachers(cfg, rng, exact_similarity=exact_similarity)
    j = init_student(cfg, rng)
    triple = WeightTriple(b1=b1, b2=b2, j=j)

    records: list[TrajectoryRecord] = []
    if cfg.t1_mode.kind == "exact_copy":
        j[: cfg.rn] = b1[: cfg.rn]
        _record(records, 1, 0, triple, cfg)
    else:
        _train_phase(records, triple, 1, schedule.steps_task1, schedule.record_every, cfg, rng)
    _train_phase(records, triple, 2, schedule.steps_task2, schedule.record_every, cfg, rng)
    return records


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_trajectory_csv(path, runs) -> None:
    """Write records to CSV, one row per sample.

    ``runs`` is an iterable of ``(seed, records)`` pairs; floats carry 17
    significant digits so rows are bit-faithful.
    """
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRAJECTORY_COLUMNS)
        for seed, records in runs:
            for rec in records:
                o = rec.order
                writer.writerow([
                    rec.phase, rec.step, _fmt(rec.t), _fmt(rec.eg1), _fmt(rec.eg2),
                    _fmt(o.q1), _fmt(o.q2), _fmt(o.q12),
                    _fmt(o.r1_1), _fmt(o.r2_1), _fmt(o.r1_2), _fmt(o.r2_2),
                    _fmt(o.r12_1), _fmt(o.r12_2), _fmt(o.q_prime),
                    seed,
                ])
