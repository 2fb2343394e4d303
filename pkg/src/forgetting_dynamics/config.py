"""Problem configuration and validation.

A two-task continual-learning problem is described by the input dimension
``n``, the input-space similarity ``r`` (fraction of active input components
per task, with a ``(2r - 1) n``-dimensional common block), the weight-space
similarity ``q`` (cosine between the two teacher vectors), the SGD learning
rate ``eta``, the per-task input variances, and the scales of the teacher and
student weight vectors.

Support masks need integer block sizes, so ``r`` is quantized to the nearest
value with ``r * n`` integer before anything else happens; theory, integrator
and simulator all consume the quantized value.  The effective per-task
learning rates ``gamma_v = eta * r * sigma_v^2`` control stability: training
converges for ``gamma < 2`` and diverges beyond, so validation rejects
``gamma >= 2`` unless a divergence study is requested explicitly.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from .errors import DivergentError, OutOfRangeError, UnknownKeyError, UnquantizableError

STABILITY_LIMIT = 2.0
# |2 - gamma| below this flags ill-conditioned closed forms (rate 2 - gamma ~ 0).
NEAR_CRITICAL_TOL = 1e-6


@dataclass(frozen=True)
class T1Mode:
    """Convention for the state of the student when task 2 starts.

    ``exact_copy`` plants the task-1 teacher weights on task 1's support,
    which is the assumption behind the task-2 closed forms.  ``trained``
    actually runs task-1 SGD; ``t_end`` is the default training horizon in
    normalized time units when a run does not specify its own schedule.
    """

    kind: str = "exact_copy"  # "exact_copy" | "trained"
    t_end: float = 8.0

    def __post_init__(self):
        if self.kind not in ("exact_copy", "trained"):
            raise OutOfRangeError(f"t1_mode kind must be 'exact_copy' or 'trained', got {self.kind!r}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise OutOfRangeError(f"t1_mode t_end must be positive and finite, got {self.t_end}")

    @classmethod
    def parse(cls, text: str) -> "T1Mode":
        """Parse ``"exact_copy"``, ``"trained"`` or ``"trained:<t_end>"``."""
        if text == "exact_copy":
            return cls("exact_copy")
        if text == "trained":
            return cls("trained")
        if text.startswith("trained:"):
            return cls("trained", float(text.split(":", 1)[1]))
        raise OutOfRangeError(f"unrecognized t1_mode: {text!r}")

    def __str__(self):
        if self.kind == "exact_copy":
            return "exact_copy"
        return f"trained:{self.t_end:g}"


EXACT_COPY = T1Mode("exact_copy")


@dataclass(frozen=True)
class ContinualConfig:
    """Raw hyperparameters of the two-task problem.

    Defaults reproduce the well-behaved reference setting (no overshoot):
    n=3000, r=0.8, q=0.3, unit weight scales, input variance 0.8.
    """

    n: int = 3000
    r: float = 0.8
    q: float = 0.3
    eta: float = 1.0
    sigma1_sq: float = 0.8
    sigma2_sq: float = 0.8
    sigma_b1: float = 1.0
    sigma_b2: float = 1.0
    sigma_j: float = 1.0
    seed: int = 0
    t1_mode: T1Mode = EXACT_COPY

    FIELD_NAMES = (
        "n", "r", "q", "eta", "sigma1_sq", "sigma2_sq",
        "sigma_b1", "sigma_b2", "sigma_j", "seed", "t1_mode",
    )

    @classmethod
    def from_dict(cls, data: dict) -> "ContinualConfig":
        """Build from a flat key-value mapping, rejecting unknown keys."""
        unknown = sorted(set(data) - set(cls.FIELD_NAMES))
        if unknown:
            raise UnknownKeyError(f"unknown config keys: {', '.join(unknown)}")
        fields = dict(data)
        if isinstance(fields.get("t1_mode"), str):
            fields["t1_mode"] = T1Mode.parse(fields["t1_mode"])
        return cls(**fields)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["t1_mode"] = str(self.t1_mode)
        return d


@dataclass(frozen=True)
class ValidatedConfig:
    """A config whose ``r`` is quantized and whose domains have been checked.

    ``rn`` is the integer task support size; ``r == rn / n`` exactly.
    ``gamma1``/``gamma2`` are the effective learning rates of the two tasks,
    with ``gammaX_stable`` false at or beyond the divergence threshold and
    ``gammaX_near_critical`` true when the decay rate ``gamma (2 - gamma)``
    is too close to zero for well-conditioned closed forms.
    """

    n: int
    r: float
    q: float
    eta: float
    sigma1_sq: float
    sigma2_sq: float
    sigma_b1: float
    sigma_b2: float
    sigma_j: float
    seed: int
    t1_mode: T1Mode
    rn: int
    gamma1: float
    gamma2: float
    allow_divergent: bool

    @property
    def common_dim(self) -> int:
        """Size of the input block shared by both tasks, (2r - 1) n."""
        return 2 * self.rn - self.n

    @property
    def gamma1_stable(self) -> bool:
        return self.gamma1 < STABILITY_LIMIT

    @property
    def gamma2_stable(self) -> bool:
        return self.gamma2 < STABILITY_LIMIT

    @property
    def gamma1_near_critical(self) -> bool:
        return abs(STABILITY_LIMIT - self.gamma1) < NEAR_CRITICAL_TOL

    @property
    def gamma2_near_critical(self) -> bool:
        return abs(STABILITY_LIMIT - self.gamma2) < NEAR_CRITICAL_TOL

    def as_config(self) -> ContinualConfig:
        return ContinualConfig(
            n=self.n, r=self.r, q=self.q, eta=self.eta,
            sigma1_sq=self.sigma1_sq, sigma2_sq=self.sigma2_sq,
            sigma_b1=self.sigma_b1, sigma_b2=self.sigma_b2, sigma_j=self.sigma_j,
            seed=self.seed, t1_mode=self.t1_mode,
        )

    def to_dict(self) -> dict:
        d = self.as_config().to_dict()
        d.update(
            rn=self.rn,
            gamma1=self.gamma1,
            gamma2=self.gamma2,
            gamma1_stable=self.gamma1_stable,
            gamma2_stable=self.gamma2_stable,
            allow_divergent=self.allow_divergent,
        )
        return d


def _quantize_r(r: float, n: int) -> int:
    """Integer support size nearest to ``r * n`` with ``rn / n`` in [0.5, 1].

    Plain rounding keeps ``|rn/n - r| <= 1/(2n)``; the in-range clamp can
    only tighten the choice at the r=0.5 boundary for odd ``n``.
    """
    rn = math.floor(r * n + 0.5)
    rn = min(max(rn, (n + 1) // 2), n)
    if abs(rn / n - r) > 0.5 / n + 1e-12:
        # Unreachable for in-range r with nearest rounding; kept as a guard
        # for callers that bypass the range checks.
        raise UnquantizableError(
            f"no integer support size within 1/(2n) of r={r} at n={n}"
        )
    return rn


def validate(config: ContinualConfig | ValidatedConfig, *, allow_divergent: bool = False) -> ValidatedConfig:
    """Check domains, quantize ``r``, and compute the stability flags.

    Validation is idempotent: a ``ValidatedConfig`` passes through with the
    same values (its ``r`` is already on the quantization grid).

    Raises
    ------
    OutOfRangeError
        Any field outside its domain.
    DivergentError
        ``gamma1 >= 2`` or ``gamma2 >= 2`` without ``allow_divergent``.
    UnquantizableError
        No admissible integer support size (unreachable for in-range r).
    """
    if isinstance(config, ValidatedConfig):
        allow_divergent = allow_divergent or config.allow_divergent
        config = config.as_config()

    if not (isinstance(config.n, int) and config.n >= 2):
        raise OutOfRangeError(f"n must be an integer >= 2, got {config.n!r}")
    if not (0.5 <= config.r <= 1.0):
        raise OutOfRangeError(f"r must lie in [0.5, 1], got {config.r}")
    if not (-1.0 <= config.q <= 1.0):
        raise OutOfRangeError(f"q must lie in [-1, 1], got {config.q}")
    if not (config.eta > 0 and math.isfinite(config.eta)):
        raise OutOfRangeError(f"eta must be positive and finite, got {config.eta}")
    for name in ("sigma1_sq", "sigma2_sq"):
        value = getattr(config, name)
        if not (value > 0 and math.isfinite(value)):
            raise OutOfRangeError(f"{name} must be positive and finite, got {value}")
    for name in ("sigma_b1", "sigma_b2", "sigma_j"):
        value = getattr(config, name)
        if not (value >= 0 and math.isfinite(value)):
            raise OutOfRangeError(f"{name} must be >= 0 and finite, got {value}")
    if not isinstance(config.seed, int):
        raise OutOfRangeError(f"seed must be an integer, got {config.seed!r}")
    if not isinstance(config.t1_mode, T1Mode):
        raise OutOfRangeError(f"t1_mode must be a T1Mode, got {config.t1_mode!r}")

    rn = _quantize_r(config.r, config.n)
    r = rn / config.n
    gamma1 = config.eta * r * config.sigma1_sq
    gamma2 = config.eta * r * config.sigma2_sq
    if not allow_divergent:
        for label, gamma in (("gamma1", gamma1), ("gamma2", gamma2)):
            if gamma >= STABILITY_LIMIT:
                raise DivergentError(
                    f"{label} = {gamma:.6g} >= {STABILITY_LIMIT}: training diverges "
                    "(pass allow_divergent=True for divergence studies)"
                )

    return ValidatedConfig(
        n=config.n, r=r, q=config.q, eta=config.eta,
        sigma1_sq=config.sigma1_sq, sigma2_sq=config.sigma2_sq,
        sigma_b1=config.sigma_b1, sigma_b2=config.sigma_b2, sigma_j=config.sigma_j,
        seed=config.seed, t1_mode=config.t1_mode,
        rn=rn, gamma1=gamma1, gamma2=gamma2, allow_divergent=allow_divergent,
    )


def with_seed(cfg: ValidatedConfig, seed: int) -> ValidatedConfig:
    """Same problem, different RNG seed."""
    return dataclasses.replace(cfg, seed=seed)


def load_config(path) -> ContinualConfig:
    """Read a flat JSON config file; unknown keys are rejected."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UnknownKeyError(f"config file must hold a JSON object, got {type(data).__name__}")
    return ContinualConfig.from_dict(data)


def save_config(config: ContinualConfig | ValidatedConfig, path) -> None:
    with open(path, "w") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
