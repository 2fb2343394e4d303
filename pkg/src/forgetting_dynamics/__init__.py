"""Catastrophic forgetting in two-task teacher-student learning, at desk scale.

Three mutually checking routes to the same curves:

- :mod:`.theory` -- closed-form overlap dynamics, generalization errors,
  the forgetting value and the overshoot classifier;
- :mod:`.ode` -- fixed-step RK4 integration of the underlying overlap ODEs,
  the independent oracle for the closed forms;
- :mod:`.simulator` -- finite-size online SGD with exact overlap
  measurement, reproducible bit-for-bit from a seed.

:mod:`.experiments` drives the three against each other and writes CSV/JSON
reports; :mod:`.cli` exposes them as `forgetting-dynamics` subcommands.
"""

from .config import (
    ContinualConfig,
    T1Mode,
    ValidatedConfig,
    load_config,
    save_config,
    validate,
    with_seed,
)
from .errors import (
    ConfigError,
    DivergentError,
    HardGateError,
    NonFiniteError,
    OutOfRangeError,
    UnknownKeyError,
    UnquantizableError,
)
from .state import OrderParamState, TrajectoryRecord, WeightTriple, steps_to_time, time_to_steps
from .theory import (
    OvershootClass,
    OvershootConstants,
    OvershootVariant,
    classify_overshoot,
    eg1_phase1,
    eg1_phase2,
    eg1_phase2_derivative,
    eg2_phase2,
    forgetting_value,
    overshoot_constants,
    phase1_order_params,
    phase2_order_params,
)
from .simulator import (
    Schedule,
    gen_teachers,
    measure_order_params,
    run_continual,
    sample_input,
    sgd_step,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "ContinualConfig", "T1Mode", "ValidatedConfig", "load_config", "save_config",
    "validate", "with_seed",
    "ConfigError", "DivergentError", "HardGateError", "NonFiniteError",
    "OutOfRangeError", "UnknownKeyError", "UnquantizableError",
    "OrderParamState", "TrajectoryRecord", "WeightTriple",
    "steps_to_time", "time_to_steps",
    "OvershootClass", "OvershootConstants", "OvershootVariant",
    "classify_overshoot", "eg1_phase1", "eg1_phase2", "eg1_phase2_derivative",
    "eg2_phase2", "forgetting_value", "overshoot_constants",
    "phase1_order_params", "phase2_order_params",
    "Schedule", "gen_teachers", "measure_order_params", "run_continual",
    "sample_input", "sgd_step", "write_trajectory_csv",
    "__version__",
]
