"""Learning curves three ways: closed form, RK4 integration, finite-n SGD.

Runs the reference setting at a desk-friendly size (n=600, a few seeds),
prints both phases side by side, and reports the cross-checks: the
integrator should agree with the closed forms to rounding noise, and the
simulation should track both at O(1/sqrt(n)).
"""

import dataclasses

import numpy as np

import forgetting_dynamics as fd
from forgetting_dynamics import ode, theory
from forgetting_dynamics.experiments import learning_curve_experiment, preset

cfg_raw = dataclasses.replace(preset("fig3a"), n=600, t1_mode=fd.T1Mode("trained", 6.0))
cfg = fd.validate(cfg_raw)

print(f"n={cfg.n}, r={cfg.r}, q={cfg.q}, gamma1={cfg.gamma1:.3f}, gamma2={cfg.gamma2:.3f}")
print(f"forgetting value (t->inf): {fd.forgetting_value(cfg):.4f}")
print(f"overshoot classification: {fd.classify_overshoot(cfg).variant.value}\n")

report = learning_curve_experiment(cfg_raw, seeds=5, t2=6.0, n_jobs=2)

print("phase  t      eg1_sim  eg1_theory   eg2_sim  eg2_theory")
for row in report.rows:
    if round(row["t"] * 10) % 10:  # one line per time unit is plenty here
        continue
    eg1_th = "" if np.isnan(row["eg1_theory"]) else f"{row['eg1_theory']:.4f}"
    eg2_th = "" if np.isnan(row["eg2_theory"]) else f"{row['eg2_theory']:.4f}"
    print(f"{row['phase']:>5}  {row['t']:<5.1f}  {row['eg1_sim']:.4f}   {eg1_th:<9}"
          f"   {row['eg2_sim']:.4f}   {eg2_th}")

print("\nsup-norm gaps:")
for row in report.summary_rows:
    if np.isnan(row["sup_gap_theory_ode"]):
        continue
    print(f"  phase {row['phase']} {row['metric']}: theory vs integrator "
          f"{row['sup_gap_theory_ode']:.2e}, theory vs simulation "
          f"{row['sup_gap_theory_sim']:.3f}")

# The task-1 error while task 2 trains climbs from zero to the forgetting
# value; at n=600 the simulated endpoint sits within a few percent of it.
end = report.meta["summary"]["eg1_sim_end"]
print(f"\nsimulated end-of-run task-1 error: {end:.4f} "
      f"(limit {report.meta['summary']['forgetting_value']:.4f})")
