"""When does forgetting overshoot its own limit?

The task-1 error during task-2 training decays along three modes with
rates gamma, 2 gamma and gamma(2 - gamma), gamma = eta r sigma2^2.  Which
mode dies last decides the approach: from below for gamma < 1, from above
(overshoot) for 1 < gamma < 2.  This demo sweeps gamma through both
regimes at fixed similarities and shows the peak against the limit, plus a
small simulation of the flagship overshoot setting.
"""

import dataclasses

import numpy as np

import forgetting_dynamics as fd
from forgetting_dynamics import theory
from forgetting_dynamics.experiments import preset, run_seed_replicates
from forgetting_dynamics.simulator import Schedule

print("gamma2  class           limit   peak    peak/limit")
for sigma2_sq in (0.4, 0.8, 1.25, 1.7, 2.1, 2.6):
    cfg = fd.validate(
        fd.ContinualConfig(n=1000, r=0.8, q=0.3, sigma1_sq=0.8, sigma2_sq=sigma2_sq),
        allow_divergent=True,
    )
    klass = fd.classify_overshoot(cfg)
    if klass.variant is fd.OvershootVariant.DIVERGES:
        print(f"{cfg.gamma2:5.2f}   {klass.variant.value:<14}  training blows up past the threshold")
        continue
    t = np.linspace(0.0, 30.0 / cfg.gamma2, 3001)
    limit = fd.forgetting_value(cfg)
    peak = float(np.max(fd.eg1_phase2(cfg, t)))
    print(f"{cfg.gamma2:5.2f}   {klass.variant.value:<14}  {limit:.3f}   {peak:.3f}   {peak/limit:5.2f}")

print("\nflagship overshoot run (q=0.7, sigma_j=2, variance 1.7), n=800, 5 seeds:")
cfg = fd.validate(dataclasses.replace(preset("fig3b-text"), n=800,
                                      t1_mode=fd.T1Mode("exact_copy")))
runs = run_seed_replicates(cfg, Schedule.from_time(cfg, 0.0, 8.0),
                           [cfg.seed + i for i in range(5)], n_jobs=2)
curves = np.array([[r.eg1 for r in run if r.phase == 2] for run in runs])
t = np.array([r.t for r in runs[0] if r.phase == 2])
mean = curves.mean(axis=0)
peak_i = int(np.argmax(mean))
print(f"  simulated peak {mean[peak_i]:.3f} at t={t[peak_i]:.1f}, "
      f"final {mean[-1]:.3f}, analytic limit {fd.forgetting_value(cfg):.3f}")
print(f"  theory peak    {float(np.max(fd.eg1_phase2(cfg, t))):.3f}, "
      f"initial slope {float(theory.eg1_phase2_derivative(cfg, 0.0)):.3f} "
      "(forgetting starts upward)")
