"""The forgetting value across the similarity plane, as an ASCII heatmap.

The asymptotic task-1 error after task-2 training is
(s1^2/2)(2r-1)(sb1^2 + sb2^2 - 2 q sb1 sb2): zero along r=0.5 (disjoint
supports) and along q=1 with equal teacher scales (identical teachers),
largest at r=1, q=-1.  Darker glyphs mean less forgetting.
"""

import numpy as np

from forgetting_dynamics.experiments import default_heatmap_sweep, forgetting_heatmap

GLYPHS = " .:-=+*#%@"  # light -> heavy forgetting

report = forgetting_heatmap(default_heatmap_sweep(grid=21))
rows = report.rows
rs = sorted({row["r"] for row in rows})
qs = sorted({row["q"] for row in rows})
values = {(row["r"], row["q"]): row["forgetting_value"] for row in rows}
top = max(values.values())

print("forgetting value over (r, q), unit scales; '@' = strongest forgetting\n")
print("   q\\r " + "".join(f"{r:5.2f}"[-4:] for r in rs))
for q in reversed(qs):
    line = ""
    for r in rs:
        level = int(values[(r, q)] / top * (len(GLYPHS) - 1) + 0.5)
        line += "   " + GLYPHS[level]
    print(f"{q:6.2f} {line}")

print(f"\npeak forgetting {top:.3f} at r=1, q=0 corner of this grid")
print("zero column at r=0.5: disjoint supports leave task 1 untouched")
col = [values[(1.0, q)] for q in qs]
print(f"at r=1.0, forgetting falls from {col[0]:.3f} (q=0) to {col[-1]:.3f} (q=1)")
assert np.all(np.diff(col) <= 0)
