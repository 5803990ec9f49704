# %% [markdown]
# # Mean crossing density and the slope-jump distribution
#
# The average number of crossings per unit energy grows linearly for the
# rectangle and as a square root for the cylinder.  The normalised slope
# jump ``v`` at a crossing follows a parameter-independent law ``g(v)``.

# %%
import numpy as np

from levelcross import CrossingWindow, RectBilliard, enumerate_crossings
from levelcross.harness import HistogramSpec, bin_crossings, ks_one_sample, linear_slope_fit
from levelcross.smooth import cyl_gv, rect_distribution, rect_gv, rect_integrated_count

cs = enumerate_crossings(CrossingWindow(RectBilliard(), 1500.0, 1.0, 2.0))
h = bin_crossings(cs, HistogramSpec(300.0, 1500.0, 40))
slope, _ = linear_slope_fit(h.centers, h.density)
print(f"fitted dn/deps slope {slope:.4f}, predicted {rect_integrated_count(1.0, 1.0, 2.0):.4f}")

# %% [markdown]
# Tabulate ``g(v)`` and compare the empirical ``v`` sample with its CDF.

# %%
for v in (0.1, 0.3, 0.5, 0.7, 0.9):
    print(f"g({v}) = {rect_gv(v):.5f}")
print("KS distance:", round(ks_one_sample(cs.v, rect_distribution().cdf), 4))

# %% [markdown]
# The cylinder law has a same-sign part on [0, 1) and an opposite-sign
# part on [0, 2).

# %%
for v in (0.25, 0.75, 1.25, 1.75):
    g = cyl_gv(v)
    print(f"v={v}: total {g.total:.5f}  plus {g.plus:.5f}  minus {g.minus:.5f}")
