# %% [markdown]
# # Locating crossings from the orbit sum
#
# The oscillating correction to the crossing density is a sum over
# periodic orbits.  On a fine grid its largest local maxima sit on top of
# individual crossings.  A coarse grid keeps this script quick; the tests
# use 512 x 512 cells.

# %%
import numpy as np

from levelcross import CrossingWindow, CylinderBilliard, enumerate_crossings
from levelcross.harness import top_local_maxima
from levelcross.osc import OscWindow, TruncationSpec, osc_grid

model = CylinderBilliard()
box = (31.25, 34.25, 0.2, 0.3)
w = OscWindow(*box)
E, PHI, vals = osc_grid(model, w, TruncationSpec(m_max=150, n_eps=200, n_mu=200))
cs = enumerate_crossings(CrossingWindow(model, box[1], box[2], box[3]))
exact = [(e, p) for e, p in zip(cs.energy, cs.mu_star) if e >= box[0]]
print("exact crossings:", [(round(float(e), 4), round(float(p), 4)) for e, p in exact])
for i, j in top_local_maxima(vals, 3):
    print(f"grid maximum at eps={E[i]:.4f}, phi={PHI[j]:.4f}, value {vals[i, j]:+.2f}")

# %% [markdown]
# Averaging over the flux leaves a one-dimensional series with sharp
# peaks at ``eps = n**2``.

# %%
from levelcross.harness import detect_peaks
from levelcross.osc import cyl_integrated_osc1_curve

eps = np.arange(80.0, 400.0) + 0.5
curve = 2 * np.sqrt(eps / model.gamma) + cyl_integrated_osc1_curve(eps, model.gamma, 500)
print("peak energies:", eps[detect_peaks(curve)].tolist())
