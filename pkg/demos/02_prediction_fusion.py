"""How the two human forecasts are blended.

A pedestrian walks east for a while and then turns north. The history fit
still points east; the heading already points north. The history weight
starts at one half and halves every step, so the fused forecast bends
toward the heading within a few steps.

    python3 demos/02_prediction_fusion.py
"""

import math

import numpy as np

from socnavmap.prediction import HumanTrack, PredictionParams, forecast_track, fusion_weights, update_track

track = HumanTrack(0, max_len=10)
pos = np.array([100.0, 100.0])
for t in range(10):
    pos = pos + (0.0, 5.0)  # five cells per step along +col
    update_track(track, pos, 0.0, t)
# the last observed heading has already swung round (map bearing: toward -row)
track.last_orientation = math.pi / 2

fused, parts = forecast_track(track, PredictionParams(K=10, d_step=5.0, w_base=1.0, alpha=0.5))
w = fusion_weights(10, 1.0, 0.5)

print(" k   w_hist   history        orientation    fused")
for k in range(10):
    h, o, f = parts["history"].points[k], parts["orientation"].points[k], fused.points[k]
    print(f"{k + 1:2d}   {w[k]:.4f}   ({h[0]:6.1f},{h[1]:6.1f})  ({o[0]:6.1f},{o[1]:6.1f})  ({f[0]:6.1f},{f[1]:6.1f})")

# each fused point is a convex blend, so it sits between the two sources
assert np.all(fused.points >= np.minimum(parts["history"].points, parts["orientation"].points) - 1e-9)
print("\nThe first point splits the difference; later points follow the heading.")
