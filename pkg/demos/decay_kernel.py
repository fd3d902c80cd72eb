"""How the travel-time decay weight behaves.

The kernel turns walk minutes into a weight between 1 (at the doorstep) and
0 (at the walking-time threshold).  Both halves of the accessibility
computation use it: facility catchments discount far-away population, and
demand points discount far-away facilities.
"""

import numpy as np

from accessopt import DecayParams, decay_weights, gaussian_decay

general = DecayParams(t_sigma_min=8.75)   # 700 m at 80 m/min
elderly = DecayParams(t_sigma_min=10.0)   # 700 m at 70 m/min

print("spot checks (elderly threshold, 10 min):")
for t in (0.0, 2.5, 5.0, 7.5, 10.0, 12.0):
    print(f"  t = {t:5.1f} min -> weight {gaussian_decay(t, elderly):.6f}")

print()
print("the weight depends only on the fraction of the threshold used,")
print("so both groups see the same curve over their own scale:")
for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
    wg = gaussian_decay(frac * 8.75, general)
    we = gaussian_decay(frac * 10.0, elderly)
    print(f"  {frac:4.0%} of threshold -> general {wg:.6f} / elderly {we:.6f}")

print()
print("ascii profile over the elderly threshold:")
times = np.linspace(0.0, 10.0, 21)
for t, w in zip(times, decay_weights(times, 10.0)):
    print(f"  {t:5.2f} min | {'#' * int(round(w * 40)):<40} {w:.3f}")
