"""Tilt transition of the lowest in-plane cone pair.

The lowest in-plane band pair carries a Dirac cone on the Gamma-M line
whose tilt grows with beta: type I (subcritical tilt) gives way to type II
(overtilted, both branches on one side) through the critical type III
point where one branch momentarily flattens. The scan brackets that point.
"""

import numpy as np

from dipolebands import (
    build_lattice,
    find_degeneracies,
    reciprocal,
    tilt_transition_scan,
)

D0 = 0.1
BLOCK = "in_plane"

# seed: the migrating cone on the Gamma-M line at the starting beta
# (the same band pair also grazes the light line closer to Gamma, which
# is a different trajectory)
spec = build_lattice(D0, 0.63)
mx = reciprocal(spec).M[0]
seeds = find_degeneracies(spec, BLOCK, (0, 1),
                          search_region=(8.0, mx, 0.0, 2.0))
start = seeds[0].k_star
print(f"cone at beta=0.63: k = ({start[0]:.4f}, {start[1]:.4f})")

traj = tilt_transition_scan(D0, 0.63, 0.66, BLOCK, (0, 1),
                            beta_step=0.005, start_point=start)

print("\nbeta     kind       tilt ratio   k_x")
for beta, rep in zip(traj.beta_values, traj.reports):
    print(f"{beta:.3f}   {rep.kind:<9}  {rep.tilt_ratio:8.4f}   "
          f"{rep.k_star[0]:8.4f}")

for event in traj.events:
    if event["event"] == "classification_change":
        lo, hi = event["beta_bracket"]
        print(f"\n{event['from']} -> {event['to']} within "
              f"beta in ({lo:.4f}, {hi:.4f})")

tilts = [r.tilt_ratio for r in traj.reports]
crossing = next((i for i, t in enumerate(tilts) if t >= 1.0), None)
if crossing:
    print(f"\ntilt ratio crosses 1 between beta = "
          f"{traj.beta_values[crossing - 1]} and "
          f"{traj.beta_values[crossing]} (type III in between)")
