"""What retardation does: full Green function vs quasistatic 1/r^3 limit.

Far outside the light cone the two interaction models agree well. Near
and inside the cone they differ qualitatively: the retarded bands couple
to free-space radiation (superradiant decay, a branch hugging the light
line), and a low in-plane degeneracy that survives in the quasistatic
model is destroyed by that coupling.
"""

import numpy as np

from dipolebands import (
    assemble,
    build_lattice,
    eigensolve,
    find_degeneracies,
    reciprocal,
)

spec = build_lattice(d0=0.1, beta=0.75)
recip = reciprocal(spec)

# detuning agreement along the outer half of K -> M_top
pts = [recip.K + (recip.M_top - recip.K) * t
       for t in np.linspace(0.5, 1.0, 8)]
dev = 0.0
rng_lo, rng_hi = np.inf, -np.inf
for k in pts:
    ret = np.sort(eigensolve(assemble(spec, k, mode="retarded")).detuning)
    qs = np.sort(eigensolve(assemble(spec, k, mode="quasistatic")).detuning)
    dev = max(dev, float(np.max(np.abs(ret - qs))))
    rng_lo = min(rng_lo, ret.min())
    rng_hi = max(rng_hi, ret.max())
print("outer half of K -> M_top (far outside the light cone):")
print(f"  max |detuning difference| {dev:.3f} "
      f"on a band range of {rng_hi - rng_lo:.1f}")

# decay rates at a point inside the light cone
k_in = np.array([0.4, 0.2])
ret = eigensolve(assemble(spec, k_in, mode="retarded"))
qs = eigensolve(assemble(spec, k_in, mode="quasistatic"))
print(f"\ndecay rates at k = {k_in} (inside the cone):")
print("  retarded  " + " ".join(f"{g:8.3f}" for g in np.sort(ret.decay)))
print("  quasistatic" + " ".join(f"{g:8.3f}" for g in np.sort(qs.decay)))
print("  (quasistatic modes all decay at the single-emitter rate)")

# the lowest in-plane pair on the Gamma-M strip: the quasistatic model
# keeps a degeneracy there, the retarded model has lost it
strip = (0.5, recip.M[0], 0.0, 2.0)
ret_found = find_degeneracies(spec, "in_plane", (0, 1),
                              search_region=strip)
qs_found = find_degeneracies(spec, "in_plane", (0, 1), search_region=strip,
                             mode="quasistatic")
print(f"\nlowest in-plane pair on the Gamma-M strip at beta={spec.beta}:")
print(f"  retarded:    {len(ret_found)} degeneracies")
print(f"  quasistatic: {len(qs_found)} degeneracies", end="")
if qs_found:
    k = qs_found[0].k_star
    print(f" (at k = ({k[0]:.4f}, {k[1]:.4f}))")
else:
    print()
