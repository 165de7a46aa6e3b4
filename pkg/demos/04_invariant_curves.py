"""Invariant-curve constructions.

The bottom piece of the curve is the fixed graph of a preimage transform;
its three reflections complete a closed curve through the four preimages of
the origin.  Below the pitchfork locus of the large-strength regime the
curve degenerates to the two diagonal segments; past the ray locus mu_1 the
graph property fails and the bubble-curve sequence takes over, and points
with bounded orbits can appear outside it.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clmlab.core import ParamPoint, fixed_points
from clmlab.geometry import hausdorff_distance
from clmlab.invariant_curve import (
    build_gamma,
    build_gamma_sequence,
    exterior_bounded_witnesses,
)

OUT = __import__("pathlib").Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(1, 3, figsize=(15, 5))

for ax, (mu, eps) in zip(axes[:2], [(3.0, 0.3), (2.71, -0.9)]):
    res = build_gamma(ParamPoint(mu, eps), n=4096)
    v = res.curve.assembled.vertices
    ring = np.vstack([v, v[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "k-", lw=1.0)
    for fp in fixed_points(ParamPoint(mu, eps)):
        ax.plot(fp.location.x, fp.location.y, "r.", ms=8)
    ax.set_title(f"Gamma, mu={mu} eps={eps} ({res.regime}, {res.iterations} its)")
    ax.set_aspect("equal")
    print(f"mu={mu} eps={eps}: converged={res.converged} after {res.iterations}")

# bubble sequence past mu_1 with exterior bounded witnesses
p = ParamPoint(2.82, -1.0)
curves = build_gamma_sequence(p, 6, resample=4096)
for i, c in enumerate(curves):
    v = np.vstack([c.vertices, c.vertices[:1]])
    axes[2].plot(v[:, 0], v[:, 1], lw=0.7, color=plt.cm.viridis(i / 5))
for a, b in zip(curves, curves[1:]):
    print("stage Hausdorff:", round(hausdorff_distance(a, b), 5))
wit = exterior_bounded_witnesses(p, curves[-1], 200000)
print(f"bounded witnesses outside the last curve: {len(wit)}")
if wit:
    w = np.array([[q.x, q.y] for q in wit])
    axes[2].plot(w[:, 0], w[:, 1], "rx", ms=8, label="bounded outside")
    axes[2].legend()
axes[2].set_title("bubble curves, mu=2.82 eps=-1")
axes[2].set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "04_invariant_curves.png", dpi=130)
print(f"wrote {OUT / '04_invariant_curves.png'}")
