"""Tour of the map's basic geometry.

The coupled logistic map F(x,y) = ((1-e)f(x)+e*f(y), (1-e)f(y)+e*f(x)) with
f(t) = mu*t*(1-t) sends the whole plane onto a cone bounded by the images
of the critical lines x=1/2 and y=1/2.  This script prints the fixed-point
inventory for a few parameter pairs, plots the cone geometry, and shows the
four-fold preimage structure of interior points.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clmlab.core import (
    ParamPoint,
    cone_membership,
    fixed_points,
    loci,
    plane_geometry,
    preimages,
)

OUT = __import__("pathlib").Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

for mu, eps in [(3.0, 0.2), (2.0, -0.5), (2.71, -0.9)]:
    p = ParamPoint(mu, eps)
    print(f"\nmu={mu}, eps={eps}  (strength: {p.strength_class().value})")
    print("  loci:", loci(eps))
    for fp in fixed_points(p):
        print(
            f"  {fp.label.value:12s} ({fp.location.x:+.6f}, {fp.location.y:+.6f})"
            f"  -> {fp.classification.value}"
        )

# cone picture: rays, circle, square, and a preimage fan
fig, axes = plt.subplots(1, 2, figsize=(11, 5))
for ax, (mu, eps) in zip(axes, [(3.0, 0.25), (2.8, -1.0)]):
    p = ParamPoint(mu, eps)
    geo = plane_geometry(p)
    xs = np.linspace(geo.cone_vertex.x, geo.cone_vertex.x + 3 * geo.L1.direction, 64)
    ax.plot(xs, geo.L1.y_at(xs), "r-", label="L1")
    xs2 = np.linspace(geo.cone_vertex.x, geo.cone_vertex.x + 3 * geo.L2.direction, 64)
    ax.plot(xs2, geo.L2.y_at(xs2), "b-", label="L2")
    th = np.linspace(0, 2 * np.pi, 256)
    ax.plot(0.5 + geo.circle_radius * np.cos(th), 0.5 + geo.circle_radius * np.sin(th), "g--", lw=0.8)
    ax.plot([0, 1, 1, 0, 0], [0, 0, 1, 1, 0], "k:", lw=0.8)
    # preimages of a few interior points
    for z in [(0.2, 0.1), (0.4, 0.4), (0.1, 0.55)]:
        if cone_membership(p, z).value != "interior":
            continue
        pre = preimages(p, z)
        ax.plot(*z, "k*", ms=10)
        for w in pre:
            ax.plot([z[0], w.x], [z[1], w.y], lw=0.4, color="gray")
            ax.plot(w.x, w.y, "k.", ms=4)
    ax.plot(geo.cone_vertex.x, geo.cone_vertex.y, "mo", label="vertex")
    ax.set_title(f"mu={mu}, eps={eps}")
    ax.set_xlim(-1.2, 2.2), ax.set_ylim(-1.2, 2.2)
    ax.set_aspect("equal"), ax.legend(loc="lower left", fontsize=8)
fig.tight_layout()
fig.savefig(OUT / "01_cone_geometry.png", dpi=130)
print(f"\nwrote {OUT / '01_cone_geometry.png'}")
