"""Backward dynamics: preimage trees, mixed clouds, curve preimages.

Plotting many preimages of a point sketches the set of bounded orbits;
iterating the preimage of the circle x^2+y^2=x+y (or of the unit-square
boundary at large strength) converges to the invariant curve bounding the
immediate basin of infinity.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clmlab.core import ParamPoint
from clmlab.preimage import (
    BOUNDARY_Q,
    CIRCLE_C,
    iterated_curve_preimage,
    mixed_cloud,
    preimage_tree,
)

OUT = __import__("pathlib").Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(2, 2, figsize=(11, 11))

# backward tree of the origin at large strength past mu_1: the bounded web
tree = preimage_tree(ParamPoint(2.8, -1.0), (0.0, 0.0), 22, point_budget=10**6)
pts = tree.all_points()
axes[0, 0].plot(pts[:, 0], pts[:, 1], ",k", alpha=0.4)
axes[0, 0].set_title(f"preimage tree of O, mu=2.8 eps=-1 ({len(pts)} pts)")

# mixed forward/backward cloud around a diagonal seed: basin evidence
cloud = mixed_cloud(ParamPoint(3.694, 0.01), (0.1, 0.0), 30, 12, 5 * 10**5)
axes[0, 1].plot(cloud[:, 0], cloud[:, 1], ",k", alpha=0.4)
axes[0, 1].set_title("mixed cloud, mu=3.694 eps=0.01")

# circle preimages converge to the invariant curve (small strength)
for n, color in [(0, "0.8"), (2, "0.6"), (4, "0.35"), (8, "crimson")]:
    for c in iterated_curve_preimage(ParamPoint(1.6, 0.2), CIRCLE_C, n, 4096):
        v = np.vstack([c.vertices, c.vertices[:1]]) if c.closed else c.vertices
        axes[1, 0].plot(v[:, 0], v[:, 1], color=color, lw=0.9)
axes[1, 0].set_title("circle preimages -> invariant curve, mu=1.6 eps=0.2")

# square-boundary preimages at mu=4, eps=-1: four lobes through (1/2, 1/2)
for c in iterated_curve_preimage(ParamPoint(4.0, -1.0), BOUNDARY_Q, 2, 8192):
    v = np.vstack([c.vertices, c.vertices[:1]]) if c.closed else c.vertices
    axes[1, 1].plot(v[:, 0], v[:, 1], lw=0.8)
axes[1, 1].set_title("2nd preimage of the square boundary, mu=4 eps=-1")

for ax in axes.flat:
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "03_backward_iteration.png", dpi=130)
print(f"wrote {OUT / '03_backward_iteration.png'}")
