"""Escape-time rasters, component taxonomy, and Hopf bracketing.

Escape rasters make the basin of infinity visible; labeling the escaped
cells inside the bounded region exposes the disk/annulus taxonomy.  The
period-2 orbit's complex eigenvalue pair crosses the unit circle as mu
grows, and bisection pins the crossing down to the reported brackets.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clmlab._kernels import orbit_after
from clmlab.bifurcation import hopf_bracket, pitchfork_check
from clmlab.core import ParamPoint
from clmlab.imaging import colorize
from clmlab.rasters import label_components, render_escape

OUT = __import__("pathlib").Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

fig, axes = plt.subplots(1, 3, figsize=(15, 5))

# connected bounded set below mu0 vs the four-disk configuration past mu=4
r1 = render_escape(ParamPoint(1.6, 0.2), (-0.3, 1.3, -0.3, 1.3), 512, 2000)
axes[0].imshow(colorize(r1), extent=(-0.3, 1.3, -0.3, 1.3))
axes[0].set_title("bounded set (black), mu=1.6 eps=0.2")

r2 = render_escape(ParamPoint(4.16, 0.38), (-0.05, 1.05, -0.05, 1.05), 512, 10)
axes[1].imshow(colorize(r2), extent=(-0.05, 1.05, -0.05, 1.05))
axes[1].set_title("escape horizon 10, mu=4.16 eps=0.38")
interior = [
    c for c in label_components(r2, "escaped")
    if not c.touches_border and c.cell_count >= 10
]
print(f"interior escaped components at (4.16, 0.38): {len(interior)}")

# Hopf brackets for the period-2 orbit, both coupling regimes
pts, _ = orbit_after(4.0, 0.14, 0.3, 0.52, 200000, 2, 0)
br = hopf_bracket(0.14, 2, 4.0, 4.01, 1e-5, pts[0])
print(f"eps=0.14: modulus-1 crossing in [{br.mu_lo:.6f}, {br.mu_hi:.6f}]")
pts, _ = orbit_after(2.4, -0.9, 0.67, 0.59, 200000, 2, 1)
br2 = hopf_bracket(-0.9, 2, 2.4, 2.6, 1e-3, pts[0])
print(f"eps=-0.9: modulus-1 crossing in [{br2.mu_lo:.6f}, {br2.mu_hi:.6f}]")

trace = sorted(br.trace, key=lambda s: s.mu)
axes[2].plot([s.mu for s in trace], [s.modulus for s in trace], "o-", ms=3)
axes[2].axhline(1.0, color="r", lw=0.8)
axes[2].axvspan(br.mu_lo, br.mu_hi, color="orange", alpha=0.5)
axes[2].set_title("cycle eigenvalue modulus, eps=0.14")
axes[2].set_xlabel("mu")

for eps in (0.2, -0.5):
    rep = pitchfork_check(eps)
    print(f"pitchfork eps={eps}: locus {rep.locus:.6f}, flip error {rep.flip_error:.1e}, "
          f"branch exponent {rep.scaling_exponent:.3f}")

fig.tight_layout()
fig.savefig(OUT / "05_basins_and_bifurcations.png", dpi=130)
print(f"wrote {OUT / '05_basins_and_bifurcations.png'}")
