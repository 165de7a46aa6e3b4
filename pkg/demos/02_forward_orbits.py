"""Forward dynamics: orbits, synchronization, and fat attractors.

Weak coupling first synchronizes orbits onto the diagonal; close to mu=4
with tiny coupling the long-run occupation of a single orbit fills sets of
positive area ("fat" attractors), here the 2-periodic pair at mu=3.694.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from clmlab.core import ParamPoint
from clmlab.orbits import estimate_attractor, iterate_forward, synchronization_verdict

OUT = __import__("pathlib").Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

# synchronization below mu0: the gap |x_n - y_n| dies out
p = ParamPoint(1.5, 0.2)
res = iterate_forward(p, (0.9, 0.1), 200)
rep = synchronization_verdict(p, (0.9, 0.1), 5000)
print(f"mu=1.5 eps=0.2: synchronized={rep.synchronized}, final gap {rep.final_gap:.2e}")

fig, axes = plt.subplots(1, 3, figsize=(14, 4.2))
axes[0].semilogy(np.maximum(res.sync_gap, 1e-18))
axes[0].set_title("sync gap, mu=1.5 eps=0.2")
axes[0].set_xlabel("step")

# a fat attractor: rasterized occupation of one 1e7-step orbit
est = estimate_attractor(
    ParamPoint(3.694, 0.01), (0.31, 0.47), n_total=2 * 10**6, n_transient=10**4,
    window=(0, 1, 0, 1), resolution=512,
)
print(f"mu=3.694 eps=0.01: period={est.period}, cells={est.occupied_cells}, "
      f"area~{est.area_estimate:.3f}, fat={est.is_fat}")
axes[1].imshow(est.occupied[::-1], extent=(0, 1, 0, 1), cmap="gray_r")
axes[1].set_title(f"fat attractor, period {est.period}")

# the two coexisting attractors at mu=3.67 from seeds in either basin
p2 = ParamPoint(3.67, 0.01)
e1 = estimate_attractor(p2, (0.511, 0.905), n_total=10**6, resolution=512)
e2 = estimate_attractor(p2, (0.18, 0.904), n_total=10**6, resolution=512)
rgb = np.ones((512, 512, 3))
rgb[e1.occupied] = (0.85, 0.2, 0.2)
rgb[e2.occupied] = (0.2, 0.3, 0.85)
axes[2].imshow(rgb[::-1], extent=(0, 1, 0, 1))
axes[2].set_title("two attractors, mu=3.67")
fig.tight_layout()
fig.savefig(OUT / "02_forward_orbits.png", dpi=130)
print(f"wrote {OUT / '02_forward_orbits.png'}")
