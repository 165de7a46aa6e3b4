import numpy as np
import pytest

from clmlab.core import ParamPoint


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_params(rng, n, strength="any"):
    """Valid parameter points, mixing small and large strength."""
    out = []
    while len(out) < n:
        if strength == "small" or (strength == "any" and rng.random() < 0.5):
            eps = rng.uniform(0.05, 0.45)
        else:
            eps = rng.uniform(-2.0, -0.05)
        mu = rng.uniform(1.1, 6.0)
        out.append(ParamPoint(mu, eps))
    return out


def cone_interior_points(p, rng, n, margin=1e-6):
    """Sample points strictly inside the image cone of p."""
    from clmlab.core import preimage_radicands_xy

    pts = []
    vx = p.mu / 4.0
    while len(pts) < n:
        cand = np.column_stack(
            [rng.uniform(vx - 3.0, vx, 4 * n), rng.uniform(vx - 3.0, vx + 3.0, 4 * n)]
        )
        r1, r2 = preimage_radicands_xy(p.mu, p.epsilon, cand[:, 0], cand[:, 1])
        good = cand[(r1 > margin) & (r2 > margin)]
        pts.extend(good.tolist())
    return np.array(pts[:n])
