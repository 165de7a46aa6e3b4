"""clmlab: a numerical laboratory for the two-parameter coupled logistic map.

Submodules
----------
core            map evaluation, Jacobian, fixed points, loci, inverse branches
orbits          forward dynamics, attractor estimation, itineraries
preimage        preimage trees, mixed clouds, curve preimages
invariant_curve invariant-curve operators and the bubble-curve sequence
rasters         escape-time rasters, component labeling, basin rendering
bifurcation     periodic orbits, Hopf bracketing, pitchfork verification
cli             command-line front end (``clmlab`` entry point)
server          local HTTP JSON service for the explorer UI
"""

from .core import (
    Classification,
    ConeLocation,
    FixedPointInfo,
    FixedPointLabel,
    LociValues,
    ParamPoint,
    PlanePoint,
    Strength,
    cone_membership,
    fixed_points,
    jacobian,
    loci,
    logistic,
    map_eval,
    plane_geometry,
    preimages,
)
from .geometry import Polyline, hausdorff_distance

__version__ = "0.1.0"

__all__ = [
    "Classification",
    "ConeLocation",
    "FixedPointInfo",
    "FixedPointLabel",
    "LociValues",
    "ParamPoint",
    "PlanePoint",
    "Polyline",
    "Strength",
    "cone_membership",
    "fixed_points",
    "hausdorff_distance",
    "jacobian",
    "loci",
    "logistic",
    "map_eval",
    "plane_geometry",
    "preimages",
    "__version__",
]
