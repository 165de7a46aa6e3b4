"""Command-line front end.

Subcommands mirror the engine operations: ``orbit`` plots forward iterates,
``preimages`` backward trees, ``cloud`` the mixed combination,
``curve-preimage`` iterated preimages of the circle or the square boundary,
``gamma``/``gamma-seq`` the invariant-curve constructions, ``basin`` /
``attractor`` / ``components`` the raster analyses, ``hopf`` / ``pitchfork``
the bifurcation scans, and ``serve`` the local HTTP API.

Every run writes a versioned JSON manifest plus PPM/PNG/CSV outputs into
--out.  Flags override values from a JSON --config file.  Exit codes:
0 success, 1 usage, 2 domain error, 3 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import _kernels, imaging
from .core import ParamPoint, fixed_points, loci
from .errors import ConvergenceError, DomainError
from .geometry import Polyline, hausdorff_distance
from .invariant_curve import build_gamma, build_gamma_sequence
from .orbits import estimate_attractor, iterate_forward
from .preimage import (
    BOUNDARY_Q,
    CIRCLE_C,
    iterated_curve_preimage,
    mixed_cloud,
    preimage_tree,
)
from .rasters import label_components, render_basin_of_attractor, render_escape

DEFAULT_WINDOW = (-0.25, 1.25, -0.25, 1.25)


def _window(value: str) -> tuple[float, float, float, float]:
    parts = [float(v) for v in value.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("window is xmin,xmax,ymin,ymax")
    return tuple(parts)


def _add_common(sp, window=False):
    sp.add_argument("--mu", type=float, required=False)
    sp.add_argument("--eps", type=float, required=False)
    sp.add_argument("--out", type=Path, default=Path("out"))
    sp.add_argument("--config", type=Path, help="JSON file with defaults for this run")
    sp.add_argument("--seed", type=int, default=0, help="RNG seed for any sampling")
    sp.add_argument("--threads", type=int, default=None)
    if window:
        sp.add_argument("--window", type=_window, default=None)
        sp.add_argument("--resolution", type=int, default=512)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="clmlab", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("fixed-points", help="fixed points with classification")
    _add_common(sp)

    sp = sub.add_parser("loci", help="parameter-space curve values at eps")
    _add_common(sp)

    sp = sub.add_parser("orbit", help="forward orbit plot")
    _add_common(sp, window=True)
    sp.add_argument("--z0", type=_point, default=(0.3, 0.4))
    sp.add_argument("--steps", type=int, default=10**5)

    sp = sub.add_parser("preimages", help="backward preimage tree")
    _add_common(sp, window=True)
    sp.add_argument("--root", type=_point, default=(0.0, 0.0))
    sp.add_argument("--depth", type=int, default=16)
    sp.add_argument("--budget", type=int, default=10**7)

    sp = sub.add_parser("cloud", help="forward orbit + preimage trees")
    _add_common(sp, window=True)
    sp.add_argument("--z0", type=_point, default=(0.1, 0.0))
    sp.add_argument("--forward", type=int, default=20)
    sp.add_argument("--back", type=int, default=12)
    sp.add_argument("--budget", type=int, default=10**6)

    sp = sub.add_parser("curve-preimage", help="iterated preimages of C or dQ")
    _add_common(sp, window=True)
    sp.add_argument("--curve-seed", choices=[CIRCLE_C, BOUNDARY_Q], default=CIRCLE_C)
    sp.add_argument("--iterations", type=int, default=8)
    sp.add_argument("--vertices", type=int, default=4096)

    sp = sub.add_parser("gamma", help="invariant curve construction")
    _add_common(sp, window=True)
    sp.add_argument("--grid", type=int, default=4096)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--max-iters", type=int, default=10**5)

    sp = sub.add_parser("gamma-seq", help="bubble-curve sequence past mu_1")
    _add_common(sp, window=True)
    sp.add_argument("--stages", type=int, default=6)
    sp.add_argument("--vertices", type=int, default=4096)

    sp = sub.add_parser("basin", help="escape-time raster")
    _add_common(sp, window=True)
    sp.add_argument("--n-max", type=int, default=2000)

    sp = sub.add_parser("attractor", help="long-orbit attractor estimate")
    _add_common(sp, window=True)
    sp.add_argument("--z0", type=_point, default=(0.3, 0.4))
    sp.add_argument("--iterations", type=int, default=10**7)
    sp.add_argument("--transient", type=int, default=10**4)
    sp.add_argument("--with-basin", action="store_true")
    sp.add_argument("--n-max", type=int, default=2000)

    sp = sub.add_parser("components", help="label raster components")
    _add_common(sp, window=True)
    sp.add_argument("--n-max", type=int, default=2000)
    sp.add_argument("--target", choices=["bounded", "escaped"], default="escaped")

    sp = sub.add_parser("hopf", help="bracket a Hopf crossing in mu")
    _add_common(sp)
    sp.add_argument("--period", type=int, default=2)
    sp.add_argument("--mu-start", type=float)
    sp.add_argument("--mu-end", type=float)
    sp.add_argument("--width", type=float, default=1e-5)
    sp.add_argument("--guess", type=_point, default=None)

    sp = sub.add_parser("pitchfork", help="verify the pitchfork locus")
    _add_common(sp)
    sp.add_argument("--samples", type=int, default=12)

    sp = sub.add_parser("serve", help="run the local HTTP API / explorer UI")
    _add_common(sp)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8763)
    sp.add_argument("--ui", type=Path, default=None, help="static UI directory")
    return ap


def _point(value) -> tuple[float, float]:
    if isinstance(value, (tuple, list)):
        return (float(value[0]), float(value[1]))
    x, y = value.split(",")
    return (float(x), float(y))


def _apply_config(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    """Fill unset args from the JSON config; explicit flags win."""
    if not getattr(args, "config", None):
        return args
    data = json.loads(Path(args.config).read_text())
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
    for key, value in data.items():
        attr = key.replace("-", "_")
        if attr in ("command", "config") or attr in explicit:
            continue
        if not hasattr(args, attr):
            raise SystemExit(f"config key {key!r} unknown for {args.command}")
        if attr == "window" and value is not None:
            value = tuple(value)
        if attr in ("z0", "root", "guess") and value is not None:
            value = _point(value)
        if attr == "out":
            value = Path(value)
        setattr(args, attr, value)
    return args


def emit_config(args: argparse.Namespace) -> dict:
    """Round-trippable record of the effective run parameters."""
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in ("config",):
            continue
        if isinstance(value, Path):
            value = str(value)
        if isinstance(value, tuple):
            value = list(value)
        out[key] = value
    return out


def _param(args) -> ParamPoint:
    if args.mu is None or args.eps is None:
        raise DomainError("--mu and --eps are required (flag or config)")
    return ParamPoint(args.mu, args.eps)


def _points_raster(points: np.ndarray, window, resolution: int) -> np.ndarray:
    """Point-plot occupancy grid (bottom-up rows), for scatter-style output."""
    xmin, xmax, ymin, ymax = window
    grid = np.zeros((resolution, resolution), dtype=bool)
    if len(points):
        j = ((points[:, 0] - xmin) / (xmax - xmin) * resolution).astype(int)
        i = ((points[:, 1] - ymin) / (ymax - ymin) * resolution).astype(int)
        ok = (j >= 0) & (j < resolution) & (i >= 0) & (i < resolution)
        grid[i[ok], j[ok]] = True
    return grid


def _save_points_image(points, window, resolution, out: Path, stem: str) -> list[str]:
    grid = _points_raster(points, window, resolution)
    rgb = np.where(grid[::-1, :, None], 0, 255).astype(np.uint8).repeat(3, axis=2)
    return _save_rgb(rgb, out, stem)


def _save_rgb(rgb, out: Path, stem: str) -> list[str]:
    out.mkdir(parents=True, exist_ok=True)
    ppm, png = out / f"{stem}.ppm", out / f"{stem}.png"
    imaging.save_ppm(rgb, ppm)
    imaging.save_png(rgb, png)
    return [str(ppm), str(png)]


def _save_curves_csv(curves: list[Polyline], out: Path, stem: str) -> str:
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{stem}.csv"
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["curve", "t", "x", "y"])
        for ci, c in enumerate(curves):
            n = len(c.vertices)
            for k, (x, y) in enumerate(c.vertices):
                w.writerow([ci, k / max(n - 1, 1), repr(float(x)), repr(float(y))])
    return str(path)


def _window_or_default(args):
    return args.window if args.window is not None else DEFAULT_WINDOW


# ---------------------------------------------------------------------------
# subcommand bodies (each returns (results dict, outputs list))


def _run_fixed_points(args):
    p = _param(args)
    rows = []
    for fp in fixed_points(p):
        rows.append(
            {
                "label": fp.label.value,
                "x": fp.location.x,
                "y": fp.location.y,
                "eigenvalues": [[e.real, e.imag] for e in fp.eigenvalues],
                "classification": fp.classification.value,
            }
        )
        print(
            f"{fp.label.value:12s} ({fp.location.x:+.12f}, {fp.location.y:+.12f})"
            f"  |ev| = {abs(fp.eigenvalues[0]):.6f}, {abs(fp.eigenvalues[1]):.6f}"
            f"  {fp.classification.value}"
        )
    return {"fixed_points": rows}, []


def _run_loci(args):
    if args.eps is None:
        raise DomainError("--eps is required")
    vals = loci(args.eps)
    d = {
        "mu0": vals.mu0,
        "mu1": vals.mu1,
        "muPrime": vals.mu_prime,
        "mu0Prime": vals.mu0_prime,
        "mu2": vals.mu2,
    }
    for k, v in d.items():
        print(f"{k:9s} = {'absent' if v is None else format(v, '.12g')}")
    return {"loci": d}, []


def _run_orbit(args):
    p = _param(args)
    res = iterate_forward(p, args.z0, args.steps)
    window = _window_or_default(args)
    outputs = _save_points_image(res.samples, window, args.resolution, args.out, "orbit")
    verdict = (
        {"kind": "escaped", "step": res.verdict.step}
        if res.escaped
        else {"kind": "bounded", "steps": res.verdict.steps}
    )
    print(f"orbit: {verdict['kind']} samples={len(res.samples)} final_gap={res.sync_gap[-1]:.3e}")
    return {"verdict": verdict, "samples": len(res.samples)}, outputs


def _run_preimages(args):
    p = _param(args)
    window = _window_or_default(args)
    tree = preimage_tree(p, args.root, args.depth, args.budget, clip=window)
    pts = tree.all_points()
    outputs = _save_points_image(pts, window, args.resolution, args.out, "preimages")
    print(f"tree: {len(tree.levels) - 1} levels, {tree.total_points()} points, "
          f"budget_exhausted={tree.budget_exhausted}")
    return {
        "levels": [len(l) for l in tree.levels],
        "budget_exhausted": tree.budget_exhausted,
    }, outputs


def _run_cloud(args):
    p = _param(args)
    window = _window_or_default(args)
    pts = mixed_cloud(p, args.z0, args.forward, args.back, args.budget)
    outputs = _save_points_image(pts, window, args.resolution, args.out, "cloud")
    print(f"cloud: {len(pts)} points")
    return {"points": len(pts)}, outputs


def _run_curve_preimage(args):
    p = _param(args)
    curves = iterated_curve_preimage(p, args.curve_seed, args.iterations, args.vertices)
    outputs = [_save_curves_csv(curves, args.out, "curves")]
    window = _window_or_default(args)
    allpts = np.vstack([c.vertices for c in curves]) if curves else np.empty((0, 2))
    outputs += _save_points_image(allpts, window, args.resolution, args.out, "curves")
    print(f"curve-preimage: {len(curves)} branches at stage {args.iterations}")
    return {"branches": len(curves), "closed": [c.closed for c in curves]}, outputs


def _run_gamma(args):
    p = _param(args)
    res = build_gamma(p, n=args.grid, max_iters=args.max_iters, tol=args.tol)
    curves = [res.curve.bottom, res.curve.right, res.curve.top, res.curve.left]
    outputs = [_save_curves_csv(curves, args.out, "gamma")]
    window = _window_or_default(args)
    outputs += _save_points_image(
        res.curve.assembled.vertices, window, args.resolution, args.out, "gamma"
    )
    print(f"gamma: regime={res.regime} iterations={res.iterations} "
          f"final_change={res.final_change:.3e} converged={res.converged}")
    return {
        "regime": res.regime,
        "iterations": res.iterations,
        "final_change": res.final_change,
        "converged": res.converged,
    }, outputs


def _run_gamma_seq(args):
    p = _param(args)
    curves = build_gamma_sequence(p, args.stages, args.vertices)
    outputs = [_save_curves_csv(curves, args.out, "gamma_seq")]
    dists = [
        hausdorff_distance(a, b) for a, b in zip(curves, curves[1:])
    ]
    for i, d in enumerate(dists):
        print(f"H(Gamma_{i + 1}, Gamma_{i + 2}) = {d:.6f}")
    window = _window_or_default(args)
    outputs += _save_points_image(
        curves[-1].vertices, window, args.resolution, args.out, "gamma_seq"
    )
    return {"stages": len(curves), "stage_hausdorff": dists}, outputs


def _run_basin(args):
    p = _param(args)
    window = _window_or_default(args)
    r = render_escape(p, window, args.resolution, args.n_max)
    outputs = _save_rgb(imaging.colorize(r), args.out, "basin")
    bounded = int((r.cells == -1).sum())
    print(f"basin: bounded_cells={bounded} of {r.width * r.height}")
    return {"bounded_cells": bounded, "window": list(window)}, outputs


def _run_attractor(args):
    p = _param(args)
    window = _window_or_default(args)
    est = estimate_attractor(
        p, args.z0, n_total=args.iterations, n_transient=args.transient,
        window=window, resolution=args.resolution,
    )
    rgb = np.where(est.occupied[::-1, :, None], 0, 255).astype(np.uint8).repeat(3, axis=2)
    outputs = _save_rgb(rgb, args.out, "attractor")
    results = {
        "period": est.period,
        "occupied_cells": est.occupied_cells,
        "area_estimate": est.area_estimate,
        "fat": est.is_fat,
    }
    print(f"attractor: period={est.period} cells={est.occupied_cells} "
          f"area={est.area_estimate:.6f} fat={est.is_fat}")
    if args.with_basin:
        basin = render_basin_of_attractor(
            p, args.z0, window, args.resolution, args.n_max, attractor=est
        )
        outputs += _save_rgb(imaging.colorize(basin), args.out, "attractor_basin")
        results["basin"] = {
            "bounded_cells": basin.meta["bounded_cells"],
            "unclassified_cells": basin.meta["unclassified_cells"],
        }
    return results, outputs


def _run_components(args):
    p = _param(args)
    window = _window_or_default(args)
    r = render_escape(p, window, args.resolution, args.n_max)
    reports = label_components(r, args.target)
    from .rasters import component_labels

    outputs = _save_rgb(imaging.colorize_labels(component_labels(r, args.target)), args.out, "components")
    rows = [
        {
            "label": c.label,
            "cells": c.cell_count,
            "topology": c.topology.value,
            "annulus_class": c.annulus_class.value if c.annulus_class else None,
            "touches_L1": c.touches_L1,
            "touches_L2": c.touches_L2,
            "touches_border": c.touches_border,
        }
        for c in reports
    ]
    n_int = sum(1 for c in reports if not c.touches_border)
    print(f"components: {len(reports)} total, {n_int} interior")
    return {"components": rows}, outputs


def _run_hopf(args):
    from .bifurcation import hopf_bracket

    if args.eps is None or args.mu_start is None or args.mu_end is None:
        raise DomainError("--eps, --mu-start and --mu-end are required")
    guess = args.guess
    if guess is None:
        # seed from a long forward run at mu_start
        mode = 1 if args.eps < 0 else 0
        pts, esc = _kernels.orbit_after(
            args.mu_start, args.eps, 0.31, 0.52, 200000, max(args.period, 1), mode
        )
        if esc >= 0:
            raise DomainError("long-run seeding escaped; pass --guess")
        guess = tuple(pts[0])
    br = hopf_bracket(args.eps, args.period, args.mu_start, args.mu_end, args.width, guess)
    args.out.mkdir(parents=True, exist_ok=True)
    trace_path = args.out / "hopf_trace.csv"
    with open(trace_path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["mu", "x0", "y0", "ev_re", "ev_im", "modulus"])
        for s in br.trace:
            ev = s.orbit.cycle_eigenvalues[0]
            w.writerow([s.mu, s.orbit.points[0, 0], s.orbit.points[0, 1], ev.real, ev.imag, s.modulus])
    results = {
        "mu_lo": br.mu_lo,
        "mu_hi": br.mu_hi,
        "modulus_lo": br.modulus_lo,
        "modulus_hi": None if br.modulus_hi != br.modulus_hi else br.modulus_hi,
        "refined": br.refined,
        "orbit_lost_at_hi": br.orbit_lost_at_hi,
    }
    print(f"hopf: crossing in [{br.mu_lo:.8f}, {br.mu_hi:.8f}] "
          f"moduli {br.modulus_lo:.6f} -> {br.modulus_hi:.6f}")
    return results, [str(trace_path)]


def _run_pitchfork(args):
    from .bifurcation import pitchfork_check

    if args.eps is None:
        raise DomainError("--eps is required")
    rep = pitchfork_check(args.eps, args.samples)
    print(f"pitchfork: locus={rep.locus:.9f} flip_error={rep.flip_error:.2e} "
          f"exponent={rep.scaling_exponent:.3f} passed={rep.passed}")
    return {
        "locus": rep.locus,
        "flip_mu": rep.flip_mu,
        "flip_error": rep.flip_error,
        "scaling_exponent": rep.scaling_exponent,
        "passed": rep.passed,
    }, []


def _run_serve(args):
    import uvicorn

    from .server import create_app

    app = create_app(ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return {}, []


_RUNNERS = {
    "fixed-points": _run_fixed_points,
    "loci": _run_loci,
    "orbit": _run_orbit,
    "preimages": _run_preimages,
    "cloud": _run_cloud,
    "curve-preimage": _run_curve_preimage,
    "gamma": _run_gamma,
    "gamma-seq": _run_gamma_seq,
    "basin": _run_basin,
    "attractor": _run_attractor,
    "components": _run_components,
    "hopf": _run_hopf,
    "pitchfork": _run_pitchfork,
    "serve": _run_serve,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 1 if e.code not in (0, None) else 0
    try:
        args = _apply_config(args, argv)
    except SystemExit as e:
        print(e, file=sys.stderr)
        return 1
    threads = args.threads
    if threads is None and os.environ.get("COUPLED_MAP_THREADS"):
        threads = int(os.environ["COUPLED_MAP_THREADS"])
    _kernels.set_threads(threads)
    np.random.seed(args.seed)
    try:
        results, outputs = _RUNNERS[args.command](args)
    except ConvergenceError as e:
        print(f"did not converge: {e}", file=sys.stderr)
        return 3
    except (DomainError, ValueError) as e:
        print(f"domain error: {e}", file=sys.stderr)
        return 2
    if args.command != "serve":
        out = getattr(args, "out", Path("out"))
        out.mkdir(parents=True, exist_ok=True)
        manifest_path = out / f"{args.command.replace('-', '_')}_manifest.json"
        imaging.write_manifest(
            manifest_path, args.command, emit_config(args), outputs, results
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
