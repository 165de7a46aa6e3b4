"""Raster colorization and file output (binary PPM, PNG, JSON manifests).

Palette: escape times on a dark-to-light gradient, bounded cells black,
basin membership white / gray, per-component colors for label grids.
Grids are stored bottom-up; images are written top-down.
"""

from __future__ import annotations

import base64
import io
import json
from pathlib import Path

import numpy as np
from PIL import Image

from .rasters import BOUNDED, OTHER_BOUNDED, Raster, THIS_ATTRACTOR, UNRENDERED

__all__ = [
    "colorize",
    "colorize_labels",
    "save_ppm",
    "save_png",
    "png_bytes",
    "png_base64",
    "write_manifest",
]

MANIFEST_SCHEMA = 1

# escape-time gradient control points (dark blue -> orange -> near white)
_GRADIENT = np.array(
    [
        [15, 15, 60],
        [40, 60, 130],
        [90, 120, 200],
        [230, 170, 60],
        [250, 235, 180],
    ],
    dtype=float,
)


def _gradient_color(u: np.ndarray) -> np.ndarray:
    """Sample the gradient at u in [0, 1]."""
    pos = np.clip(u, 0.0, 1.0) * (len(_GRADIENT) - 1)
    lo = np.floor(pos).astype(int)
    hi = np.minimum(lo + 1, len(_GRADIENT) - 1)
    frac = (pos - lo)[..., None]
    return ((1.0 - frac) * _GRADIENT[lo] + frac * _GRADIENT[hi]).astype(np.uint8)


def colorize(r: Raster) -> np.ndarray:
    """RGB image of a raster, rows flipped to screen orientation."""
    cells = r.cells
    rgb = np.zeros((*cells.shape, 3), dtype=np.uint8)
    escaped = cells >= 0
    if escaped.any():
        k = cells[escaped].astype(float)
        # log scaling keeps contrast across slow escapes near the boundary
        u = np.log1p(k) / max(np.log1p(float(cells.max())), 1.0)
        rgb[escaped] = _gradient_color(u)
    if r.kind == "basin":
        rgb[cells == THIS_ATTRACTOR] = (255, 255, 255)
        rgb[cells == OTHER_BOUNDED] = (110, 110, 110)
    else:
        rgb[cells == BOUNDED] = (0, 0, 0)
    rgb[cells == UNRENDERED] = (30, 0, 30)
    return rgb[::-1]


def colorize_labels(labels: np.ndarray) -> np.ndarray:
    """Distinct color per component label; 0 (background) stays black."""
    rng = np.random.default_rng(12345)
    n = int(labels.max())
    palette = np.vstack([[0, 0, 0], rng.integers(60, 255, size=(max(n, 1), 3))])
    return palette[labels].astype(np.uint8)[::-1]


def save_ppm(rgb: np.ndarray, path) -> None:
    """Binary portable pixmap (magic P6, maxval 255)."""
    h, w, _ = rgb.shape
    with open(path, "wb") as f:
        f.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(rgb, dtype=np.uint8).tobytes())


def save_png(rgb: np.ndarray, path) -> None:
    Image.fromarray(rgb, mode="RGB").save(path, format="PNG")


def png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def png_base64(rgb: np.ndarray) -> str:
    return base64.b64encode(png_bytes(rgb)).decode("ascii")


def write_manifest(path, command: str, params: dict, outputs: list[str], results: dict) -> dict:
    """Versioned JSON result manifest next to the image outputs."""
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "params": params,
        "outputs": outputs,
        "results": results,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True))
    return manifest
