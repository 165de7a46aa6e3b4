"""Local HTTP JSON service exposing the engines to the explorer UI.

Endpoints (JSON in/out, parameters echoed back in every response):

    GET    /api/loci?eps=
    POST   /api/orbit        {mu, epsilon, z0, steps?}
    POST   /api/preimages    {mu, epsilon, root, depth?, budget?}
    POST   /api/basin        {mu, epsilon, window?, resolution?, nMax?, jobId?, budgetMs?}
    POST   /api/attractor    {mu, epsilon, z0, iterations?, transient?, window?, resolution?}
    POST   /api/gamma        {mu, epsilon, grid?, tol?}
    POST   /api/hopf         {epsilon, period?, muStart, muEnd, width?, guess?}
    DELETE /api/jobs/{id}

Status codes: 200 ok, 400 malformed request, 404 unknown job, 413 raster too
large, 422 domain error (e.g. mu above mu_1 for /api/gamma), 504 budget
exhausted (partial raster flagged ``partial``).  Rasters travel as base64
PNG plus window metadata so clients can map pixels to plane coordinates.
The service is stateless apart from the cancellation registry.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import imaging
from .core import ParamPoint, loci
from .errors import ClmError, DomainError, NotBounded
from .geometry import Polyline
from .invariant_curve import build_gamma
from .orbits import estimate_attractor, iterate_forward
from .preimage import preimage_tree
from .rasters import render_escape

RASTER_BYTE_CAP = 16 * 2**20
DEFAULT_WINDOW = (-0.25, 1.25, -0.25, 1.25)


class JobRegistry:
    """Cancellation events keyed by client-supplied job ids."""

    def __init__(self):
        self._lock = threading.Lock()
        self._events: dict[str, threading.Event] = {}

    def register(self, job_id: str) -> threading.Event:
        with self._lock:
            ev = self._events.setdefault(job_id, threading.Event())
        return ev

    def cancel(self, job_id: str) -> bool:
        with self._lock:
            ev = self._events.get(job_id)
        if ev is None:
            return False
        ev.set()
        return True

    def forget(self, job_id: str):
        with self._lock:
            self._events.pop(job_id, None)


class OrbitRequest(BaseModel):
    mu: float
    epsilon: float
    z0: tuple[float, float]
    steps: int = Field(default=10000, ge=0, le=10**8)


class PreimagesRequest(BaseModel):
    mu: float
    epsilon: float
    root: tuple[float, float]
    depth: int = Field(default=8, ge=0, le=64)
    budget: int = Field(default=200000, ge=0, le=10**7)


class BasinRequest(BaseModel):
    mu: float
    epsilon: float
    window: tuple[float, float, float, float] = DEFAULT_WINDOW
    resolution: int = Field(default=512, ge=2, le=4096)
    nMax: int = Field(default=500, ge=1, le=10**6)
    jobId: str | None = None
    budgetMs: int | None = Field(default=None, ge=1)


class AttractorRequest(BaseModel):
    mu: float
    epsilon: float
    z0: tuple[float, float]
    iterations: int = Field(default=10**6, ge=100, le=10**8)
    transient: int = Field(default=10**4, ge=0)
    window: tuple[float, float, float, float] = (0.0, 1.0, 0.0, 1.0)
    resolution: int = Field(default=512, ge=2, le=2048)


class GammaRequest(BaseModel):
    mu: float
    epsilon: float
    grid: int = Field(default=2048, ge=16, le=1 << 16)
    tol: float = Field(default=1e-10, gt=0)


class HopfRequest(BaseModel):
    epsilon: float
    period: int = Field(default=2, ge=1, le=64)
    muStart: float
    muEnd: float
    width: float = Field(default=1e-5, gt=0)
    guess: tuple[float, float] | None = None


def _raster_payload(raster) -> dict:
    rgb = imaging.colorize(raster)
    return {
        "png": imaging.png_base64(rgb),
        "window": {
            "xmin": raster.window[0],
            "xmax": raster.window[1],
            "ymin": raster.window[2],
            "ymax": raster.window[3],
        },
        "resolution": list(raster.resolution),
        "partial": raster.partial,
    }


def create_app(ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="coupled-logistic-map lab", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origin_regex=r"^https?://(localhost|127\.0\.0\.1)(:\d+)?$",
        allow_methods=["*"],
        allow_headers=["*"],
    )
    jobs = JobRegistry()

    @app.exception_handler(RequestValidationError)
    async def _invalid(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": {"code": 400, "message": str(exc)}})

    @app.exception_handler(ValueError)
    async def _bad_value(request: Request, exc: ValueError):
        # parameter-rule rejections (degenerate epsilon etc.)
        return JSONResponse(status_code=400, content={"error": {"code": 400, "message": str(exc)}})

    @app.exception_handler(DomainError)
    async def _domain(request: Request, exc: DomainError):
        return JSONResponse(status_code=422, content={"error": {"code": 422, "message": str(exc)}})

    @app.exception_handler(ClmError)
    async def _engine(request: Request, exc: ClmError):
        return JSONResponse(status_code=422, content={"error": {"code": 422, "message": str(exc)}})

    @app.get("/api/loci")
    def get_loci(eps: float):
        vals = loci(eps)
        return {
            "eps": eps,
            "mu0": vals.mu0,
            "mu1": vals.mu1,
            "muPrime": vals.mu_prime,
            "mu0Prime": vals.mu0_prime,
            "mu2": vals.mu2,
        }

    @app.post("/api/orbit")
    def post_orbit(req: OrbitRequest):
        p = ParamPoint(req.mu, req.epsilon)
        res = iterate_forward(p, req.z0, req.steps)
        verdict = "escaped" if res.escaped else "bounded"
        return {
            "mu": req.mu,
            "epsilon": req.epsilon,
            "z0": list(req.z0),
            "verdict": verdict,
            "escapeStep": res.verdict.step if res.escaped else None,
            "samples": res.samples[:20000].tolist(),
            "syncGap": res.sync_gap[:20000].tolist(),
            "stride": res.stride,
        }

    @app.post("/api/preimages")
    def post_preimages(req: PreimagesRequest):
        p = ParamPoint(req.mu, req.epsilon)
        tree = preimage_tree(p, req.root, req.depth, req.budget)
        return {
            "mu": req.mu,
            "epsilon": req.epsilon,
            "root": list(req.root),
            "levels": [lv.tolist() for lv in tree.levels],
            "budgetExhausted": tree.budget_exhausted,
        }

    @app.post("/api/basin")
    def post_basin(req: BasinRequest):
        if req.resolution * req.resolution * 3 > RASTER_BYTE_CAP:
            return JSONResponse(
                status_code=413,
                content={"error": {"code": 413, "message": "raster exceeds the 16 MiB cap"}},
            )
        p = ParamPoint(req.mu, req.epsilon)
        cancel = jobs.register(req.jobId) if req.jobId else None
        try:
            raster = render_escape(
                p, tuple(req.window), req.resolution, req.nMax,
                cancel=cancel,
                time_budget=req.budgetMs / 1000.0 if req.budgetMs else None,
                row_block=16,
            )
        finally:
            if req.jobId:
                jobs.forget(req.jobId)
        body = {
            "mu": req.mu,
            "epsilon": req.epsilon,
            "nMax": req.nMax,
            "jobId": req.jobId,
            **_raster_payload(raster),
            "boundedCells": int((raster.cells == -1).sum()),
        }
        if raster.partial and not (cancel is not None and cancel.is_set()):
            return JSONResponse(status_code=504, content=body)
        return body

    @app.post("/api/attractor")
    def post_attractor(req: AttractorRequest):
        p = ParamPoint(req.mu, req.epsilon)
        try:
            est = estimate_attractor(
                p, req.z0, n_total=req.iterations, n_transient=req.transient,
                window=tuple(req.window), resolution=req.resolution,
            )
        except NotBounded as e:
            return JSONResponse(
                status_code=422,
                content={"error": {"code": 422, "message": f"orbit escaped at step {e.step}"}},
            )
        ys, xs = est.occupied.nonzero()
        return {
            "mu": req.mu,
            "epsilon": req.epsilon,
            "z0": list(req.z0),
            "period": est.period,
            "occupiedCells": est.occupied_cells,
            "areaEstimate": est.area_estimate,
            "fat": est.is_fat,
            "window": list(req.window),
            "resolution": req.resolution,
            "cells": np.column_stack([xs, ys]).tolist() if len(xs) < 200000 else [],
        }

    @app.post("/api/gamma")
    def post_gamma(req: GammaRequest):
        p = ParamPoint(req.mu, req.epsilon)
        res = build_gamma(p, n=req.grid, tol=req.tol)
        return {
            "mu": req.mu,
            "epsilon": req.epsilon,
            "converged": res.converged,
            "iterations": res.iterations,
            "regime": res.regime,
            "bottom": res.curve.bottom.vertices.tolist(),
            "assembled": res.curve.assembled.vertices.tolist(),
        }

    @app.post("/api/hopf")
    def post_hopf(req: HopfRequest):
        from .bifurcation import hopf_bracket
        from ._kernels import orbit_after

        guess = req.guess
        if guess is None:
            mode = 1 if req.epsilon < 0 else 0
            pts, esc = orbit_after(req.muStart, req.epsilon, 0.31, 0.52, 200000, 2, mode)
            if esc >= 0:
                raise DomainError("automatic seeding escaped; supply a guess")
            guess = tuple(pts[0])
        br = hopf_bracket(req.epsilon, req.period, req.muStart, req.muEnd, req.width, guess)
        return {
            "epsilon": req.epsilon,
            "period": req.period,
            "muLo": br.mu_lo,
            "muHi": br.mu_hi,
            "modulusLo": br.modulus_lo,
            "modulusHi": br.modulus_hi if br.modulus_hi == br.modulus_hi else None,
            "orbitLostAtHi": br.orbit_lost_at_hi,
            "refined": br.refined,
        }

    @app.delete("/api/jobs/{job_id}")
    def delete_job(job_id: str):
        if jobs.cancel(job_id):
            return {"cancelled": True, "jobId": job_id}
        return JSONResponse(
            status_code=404,
            content={"error": {"code": 404, "message": f"unknown job {job_id!r}"}},
        )

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
