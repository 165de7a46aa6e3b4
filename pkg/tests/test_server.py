import base64
import io
import threading
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from clmlab.server import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app(), raise_server_exceptions=False)


class TestLoci:
    def test_values(self, client):
        r = client.get("/api/loci", params={"eps": 0.25})
        assert r.status_code == 200
        body = r.json()
        assert body["eps"] == 0.25
        assert body["mu0"] == pytest.approx(2.0)
        assert body["mu1"] == pytest.approx(6.0)
        assert body["muPrime"] == pytest.approx(3.2360679774997896)
        assert body["mu0Prime"] is None and body["mu2"] is None

    def test_stateless_identical_responses(self, client):
        a = client.get("/api/loci", params={"eps": -0.9}).json()
        b = client.get("/api/loci", params={"eps": -0.9}).json()
        assert a == b

    def test_malformed_query_is_400(self, client):
        assert client.get("/api/loci", params={"eps": "spam"}).status_code == 400


class TestOrbit:
    def test_fixed_point(self, client):
        r = client.post(
            "/api/orbit",
            json={"mu": 2.0, "epsilon": 0.25, "z0": [0.0, 0.0], "steps": 50},
        )
        assert r.status_code == 200
        body = r.json()
        assert body["verdict"] == "bounded"
        assert body["z0"] == [0.0, 0.0]
        assert all(s == [0.0, 0.0] for s in body["samples"])

    def test_missing_field_is_400(self, client):
        r = client.post("/api/orbit", json={"mu": 2.0, "epsilon": 0.25})
        assert r.status_code == 400

    def test_degenerate_epsilon_is_400(self, client):
        r = client.post(
            "/api/orbit", json={"mu": 2.0, "epsilon": 0.5, "z0": [0.1, 0.2]}
        )
        assert r.status_code == 400


class TestPreimages:
    def test_origin_depth_one(self, client):
        r = client.post(
            "/api/preimages",
            json={"mu": 2.0, "epsilon": 0.25, "root": [0.0, 0.0], "depth": 1},
        )
        assert r.status_code == 200
        levels = r.json()["levels"]
        assert len(levels[1]) == 4


class TestGamma:
    def test_construction(self, client):
        r = client.post("/api/gamma", json={"mu": 1.6, "epsilon": 0.2, "grid": 256})
        assert r.status_code == 200
        body = r.json()
        assert body["converged"] is True
        assert body["bottom"][0] == [0.0, 0.0]

    def test_above_mu1_is_422(self, client):
        r = client.post("/api/gamma", json={"mu": 2.9, "epsilon": -0.9})
        assert r.status_code == 422
        assert "error" in r.json()


class TestBasin:
    def test_png_payload_maps_to_window(self, client):
        from PIL import Image

        r = client.post(
            "/api/basin",
            json={
                "mu": 1.6, "epsilon": 0.2,
                "window": [-0.25, 1.25, -0.25, 1.25],
                "resolution": 64, "nMax": 200,
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["partial"] is False
        img = Image.open(io.BytesIO(base64.b64decode(body["png"])))
        assert img.size == tuple(body["resolution"])
        assert body["window"]["xmin"] == -0.25
        assert body["boundedCells"] > 0

    def test_oversized_raster_is_413(self, client):
        r = client.post(
            "/api/basin", json={"mu": 1.6, "epsilon": 0.2, "resolution": 4096}
        )
        assert r.status_code == 413

    def test_cancellation_returns_partial(self, client):
        done = {}

        def render():
            done["resp"] = client.post(
                "/api/basin",
                json={
                    "mu": 1.6, "epsilon": 0.2, "resolution": 512,
                    "nMax": 200000, "jobId": "job-1",
                },
            )

        t = threading.Thread(target=render)
        t.start()
        time.sleep(0.4)
        c = client.delete("/api/jobs/job-1")
        t.join(timeout=120)
        assert not t.is_alive()
        resp = done["resp"]
        assert resp.status_code == 200
        if c.status_code == 200:  # cancelled in flight
            assert resp.json()["partial"] is True

    def test_unknown_job_is_404(self, client):
        assert client.delete("/api/jobs/nope").status_code == 404


class TestAttractorAndHopf:
    def test_attractor_fixed_point(self, client):
        r = client.post(
            "/api/attractor",
            json={
                "mu": 2.0, "epsilon": -0.5, "z0": [0.3, 0.4],
                "iterations": 100000, "transient": 1000, "resolution": 128,
            },
        )
        assert r.status_code == 200
        body = r.json()
        assert body["period"] == 1
        assert body["occupiedCells"] == 1

    def test_attractor_escaping_seed_is_422(self, client):
        r = client.post(
            "/api/attractor",
            json={"mu": 2.0, "epsilon": 0.25, "z0": [5.0, 5.0], "iterations": 1000},
        )
        assert r.status_code == 422

    def test_hopf_bracket(self, client):
        r = client.post(
            "/api/hopf",
            json={"epsilon": -0.9, "muStart": 2.4, "muEnd": 2.6, "width": 1e-3},
        )
        assert r.status_code == 200
        body = r.json()
        assert 2.525 <= body["muLo"] < body["muHi"] < 2.53
