import json

import numpy as np
import pytest

from clmlab.cli import build_parser, emit_config, main


def run(args):
    return main(args)


class TestExitCodes:
    def test_usage_error(self, capsys):
        assert run(["orbit", "--mu", "nope"]) == 1

    def test_unknown_flag(self):
        assert run(["orbit", "--mu", "2", "--eps", "0.2", "--bogus"]) == 1

    def test_domain_error_is_2(self, tmp_path):
        code = run(
            ["gamma", "--mu", "2.9", "--eps", "-0.9", "--out", str(tmp_path)]
        )  # above mu_1
        assert code == 2

    def test_degenerate_eps_is_2(self, tmp_path):
        assert run(["fixed-points", "--mu", "2", "--eps", "0.5", "--out", str(tmp_path)]) == 2

    def test_non_convergence_is_3(self, tmp_path):
        code = run(
            [
                "gamma", "--mu", "3.0", "--eps", "0.3", "--grid", "256",
                "--max-iters", "2", "--tol", "1e-14", "--out", str(tmp_path),
            ]
        )
        assert code == 3


class TestRuns:
    def test_fixed_points_output(self, capsys, tmp_path):
        assert run(["fixed-points", "--mu", "2", "--eps", "0.25", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "P_mu" in out and "+0.500000000000" in out

    def test_orbit_writes_outputs_and_manifest(self, tmp_path):
        code = run(
            [
                "orbit", "--mu", "2", "--eps", "-0.5", "--z0", "0.3,0.4",
                "--steps", "2000", "--resolution", "64", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "orbit.ppm").exists()
        assert (tmp_path / "orbit.png").exists()
        manifest = json.loads((tmp_path / "orbit_manifest.json").read_text())
        assert manifest["schema"] == 1
        assert manifest["results"]["verdict"]["kind"] == "bounded"

    def test_attractor_reports_period(self, tmp_path, capsys):
        code = run(
            [
                "attractor", "--mu", "3.694", "--eps", "0.01", "--z0", "0.31,0.47",
                "--iterations", "300000", "--transient", "10000",
                "--window", "0,1,0,1", "--resolution", "256", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "attractor_manifest.json").read_text())
        assert manifest["results"]["period"] == 2
        assert manifest["results"]["area_estimate"] > 0

    def test_hopf_manifest(self, tmp_path):
        code = run(
            [
                "hopf", "--eps", "-0.9", "--period", "2", "--mu-start", "2.4",
                "--mu-end", "2.6", "--width", "1e-3", "--out", str(tmp_path),
            ]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "hopf_manifest.json").read_text())
        lo, hi = manifest["results"]["mu_lo"], manifest["results"]["mu_hi"]
        assert 2.525 <= lo < hi < 2.53
        assert (tmp_path / "hopf_trace.csv").read_text().startswith("mu,")

    def test_components_and_curve_preimage(self, tmp_path):
        assert run(
            [
                "components", "--mu", "4.03", "--eps", "0.394", "--n-max", "8",
                "--window=-0.05,1.05,-0.05,1.05", "--resolution", "256",
                "--out", str(tmp_path),
            ]
        ) == 0
        assert run(
            [
                "curve-preimage", "--mu", "4.0", "--eps", "-1.0",
                "--curve-seed", "boundary-q", "--iterations", "1",
                "--vertices", "400", "--resolution", "64", "--out", str(tmp_path),
            ]
        ) == 0
        manifest = json.loads((tmp_path / "curve_preimage_manifest.json").read_text())
        assert manifest["results"]["branches"] == 4


class TestConfigs:
    def test_config_round_trip(self, tmp_path):
        """emit -> parse -> identical effective args."""
        argv = [
            "basin", "--mu", "1.6", "--eps", "0.2", "--n-max", "120",
            "--resolution", "64", "--out", str(tmp_path / "a"),
        ]
        parser = build_parser()
        args = parser.parse_args(argv)
        emitted = emit_config(args)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps(emitted))
        args2 = parser.parse_args(["basin", "--config", str(cfg)])
        from clmlab.cli import _apply_config

        args2 = _apply_config(args2, ["--config", str(cfg)])
        assert emit_config(args2) == emitted

    def test_flags_override_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mu": 1.6, "eps": 0.2, "n-max": 80, "resolution": 32}))
        out = tmp_path / "out"
        code = run(
            [
                "basin", "--config", str(cfg), "--mu", "1.7",
                "--out", str(out),
            ]
        )
        assert code == 0
        manifest = json.loads((out / "basin_manifest.json").read_text())
        assert manifest["params"]["mu"] == 1.7  # flag wins
        assert manifest["params"]["n_max"] == 80  # config fills the rest

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"mu": 1.6, "eps": 0.2, "frobnicate": 1}))
        assert run(["basin", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_checked_in_figure_configs_parse(tmp_path):
    """Every checked-in config is valid JSON for its command."""
    from pathlib import Path

    cfg_dir = Path(__file__).resolve().parent.parent / "demos" / "configs"
    configs = sorted(cfg_dir.glob("*.json"))
    assert len(configs) >= 12
    parser = build_parser()
    from clmlab.cli import _apply_config

    for path in configs:
        data = json.loads(path.read_text())
        command = data.pop("command")
        tmp = tmp_path / (path.stem + ".json")
        tmp.write_text(json.dumps(data))
        args = parser.parse_args([command, "--config", str(tmp)])
        args = _apply_config(args, ["--config", str(tmp)])
        assert args.mu is not None or command in ("loci", "hopf", "pitchfork", "serve")
