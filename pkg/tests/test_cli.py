"""CLI and configuration tests: validation, artifacts, and reproducibility."""

import csv
import json
import os

import numpy as np
import pytest

from floquet_torus.cli import main
from floquet_torus.config import ConfigError, config_hash, validate_config


def write_config(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh)
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestValidateConfig:
    def test_minimal_defaults(self):
        cfg = validate_config({"metric": {"kind": "flat"}})
        assert cfg["grid_points"] == 16
        assert cfg["truncation"] == {"j_cut": 16, "k_count": 64, "k_max": 8}
        assert cfg["output"]["format"] == "csv"

    def test_idempotent_normalization(self):
        cfg = validate_config({"tau_sweep": {"start": 4, "stop": 16, "factor": 2}})
        again = validate_config(json.loads(json.dumps(cfg)))
        assert again == cfg
        assert config_hash(again) == config_hash(cfg)

    def test_singular_alpha_guard(self):
        with pytest.raises(ConfigError, match="L\\^\\(n/2\\)"):
            validate_config({"potential": {"kind": "singular_power", "alpha": 2.5}})

    def test_errors_enumerated_not_just_first(self):
        bad = {
            "grid_points": 7,
            "potential": {"kind": "singular_power", "alpha": 2.5},
            "output": {"format": "xml"},
        }
        with pytest.raises(ConfigError) as err:
            validate_config(bad)
        assert len(err.value.errors) == 3

    def test_tau_range_expansion(self):
        cfg = validate_config({"tau_sweep": {"start": 4, "stop": 64, "factor": 2}})
        assert cfg["tau_sweep"] == [4.0, 8.0, 16.0, 32.0, 64.0]


class TestCliRuns:
    def test_unknown_subcommand_exits_2(self, tmp_path, capsys):
        with pytest.raises(SystemExit):
            main(["frobnicate", "--config", "x.json"])

    def test_malformed_config_exits_2(self, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text("{not json")
        assert main(["carleman", "--config", str(cfg)]) == 2

    def test_carleman_artifacts_and_exit(self, tmp_path):
        cfg = write_config(
            tmp_path / "c.json",
            {"grid_points": 8, "output": {"directory": str(tmp_path / "out")}},
        )
        code = main(["carleman", "--config", cfg, "--tau", "1,2,5,10"])
        assert code == 0
        rows = read_csv(tmp_path / "out" / "carleman.csv")
        assert rows[0] == ["tau", "min_modulus", "witness_j", "witness_lambda", "tail_certified", "pass"]
        for row in rows[1:]:
            assert float(row[1]) >= float(row[0])
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert set(manifest) == {"config_hash", "version", "seed", "started", "finished"}

    def test_bands_free_case(self, tmp_path):
        cfg = write_config(
            tmp_path / "b.json",
            {
                "grid_points": 8,
                "bands": 1,
                "theta_path": {"axis": 0, "count": 9},
                "output": {"directory": str(tmp_path / "out")},
            },
        )
        assert main(["bands", "--config", cfg]) == 0
        rows = read_csv(tmp_path / "out" / "bands.csv")
        assert rows[0][:4] == ["theta_1", "theta_2", "theta_3", "band_index"]
        for row in rows[1:]:
            t1 = float(row[0])
            lam = float(row[4])
            expect = min((m + t1) ** 2 for m in range(-3, 4))
            assert abs(lam - expect) < 1e-10

    def test_series_s_artifact(self, tmp_path):
        cfg = write_config(
            tmp_path / "s.json",
            {"grid_points": 8, "tau_sweep": [4, 8], "output": {"directory": str(tmp_path / "out")}},
        )
        assert main(["series-s", "--config", cfg]) == 0
        report = json.loads((tmp_path / "out" / "series-s.json").read_text())
        assert report["verdict"] == "pass"
        rows = read_csv(tmp_path / "out" / "series-s.csv")
        assert rows[0] == ["tau", "m", "value", "tail_bound", "value_times_tau"]

    def test_thomas_scan_artifact(self, tmp_path):
        cfg = write_config(
            tmp_path / "t.json",
            {
                "grid_points": 8,
                "tau_sweep": [4, 6, 8],
                "potential": {"kind": "trig", "terms": [{"amp": 3.0, "mode": [1, 0, 0]}]},
                "truncation": {"j_cut": 12},
                "output": {"directory": str(tmp_path / "out")},
            },
        )
        assert main(["thomas", "--config", cfg]) == 0
        rows = read_csv(tmp_path / "out" / "thomas.csv")
        assert rows[0] == ["tau", "sigma_min", "truncation_J", "truncation_K"]
        for row in rows[1:]:
            assert float(row[1]) >= float(row[0]) - 3.0 - 1e-6

    def test_gelfand_check(self, tmp_path):
        cfg = write_config(
            tmp_path / "g.json",
            {"grid_points": 8, "supercells": 2, "output": {"directory": str(tmp_path / "out")}},
        )
        assert main(["gelfand-check", "--config", cfg]) == 0
        report = json.loads((tmp_path / "out" / "gelfand-check.json").read_text())
        assert report["verdict"] == "pass"

    def test_split_q(self, tmp_path):
        cfg = write_config(
            tmp_path / "q.json",
            {
                "grid_points": 16,
                "potential": {"kind": "singular_power", "alpha": 1.5},
                "output": {"directory": str(tmp_path / "out")},
            },
        )
        assert main(["split-q", "--config", cfg, "--epsilon", "0.1"]) == 0
        rows = read_csv(tmp_path / "out" / "split-q.csv")
        assert float(rows[1][1]) <= 0.1

    def test_conformal_subcommand(self, tmp_path):
        cfg = write_config(
            tmp_path / "cf.json",
            {
                "grid_points": 32,
                "metric": {
                    "kind": "transversal",
                    "conformal_factor": {"const": 1.0, "terms": [{"amp": 0.2, "mode": [1, 0, 0], "phase": -1.5707963267948966}]},
                    "transverse": {"kind": "flat"},
                },
                "output": {"directory": str(tmp_path / "out")},
            },
        )
        assert main(["conformal", "--config", cfg]) == 0
        report = json.loads((tmp_path / "out" / "conformal.json").read_text())
        assert all(r < 1e-6 for r in report["residuals"])

    def test_validate_config_echo(self, tmp_path, capsys):
        cfg = write_config(tmp_path / "v.json", {"grid_points": 8})
        assert main(["validate-config", "--config", cfg]) == 0
        echoed = json.loads(capsys.readouterr().out)
        assert echoed["grid_points"] == 8
        assert validate_config(echoed) == echoed

    def test_reproducible_outputs(self, tmp_path):
        doc = {"grid_points": 8, "tau_sweep": [2, 4], "output": {}}
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        cfg1 = write_config(tmp_path / "r1.json", {**doc, "output": {"directory": str(out1)}})
        cfg2 = write_config(tmp_path / "r2.json", {**doc, "output": {"directory": str(out2)}})
        assert main(["carleman", "--config", cfg1, "--seed", "7"]) == 0
        assert main(["carleman", "--config", cfg2, "--seed", "7"]) == 0
        assert (out1 / "carleman.csv").read_bytes() == (out2 / "carleman.csv").read_bytes()

    def test_transverse_spec_artifact(self, tmp_path):
        cfg = write_config(
            tmp_path / "ts.json",
            {
                "grid_points": 24,
                "metric": {
                    "kind": "transversal",
                    "transverse": {
                        "kind": "components",
                        "bandwidth": 1,
                        "entries": {
                            "0,0": {"const": 1.0, "terms": [{"amp": 0.3, "mode": [1, 0]}]},
                            "1,1": {"const": 1.0, "terms": [{"amp": 0.3, "mode": [0, 1]}]},
                        },
                    },
                },
                "truncation": {"k_max": 4, "k_count": 16, "j_cut": 8},
                "output": {"directory": str(tmp_path / "out")},
            },
        )
        assert main(["transverse-spec", "--config", cfg]) == 0
        doc = json.loads((tmp_path / "out" / "transverse-basis.json").read_text())
        lams = doc["eigenvalues"]
        assert abs(lams[0]) < 1e-8
        from floquet_torus.transverse import basis_from_artifact

        basis = basis_from_artifact(doc)
        assert basis.count == len(lams)
