"""Tests for the batch runner: config validation, dispatch, persistence.

The norms fixture value 1/11 is the closed form 1/((k+1)^2 - k^2) at k = 5;
everything else checks plumbing invariants (strict field validation, output
files existing and parsing, byte-identical reruns, failure flagging) rather
than numerics, which the module-level suites already pin.
"""

import json
import math
from pathlib import Path

import pytest

from cyclab.experiments import (
    ConfigError,
    ExperimentConfig,
    NumericalFailure,
    run,
    validate,
)
from cyclab.presets import (
    CATALOGUE,
    EPS_DECADE,
    build_function,
    build_set,
    moebius_gap_series,
)
from cyclab.fourier import SpaceIndex, norm_ap_beta


def read_csv(path):
    lines = Path(path).read_text().strip().split("\n")
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    return header, rows


class TestConfigValidation:
    def test_unknown_top_level_field(self):
        with pytest.raises(ConfigError, match="unknown config fields"):
            ExperimentConfig.from_json_obj(
                {"experiment": "norms", "parameters": {}, "extra": 1}
            )

    def test_unknown_experiment(self):
        with pytest.raises(ConfigError, match="unknown experiment"):
            ExperimentConfig.from_json_obj({"experiment": "mystery"})

    def test_unknown_parameter(self):
        config = ExperimentConfig.from_json_obj(
            {"experiment": "classify", "parameters": {"dim": 0.5, "seed": 7}}
        )
        with pytest.raises(ConfigError, match="unknown parameters: seed"):
            validate(config)

    def test_missing_required_parameter(self):
        config = ExperimentConfig.from_json_obj(
            {"experiment": "classify", "parameters": {}}
        )
        with pytest.raises(ConfigError, match="missing parameters: dim"):
            validate(config)

    @pytest.mark.parametrize(
        "experiment,params,message",
        [
            ("decay", {"set": "middle_thirds", "gamma": -1.0}, "gamma"),
            ("decay", {"set": "middle_thirds", "grid": 1000}, "power of two"),
            ("decay", {"set": "middle_thirds", "eps": [1e-2, 1e-1]}, "decreasing"),
            ("decay", {"set": "middle_thirds", "p": 3.0}, "p must"),
            ("decay", {"set": "nowhere"}, "unknown set preset"),
            ("norms", {}, "exactly one of"),
            ("norms", {"preset": "h_k", "coeffs": [[0, 1.0, 0.0]]}, "exactly one of"),
            ("norms", {"coeffs": [[0, 1.0]]}, "triples"),
            ("certify", {"preset": "z_minus_1", "p": 1.5, "beta": 0.5}, "no cyclic"),
            ("certify", {"preset": "z_minus_1", "support": "diag"}, "support"),
            ("certify", {"preset": "z_minus_1", "degree_budget": -2}, "degree_budget"),
            ("kel_ratio", {"set": "middle_thirds", "delta_prime": 0.5}, "delta_prime"),
            ("classify", {"dim": 1.5}, "dim must"),
            ("classify", {"dim": 0.5, "smoothness": "wobbly"}, "smoothness"),
        ],
    )
    def test_rejected_parameters(self, experiment, params, message):
        config = ExperimentConfig.from_json_obj(
            {"experiment": experiment, "parameters": params}
        )
        with pytest.raises(ConfigError, match=message):
            validate(config)

    def test_validation_happens_before_any_write(self, tmp_path):
        out = tmp_path / "never"
        with pytest.raises(ConfigError):
            run(
                {
                    "experiment": "decay",
                    "parameters": {"set": "middle_thirds", "gamma": -1.0},
                    "output_dir": str(out),
                }
            )
        assert not out.exists()


class TestPresets:
    def test_catalogue_names(self):
        names = {entry["name"] for entry in CATALOGUE}
        assert {"middle_thirds", "non_carleson_n2", "h_k",
                "smooth_vanishing", "z_minus_1"} <= names

    def test_every_example_config_validates(self):
        for entry in CATALOGUE:
            config = ExperimentConfig.from_json_obj(dict(entry["example_config"]))
            validate(config)

    def test_every_example_config_runs(self, tmp_path):
        for entry in CATALOGUE:
            obj = dict(entry["example_config"])
            obj["output_dir"] = str(tmp_path / entry["name"])
            manifest = run(obj)
            assert manifest.status == "ok"

    def test_moebius_gap_series_norm_identity(self):
        # adaptive truncation keeps the closed form exact at large k
        for k, p in [(1, 2.0), (5, 2.0), (50, 1.25), (50, 2.0)]:
            f = moebius_gap_series(k)
            norm = norm_ap_beta(f, SpaceIndex(p=p, beta=0.0))
            want = 1.0 / ((k + 1) ** p - k**p)
            assert abs(norm**p - want) < 1e-11

    def test_build_set_rejects_unknown(self):
        with pytest.raises(ValueError):
            build_set("enigma")

    def test_build_function_rejects_unknown(self):
        with pytest.raises(ValueError):
            build_function("enigma", {})

    def test_eps_decade_is_decreasing(self):
        assert all(a > b for a, b in zip(EPS_DECADE, EPS_DECADE[1:]))
        assert len(EPS_DECADE) == 6


class TestRunOutputs:
    def test_norms_h5_closed_form(self, tmp_path):
        manifest = run(
            {
                "experiment": "norms",
                "parameters": {"preset": "h_k", "k": 5, "p": 2.0},
                "output_dir": str(tmp_path),
            }
        )
        assert manifest.status == "ok"
        header, rows = read_csv(tmp_path / "norms.csv")
        assert header == ["label", "p", "beta", "norm", "norm_pow_p"]
        assert rows[0][0] == "h_5"
        assert abs(float(rows[0][4]) - 1.0 / 11.0) < 1e-9

    def test_decay_csv_columns(self, tmp_path):
        run(
            {
                "experiment": "decay",
                "parameters": {
                    "set": "middle_thirds",
                    "depth": 8,
                    "gamma": 1.0,
                    "grid": 2048,
                    "p": 1.5,
                    "eps": [1e-1, 1e-2, 1e-3],
                },
                "output_dir": str(tmp_path),
            }
        )
        header, rows = read_csv(tmp_path / "decay.csv")
        assert header == ["eps", "M_eps", "norm", "ratio"]
        assert len(rows) == 3
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["verdict"] in ("decays", "stalls")

    def test_manifest_lists_existing_parsable_outputs(self, tmp_path):
        manifest = run(
            {
                "experiment": "cantor",
                "parameters": {"set": "middle_thirds", "depth": 6},
                "output_dir": str(tmp_path),
            }
        )
        assert manifest.outputs
        for name in manifest.outputs:
            path = tmp_path / name
            assert path.exists()
            if name.endswith(".json"):
                json.loads(path.read_text())
            else:
                header, rows = read_csv(path)
                assert header and rows
        on_disk = json.loads((tmp_path / "manifest.json").read_text())
        assert on_disk["status"] == "ok"
        assert on_disk["version"]
        assert on_disk["wall_clock_s"] >= 0.0
        assert on_disk["outputs"] == manifest.outputs

    def test_reruns_are_byte_identical(self, tmp_path):
        params = {
            "set": "middle_thirds",
            "depth": 8,
            "gamma": 1.0,
            "delta_prime": 1.2,
            "grid": 1024,
            "eps": [1e-1, 1e-2],
        }
        a = tmp_path / "a"
        b = tmp_path / "b"
        for out in (a, b):
            run(
                {
                    "experiment": "kel_ratio",
                    "parameters": dict(params),
                    "output_dir": str(out),
                }
            )
        assert (a / "kel_ratio.csv").read_bytes() == (b / "kel_ratio.csv").read_bytes()
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()

    def test_certify_reports_truncation_tail(self, tmp_path):
        run(
            {
                "experiment": "certify",
                "parameters": {
                    "preset": "smooth_vanishing",
                    "set": "middle_thirds",
                    "depth": 6,
                    "gamma": 1.0,
                    "grid": 2048,
                    "truncate": 256,
                    "p": 1.5,
                    "degree_budget": 64,
                    "epsilon_target": 0.25,
                },
                "output_dir": str(tmp_path),
            }
        )
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["truncation_tail"] > 0.0
        assert report["verdict"] in ("certified", "bicyclic_only", "failed")
        header, rows = read_csv(tmp_path / "certify.csv")
        assert header == ["degree", "bicyclic_norm", "shift_norm"]

    def test_szego_rows_track_bound(self, tmp_path):
        run(
            {
                "experiment": "szego",
                "parameters": {"preset": "h_k", "k": 3, "p": 2.0,
                               "degrees": [25, 50, 100, 200]},
                "output_dir": str(tmp_path),
            }
        )
        header, rows = read_csv(tmp_path / "szego.csv")
        assert header == ["degree", "shift_norm", "szego_bound"]
        norms = [float(r[1]) for r in rows]
        bound = float(rows[0][2])
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
        assert abs(norms[-1] - 0.25) < 1e-3
        assert abs(bound - 0.25) < 1e-6

    def test_classify_row(self, tmp_path):
        run(
            {
                "experiment": "classify",
                "parameters": {"dim": 0.5, "p": 1.5, "beta": 0.5},
                "output_dir": str(tmp_path),
            }
        )
        header, rows = read_csv(tmp_path / "classify.csv")
        assert rows[0][-1] == "no_cyclic_vectors"

    def test_outer_center_values_normalized(self, tmp_path):
        run(
            {
                "experiment": "outer",
                "parameters": {
                    "set": "middle_thirds",
                    "depth": 6,
                    "gamma": 1.0,
                    "grid": 2048,
                    # eps below 1e-2 is not resolved by this grid, so the
                    # leakage figures there would be meaningless
                    "eps": [1e-1, 1e-2],
                },
                "output_dir": str(tmp_path),
            }
        )
        header, rows = read_csv(tmp_path / "outer.csv")
        assert header == ["eps", "m_eps", "value_at_zero", "leakage"]
        for row in rows:
            assert abs(float(row[2]) - 1.0) < 1e-6
            # the modulus sharpens as eps shrinks, so leakage grows toward
            # the grid limit; the bound here only guards against gross
            # one-sidedness failures
            assert float(row[3]) < 1e-4


class TestNumericalFailure:
    def test_flagged_manifest_and_exception(self, tmp_path):
        with pytest.raises(NumericalFailure, match="eps too large"):
            run(
                {
                    "experiment": "kel_ratio",
                    "parameters": {
                        "set": "middle_thirds",
                        "depth": 8,
                        "gamma": 1.0,
                        "delta_prime": 1.2,
                        "grid": 1024,
                        "eps": [20.0, 10.0],
                    },
                    "output_dir": str(tmp_path),
                }
            )
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["status"] == "numerical_failure"
        assert "eps too large" in manifest["error"]
        for name in manifest["outputs"]:
            assert (tmp_path / name).exists()
