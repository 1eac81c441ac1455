import json
import math
from pathlib import Path

import pytest

from starnoma.cli import (
    CSV_HEADER,
    config_hash,
    config_to_dict,
    load_config,
    main,
    parse_config,
)
from starnoma.errors import ConfigError

STAR_CONFIG = {
    "system": {"variant": "star-ris-noma", "bs_ris_distance": 50.0,
               "transmit_power": 1.0, "sic_mode": "genie"},
    "users": [
        {"distance": 6.0, "zone": "transmission", "elements": 8,
         "power_coefficient": 0.7},
        {"distance": 4.0, "zone": "reflection", "elements": 8,
         "power_coefficient": 0.3},
    ],
    "sweep": {"axis": "snr_db", "values": [0.0, 5.0, 10.0], "users": [1, 2]},
}


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(STAR_CONFIG))
    return path


def fast_args(extra=()):
    return list(extra) + ["--min-errors", "10", "--max-trials", "70000"]


class TestConfigParsing:
    def test_round_trip(self):
        config, _ = parse_config(STAR_CONFIG)
        config2, _ = parse_config({"system": config_to_dict(config)["system"],
                                   "users": config_to_dict(config)["users"]})
        assert config == config2
        assert config_hash(config) == config_hash(config2)

    def test_hash_insensitive_to_key_order(self):
        reordered = json.loads(json.dumps(STAR_CONFIG))
        reordered["system"] = dict(reversed(list(reordered["system"].items())))
        c1, _ = parse_config(STAR_CONFIG)
        c2, _ = parse_config(reordered)
        assert config_hash(c1) == config_hash(c2)

    def test_power_sum_violation_names_field(self):
        bad = json.loads(json.dumps(STAR_CONFIG))
        bad["users"][0]["power_coefficient"] = 0.8
        with pytest.raises(ConfigError, match="power_coefficient"):
            parse_config(bad)

    def test_unknown_field_named(self):
        bad = json.loads(json.dumps(STAR_CONFIG))
        bad["users"][0]["colour"] = "red"
        with pytest.raises(ConfigError, match="colour"):
            parse_config(bad)

    def test_missing_section(self):
        with pytest.raises(ConfigError, match="system"):
            parse_config({"users": []})

    def test_json_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{\n "system": }\n')
        with pytest.raises(ConfigError, match="line 2"):
            load_config(str(path))


class TestPointCommand:
    def test_prints_labelled_values_per_user(self, config_path, capsys):
        rc = main(["point", "--config", str(config_path), "--snr-db", "5",
                   *fast_args()])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 2
        for label in ("ber_mc=", "ci95=", "ber_closed_form=", "ber_numeric=",
                      "ber_asymptotic=", "trials=", "errors="):
            assert label in out[0]

    def test_sole_occupant_prints_no_floor(self, config_path, capsys):
        rc = main(["point", "--config", str(config_path), "--snr-db", "5",
                   "--user", "2", *fast_args()])
        assert rc == 0
        out = capsys.readouterr().out
        assert "ber_asymptotic=no-floor" in out

    def test_invalid_config_exits_one(self, tmp_path, capsys):
        bad = json.loads(json.dumps(STAR_CONFIG))
        bad["users"][0]["power_coefficient"] = 0.9
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        rc = main(["point", "--config", str(path), "--snr-db", "5"])
        assert rc == 1
        assert "power_coefficient" in capsys.readouterr().err

    def test_user_out_of_range_exits_one(self, config_path, capsys):
        rc = main(["point", "--config", str(config_path), "--snr-db", "5",
                   "--user", "7", *fast_args()])
        assert rc == 1


class TestSweepCommand:
    def test_csv_schema_and_cardinality(self, config_path, tmp_path):
        out = tmp_path / "curve.csv"
        rc = main(["sweep", "--config", str(config_path), "--out", str(out),
                   "--seed", "4", *fast_args()])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 3 * 2
        manifest = json.loads((tmp_path / "curve.csv.manifest.json").read_text())
        assert manifest["outputs"] == [str(out)]
        assert manifest["seed"] == 4
        assert len(manifest["config_hash"]) == 64

    def test_rerun_is_byte_identical(self, config_path, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (out1, out2):
            rc = main(["sweep", "--config", str(config_path), "--out", str(out),
                       "--seed", "11", *fast_args()])
            assert rc == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_json_format_mirrors_schema(self, config_path, tmp_path):
        out = tmp_path / "curve.json"
        rc = main(["sweep", "--config", str(config_path), "--out", str(out),
                   "--format", "json", *fast_args()])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert list(doc["rows"][0].keys()) == CSV_HEADER.split(",")

    def test_no_floor_column_value(self, config_path, tmp_path):
        out = tmp_path / "c.csv"
        main(["sweep", "--config", str(config_path), "--out", str(out),
              "--values", "5", "--users", "2", *fast_args()])
        row = out.read_text().splitlines()[1].split(",")
        assert row[7] == "no-floor"

    def test_unwritable_output_fails_before_compute(self, config_path, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("plain file")
        out = blocker / "sub" / "curve.csv"
        rc = main(["sweep", "--config", str(config_path), "--out", str(out),
                   "--max-trials", "1000000000", "--min-errors", "100000"])
        assert rc == 1

    def test_axis_from_flags_overrides_config(self, config_path, tmp_path):
        out = tmp_path / "el.csv"
        rc = main(["sweep", "--config", str(config_path), "--out", str(out),
                   "--axis", "elements", "--values", "4,8", "--users", "2",
                   "--snr-db", "10", *fast_args()])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 3
        assert lines[1].split(",")[0] == "4"


class TestFigureCommand:
    def test_fig2_produces_star_and_classical_curves(self, tmp_path):
        rc = main(["figure", "fig2", "--out", str(tmp_path / "f2"),
                   "--snr-values", "0,10", "--elements", "4,8",
                   *fast_args()])
        assert rc == 0
        files = sorted(p.name for p in (tmp_path / "f2").glob("*.csv"))
        assert files == ["fig2_classical.csv", "fig2_star_n4.csv", "fig2_star_n8.csv"]
        # every file carries both users' series
        for name in files:
            rows = (tmp_path / "f2" / name).read_text().splitlines()[1:]
            users = {r.split(",")[1] for r in rows}
            assert users == {"1", "2"}
        manifest = json.loads((tmp_path / "f2" / "fig2.manifest.json").read_text())
        assert len(manifest["outputs"]) == 3

    def test_fig3_requires_overrides(self, tmp_path, capsys):
        rc = main(["figure", "fig3", "--out", str(tmp_path)])
        assert rc == 1
        err = capsys.readouterr().err
        assert "fig3" in err and "--allocations" in err and "--elements" in err

    def test_fig5_requires_element_split(self, tmp_path, capsys):
        rc = main(["figure", "fig5", "--out", str(tmp_path)])
        assert rc == 1
        assert "--elements" in capsys.readouterr().err

    def test_fig5_runs_with_overrides(self, tmp_path):
        rc = main(["figure", "fig5", "--out", str(tmp_path / "f5"),
                   "--elements", "4,4,4", "--snr-values", "0,10",
                   *fast_args()])
        assert rc == 0
        rows = (tmp_path / "f5" / "fig5_three_user.csv").read_text().splitlines()[1:]
        assert {r.split(",")[1] for r in rows} == {"1", "2", "3"}

    def test_fig4_default_allocations_differ_by_tenth(self, tmp_path):
        rc = main(["figure", "fig4", "--out", str(tmp_path / "f4"),
                   "--elements", "8,12", *fast_args()])
        assert rc == 0
        files = sorted(p.name for p in (tmp_path / "f4").glob("*.csv"))
        assert files == ["fig4_a70.csv", "fig4_a80.csv"]

    def test_fig3_runs_with_overrides(self, tmp_path):
        rc = main(["figure", "fig3", "--out", str(tmp_path / "f3"),
                   "--allocations", "0.7:0.3,0.8:0.2", "--elements", "4",
                   "--snr-values", "0,10", *fast_args()])
        assert rc == 0
        files = sorted(p.name for p in (tmp_path / "f3").glob("*.csv"))
        assert files == ["fig3_a70_n4_imperfect.csv", "fig3_a70_n4_perfect.csv",
                         "fig3_a80_n4_imperfect.csv", "fig3_a80_n4_perfect.csv"]

    def test_preset_rerun_byte_identical(self, tmp_path):
        for sub in ("r1", "r2"):
            rc = main(["figure", "fig4", "--out", str(tmp_path / sub),
                       "--elements", "6,10", "--seed", "21", *fast_args()])
            assert rc == 0
        for name in ("fig4_a70.csv", "fig4_a80.csv"):
            assert ((tmp_path / "r1" / name).read_bytes()
                    == (tmp_path / "r2" / name).read_bytes())


class TestUsageErrors:
    def test_unknown_figure_name(self, tmp_path):
        rc = main(["figure", "fig9", "--out", str(tmp_path)])
        assert rc == 1

    def test_missing_required_flag(self):
        rc = main(["sweep"])
        assert rc == 1
