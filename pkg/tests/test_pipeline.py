"""Config ingestion, verdict assembly, report determinism, schema validity."""

import json
import pathlib

import jsonschema
import pytest

from lyapcenter.pipeline import (
    ConfigError,
    RunConfig,
    VERDICT_CLASSICAL,
    VERDICT_EXHIBITED,
    run,
)

ROOT = pathlib.Path(__file__).resolve().parents[1]
SCHEMA = json.loads(
    (ROOT / "src" / "lyapcenter" / "report_schema.json").read_text())


def small_ex1_config(**overrides):
    raw = {
        "potential": {"source": "radial: -2*t^2 + 5/3*t^3 - 1/4*t^4"},
        "action": {"n": 2, "blocks": [[1, 2]]},
        "finder": {"amplitudes": [0.05], "steps": 512},
    }
    raw.update(overrides)
    return RunConfig.from_dict(raw)


class TestConfigValidation:
    def test_shipped_configs_load(self):
        c1 = RunConfig.from_toml(ROOT / "configs" / "ex1.toml")
        assert c1.action.blocks == ((0, 1),)
        assert c1.conley.epsilon == 1e-3
        c2 = RunConfig.from_toml(ROOT / "configs" / "ex2.toml")
        assert c2.action.n == 4
        assert c2.finder.amplitudes == (0.05, 0.02)

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            RunConfig.from_toml(ROOT / "configs" / "nope.toml")

    def test_empty_potential_rejected(self):
        with pytest.raises(ConfigError, match="source"):
            small_ex1_config(potential={"source": "   "})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown config section"):
            small_ex1_config(extras={"x": 1})

    def test_blocks_are_one_based(self):
        with pytest.raises(ConfigError, match="out of range"):
            small_ex1_config(action={"n": 2, "blocks": [[0, 1]]})

    def test_overlapping_blocks_rejected(self):
        with pytest.raises(ConfigError, match="invalid blocks"):
            RunConfig.from_dict({
                "potential": {"source": "radial: t"},
                "action": {"n": 3, "blocks": [[1, 2], [2, 3]]},
            })

    def test_bad_tolerances_rejected(self):
        with pytest.raises(ConfigError, match="epsilon"):
            small_ex1_config(conley={"epsilon": -1.0})
        with pytest.raises(ConfigError, match="amplitudes"):
            small_ex1_config(finder={"amplitudes": []})
        with pytest.raises(ConfigError, match="method"):
            small_ex1_config(finder={"amplitudes": [0.1], "method": "euler"})

    def test_unparsable_potential_is_config_error(self):
        config = small_ex1_config(potential={"source": "radial: t +"})
        with pytest.raises(ConfigError, match="parse"):
            run(config)

    def test_dimension_mismatch_is_config_error(self):
        config = RunConfig.from_dict({
            "potential": {"source": "blockradial: omega=1, eps=1, U = t1*t2"},
            "action": {"n": 2, "blocks": [[1, 2]]},
        })
        with pytest.raises(ConfigError):
            run(config)


class TestVerdicts:
    def test_example_one_story(self):
        report = run(small_ex1_config())
        assert report.verdicts == (
            "hypotheses fail: nontrivial isotropy; degenerate orbit; "
            "no positive eigenvalue",
            VERDICT_EXHIBITED,
            "hypotheses fail: no positive eigenvalue",
        )
        middle = report.orbit_reports[1]
        assert middle["conley"]["certified"] is True
        assert middle["solutions"][0]["residual"] < 1e-9

    def test_example_two_story(self):
        config = RunConfig.from_dict({
            "potential": {"source":
                          "blockradial: omega=1, eps=1, U = -1/2*t1^2 + 1/2*t1^2*t2^4"},
            "action": {"n": 4, "blocks": [[1, 2], [3, 4]]},
            "finder": {"amplitudes": [0.05], "steps": 512},
        })
        report = run(config)
        assert report.verdicts == (VERDICT_CLASSICAL, VERDICT_EXHIBITED)
        origin = report.orbit_reports[0]
        assert origin["classical_candidate"] is True
        assert origin["conley"] is None
        orbit = report.orbit_reports[1]
        assert orbit["betas"] == [1.0]
        assert abs(orbit["solutions"][0]["period"] - 2 * 3.141592653589793) < 1e-4

    def test_every_orbit_appears_exactly_once(self):
        report = run(small_ex1_config())
        keys = [tuple(o["orbit_key"]) for o in report.orbit_reports]
        assert len(keys) == len(set(keys)) == 3


class TestReportArtifacts:
    def test_schema_validates(self):
        report = run(small_ex1_config())
        jsonschema.validate(report.to_dict(), SCHEMA)

    def test_deterministic_modulo_timestamp(self):
        a = run(small_ex1_config()).to_dict()
        b = run(small_ex1_config()).to_dict()
        a.pop("generated_at")
        b.pop("generated_at")
        assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)

    def test_writes_json_and_csv(self, tmp_path):
        out = tmp_path / "nested" / "report.json"
        csvs = tmp_path / "orbits"
        report = run(small_ex1_config(), json_out=out, csv_dir=csvs)
        on_disk = json.loads(out.read_text())
        jsonschema.validate(on_disk, SCHEMA)
        sol = report.orbit_reports[1]["solutions"][0]
        assert sol["csv"] == "orbit1_sol0.csv"
        header = (csvs / "orbit1_sol0.csv").read_text().splitlines()[0]
        assert header == "t,x1,x2,v1,v2,E"
