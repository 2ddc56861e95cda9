"""Command-line behavior: subcommands, exit codes, printed output."""

import json
import pathlib

import pytest

from lyapcenter.cli import main

ROOT = pathlib.Path(__file__).resolve().parents[1]

SMALL_EX1 = """
[potential]
source = "radial: -2*t^2 + 5/3*t^3 - 1/4*t^4"

[action]
n = 2
blocks = [[1, 2]]

[finder]
amplitudes = [0.05]
steps = 512
"""


@pytest.fixture
def ex1_config(tmp_path):
    path = tmp_path / "ex1_small.toml"
    path.write_text(SMALL_EX1)
    return path


class TestRun:
    def test_json_to_stdout(self, ex1_config, capsys):
        assert main(["run", str(ex1_config)]) == 0
        report = json.loads(capsys.readouterr().out)
        verdicts = [o["verdict"] for o in report["orbits"]]
        assert verdicts[1] == "theorem applies; orbit exhibited"
        assert verdicts[2] == "hypotheses fail: no positive eigenvalue"

    def test_json_out_flag_writes_file_and_prints_summary(self, ex1_config,
                                                          tmp_path, capsys):
        out = tmp_path / "report.json"
        assert main(["run", str(ex1_config), "--json-out", str(out)]) == 0
        printed = capsys.readouterr().out
        assert "orbit 1 at (1, 0): theorem applies; orbit exhibited" in printed
        assert json.loads(out.read_text())["orbits"][1]["conley"]["certified"]

    def test_csv_dir_flag(self, ex1_config, tmp_path, capsys):
        out = tmp_path / "report.json"
        csvs = tmp_path / "traj"
        assert main(["run", str(ex1_config), "--json-out", str(out),
                     "--csv-dir", str(csvs)]) == 0
        capsys.readouterr()
        assert (csvs / "orbit1_sol0.csv").exists()

    def test_shipped_ex2_config(self, tmp_path, capsys):
        out = tmp_path / "r.json"
        code = main(["run", str(ROOT / "configs" / "ex2.toml"),
                     "--json-out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "classical Liapunov case (full-rank Hessian)" in printed
        assert "theorem applies; orbit exhibited" in printed

    def test_missing_config_exits_2(self, tmp_path, capsys):
        assert main(["run", str(tmp_path / "absent.toml")]) == 2
        assert "config error" in capsys.readouterr().err

    def test_invalid_toml_exits_2(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("[potential\nsource = ")
        assert main(["run", str(bad)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_empty_potential_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "empty.toml"
        cfg.write_text('[potential]\nsource = ""\n'
                       '[action]\nn = 2\nblocks = [[1, 2]]\n')
        assert main(["run", str(cfg)]) == 2
        assert "config error" in capsys.readouterr().err

    def test_unparsable_potential_exits_2(self, tmp_path, capsys):
        cfg = tmp_path / "syntax.toml"
        cfg.write_text('[potential]\nsource = "radial: t^"\n'
                       '[action]\nn = 2\nblocks = [[1, 2]]\n')
        assert main(["run", str(cfg)]) == 2
        assert "parse" in capsys.readouterr().err


class TestEuler:
    @pytest.mark.parametrize("expr,expected", [
        ('chi(S^"R[1,0]+R[2,3]")', "-I + 2*Z3"),
        ("Z2 * Z3", "0"),
        ("inv(-I + 2*Z3) * (-I + 2*Z3)", "I"),
        ("I + I - I", "I"),
        ("3*Z2 - Z2", "2*Z2"),
    ])
    def test_evaluates(self, expr, expected, capsys):
        assert main(["euler", expr]) == 0
        assert capsys.readouterr().out.strip() == expected

    def test_parse_error_exits_2(self, capsys):
        assert main(["euler", "I + * Z2"]) == 2
        assert capsys.readouterr().err

    def test_noninvertible_exits_2(self, capsys):
        assert main(["euler", "inv(2*I)"]) == 2
        assert "invert" in capsys.readouterr().err.lower()


class TestCheckGroup:
    TABLE = str(ROOT / "configs" / "tetrahedron.json")

    def test_klein_four_subgroup_not_admissible(self, capsys):
        code = main(["check-group", self.TABLE,
                     "--subgroup", "(1 2)(3 4),(1 3)(2 4)"])
        assert code == 0
        out = capsys.readouterr().out
        assert "order 4" in out
        assert "admissible: no" in out
        assert "witness pair" in out
        assert "fused by conjugation with" in out

    def test_cyclic_subgroup_admissible(self, capsys):
        assert main(["check-group", self.TABLE, "--subgroup", "(2 3 4)"]) == 0
        out = capsys.readouterr().out
        assert "order 3" in out
        assert "admissible: yes" in out

    def test_unknown_element_exits_2(self, capsys):
        assert main(["check-group", self.TABLE, "--subgroup", "bogus"]) == 2
        assert "bogus" in capsys.readouterr().err

    def test_missing_table_exits_2(self, tmp_path, capsys):
        assert main(["check-group", str(tmp_path / "zzz.json"),
                     "--subgroup", "e"]) == 2
        assert "config error" in capsys.readouterr().err
