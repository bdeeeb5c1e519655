import csv
import json

import pytest

from app import cli
from app.services.analysis.experiments import TABLE_COLUMNS
from app.services.analysis.selftest import SelftestResult


@pytest.fixture(autouse=True)
def _runtime(isolated_env):
    return isolated_env


def read_rows(path):
    with open(path, encoding="utf-8") as handle:
        return list(csv.DictReader(handle))


def test_validate_reports_exactness_and_eta(capsys):
    assert cli.main(["validate", "--rule", "gl:70", "--degree", "139"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["m"] == 70
    assert report["defect"] < 1e-12
    assert report["n"] == 69
    assert report["eta"] < 1e-10
    assert report["rank_deficient"] is False


def test_validate_reports_failed_exactness_without_error(capsys):
    assert cli.main(["validate", "--rule", "sphere:6", "--degree", "10"]) == 0
    assert json.loads(capsys.readouterr().out)["defect"] > 1e-6


def test_validate_rejects_malformed_rules():
    assert cli.main(["validate", "--rule", "gl:many", "--degree", "3"]) == 2
    assert cli.main(["validate", "--rule", "simpson:3", "--degree", "3"]) == 2
    assert cli.main(["validate", "--degree", "3"]) == 2


def test_moments_csv(tmp_path):
    out = tmp_path / "osc.csv"
    assert cli.main(["moments", "--kernel", "osc", "--kappa", "160", "--max-r", "360", "--out", str(out)]) == 0
    rows = read_rows(out)
    assert len(rows) == 361
    assert rows[-1]["r"] == "360"


def test_printed_log_moments(tmp_path):
    printed, corrected = tmp_path / "printed.csv", tmp_path / "corrected.csv"
    base = ["moments", "--kernel", "sph-log", "--region", "sphere", "--max-r", "2"]
    assert cli.main(base + ["--log-form", "printed", "--out", str(printed)]) == 0
    assert cli.main(base + ["--out", str(corrected)]) == 0
    first, second = read_rows(printed), read_rows(corrected)
    assert len(first) == 9
    assert float(first[0]["re"]) < float(second[0]["re"])
    assert float(first[4]["re"]) == pytest.approx(float(second[4]["re"]), abs=1e-14)


def test_alpha_csv(tmp_path, capsys):
    out = tmp_path / "alpha.csv"
    assert cli.main(["alpha", "--kernel", "unit", "--n", "3", "--out", str(out)]) == 0
    assert "A_n=" in capsys.readouterr().out
    assert len(read_rows(out)) == 16


def test_table_writes_the_grid(tmp_path, capsys):
    out = tmp_path / "table.csv"
    code = cli.main(
        ["table", "--kernel", "osc", "--kappa", "20", "--n-list", "10", "--m-list", "8,12", "--out", str(out)]
    )
    assert code == 0
    rows = read_rows(out)
    assert [row["m"] for row in rows] == ["8", "12"]
    assert list(rows[0]) == TABLE_COLUMNS
    assert "err_efficient=" in capsys.readouterr().out
    assert (tmp_path / "results" / "reports" / "run_history.csv").exists()


def test_table_from_config_file_with_flag_override(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps({"kernel": "osc", "kappa": 20, "n_list": [10], "m_list": [8, 12], "out": "ignored.csv"}),
        encoding="utf-8",
    )
    out = tmp_path / "override.csv"
    assert cli.main(["--config", str(config), "table", "--m-list", "12", "--out", str(out)]) == 0
    assert [row["m"] for row in read_rows(out)] == ["12"]
    assert not (tmp_path / "ignored.csv").exists()


def test_table_audit(tmp_path, capsys):
    out = tmp_path / "audit.csv"
    code = cli.main(
        ["table", "--kernel", "osc", "--kappa", "20", "--n-list", "12", "--m-list", "20", "--out", str(out), "--audit"]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "audit thm1" in printed
    assert "audit thm3" in printed
    assert "status=PASS" in printed


def test_sweep_writes_csv_and_svg(tmp_path):
    out = tmp_path / "sweep.csv"
    code = cli.main(
        ["sweep", "--kernel", "cheb-weight", "--factor", "1.5", "--n-list", "6,9", "--out", str(out)]
    )
    assert code == 0
    assert [row["norm"] for row in read_rows(out)] == ["L1", "L1"]
    assert out.with_suffix(".svg").exists()


@pytest.mark.parametrize(
    "argv",
    [
        ["table", "--kernel", "osc", "--kappa", "20", "--n-list", "", "--m-list", "8"],
        ["table", "--kernel", "osc", "--n-list", "10", "--m-list", "8"],
        ["table", "--kernel", "bogus", "--n-list", "10", "--m-list", "8"],
        ["table", "--kernel", "osc", "--kappa", "20", "--n-list", "ten", "--m-list", "8"],
        ["table", "--kernel", "osc", "--kappa", "20", "--m-list", "8"],
        ["moments", "--kernel", "osc", "--kappa", "20"],
        ["--config", "missing.json", "moments", "--kernel", "unit", "--max-r", "3"],
    ],
)
def test_configuration_errors_exit_with_2(argv):
    assert cli.main(argv) == 2


def test_unknown_config_keys_exit_with_2(tmp_path):
    config = tmp_path / "config.json"
    config.write_text(json.dumps({"kernel": "unit", "max_r": 3, "colour": "blue"}), encoding="utf-8")
    assert cli.main(["--config", str(config), "moments"]) == 2


def test_unknown_flags_are_usage_errors():
    with pytest.raises(SystemExit) as info:
        cli.main(["table", "--bogus"])
    assert info.value.code == 2


def test_numerical_failures_exit_with_3():
    argv = ["moments", "--kernel", "harmonic", "--region", "sphere", "--lbar", "5", "--kbar", "1", "--max-r", "3"]
    assert cli.main(argv) == 3


def test_selftest_exit_codes(monkeypatch, capsys):
    passing = [SelftestResult(name="ok.check", passed=True, value=0.0, threshold=1.0)]
    monkeypatch.setattr(cli, "run_selftest", lambda settings: passing)
    assert cli.main(["selftest"]) == 0
    assert "1/1 checks passed" in capsys.readouterr().out

    failing = passing + [SelftestResult(name="bad.check", passed=False, value=2.0, threshold=1.0)]
    monkeypatch.setattr(cli, "run_selftest", lambda settings: failing)
    assert cli.main(["selftest"]) == 3
    assert "FAIL bad.check" in capsys.readouterr().out


def test_parse_rule():
    assert cli.parse_rule("gl:5").m == 5
    assert cli.parse_rule("sphere:4").exactness == 4


def test_log_level_from_environment(monkeypatch):
    monkeypatch.setenv("HYPERAPPROX_LOG_LEVEL", "debug")
    assert cli.main(["validate", "--rule", "gl:3", "--degree", "5"]) == 0
    monkeypatch.setenv("HYPERAPPROX_LOG_LEVEL", "verbose")
    assert cli.main(["validate", "--rule", "gl:3", "--degree", "5"]) == 2
