import copy
import json
import re
from pathlib import Path

import pytest

from toriccharge.cli import main
from toriccharge.config import ConfigError, load_config, parse_config
from toriccharge.verify import run_suite, write_report

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"


def strip_volatile(report: dict) -> dict:
    out = copy.deepcopy(report)
    out.pop("timestamp", None)
    for chk in out["checks"]:
        chk.pop("runtime_s", None)
    return out


@pytest.fixture(scope="module")
def p1_cfg():
    return load_config(str(CONFIG_DIR / "p1.toml"))


class TestConfig:
    def test_load_p1(self, p1_cfg):
        assert p1_cfg.fan.n == 1
        assert p1_cfg.bundle_terms == [([1, 2], 1)]
        assert str(p1_cfg.series_degree) == "25"
        assert p1_cfg.quadrature.adaptive_tol == 1e-10

    def test_parse_error_reports_location(self, tmp_path):
        bad = tmp_path / "bad.toml"
        bad.write_text("[fan\nn = 1\n")
        with pytest.raises(ConfigError) as err:
            load_config(str(bad))
        assert re.search(r"line \d+", str(err.value))

    def test_missing_key(self, p1_cfg):
        raw = copy.deepcopy(p1_cfg.raw)
        del raw["basis"]
        with pytest.raises(ConfigError, match="basis"):
            parse_config(raw)

    def test_unknown_check_rejected(self, p1_cfg):
        raw = copy.deepcopy(p1_cfg.raw)
        raw["checks"]["run"] = ["fan", "nonsense"]
        with pytest.raises(ConfigError, match="nonsense"):
            parse_config(raw)

    def test_rational_strings(self, p1_cfg):
        raw = copy.deepcopy(p1_cfg.raw)
        raw["params"]["series_degree"] = "51/2"
        cfg = parse_config(raw)
        assert cfg.series_degree.denominator == 2

    def test_explicit_w_needs_all_entries(self, p1_cfg):
        raw = copy.deepcopy(p1_cfg.raw)
        raw["params"]["w_mode"] = "explicit"
        raw["params"]["w"] = [[1.0, 0.0]]
        with pytest.raises(ConfigError):
            parse_config(raw)


class TestRunSuite:
    def test_p1_all_pass(self, p1_cfg):
        report, code = run_suite(p1_cfg, seed=3)
        assert code == 0
        assert report["passed"]
        assert [c["name"] for c in report["checks"]] == p1_cfg.checks_run
        for chk in report["checks"]:
            assert chk["status"] == "PASS"
            if chk["residual"] is not None:
                assert chk["budget"] is not None

    def test_determinism_modulo_volatile_fields(self, p1_cfg):
        a, _ = run_suite(p1_cfg, seed=11, only=["box", "series_oracle", "main_identity"])
        b, _ = run_suite(p1_cfg, seed=11, only=["box", "series_oracle", "main_identity"])
        assert json.dumps(strip_volatile(a), sort_keys=True) == json.dumps(
            strip_volatile(b), sort_keys=True
        )

    def test_seed_changes_draws(self, p1_cfg):
        a, _ = run_suite(p1_cfg, seed=1, only=["main_identity"])
        b, _ = run_suite(p1_cfg, seed=2, only=["main_identity"])
        assert (
            a["checks"][0]["detail"]["w"] != b["checks"][0]["detail"]["w"]
        )

    def test_parallel_matches_serial(self, p1_cfg):
        serial, code_s = run_suite(p1_cfg, seed=5)
        par, code_p = run_suite(p1_cfg, seed=5, parallel=True)
        assert code_s == code_p == 0
        assert strip_volatile(serial) == strip_volatile(par)

    def test_xfail_counts_as_pass(self):
        cfg = load_config(str(CONFIG_DIR / "f3_negative.toml"))
        report, code = run_suite(cfg, seed=0)
        assert code == 0
        by_name = {c["name"]: c for c in report["checks"]}
        assert by_name["semipositive"]["status"] == "XFAIL"

    def test_failure_gives_exit_one(self, p1_cfg):
        tight = copy.deepcopy(p1_cfg)
        tight.budgets = dict(tight.budgets)
        tight.budgets["main_identity"] = 1e-18
        report, code = run_suite(tight, seed=3, only=["main_identity"])
        assert code == 1
        assert report["checks"][0]["status"] == "FAIL"
        # Both values are still reported on failure.
        assert report["checks"][0]["lhs"] and report["checks"][0]["rhs"]

    def test_csv_dumps(self, p1_cfg, tmp_path):
        cfg = copy.deepcopy(p1_cfg)
        cfg.series_csv = str(tmp_path / "series.csv")
        cfg.chain_csv = str(tmp_path / "chain.csv")
        run_suite(cfg, seed=0, only=["fan"])
        series = (tmp_path / "series.csv").read_text().strip().splitlines()
        chain = (tmp_path / "chain.csv").read_text().strip().splitlines()
        assert series[0] == "sigma,sector_v,exponent,re,im"
        assert len(series) > 10
        assert chain[0] == "mult,cone,face_vertices,shift"
        assert len(chain) == 4  # header + 3 cells


class TestCli:
    def test_validate(self, capsys):
        assert main(["validate", "--config", str(CONFIG_DIR / "p1.toml")]) == 0
        assert "valid" in capsys.readouterr().out

    def test_fan_info(self, capsys):
        assert main(["fan-info", "--config", str(CONFIG_DIR / "p12.toml")]) == 0
        out = capsys.readouterr().out
        assert "|G| = 2" in out
        assert "age = 1/2" in out

    def test_series_and_cycle_dumps(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        code = main(
            ["series", "--config", str(CONFIG_DIR / "p12.toml"), "--out", str(out)]
        )
        assert code == 0 and out.exists()
        out2 = tmp_path / "c.csv"
        code = main(
            ["cycle", "--config", str(CONFIG_DIR / "p12.toml"), "--out", str(out2)]
        )
        assert code == 0 and out2.exists()

    def test_integrate(self, capsys, tmp_path):
        out = tmp_path / "int.json"
        code = main(
            [
                "integrate",
                "--config",
                str(CONFIG_DIR / "p1.toml"),
                "--seed",
                "4",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert "value" in payload and "error_estimate" in payload

    def test_verify_single_check(self, capsys, tmp_path):
        out = tmp_path / "report.json"
        code = main(
            [
                "verify",
                "--config",
                str(CONFIG_DIR / "p1.toml"),
                "--check",
                "box",
                "--check",
                "semipositive",
                "--seed",
                "1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert [c["name"] for c in report["checks"]] == ["semipositive", "box"]

    def test_missing_config_is_config_error(self, capsys):
        assert main(["verify", "--config", "/nonexistent.toml"]) == 2

    def test_malformed_config_exit_two(self, tmp_path, capsys):
        bad = tmp_path / "bad.toml"
        bad.write_text("fan = {n = }\n")
        assert main(["validate", "--config", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "line" in err


def test_write_report_roundtrip(tmp_path, p1_cfg):
    report, _ = run_suite(p1_cfg, seed=0, only=["fan"])
    path = tmp_path / "r.json"
    text = write_report(report, str(path))
    assert json.loads(path.read_text()) == json.loads(text)


def test_single_check_entry_points(p1_cfg):
    from toriccharge.verify import (
        run_additivity_check,
        run_gamma_limit_check,
        run_main_identity_check,
    )

    for fn in (run_main_identity_check, run_gamma_limit_check, run_additivity_check):
        result = fn(p1_cfg, seed=9)
        assert result.status == "PASS"
        assert result.residual is not None and result.residual <= result.budget
