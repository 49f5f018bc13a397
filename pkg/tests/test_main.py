"""
Tests for the command-line interface
"""

import argparse
import csv
import json
import logging

import pytest

from src.main import build_parser, configure_logging, int_list, main, p_value, run_cli


def stdout_json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


class TestArgumentTypes:
    """argparse helpers."""

    def test_doubling_range(self):
        assert int_list("16..128") == [16, 32, 64, 128]

    def test_comma_list(self):
        assert int_list("100,1000") == [100, 1000]

    @pytest.mark.parametrize("text", ["8..4", "a,b", "0..4", ""])
    def test_bad_int_list(self, text):
        with pytest.raises(argparse.ArgumentTypeError):
            int_list(text)

    def test_p_value(self):
        assert p_value("inf") == float("inf")
        with pytest.raises(argparse.ArgumentTypeError):
            p_value("0.5")

    def test_parser_defaults(self):
        args = build_parser().parse_args(["technical"])
        assert args.N == [100, 1000, 10000]
        assert not args.json


class TestLogging:
    def test_disabled_by_default(self):
        configure_logging(None)
        assert logging.getLogger().level == 100

    def test_debug_level(self):
        configure_logging("debug")
        assert logging.getLogger().level == logging.DEBUG
        configure_logging(None)


class TestCommands:
    """End-to-end subcommands."""

    def test_growth_csv(self, config_dir, tmp_path):
        out = tmp_path / "growth.csv"
        assert run_cli(["growth", "--p", "2", "--n", "1..4", "--out", str(out)]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert rows[0] == ["N", "lower", "upper", "method_lower", "method_upper"]
        assert [row[0] for row in rows[1:]] == ["1", "2", "4"]

    def test_growth_json(self, config_dir, capsys):
        assert run_cli(["growth", "--p", "2", "--n", "1..4", "--json"]) == 0
        data = stdout_json(capsys)
        assert data["command"] == "growth"
        assert data["result"]["fits"]["mid"]["slope"] == pytest.approx(0.0, abs=1e-10)

    def test_technical_json(self, config_dir, capsys):
        assert run_cli(["technical", "--N", "10000", "--json"]) == 0
        data = stdout_json(capsys)
        assert data["schema_version"] == 1
        assert 1 / 25 <= data["result"]["min_ratio"] <= data["result"]["max_ratio"] <= 25

    def test_exponents(self, config_dir, capsys):
        assert run_cli(["exponents", "--p", "4", "--json"]) == 0
        record = stdout_json(capsys)["result"]["records"][0]
        assert record["tau_p"] == pytest.approx(0.25)
        assert record["positive_exponent"] == pytest.approx(0.25)

    def test_bootstrap(self, config_dir, capsys):
        assert run_cli(["bootstrap", "--p", "2", "--N", "1000000", "--json"]) == 0
        assert stdout_json(capsys)["result"]["K"] == 2

    def test_bootstrap_summary(self, config_dir, capsys):
        assert run_cli(["bootstrap"]) == 0
        assert capsys.readouterr().out.startswith("K=2")

    def test_window_sum(self, config_dir, capsys):
        argv = ["kreiss", "--kind", "window", "--operator", "shift", "--p", "2", "--n", "16,64", "--json"]
        assert run_cli(argv) == 0
        result = stdout_json(capsys)["result"]
        assert result["constant"] == pytest.approx(9 / 16)
        assert result["positive"] is True

    def test_config_command(self, config_dir, capsys):
        assert run_cli(["config", "--seed", "5"]) == 0
        data = stdout_json(capsys)
        assert data["seed"] == 5
        assert data["trials"] == 200

    def test_config_file_is_read(self, config_dir, capsys):
        (config_dir / "config.toml").write_text("trials = 7\n")
        assert main(["config"]) == 0
        assert stdout_json(capsys)["trials"] == 7


class TestExitCodes:
    def test_p_below_one(self, config_dir):
        assert run_cli(["growth", "--p", "0.5"]) == 2

    def test_missing_command(self, config_dir):
        assert run_cli([]) == 2

    def test_domain_error(self, config_dir):
        assert run_cli(["growth", "--a", "1.5", "--n", "1..2"]) == 2

    def test_window_bootstrap_domain(self, config_dir):
        assert run_cli(["bootstrap", "--window", "--p", "3"]) == 2

    def test_help(self, config_dir):
        assert run_cli(["--help"]) == 0


class TestDeterminism:
    """Output files do not depend on the thread count."""

    @pytest.mark.parametrize("kind", ["forward", "weak-l1", "reverse"])
    def test_lp_threads(self, config_dir, tmp_path, kind):
        outputs = []
        for threads in ("1", "4"):
            out = tmp_path / f"{kind}-{threads}.json"
            argv = [
                "lp", "--kind", kind, "--p", "3", "--L", "1,2,3", "--trials", "10",
                "--freq-range", "16", "--support-size", "4", "--threads", threads,
                "--json", "--out", str(out),
            ]
            assert run_cli(argv) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_growth_threads(self, config_dir, tmp_path):
        outputs = []
        for threads in ("1", "3"):
            out = tmp_path / f"growth-{threads}.csv"
            assert run_cli(["growth", "--p", "3", "--n", "2..16", "--threads", threads, "--out", str(out)]) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]
