"""
Tests for configuration module
"""

import sys
from argparse import Namespace
from pathlib import Path

import pytest

from src.config import (
    THREADS_ENV,
    Settings,
    apply_env_overrides,
    get_config_dir,
    get_default_config_path,
    load_config,
    merge_cli_args,
)


class TestSettings:
    """Test Settings dataclass and validation."""

    def test_default_settings(self):
        """Test that default settings are created correctly."""
        settings = Settings()
        assert settings.log_level is None
        assert settings.seed == 20240101
        assert settings.trials == 200
        assert settings.threads is None
        assert settings.tol == 1e-10
        assert settings.m_max == 2**22
        assert settings.singularity_floor == 1e-12
        assert settings.phases == 16
        assert settings.divergence_slope == 0.02
        assert settings.kreiss_depth == 20
        assert settings.output_dir == "."

    def test_log_level_validation_invalid(self):
        """Test that invalid log levels are set to None."""
        settings = Settings(log_level="invalid")
        assert settings.log_level is None

    def test_log_level_validation_valid(self):
        """Test that valid log levels are accepted and lowercased."""
        for level in ["debug", "info", "warning", "error", "critical"]:
            assert Settings(log_level=level).log_level == level
            assert Settings(log_level=level.upper()).log_level == level

    @pytest.mark.parametrize(
        "field, bad",
        [
            ("trials", 0),
            ("tol", 0.0),
            ("tol", 2.0),
            ("m_max", 1000),
            ("m_max", 32),
            ("singularity_floor", -1.0),
            ("phases", 0),
            ("divergence_slope", 0.0),
            ("kreiss_depth", 31),
            ("seed", -5),
        ],
    )
    def test_invalid_values_fall_back_to_defaults(self, field, bad):
        """An invalid value is replaced by its default, never raised."""
        settings = Settings(**{field: bad})
        assert getattr(settings, field) == getattr(Settings(), field)

    def test_invalid_threads_means_physical_cores(self):
        settings = Settings(threads=0)
        assert settings.threads is None
        assert settings.resolved_threads() >= 1

    def test_explicit_threads_are_used(self):
        assert Settings(threads=3).resolved_threads() == 3

    def test_as_dict_round_trips(self):
        settings = Settings(seed=7, phases=8)
        assert Settings(**settings.as_dict()).as_dict() == settings.as_dict()


class TestConfigPaths:
    """Test configuration path functions."""

    def test_get_config_dir_windows(self, monkeypatch):
        """Test config directory on Windows."""
        monkeypatch.setattr(sys, "platform", "win32")
        assert get_config_dir() == Path.home() / "AppData" / "Roaming" / "kreiss-lab"

    def test_get_config_dir_macos(self, monkeypatch):
        """Test config directory on macOS."""
        monkeypatch.setattr(sys, "platform", "darwin")
        expected = Path.home() / "Library" / "Application Support" / "kreiss-lab"
        assert get_config_dir() == expected

    def test_get_config_dir_linux(self, monkeypatch):
        """Test config directory on Linux."""
        monkeypatch.setattr(sys, "platform", "linux")
        monkeypatch.delenv("XDG_CONFIG_HOME", raising=False)
        assert get_config_dir() == Path.home() / ".config" / "kreiss-lab"

    def test_get_config_dir_xdg(self, monkeypatch, tmp_path):
        monkeypatch.setattr(sys, "platform", "linux")
        monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
        assert get_config_dir() == tmp_path / "kreiss-lab"

    def test_get_default_config_path(self, monkeypatch):
        """Test default config file path."""
        monkeypatch.setattr(sys, "platform", "darwin")
        expected = Path.home() / "Library" / "Application Support" / "kreiss-lab" / "config.toml"
        assert get_default_config_path() == expected


class TestLoadConfig:
    """Test configuration file loading."""

    def test_load_config_missing_file(self, tmp_path):
        """Test that missing config file returns defaults."""
        settings = load_config(tmp_path / "nonexistent.toml")
        assert settings.as_dict() == Settings().as_dict()

    def test_load_config_default_location(self, config_dir):
        (config_dir / "config.toml").write_text("seed = 99\n")
        if sys.platform in ("win32", "darwin"):
            pytest.skip("default location is not XDG on this platform")
        assert load_config().seed == 99

    def test_load_config_valid_toml(self, tmp_path):
        """Test loading a valid TOML config file."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("""
log_level = "debug"
seed = 42
trials = 1000
threads = 2
tol = 1e-8
m_max = 1048576
phases = 32
kreiss_depth = 12
output_dir = "results"
""")
        settings = load_config(config_path)

        assert settings.log_level == "debug"
        assert settings.seed == 42
        assert settings.trials == 1000
        assert settings.threads == 2
        assert settings.tol == 1e-8
        assert settings.m_max == 2**20
        assert settings.phases == 32
        assert settings.kreiss_depth == 12
        assert settings.output_dir == "results"

    def test_load_config_partial_toml(self, tmp_path):
        """Test loading a TOML file with only some keys."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("trials = 10\n")

        settings = load_config(config_path)

        assert settings.trials == 10
        assert settings.seed == 20240101
        assert settings.phases == 16

    def test_load_config_invalid_values(self, tmp_path):
        """Test that invalid values in config are corrected."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("""
trials = 0
log_level = "invalid"
m_max = 1000
""")
        settings = load_config(config_path)

        assert settings.trials == 200
        assert settings.log_level is None
        assert settings.m_max == 2**22

    def test_load_config_unknown_keys_are_ignored(self, tmp_path):
        config_path = tmp_path / "config.toml"
        config_path.write_text('seed = 5\nkreiss_radius = 3.0\n')
        settings = load_config(config_path)
        assert settings.seed == 5
        assert not hasattr(settings, "kreiss_radius")

    def test_load_config_malformed_toml(self, tmp_path):
        """Test that malformed TOML returns defaults."""
        config_path = tmp_path / "config.toml"
        config_path.write_text("this is not valid toml {{{")
        assert load_config(config_path).as_dict() == Settings().as_dict()


class TestOverrides:
    """Environment and command-line precedence: file < env < CLI."""

    def test_env_threads_override(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        assert apply_env_overrides(Settings(threads=2)).threads == 6

    def test_env_threads_garbage_is_ignored(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "many")
        assert apply_env_overrides(Settings(threads=2)).threads == 2

    def test_env_unset_keeps_settings(self, monkeypatch):
        monkeypatch.delenv(THREADS_ENV, raising=False)
        assert apply_env_overrides(Settings(threads=2)).threads == 2

    def test_cli_wins_over_file_and_env(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "6")
        settings = apply_env_overrides(Settings(threads=2, seed=1))
        args = Namespace(seed=9, trials=None, threads=3, tol=None, m_max=None, phases=None,
                         debug=False, verbose=True, log_level=None)
        merged = merge_cli_args(settings, args)
        assert merged.threads == 3
        assert merged.seed == 9
        assert merged.trials == 200
        assert merged.log_level == "info"

    def test_merge_does_not_mutate_input(self):
        settings = Settings(seed=1)
        merge_cli_args(settings, Namespace(seed=2, debug=True))
        assert settings.seed == 1
        assert settings.log_level is None

    def test_merged_values_are_validated(self):
        merged = merge_cli_args(Settings(), Namespace(trials=-3))
        assert merged.trials == 200


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
