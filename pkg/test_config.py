"""
Tests for configuration loading and saving.
"""
import logging

import pytest

from hxpathd.config import AppConfig, ConfigManager, resolve_config_path
from hxpathd.errors import ConfigError


def write(tmp_path, text):
    path = tmp_path / "hxpathd.toml"
    path.write_text(text)
    return path


class TestLoad:
    def test_missing_file_gives_defaults(self, tmp_path):
        config = ConfigManager(tmp_path / "absent.toml").load()
        assert config == AppConfig()
        assert config.prover.max_fresh == 4
        assert config.cutelim.fallback_search is False
        assert config.cutelim.max_steps == 10000
        assert config.output.format == "human"

    def test_sections(self, tmp_path):
        path = write(tmp_path, """
[prover]
max_fresh = 2
witness_cuts = false

[output]
format = "structured"
log_level = "debug"
""")
        config = ConfigManager(path).load()
        assert config.prover.max_fresh == 2
        assert config.prover.witness_cuts is False
        assert config.prover.max_depth == 64
        assert config.output.format == "structured"
        assert config.output.log_level == "DEBUG"

    def test_save_then_load(self, tmp_path):
        config = AppConfig()
        config.cutelim.fallback_search = True
        config.paths.fixture_dir = "elsewhere"
        path = tmp_path / "nested" / "hxpathd.toml"
        ConfigManager(path).save(config)
        assert ConfigManager(path).load() == config

    def test_unknown_keys_are_ignored_with_a_warning(self, tmp_path, caplog):
        path = write(tmp_path, "[prover]\nmax_fresh = 1\nspeed = 11\n\n[extras]\nx = 1\n")
        with caplog.at_level(logging.WARNING, logger="hxpathd.config"):
            config = ConfigManager(path).load()
        assert config.prover.max_fresh == 1
        assert "speed" in caplog.text
        assert "extras" in caplog.text

    @pytest.mark.parametrize("text", [
        '[output]\nformat = "xml"\n',
        '[output]\nlog_level = "LOUD"\n',
        "[prover\nmax_fresh = 1\n",
        'prover = "fast"\n',
    ])
    def test_bad_configuration(self, tmp_path, text):
        with pytest.raises(ConfigError):
            ConfigManager(write(tmp_path, text)).load()


class TestPaths:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv("HXPATHD_CONFIG", "/env/hxpathd.toml")
        assert str(resolve_config_path("flag.toml")) == "flag.toml"

    def test_environment(self, monkeypatch):
        monkeypatch.setenv("HXPATHD_CONFIG", "/env/hxpathd.toml")
        assert str(resolve_config_path()) == "/env/hxpathd.toml"

    def test_default(self, monkeypatch):
        monkeypatch.delenv("HXPATHD_CONFIG", raising=False)
        assert str(resolve_config_path()) == "hxpathd.toml"

    def test_fixture_dir(self, monkeypatch):
        monkeypatch.delenv("HXPATHD_FIXTURES", raising=False)
        assert str(AppConfig().fixture_dir()) == "fixtures"
        monkeypatch.setenv("HXPATHD_FIXTURES", "/data/fixtures")
        assert str(AppConfig().fixture_dir()) == "/data/fixtures"
