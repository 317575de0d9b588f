"""
Tests for environment settings, .env seeding and TOML documents
"""

import pytest

from lawmine.config import Settings, get_configuration_summary, get_settings, load_configuration, read_toml, reset_settings
from lawmine.errors import ConfigurationError


def test_defaults(monkeypatch):
    for name in ("LAWMINE_WORKERS", "LAWMINE_LOG_LEVEL", "LAWMINE_LOG_FORMAT"):
        monkeypatch.delenv(name, raising=False)
    settings = Settings()
    settings.validate()
    assert settings.log_format == "json"
    assert settings.metrics_enabled is True
    assert settings.workers >= 1
    assert settings.confidence == 0.95
    assert settings.cert_n == 1000


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("LAWMINE_ARITY", "2")
    monkeypatch.setenv("LAWMINE_METRICS_ENABLED", "no")
    settings = Settings()
    assert settings.arity == 2
    assert settings.metrics_enabled is False
    assert settings.get_environment_info()["learning"]["arity"] == 2


@pytest.mark.parametrize(
    "name, value",
    [
        ("LAWMINE_LOG_FORMAT", "xml"),
        ("LAWMINE_WORKERS", "0"),
        ("LAWMINE_CONFIDENCE", "1"),
        ("LAWMINE_CERT_ROUNDS", "0"),
        ("LAWMINE_ARITY", "0"),
    ],
)
def test_invalid_settings(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError):
        Settings().validate()
    with pytest.raises(ConfigurationError):
        load_configuration()


def test_unparseable_number(monkeypatch):
    monkeypatch.setenv("LAWMINE_SEED", "seven")
    with pytest.raises(ConfigurationError):
        load_configuration()


def test_env_file_seeds_missing_variables(monkeypatch, tmp_path):
    env = tmp_path / ".env"
    env.write_text('# local\nLAWMINE_BATCH_SIZE="64"\nLAWMINE_WORKERS=8\nnot a setting\n', encoding="utf-8")
    # registered so the value the loader writes is removed afterwards
    monkeypatch.setenv("LAWMINE_BATCH_SIZE", "0")
    monkeypatch.delenv("LAWMINE_BATCH_SIZE")
    settings = load_configuration(str(env))
    assert settings.batch_size == 64
    # variables already in the environment win
    assert settings.workers == 1


def test_settings_are_cached_until_reset(monkeypatch):
    reset_settings()
    first = get_settings()
    assert get_settings() is first
    monkeypatch.setenv("LAWMINE_SEED", "11")
    reset_settings()
    assert get_settings().seed == 11
    monkeypatch.undo()
    reset_settings()


def test_configuration_summary():
    summary = get_configuration_summary(Settings())
    assert "Certification:" in summary
    assert "Atom Budget: 10000" in summary


def test_read_toml(tmp_path):
    path = tmp_path / "bias.toml"
    path.write_text('arity = 2\nexclude = ["Timestamp"]\n', encoding="utf-8")
    assert read_toml(path) == {"arity": 2, "exclude": ["Timestamp"]}
    path.write_text("arity = \n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        read_toml(path)
    with pytest.raises(ConfigurationError):
        read_toml(tmp_path / "absent.toml")
