import pytest

from src.config.app_config import TOLERANCE_ENV, load_config
from src.validation.error_handler import (
    AssertionViolation,
    ConfigError,
    ConfigurationError,
    InputError,
    InternalError,
    exit_code_for,
)


def test_settings_file(tmp_path, monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)
    path = tmp_path / "settings.yaml"
    path.write_text("logging_level: debug\nresolution: 9\n", encoding="utf-8")
    settings = load_config(path)
    assert settings.logging_level == "DEBUG"
    assert settings.resolution == 9
    assert settings.window == 2.0


def test_missing_file_is_created_with_defaults(tmp_path, monkeypatch):
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)
    path = tmp_path / "nested" / "settings.yaml"
    assert load_config(path).resolution == 33
    assert path.exists()


def test_tolerance_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(TOLERANCE_ENV, "1e-6")
    assert load_config(tmp_path / "settings.yaml").tolerance == 1e-6
    monkeypatch.setenv(TOLERANCE_ENV, "-1")
    with pytest.raises(ConfigurationError):
        load_config(tmp_path / "settings.yaml")


@pytest.mark.parametrize("text", ["resolution: 1\n", "logging_level: LOUD\n", "- a\n", "window: [\n"])
def test_invalid_settings(tmp_path, monkeypatch, text):
    monkeypatch.delenv(TOLERANCE_ENV, raising=False)
    path = tmp_path / "settings.yaml"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigurationError):
        load_config(path)


def test_short_alias():
    assert ConfigError is ConfigurationError


@pytest.mark.parametrize("error, code", [
    (AssertionViolation("x < pi", witness=[0, 1]), 1),
    (InputError("empty operator"), 2),
    (ConfigurationError("bad window"), 2),
    (InternalError.wrap(ZeroDivisionError("division by zero")), 3),
    (KeyError("axis"), 3),
])
def test_exit_codes(error, code):
    assert exit_code_for(error) == code
