import pytest

from qtheta.config import get_settings
from qtheta.errors import ConfigError

VARIABLES = (
    "QTHETA_TAIL_TOLERANCE",
    "QTHETA_QUAD_HALF_WIDTH",
    "QTHETA_QUAD_POINTS",
    "QTHETA_SEED",
    "QTHETA_SAMPLE_POINTS",
    "QTHETA_LOG_LEVEL",
    "QTHETA_SCHEMA_VERSION",
)


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in VARIABLES:
        monkeypatch.delenv(name, raising=False)


def test_defaults():
    settings = get_settings()
    assert settings.tail_tolerance == 1e-10
    assert settings.quad_half_width == 6.0
    assert settings.quad_points == 120
    assert settings.seed == 20240607
    assert settings.log_level == "WARNING"
    assert settings.schema_version == 1


def test_lowercase_log_level_is_accepted(monkeypatch):
    monkeypatch.setenv("QTHETA_LOG_LEVEL", "debug")
    assert get_settings().log_level == "DEBUG"


def test_blank_value_falls_back_to_default(monkeypatch):
    monkeypatch.setenv("QTHETA_QUAD_POINTS", "  ")
    assert get_settings().quad_points == 120


@pytest.mark.parametrize("name, value", [
    ("QTHETA_TAIL_TOLERANCE", "abc"),
    ("QTHETA_TAIL_TOLERANCE", "2"),
    ("QTHETA_QUAD_HALF_WIDTH", "-1"),
    ("QTHETA_QUAD_POINTS", "1"),
    ("QTHETA_SEED", "1.5"),
    ("QTHETA_SAMPLE_POINTS", "0"),
    ("QTHETA_LOG_LEVEL", "chatty"),
])
def test_invalid_values(monkeypatch, name, value):
    monkeypatch.setenv(name, value)
    with pytest.raises(ConfigError, match=name):
        get_settings()
