import pytest

from apps.engine.config import load_settings
from apps.engine.errors import InvalidParameterError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("THETA", "NGRAM", "BOUNDS", "LANGID_K", "CONFIDENCE_FLOOR", "WORKERS", "LOG_LEVEL"):
        # set first so teardown also removes anything load_dotenv adds
        monkeypatch.setenv(f"FUZZYSCAN_{name}", "")
        monkeypatch.delenv(f"FUZZYSCAN_{name}")


def test_defaults(tmp_path):
    settings = load_settings(str(tmp_path / "missing.env"))
    assert settings.theta == 0.8
    assert settings.ngram == 2
    assert settings.bounds == "tolerance"
    assert settings.langid_k == 300
    assert settings.confidence_floor == 10


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("FUZZYSCAN_THETA", "0.9")
    monkeypatch.setenv("FUZZYSCAN_BOUNDS", "literal")
    settings = load_settings(str(tmp_path / "missing.env"))
    assert settings.theta == 0.9
    assert settings.bounds == "literal"


def test_dotenv_file(tmp_path):
    env = tmp_path / ".env"
    env.write_text("FUZZYSCAN_WORKERS=2\nFUZZYSCAN_LANGID_K=100\n", encoding="utf-8")
    settings = load_settings(str(env))
    assert settings.workers == 2
    assert settings.langid_k == 100


@pytest.mark.parametrize("name, value", [
    ("THETA", "1.5"), ("NGRAM", "0"), ("BOUNDS", "loose"), ("LOG_LEVEL", "loud"),
])
def test_invalid_values(monkeypatch, tmp_path, name, value):
    monkeypatch.setenv(f"FUZZYSCAN_{name}", value)
    with pytest.raises(InvalidParameterError):
        load_settings(str(tmp_path / "missing.env"))


def test_log_level_is_case_insensitive(monkeypatch, tmp_path):
    monkeypatch.setenv("FUZZYSCAN_LOG_LEVEL", "debug")
    assert load_settings(str(tmp_path / "missing.env")).log_level == "DEBUG"
