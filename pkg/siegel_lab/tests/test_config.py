import pytest
from pydantic import ValidationError

from siegel_lab.config import Settings, get_settings
from siegel_lab.schemas import RunConfig


def test_defaults():
    settings = get_settings()
    assert settings.SIEGEL_LAB_WINDOW_SIZE == 2**24
    assert settings.SIEGEL_LAB_THREADS == 1
    assert settings.SIEGEL_LAB_CACHE_DIR is None
    assert settings.SIEGEL_LAB_OUTPUT_DIR == "siegel_reports"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("siegel_lab_threads", "4")
    monkeypatch.setenv("SIEGEL_LAB_QUAD_TOL", "1e-7")
    get_settings.cache_clear()
    settings = get_settings()
    assert settings.SIEGEL_LAB_THREADS == 4
    assert settings.SIEGEL_LAB_QUAD_TOL == 1e-7


def test_dotenv_file_is_read(tmp_path):
    (tmp_path / ".env").write_text("SIEGEL_LAB_OUTPUT_DIR=elsewhere\n")
    assert Settings().SIEGEL_LAB_OUTPUT_DIR == "elsewhere"


def test_invalid_settings(monkeypatch):
    monkeypatch.setenv("SIEGEL_LAB_THREADS", "0")
    with pytest.raises(ValidationError):
        Settings()


def test_run_config_parsing():
    config = RunConfig(command="chain", x="1e6,2e6", shifts="0,2", k="2", delta="-163", eta=50)
    assert config.x == [10**6, 2 * 10**6]
    assert config.shifts == [0, 2]
    assert config.delta == -163


@pytest.mark.parametrize(
    "kwargs",
    [
        {"x": "1.5"},
        {"x": "0"},
        {"shifts": "0,2", "k": "3"},
        {"factors": "lambda"},
        {"threads": "0"},
        {"eps0": 1.5},
        {"unknown": 1},
    ],
)
def test_run_config_rejects(kwargs):
    with pytest.raises(ValidationError):
        RunConfig(command="correlate", **kwargs)
