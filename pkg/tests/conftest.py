from pathlib import Path

import numpy as np
import pytest

from zomax.config import get_settings


@pytest.fixture
def settings(tmp_path, monkeypatch):
    """Point the output root at a temporary directory and reload settings."""

    monkeypatch.setenv("ZOMAX_OUTPUT_ROOT", str(tmp_path / "runs"))
    get_settings.cache_clear()
    yield get_settings()
    get_settings.cache_clear()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write an INI experiment file under tmp_path and return its path."""

    def _write(text: str, name: str = "experiment.ini") -> Path:
        path = tmp_path / name
        path.write_text(text.replace("{tmp}", str(tmp_path)), encoding="utf-8")
        return path

    return _write
