"""Pytest configuration and shared fixtures."""

from pathlib import Path

import numpy as np
import pytest

from src.config import THREADS_ENV, Settings
from src.symbols import mobius_symbol, scalar_operator, shift_operator
from src.torus import FourierSeries


@pytest.fixture
def settings() -> Settings:
    """Default settings."""
    return Settings()


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator; every test gets the same stream."""
    return np.random.default_rng(12345)


@pytest.fixture
def mobius_half():
    """q_{1/2}(S)."""
    return mobius_symbol(0.5)


@pytest.fixture
def shift():
    return shift_operator()


@pytest.fixture
def twice_identity():
    return scalar_operator(2.0)


@pytest.fixture
def e0() -> FourierSeries:
    """The unit vector at index 0."""
    return FourierSeries.monomial(0)


@pytest.fixture
def config_dir(tmp_path: Path, monkeypatch) -> Path:
    """Isolated XDG config directory with no environment overrides."""
    monkeypatch.setenv("XDG_CONFIG_HOME", str(tmp_path))
    monkeypatch.delenv(THREADS_ENV, raising=False)
    directory = tmp_path / "kreiss-lab"
    directory.mkdir()
    return directory
