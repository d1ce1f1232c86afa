"""
Tests for config.py configuration module.
"""
import importlib
from fractions import Fraction

import pytest

import kcopy.config
from kcopy.config import (
    BRUTE_FORCE_MAX_ITEMS,
    COVER_RESOLUTION_BITS,
    DATABASE_URL,
    DEFAULT_TOL,
    LOG_LEVEL,
    MAX_WORKERS,
    PLAN_VERIFY_SAMPLES,
)


@pytest.fixture
def reload_config(monkeypatch):
    """Reload config under a patched environment, restoring it afterwards."""
    yield monkeypatch
    monkeypatch.undo()
    importlib.reload(kcopy.config)


@pytest.mark.unit
class TestConfig:
    """Tests for configuration loading."""

    def test_database_url_is_set(self):
        """Test that DATABASE_URL comes from the test environment."""
        assert DATABASE_URL == "sqlite:///:memory:"
        assert "://" in DATABASE_URL

    def test_defaults(self):
        """Test the numeric defaults."""
        assert DEFAULT_TOL == Fraction(1, 10**9)
        assert COVER_RESOLUTION_BITS == 64
        assert PLAN_VERIFY_SAMPLES == 1000
        assert MAX_WORKERS >= 1
        assert BRUTE_FORCE_MAX_ITEMS == 12
        assert LOG_LEVEL == LOG_LEVEL.upper()

    def test_env_override(self, reload_config):
        """Test that environment variables override the defaults."""
        reload_config.setenv("DEFAULT_TOL", "1/1000")
        reload_config.setenv("MAX_WORKERS", "4")
        importlib.reload(kcopy.config)
        assert kcopy.config.DEFAULT_TOL == Fraction(1, 1000)
        assert kcopy.config.MAX_WORKERS == 4

    @pytest.mark.parametrize("name,value", [
        ("PLANNER_MAX_STEPS", "0"),
        ("MAX_WORKERS", "many"),
        ("DEFAULT_TOL", "-1"),
        ("DEFAULT_TOL", "x"),
    ])
    def test_invalid_values(self, reload_config, name, value):
        """Test that bad settings raise RuntimeError at import."""
        reload_config.setenv(name, value)
        with pytest.raises(RuntimeError):
            importlib.reload(kcopy.config)
