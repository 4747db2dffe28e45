"""
Tests for the settings cascade
"""

import json
import os
import sys
import tempfile
from pathlib import Path
from unittest.mock import patch

import pytest

# Add parent directory to path to import wfkit
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from wfkit.config import Settings, configure, get_settings, load_settings, reset_settings
from wfkit.errors import ConfigError


@pytest.fixture
def temp_dir():
    """Create a temporary directory for settings files"""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture(autouse=True)
def fresh_settings(temp_dir):
    """Forget cached settings around every test and ignore the user file"""
    reset_settings()
    with patch("wfkit.config.SETTINGS_FILE", temp_dir / "absent.json"):
        yield
    reset_settings()


class TestSettings:
    """Test defaults and validation"""

    def test_defaults(self):
        """s = 2, τ = 0.05, 4096-point 1D box"""
        settings = Settings()
        assert settings.s == 2.0
        assert settings.tau == 0.05
        assert settings.grid(1).size == 4096
        assert settings.grid(2).half_width == 4.0

    def test_invalid_s(self):
        """s must exceed 1"""
        with pytest.raises(ConfigError):
            Settings(s=1.0)

    def test_levels_cover_fit(self):
        """The fit needs at least fit_annuli levels"""
        with pytest.raises(ConfigError):
            Settings(levels=2, fit_annuli=3)

    def test_frequency_cap_positive(self):
        """The cap bounds |ξ| from above"""
        with pytest.raises(ConfigError, match="frequency_cap"):
            Settings(frequency_cap=0.0)

    def test_no_default_grid_in_3d(self):
        """Only d = 1, 2"""
        with pytest.raises(ConfigError):
            Settings().grid(3)

    def test_worker_count(self):
        """threads = 0 means one worker per CPU"""
        assert Settings(threads=3).worker_count == 3
        assert Settings().worker_count >= 1


class TestLoadSettings:
    """Test the defaults → env → file cascade"""

    def test_environment(self, temp_dir):
        """WFKIT_* variables override defaults"""
        settings = load_settings(temp_dir / "missing.json", {"WFKIT_S": "3", "WFKIT_LEVELS": "6"})
        assert settings.s == 3.0
        assert settings.levels == 6
        assert isinstance(settings.levels, int)

    def test_bad_environment_ignored(self, temp_dir):
        """Unknown or malformed variables are skipped"""
        settings = load_settings(temp_dir / "missing.json", {"WFKIT_COLOR": "red", "WFKIT_TAU": "x"})
        assert settings == Settings()

    def test_file_overrides_environment(self, temp_dir):
        """The user file comes last"""
        path = temp_dir / "settings.json"
        path.write_text(json.dumps({"s": 4, "noise_floor": 1e-10}))
        settings = load_settings(path, {"WFKIT_S": "3"})
        assert settings.s == 4.0
        assert settings.noise_floor == 1e-10

    def test_unknown_key_in_file(self, temp_dir):
        """Files may only name known settings"""
        path = temp_dir / "settings.json"
        path.write_text(json.dumps({"sigma": 2}))
        with pytest.raises(ConfigError, match="unknown setting"):
            load_settings(path, {})

    def test_invalid_json_reports_line(self, temp_dir):
        """Parse errors carry path and line"""
        path = temp_dir / "settings.json"
        path.write_text('{\n  "s": 2,\n  "tau": \n}\n')
        with pytest.raises(ConfigError) as excinfo:
            load_settings(path, {})
        assert excinfo.value.line == 4
        assert f"{path}:4:" in str(excinfo.value)


class TestSessionSettings:
    """Test the cached session settings"""

    def test_cached(self):
        """Repeated access returns the same object"""
        with patch.dict(os.environ, {"WFKIT_TAU": "0.1"}):
            first = get_settings()
        assert first.tau == 0.1
        assert get_settings() is first

    def test_configure(self):
        """Overrides replace the session settings"""
        updated = configure(tau=0.2)
        assert updated.tau == 0.2
        assert get_settings().tau == 0.2

    def test_reset(self):
        """reset_settings forces a reload"""
        configure(levels=10)
        reset_settings()
        assert get_settings().levels == load_settings().levels


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
