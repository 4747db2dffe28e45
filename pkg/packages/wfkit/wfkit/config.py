"""
Session settings for wfkit

Settings are loaded with a cascade (defaults → environment → user file) and
cached for the process. The analysis exponent s, the classification
threshold tau and the default sampling grids live here.
"""

import json
import logging
import os
import threading
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from .errors import ConfigError

logger = logging.getLogger(__name__)

ENV_PREFIX = "WFKIT_"
SETTINGS_FILE = Path.home() / ".wfkit" / "settings.json"


@dataclass(frozen=True)
class Settings:
    """Process-wide analysis settings"""
    s: float = 2.0
    tau: float = 0.05
    noise_floor: float = 1e-12
    levels: int = 8
    fit_annuli: int = 3
    grid_size_1d: int = 4096
    grid_size_2d: int = 256
    half_width_1d: float = 8.0
    half_width_2d: float = 4.0
    frequency_cap: float = 1e6
    threads: int = 0

    def __post_init__(self):
        if self.s <= 1:
            raise ConfigError(f"s must exceed 1, got {self.s}")
        if self.tau <= 0:
            raise ConfigError(f"tau must be positive, got {self.tau}")
        if not 0 <= self.noise_floor < 1:
            raise ConfigError(f"noise_floor must lie in [0, 1), got {self.noise_floor}")
        if self.fit_annuli < 2 or self.levels < self.fit_annuli:
            raise ConfigError(
                f"need levels >= fit_annuli >= 2, got levels={self.levels}, "
                f"fit_annuli={self.fit_annuli}"
            )
        if self.frequency_cap <= 0:
            raise ConfigError(f"frequency_cap must be positive, got {self.frequency_cap}")
        if self.threads < 0:
            raise ConfigError(f"threads must be >= 0, got {self.threads}")

    def grid(self, dim: int):
        """Default sampling box for dimension dim"""
        from .geometry import BoxGrid

        if dim == 1:
            return BoxGrid(1, self.grid_size_1d, self.half_width_1d)
        if dim == 2:
            return BoxGrid(2, self.grid_size_2d, self.half_width_2d)
        raise ConfigError(f"only dimensions 1 and 2 have default grids, got {dim}")

    @property
    def worker_count(self) -> int:
        return self.threads or (os.cpu_count() or 1)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _coerce(name: str, value: Any) -> Any:
    kinds = {f.name: f.type for f in fields(Settings)}
    if name not in kinds:
        raise ConfigError(f"unknown setting '{name}'")
    target = kinds[name]
    try:
        if target in (int, "int"):
            return int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"setting '{name}' expects a number, got {value!r}")


def load_settings(path: Optional[Path] = None,
                  environ: Optional[Mapping[str, str]] = None) -> Settings:
    """Load settings with cascade (defaults → env → file)"""
    values: Dict[str, Any] = {}

    # 1. Environment variables
    environ = os.environ if environ is None else environ
    for key, raw in environ.items():
        if key.startswith(ENV_PREFIX):
            name = key[len(ENV_PREFIX):].lower()
            try:
                values[name] = _coerce(name, raw)
            except ConfigError as e:
                logger.warning("Ignoring %s: %s", key, e)

    # 2. User settings file
    path = SETTINGS_FILE if path is None else Path(path).expanduser()
    if path.exists():
        try:
            with open(path) as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}", line=e.lineno)
        for name, raw in data.items():
            values[name] = _coerce(name, raw)

    return Settings(**values)


_lock = threading.Lock()
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Return the cached session settings, loading them on first use"""
    global _settings
    with _lock:
        if _settings is None:
            _settings = load_settings()
            logger.debug("Loaded settings: %s", _settings)
        return _settings


def configure(**overrides: Any) -> Settings:
    """Replace the session settings with overrides applied"""
    global _settings
    current = get_settings()
    updated = replace(current, **overrides)
    with _lock:
        _settings = updated
    return updated


def reset_settings():
    """Forget cached settings so the next access reloads them"""
    global _settings
    with _lock:
        _settings = None
