"""
Analysis configuration files

A configuration is one JSON object. Every key is checked before any
computation starts; problems are reported as ``path:line: message`` so
editors can jump to the offending entry.
"""

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, NoReturn, Optional, Tuple

from wfkit import (
    AnalysisParameters,
    Atom,
    BoxGrid,
    ConeCover,
    ConfigError,
    WavefrontError,
    Window,
    get_settings,
    make_atom,
    make_pair,
)
from wfkit.geometry import LatticePair

KEYS = {
    "name", "atom", "points", "s", "p", "q", "k_grid", "q_grid", "cones", "lattice", "window",
    "cutoffs", "eps", "grid", "detectors", "microlocality", "output", "seed", "threads",
}
CONE_KEYS = {"sectors", "overlap_factor"}
LATTICE_KEYS = {"a", "b"}
GRID_KEYS = {"size", "half_width"}
OUTPUT_KEYS = {"dir", "stem", "svg"}

BUNDLED_DIR = Path(__file__).parent / "configs"

_PI_PATTERN = re.compile(r"^\s*(?:(\d+(?:\.\d*)?)\s*\*?\s*)?pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_number(value: Any) -> float:
    """Number or a multiple of pi such as "pi/2" or "2*pi" """
    if isinstance(value, bool):
        raise ValueError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        match = _PI_PATTERN.match(value.lower())
        if match:
            factor = float(match.group(1)) if match.group(1) else 1.0
            divisor = float(match.group(2)) if match.group(2) else 1.0
            return factor * math.pi / divisor
        try:
            return float(value)
        except ValueError:
            pass
    raise ValueError(f"expected a number or a multiple of pi, got {value!r}")


def _line_of(text: str, key: str) -> Optional[int]:
    """First line holding "key": in the raw file"""
    needle = re.compile(r'"' + re.escape(key) + r'"\s*:')
    for number, line in enumerate(text.splitlines(), start=1):
        if needle.search(line):
            return number
    return None


@dataclass
class AnalysisConfig:
    """A validated analysis request"""
    name: str
    atom: Atom
    points: List[Tuple[float, ...]]
    params: AnalysisParameters
    out_dir: Path
    stem: str
    svg: bool = True
    source: Optional[Path] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    @property
    def pair(self) -> LatticePair:
        return self.params.pair

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "atom": self.atom.to_dict(),
            "points": [list(p) for p in self.points],
            "parameters": self.params.to_dict(),
            "output": {"dir": str(self.out_dir), "stem": self.stem, "svg": self.svg},
        }


class _Reader:
    """Validates one raw configuration, anchoring errors to source lines"""

    def __init__(self, path: Path, text: str):
        self.path = path
        self.text = text

    def fail(self, key: Optional[str], message: str) -> NoReturn:
        line = _line_of(self.text, key) if key else None
        line = line or 1
        raise ConfigError(f"{self.path}:{line}: {message}", line=line)

    def reject_unknown(self, data: Dict[str, Any], allowed: set, where: str):
        for key in data:
            if key not in allowed:
                self.fail(key, f"unknown key '{key}' in {where}, expected one of {sorted(allowed)}")

    def section(self, data: Dict[str, Any], key: str, allowed: set) -> Dict[str, Any]:
        value = data.get(key, {})
        if not isinstance(value, dict):
            self.fail(key, f"'{key}' must be an object")
        self.reject_unknown(value, allowed, f"'{key}'")
        return value

    def number(self, data: Dict[str, Any], key: str, default: Any = None) -> Optional[float]:
        if key not in data:
            return default
        try:
            return parse_number(data[key])
        except ValueError as e:
            self.fail(key, f"'{key}': {e}")

    def numbers(self, data: Dict[str, Any], key: str, default: Any = None) -> Optional[Tuple[float, ...]]:
        if key not in data:
            return default
        value = data[key]
        if not isinstance(value, list):
            self.fail(key, f"'{key}' must be a list")
        try:
            return tuple(parse_number(v) for v in value)
        except ValueError as e:
            self.fail(key, f"'{key}': {e}")


def _points(reader: _Reader, raw: Any, dim: int, grid: BoxGrid) -> List[Tuple[float, ...]]:
    if not isinstance(raw, list) or not raw:
        reader.fail("points", "'points' must be a non-empty list")
    points = []
    for entry in raw:
        try:
            values = [parse_number(v) for v in entry] if isinstance(entry, list) else [parse_number(entry)]
        except ValueError as e:
            reader.fail("points", f"'points': {e}")
        if len(values) != dim:
            reader.fail("points", f"point {values} has dimension {len(values)}, the atom has {dim}")
        if any(abs(v) >= grid.half_width for v in values):
            reader.fail("points", f"point {values} lies outside the box [−{grid.half_width:g}, {grid.half_width:g})")
        points.append(tuple(values))
    return points


def _window(reader: _Reader, key: str, spec: Any, dim: int) -> Window:
    if not isinstance(spec, dict):
        reader.fail(key, f"'{key}' must be a window object with a 'kind'")
    try:
        return Window.from_dict({"dim": dim, **spec})
    except (WavefrontError, KeyError, TypeError, ValueError) as e:
        reader.fail(key, f"'{key}': {e}")


def parse_config(data: Any, path: Path, text: str = "") -> AnalysisConfig:
    """Validate a decoded configuration object"""
    reader = _Reader(path, text)
    if not isinstance(data, dict):
        reader.fail(None, "configuration must be a JSON object")
    reader.reject_unknown(data, KEYS, "configuration")
    if "atom" not in data:
        reader.fail(None, "missing required key 'atom'")
    if "points" not in data:
        reader.fail(None, "missing required key 'points'")

    try:
        atom = make_atom(data["atom"])
    except WavefrontError as e:
        reader.fail("atom", str(e))
    dim = atom.dim
    settings = get_settings()

    grid_spec = reader.section(data, "grid", GRID_KEYS)
    try:
        default_grid = settings.grid(dim)
        grid = BoxGrid(dim, int(grid_spec.get("size", default_grid.size)),
                       float(grid_spec.get("half_width", default_grid.half_width)))
    except (WavefrontError, TypeError, ValueError) as e:
        reader.fail("grid", f"'grid': {e}")

    lattice = reader.section(data, "lattice", LATTICE_KEYS)
    pair = None
    if lattice:
        a = reader.number(lattice, "a", 1.0 if dim == 1 else 1.5)
        b = reader.number(lattice, "b", math.pi / 2)
        try:
            pair = make_pair(a, b, dim)
        except WavefrontError as e:
            reader.fail("lattice", str(e))

    cones = reader.section(data, "cones", CONE_KEYS)
    cover = None
    if cones:
        try:
            sectors = cones.get("sectors")
            cover = ConeCover.uniform(dim, None if sectors is None else int(sectors),
                                      float(cones.get("overlap_factor", 1.25)))
        except (WavefrontError, TypeError, ValueError) as e:
            reader.fail("cones", f"'cones': {e}")
        if not cover.covers():
            reader.fail("cones", "cones leave directions uncovered")

    window = _window(reader, "window", data["window"], dim) if "window" in data else None
    cutoffs = None
    if "cutoffs" in data:
        if not isinstance(data["cutoffs"], list) or not data["cutoffs"]:
            reader.fail("cutoffs", "'cutoffs' must be a non-empty list of windows")
        cutoffs = tuple(_window(reader, "cutoffs", c, dim) for c in data["cutoffs"])

    detectors = data.get("detectors")
    if detectors is not None and (not isinstance(detectors, list)
                                  or not all(isinstance(d, str) for d in detectors)):
        reader.fail("detectors", "'detectors' must be a list of names")
    threads = data.get("threads")
    if threads is not None and (not isinstance(threads, int) or isinstance(threads, bool) or threads < 0):
        reader.fail("threads", f"'threads' must be a non-negative integer, got {threads!r}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        reader.fail("seed", f"'seed' must be an integer, got {seed!r}")
    microlocality = data.get("microlocality", True)
    if not isinstance(microlocality, bool):
        reader.fail("microlocality", "'microlocality' must be true or false")

    s = reader.number(data, "s")
    if s is not None and s <= 1:
        reader.fail("s", f"'s' must exceed 1, got {s:g}")
    p = reader.number(data, "p", 2.0)
    q = reader.number(data, "q", 2.0)
    for key, value in (("p", p), ("q", q)):
        if value < 1:
            reader.fail(key, f"'{key}' must be >= 1, got {value:g}")

    kwargs: Dict[str, Any] = dict(
        s=s, p=p, q=q, grid=grid, pair=pair, cover=cover, window=window, cutoffs=cutoffs,
        microlocality=microlocality, threads=threads or None, seed=seed,
    )
    for key, target in (("k_grid", "k_grid"), ("q_grid", "q_grid"), ("eps", "eps_list")):
        values = reader.numbers(data, key)
        if values is not None:
            kwargs[target] = values
    if detectors is not None:
        kwargs["detectors"] = tuple(detectors)
    try:
        params = AnalysisParameters(**kwargs)
        params.resolved(dim)
    except WavefrontError as e:
        message = str(e)
        key = "k_grid" if "k_grid" in message else "detectors" if "detectors" in message else "eps"
        reader.fail(key if key in data else None, message)

    points = _points(reader, data["points"], dim, grid)

    output = reader.section(data, "output", OUTPUT_KEYS)
    name = data.get("name") or path.stem
    if not isinstance(name, str):
        reader.fail("name", "'name' must be a string")
    svg = output.get("svg", True)
    if not isinstance(svg, bool):
        reader.fail("output", "'output.svg' must be true or false")
    out_dir = output.get("dir", "wfkit-out")
    if not isinstance(out_dir, str):
        reader.fail("output", "'output.dir' must be a path string")
    stem = str(output.get("stem", name))
    return AnalysisConfig(name, atom, points, params, Path(out_dir).expanduser(), stem, svg, path, data)


def bundled_configs() -> List[str]:
    return sorted(p.name for p in BUNDLED_DIR.glob("*.json"))


def resolve_path(value: Any) -> Path:
    """A file path, or the name of a bundled configuration when no such file exists"""
    path = Path(value).expanduser()
    if path.exists():
        return path
    for candidate in (BUNDLED_DIR / str(value), BUNDLED_DIR / f"{value}.json"):
        if candidate.exists():
            return candidate
    return path


def load_config(path: Any) -> AnalysisConfig:
    """Read and validate a configuration file"""
    path = Path(path).expanduser()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"{path}:1: cannot read configuration: {e.strerror or e}", line=1)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}: invalid JSON: {e.msg}", line=e.lineno)
    return parse_config(data, path, text)
