"""
Flat-file output: JSON, CSV, binary arrays and the report store

Every writer goes through a temporary sibling file and an atomic rename, so a
failed run never leaves a half-written artifact behind.
"""

import csv
import io
import json
import logging
import math
import os
import re
import struct
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .errors import WavefrontError
from .wavefront import WavefrontReport

logger = logging.getLogger(__name__)

MAGIC = b"WFK1"
PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, data: bytes) -> Path:
    """Write data to path via a temporary file in the same directory"""
    path = Path(path).expanduser()
    path.parent.mkdir(parents=True, exist_ok=True)
    with tempfile.NamedTemporaryFile(dir=path.parent, prefix=f".{path.name}.", delete=False) as tmp:
        try:
            tmp.write(data)
            tmp.flush()
            os.fsync(tmp.fileno())
        except BaseException:
            tmp.close()
            os.unlink(tmp.name)
            raise
    try:
        os.replace(tmp.name, path)
    except OSError:
        os.unlink(tmp.name)
        raise
    logger.debug("Wrote %s (%d bytes)", path, len(data))
    return path


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def json_safe(value: Any) -> Any:
    """Replace non-finite floats with "inf", "-inf" or "nan" so the output stays strict JSON"""
    if isinstance(value, float) and not math.isfinite(value):
        return "nan" if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {str(k): json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, np.generic):
        return json_safe(value.item())
    return value


def dumps_json(data: Any) -> str:
    return json.dumps(json_safe(data), indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    return atomic_write_text(path, dumps_json(data))


def read_json(path: PathLike) -> Any:
    with open(Path(path).expanduser(), encoding="utf-8") as f:
        return json.load(f)


def dumps_csv(rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buffer.getvalue()


def write_csv(path: PathLike, rows: Iterable[Sequence[Any]]) -> Path:
    return atomic_write_text(path, dumps_csv(rows))


def encode_array(values: Any) -> bytes:
    """WFK1 magic, uint32 header length, JSON header, float64 payload (little-endian)"""
    a = np.asarray(values)
    is_complex = np.iscomplexobj(a)
    header = json.dumps({"dims": a.ndim, "sizes": list(a.shape), "complex": bool(is_complex)},
                        sort_keys=True).encode("utf-8")
    if is_complex:
        payload = np.stack([a.real, a.imag], axis=-1).astype("<f8")
    else:
        payload = a.astype("<f8")
    return MAGIC + struct.pack("<I", len(header)) + header + payload.tobytes(order="C")


def decode_array(data: bytes) -> np.ndarray:
    if data[:4] != MAGIC:
        raise WavefrontError(f"not a wfkit array: magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 8:
        raise WavefrontError("truncated array header")
    (length,) = struct.unpack("<I", data[4:8])
    try:
        header = json.loads(data[8:8 + length].decode("utf-8"))
        sizes = [int(n) for n in header["sizes"]]
        is_complex = bool(header["complex"])
    except (ValueError, KeyError, TypeError) as e:
        raise WavefrontError(f"invalid array header: {e}")
    if len(sizes) != header.get("dims", len(sizes)):
        raise WavefrontError(f"array header has dims={header['dims']} but {len(sizes)} sizes")
    count = int(np.prod(sizes)) * (2 if is_complex else 1)
    payload = data[8 + length:]
    if len(payload) != 8 * count:
        raise WavefrontError(f"array payload holds {len(payload)} bytes, expected {8 * count}")
    flat = np.frombuffer(payload, dtype="<f8").astype(float)
    if is_complex:
        pairs = flat.reshape(-1, 2)
        return (pairs[:, 0] + 1j * pairs[:, 1]).reshape(sizes)
    return flat.reshape(sizes)


def write_array(path: PathLike, values: Any) -> Path:
    return atomic_write_bytes(path, encode_array(values))


def read_array(path: PathLike) -> np.ndarray:
    return decode_array(Path(path).expanduser().read_bytes())


def _slug(name: str) -> str:
    slug = re.sub(r"[^A-Za-z0-9._-]+", "_", name).strip("._")
    if not slug:
        raise WavefrontError(f"report name {name!r} has no usable characters")
    return slug


class ReportStore:
    """Reports persisted by name as <name>.json with a <name>.csv beside it"""

    def __init__(self, directory: PathLike = "~/.wfkit/reports"):
        self.directory = Path(directory).expanduser()
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.directory / f"{_slug(name)}.json"

    def save(self, report: WavefrontReport, name: Optional[str] = None) -> Path:
        """Save a report to disk"""
        name = _slug(name or report.atom_id)
        path = write_json(self.directory / f"{name}.json", report.to_dict())
        write_csv(self.directory / f"{name}.csv", report.to_csv_rows())
        logger.info("Saved report %s to %s", report.atom_id, path)
        return path

    def load(self, name: str) -> WavefrontReport:
        """Load a report from disk"""
        path = self.path(name)
        if not path.exists():
            raise WavefrontError(f"no report named '{name}' in {self.directory}")
        try:
            return WavefrontReport.from_dict(read_json(path))
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise WavefrontError(f"error loading report {path}: {e}")

    def list(self) -> List[str]:
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def delete(self, name: str) -> bool:
        removed = False
        for suffix in (".json", ".csv"):
            path = self.directory / f"{_slug(name)}{suffix}"
            if path.exists():
                path.unlink()
                removed = True
        return removed


def report_files(report: WavefrontReport, out: PathLike, stem: Optional[str] = None,
                 svg: Optional[str] = None) -> Dict[str, Path]:
    """Write report JSON and CSV (and an SVG document when given) into directory out"""
    out = Path(out).expanduser()
    stem = _slug(stem or report.atom_id)
    files = {
        "json": write_json(out / f"{stem}.json", report.to_dict()),
        "csv": write_csv(out / f"{stem}.csv", report.to_csv_rows()),
    }
    if svg is not None:
        files["svg"] = atomic_write_text(out / f"{stem}.svg", svg)
    return files
