"""
Lattices, lattice pairs, open cones and sampling boxes
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import GeometryError, InvalidLatticePairError

logger = logging.getLogger(__name__)

MEMBERSHIP_TOLERANCE = 1e-9
PAIRING_TOLERANCE = 1e-9
TWO_PI = 2.0 * math.pi


def _as_tuple_matrix(matrix: Any) -> Tuple[Tuple[float, ...], ...]:
    arr = np.atleast_2d(np.asarray(matrix, dtype=float))
    return tuple(tuple(float(v) for v in row) for row in arr)


@dataclass(frozen=True)
class Parallelepiped:
    """Fundamental cell corner + [0,1)^d · edges (edges are columns)"""
    corner: Tuple[float, ...]
    edges: Tuple[Tuple[float, ...], ...]

    @property
    def volume(self) -> float:
        return abs(float(np.linalg.det(np.asarray(self.edges))))

    def contains(self, points: Any) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        coords = np.linalg.solve(np.asarray(self.edges), (pts - np.asarray(self.corner)).T).T
        return np.all((coords >= -MEMBERSHIP_TOLERANCE) & (coords < 1 - MEMBERSHIP_TOLERANCE), axis=1)


@dataclass(frozen=True)
class Lattice:
    """Λ = x₀ + B·Z^d, basis vectors are the columns of B"""
    basis: Tuple[Tuple[float, ...], ...]
    offset: Tuple[float, ...] = ()

    def __post_init__(self):
        basis = _as_tuple_matrix(self.basis)
        matrix = np.asarray(basis)
        if matrix.shape[0] != matrix.shape[1]:
            raise GeometryError(f"lattice basis must be square, got shape {matrix.shape}")
        if abs(np.linalg.det(matrix)) <= 1e-14:
            raise GeometryError("lattice basis is singular")
        offset = tuple(float(v) for v in self.offset) or (0.0,) * matrix.shape[0]
        if len(offset) != matrix.shape[0]:
            raise GeometryError(f"offset has dimension {len(offset)}, basis {matrix.shape[0]}")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "offset", offset)

    @classmethod
    def scaled_integers(cls, step: float, dim: int) -> "Lattice":
        """step·Z^dim"""
        if step <= 0:
            raise GeometryError(f"lattice step must be positive, got {step}")
        return cls(_as_tuple_matrix(step * np.eye(dim)))

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def matrix(self) -> np.ndarray:
        return np.asarray(self.basis)

    def cell_volume(self) -> float:
        """‖Λ‖"""
        return abs(float(np.linalg.det(self.matrix)))

    @property
    def step(self) -> Optional[float]:
        """Common step a when Λ = aZ^d (no offset), else None"""
        m = self.matrix
        a = m[0, 0]
        if np.allclose(m, a * np.eye(self.dim), rtol=0, atol=1e-12) and a > 0 \
                and not any(self.offset):
            return float(a)
        return None

    def coordinates(self, points: Any) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.linalg.solve(self.matrix, (pts - np.asarray(self.offset)).T).T

    def contains(self, points: Any) -> np.ndarray:
        coords = self.coordinates(points)
        return np.all(np.abs(coords - np.round(coords)) <= MEMBERSHIP_TOLERANCE, axis=1)

    def points(self, indices: Any) -> np.ndarray:
        """Lattice points x₀ + B n for integer rows n"""
        idx = np.atleast_2d(np.asarray(indices, dtype=float))
        return idx @ self.matrix.T + np.asarray(self.offset)

    def indices_in_ball(self, center: Any, radius: float, strict: bool = False) -> np.ndarray:
        """Integer coordinates of lattice points within radius of center, lexicographic"""
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if radius < 0:
            return np.zeros((0, self.dim), dtype=int)
        inverse = np.linalg.inv(self.matrix)
        middle = inverse @ (center - np.asarray(self.offset))
        span = radius * np.linalg.norm(inverse, axis=1)
        lo = np.floor(middle - span).astype(int)
        hi = np.ceil(middle + span).astype(int)
        axes = [np.arange(a, b + 1) for a, b in zip(lo, hi)]
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        distance = np.linalg.norm(self.points(grid) - center, axis=1)
        keep = distance < radius if strict else distance <= radius
        return grid[keep]

    def points_in_ball(self, center: Any, radius: float, strict: bool = False) -> np.ndarray:
        return self.points(self.indices_in_ball(center, radius, strict)).reshape(-1, self.dim)

    def scaled(self, eps: float) -> "Lattice":
        """ε·Λ"""
        return Lattice(_as_tuple_matrix(eps * self.matrix), tuple(eps * v for v in self.offset))

    def dual(self, c: float = TWO_PI) -> "Lattice":
        """The lattice paired with this one at constant c"""
        return Lattice(_as_tuple_matrix(c * np.linalg.inv(self.matrix).T))

    def parallelepiped(self, unimodular: Optional[Any] = None,
                       corner_index: Optional[Sequence[int]] = None) -> Parallelepiped:
        """A fundamental cell, optionally for the basis B·U with U unimodular"""
        edges = self.matrix
        if unimodular is not None:
            u = np.asarray(unimodular, dtype=float)
            if not math.isclose(abs(np.linalg.det(u)), 1.0, abs_tol=1e-9) \
                    or not np.allclose(u, np.round(u)):
                raise GeometryError("change of basis must be an integer matrix with determinant ±1")
            edges = edges @ u
        index = np.zeros(self.dim) if corner_index is None else np.asarray(corner_index, dtype=float)
        corner = self.points(index)[0]
        return Parallelepiped(tuple(float(v) for v in corner), _as_tuple_matrix(edges))

    def to_dict(self) -> Dict[str, Any]:
        return {"basis": [list(row) for row in self.basis], "offset": list(self.offset)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Lattice":
        try:
            return cls(_as_tuple_matrix(data["basis"]), tuple(data.get("offset", ())))
        except (KeyError, TypeError) as e:
            raise GeometryError(f"invalid lattice description {data!r}: {e}")


@dataclass(frozen=True)
class LatticePair:
    """Space lattice Λ₁ and frequency lattice Λ₂ with ⟨e_j, ε_k⟩ = c δ_jk"""
    lambda1: Lattice
    lambda2: Lattice
    c: float

    @classmethod
    def from_lattices(cls, lambda1: Lattice, lambda2: Lattice) -> "LatticePair":
        if lambda1.dim != lambda2.dim:
            raise InvalidLatticePairError("paired lattices must share the dimension")
        gram = lambda1.matrix.T @ lambda2.matrix
        c = float(gram[0, 0])
        expected = c * np.eye(lambda1.dim)
        if not np.allclose(gram, expected, rtol=0, atol=PAIRING_TOLERANCE):
            raise InvalidLatticePairError(
                f"lattices are not paired: ⟨e_j, ε_k⟩ must equal c·δ_jk, got {gram.tolist()}"
            )
        return cls(lambda1, lambda2, c)

    @property
    def dim(self) -> int:
        return self.lambda1.dim

    @property
    def classification(self) -> str:
        if 0 < self.c < TWO_PI - PAIRING_TOLERANCE:
            return "strong"
        if abs(self.c - TWO_PI) <= PAIRING_TOLERANCE:
            return "weak"
        return "invalid"

    def require_strong(self):
        if self.classification != "strong":
            raise InvalidLatticePairError(
                f"lattice pair with c={self.c:.6g} is {self.classification}ly admissible; "
                f"a strongly admissible pair needs 0 < c < 2π"
            )

    def avoids(self, x0: Any) -> bool:
        """True when x₀ ∉ Λ₁"""
        return not bool(self.lambda1.contains(x0)[0])

    @property
    def steps(self) -> Tuple[float, float]:
        """(a, b) for separable pairs aZ^d × bZ^d"""
        a, b = self.lambda1.step, self.lambda2.step
        if a is None or b is None:
            raise InvalidLatticePairError("operation needs separable lattices aZ^d × bZ^d")
        return a, b

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda1": self.lambda1.to_dict(),
            "lambda2": self.lambda2.to_dict(),
            "c": self.c,
            "classification": self.classification,
        }


def make_pair(a: float, b: float, d: int) -> LatticePair:
    """Λ₁ = aZ^d, Λ₂ = bZ^d"""
    if a <= 0 or b <= 0:
        raise GeometryError(f"lattice steps must be positive, got a={a}, b={b}")
    if d < 1:
        raise GeometryError(f"dimension must be >= 1, got {d}")
    c = a * b
    if c > TWO_PI + PAIRING_TOLERANCE:
        raise InvalidLatticePairError(
            f"lattice pair a={a:.6g}, b={b:.6g} has ab={c:.6g} > 2π: beyond the critical "
            f"density no dual window exists"
        )
    pair = LatticePair(Lattice.scaled_integers(a, d), Lattice.scaled_integers(b, d), c)
    logger.debug("Built %s lattice pair a=%g b=%g d=%d", pair.classification, a, b, d)
    return pair


def as_points(xi: Any, dim: int) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(xi, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if arr.shape[0] == dim:
            return arr.reshape(1, dim), True
        if dim == 1:
            return arr.reshape(-1, 1), False
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise GeometryError(f"expected points of dimension {dim}, got array of shape {arr.shape}")


@dataclass(frozen=True)
class Cone:
    """Open circular cone {ξ ≠ 0 : angle(ξ, axis) < half_angle}"""
    axis: Tuple[float, ...]
    half_angle: float

    def __post_init__(self):
        axis = np.atleast_1d(np.asarray(self.axis, dtype=float))
        norm = float(np.linalg.norm(axis))
        if norm == 0:
            raise GeometryError("cone axis must be nonzero")
        if not 0 < self.half_angle <= math.pi:
            raise GeometryError(f"cone half-angle must lie in (0, π], got {self.half_angle}")
        object.__setattr__(self, "axis", tuple(float(v) for v in axis / norm))
        object.__setattr__(self, "half_angle", float(self.half_angle))

    @classmethod
    def from_angle(cls, theta: float, half_angle: float) -> "Cone":
        return cls((math.cos(theta), math.sin(theta)), half_angle)

    @classmethod
    def full(cls, dim: int) -> "Cone":
        axis = (1.0,) + (0.0,) * (dim - 1)
        return cls(axis, math.pi)

    @property
    def dim(self) -> int:
        return len(self.axis)

    @property
    def is_full(self) -> bool:
        return self.half_angle >= math.pi

    def angle_to(self, xi: Any) -> np.ndarray:
        pts, _ = as_points(xi, self.dim)
        norms = np.linalg.norm(pts, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        return np.arccos(np.clip(pts @ np.asarray(self.axis) / safe, -1.0, 1.0))

    def contains(self, xi: Any):
        pts, single = as_points(xi, self.dim)
        nonzero = np.linalg.norm(pts, axis=1) > 0
        if self.is_full:
            inside = nonzero
        else:
            inside = nonzero & (self.angle_to(pts) < self.half_angle)
        return bool(inside[0]) if single else inside

    def shrink(self, delta: float) -> "Cone":
        if not 0 <= delta < self.half_angle:
            raise GeometryError(f"shrink amount must lie in [0, {self.half_angle}), got {delta}")
        return Cone(self.axis, self.half_angle - delta)

    @property
    def cone_id(self) -> str:
        if self.dim == 1:
            return "+" if self.axis[0] > 0 else "-"
        degrees = math.degrees(math.atan2(self.axis[1], self.axis[0])) % 360.0
        return f"{degrees:.1f}±{math.degrees(self.half_angle):.1f}"

    def to_dict(self) -> Dict[str, Any]:
        return {"axis": list(self.axis), "half_angle": self.half_angle}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Cone":
        try:
            return cls(tuple(data["axis"]), float(data["half_angle"]))
        except (KeyError, TypeError) as e:
            raise GeometryError(f"invalid cone description {data!r}: {e}")


def separation_constant(inner: Cone, outer: Cone) -> float:
    """Largest c with |ξ−η| ≥ c·max(|ξ|,|η|) for ξ ∈ inner, η ∉ outer"""
    if inner.dim != outer.dim:
        raise GeometryError("cones must share the dimension")
    alignment = float(np.dot(inner.axis, outer.axis))
    if inner.dim == 1:
        if alignment <= 0 or outer.is_full:
            raise GeometryError("inner ray is not compactly contained in the outer cone")
        return 1.0
    between = math.acos(max(-1.0, min(1.0, alignment)))
    gap = outer.half_angle - inner.half_angle - between
    if gap <= 0:
        raise GeometryError(
            f"inner cone is not compactly contained in the outer cone (angular gap {gap:.4g})"
        )
    return min(2.0 * math.sin(gap / 2.0), 1.0)


def lattice_points_in(lattice: Lattice, cone: Cone, radius: float) -> np.ndarray:
    """Points of the lattice in cone ∩ ball(0, radius), lexicographic in integer coordinates"""
    if lattice.dim != cone.dim:
        raise GeometryError("lattice and cone must share the dimension")
    if radius <= 0:
        return np.zeros((0, lattice.dim))
    pts = lattice.points_in_ball(np.zeros(lattice.dim), radius)
    if pts.shape[0] == 0:
        return pts
    return pts[cone.contains(pts)]


@dataclass(frozen=True)
class ConeCover:
    """Cones whose union is R^d∖0"""
    cones: Tuple[Cone, ...]
    overlap: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.cones:
            raise GeometryError("cone cover needs at least one cone")
        if len({c.dim for c in self.cones}) != 1:
            raise GeometryError("cones in a cover must share the dimension")
        if not self.overlap:
            object.__setattr__(self, "overlap", self.multiplicity())

    @classmethod
    def uniform(cls, dim: int, sectors: Optional[int] = None,
                overlap_factor: float = 1.25) -> "ConeCover":
        if dim == 1:
            return cls((Cone((1.0,), math.pi / 2), Cone((-1.0,), math.pi / 2)))
        if dim != 2:
            raise GeometryError(f"uniform cone covers exist for d <= 2, got {dim}")
        sectors = 16 if sectors is None else sectors
        if sectors < 2:
            raise GeometryError(f"need at least 2 sectors, got {sectors}")
        if overlap_factor < 1:
            raise GeometryError(f"overlap factor must be >= 1 to cover, got {overlap_factor}")
        width = 2.0 * math.pi / sectors
        half = min(math.pi, overlap_factor * width / 2.0)
        return cls(tuple(Cone.from_angle(i * width, half) for i in range(sectors)))

    @property
    def dim(self) -> int:
        return self.cones[0].dim

    @property
    def ids(self) -> List[str]:
        return [f"c{i:02d}" for i in range(len(self.cones))]

    def _directions(self, samples: int) -> np.ndarray:
        if self.dim == 1:
            return np.array([[1.0], [-1.0]])
        theta = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
        return np.stack([np.cos(theta), np.sin(theta)], axis=1)

    def multiplicity(self, samples: int = 3600) -> int:
        directions = self._directions(samples)
        counts = sum(c.contains(directions).astype(int) for c in self.cones)
        return int(np.max(counts))

    def covers(self, samples: int = 3600) -> bool:
        directions = self._directions(samples)
        counts = sum(c.contains(directions).astype(int) for c in self.cones)
        return bool(np.all(counts >= 1))

    def to_dict(self) -> Dict[str, Any]:
        return {"cones": [c.to_dict() for c in self.cones], "overlap": self.overlap}


@dataclass(frozen=True)
class BoxGrid:
    """Uniform power-of-two sampling of [−L, L)^d"""
    dim: int
    size: int
    half_width: float

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise GeometryError(f"sampling boxes support d = 1 or 2, got {self.dim}")
        if self.size < 2 or self.size & (self.size - 1):
            raise GeometryError(f"grid size must be a power of two, got {self.size}")
        if self.half_width <= 0:
            raise GeometryError(f"box half-width must be positive, got {self.half_width}")

    @property
    def spacing(self) -> float:
        """h = 2L/N"""
        return 2.0 * self.half_width / self.size

    @property
    def cell_volume(self) -> float:
        return self.spacing ** self.dim

    @property
    def frequency_step(self) -> float:
        """Δξ = π/L"""
        return math.pi / self.half_width

    @property
    def nyquist(self) -> float:
        return math.pi / self.spacing

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.size,) * self.dim

    @property
    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.size)

    @property
    def frequency_axis(self) -> np.ndarray:
        return self.frequency_step * np.arange(-self.size // 2, self.size // 2)

    def points(self) -> np.ndarray:
        """All nodes as an array of shape (N^d, d), C order"""
        mesh = np.meshgrid(*([self.axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    def frequency_points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.frequency_axis] * self.dim), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.dim)

    def nearest_index(self, x: Any) -> Tuple[int, ...]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape != (self.dim,):
            raise GeometryError(f"expected a point of dimension {self.dim}, got {x.shape}")
        index = np.round((x + self.half_width) / self.spacing).astype(int)
        if np.any(index < 0) or np.any(index >= self.size):
            raise GeometryError(f"point {x.tolist()} lies outside the box [−{self.half_width}, {self.half_width})")
        return tuple(int(i) for i in index)

    def contains_ball(self, center: Any, radius: float) -> bool:
        center = np.atleast_1d(np.asarray(center, dtype=float))
        lo = -self.half_width
        hi = self.half_width - self.spacing
        return bool(np.all(center - radius >= lo) and np.all(center + radius <= hi))

    def default_radius(self) -> float:
        """Largest power of two not above 0.7 of the Nyquist frequency"""
        return 2.0 ** math.floor(math.log2(0.7 * self.nyquist))

    def to_dict(self) -> Dict[str, Any]:
        return {"dim": self.dim, "size": self.size, "half_width": self.half_width}
