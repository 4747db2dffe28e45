"""
Windows of Gevrey class and the catalog of test distributions

Atoms know their sampled values on a box, their Fourier transform (closed form
or quadrature) and where they are singular.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from .config import get_settings
from .errors import AtomError, OracleUnavailableError
from .geometry import BoxGrid, Cone, Lattice, as_points

logger = logging.getLogger(__name__)

WINDOW_KINDS = ("gevrey", "gaussian", "plateau", "tight_partition")
ATOM_KINDS = ("delta", "jump", "gevrey_bump", "modulated_bump", "half_plane", "sum", "localized")

# a Gaussian is treated as zero beyond this many widths (relative size 1e-16)
GAUSSIAN_REACH = math.sqrt(2.0 * math.log(1e16))


def _gevrey_profile(r: np.ndarray, order: float) -> np.ndarray:
    """exp(−(1−r²)^{−1/(σ−1)}) for r < 1, zero elsewhere"""
    alpha = 1.0 / (order - 1.0)
    out = np.zeros_like(r, dtype=float)
    inside = r < 1.0
    t = 1.0 - r[inside] ** 2
    with np.errstate(over="ignore", divide="ignore", under="ignore"):
        out[inside] = np.exp(-t ** (-alpha))
    return out


def _flat_edge(t: np.ndarray, order: float) -> np.ndarray:
    alpha = 1.0 / (order - 1.0)
    out = np.zeros_like(t, dtype=float)
    positive = t > 0
    with np.errstate(over="ignore", divide="ignore", under="ignore"):
        out[positive] = np.exp(-t[positive] ** (-alpha))
    return out


@lru_cache(maxsize=64)
def _gevrey_mass(order: float, dim: int) -> float:
    """∫ of the unit-radius profile over the unit ball"""
    def radial(u):
        return float(_gevrey_profile(np.array([u]), order)[0])

    if dim == 1:
        value, _ = integrate.quad(radial, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
        return 2.0 * value
    value, _ = integrate.quad(lambda u: radial(u) * u, 0.0, 1.0, epsabs=1e-15, epsrel=1e-13, limit=200)
    return 2.0 * math.pi * value


@dataclass(frozen=True)
class Window:
    """Window function, evaluated as amplitude·profile(x/scale)"""
    kind: str
    dim: int = 1
    order: float = 2.0
    radius: float = 1.0
    width: float = 1.0
    inner: float = 0.0
    scale: float = 1.0
    amplitude: float = 1.0
    base: Optional["Window"] = None
    lattice: Optional[Lattice] = None
    power: float = 1.0
    kappa: float = 1.0

    def __post_init__(self):
        if self.kind not in WINDOW_KINDS:
            raise AtomError(f"unknown window kind '{self.kind}', expected one of {WINDOW_KINDS}")
        if self.dim not in (1, 2):
            raise AtomError(f"windows support d = 1 or 2, got {self.dim}")
        if self.scale <= 0:
            raise AtomError(f"window scale must be positive, got {self.scale}")
        if self.kind in ("gevrey", "plateau") and self.order <= 1:
            raise AtomError(
                f"Gevrey order must exceed 1, got {self.order}: classes with σ <= 1 are "
                f"quasi-analytic and contain no compactly supported functions"
            )
        if self.kind in ("gevrey", "plateau") and self.radius <= 0:
            raise AtomError(f"window radius must be positive, got {self.radius}")
        if self.kind == "plateau" and not 0 <= self.inner < self.radius:
            raise AtomError(f"plateau needs 0 <= inner < radius, got {self.inner}, {self.radius}")
        if self.kind == "gaussian" and self.width <= 0:
            raise AtomError(f"Gaussian width must be positive, got {self.width}")
        if self.kind == "tight_partition":
            if self.base is None or self.lattice is None:
                raise AtomError("tight partition windows need a base window and a lattice")
            if not self.base.is_compact:
                raise AtomError("tight partition windows need a compactly supported base")
            if self.lattice.dim != self.dim:
                raise AtomError("lattice dimension does not match the window")

    @property
    def is_compact(self) -> bool:
        return self.kind != "gaussian"

    @property
    def support_radius(self) -> float:
        if self.kind in ("gevrey", "plateau"):
            return self.radius * self.scale
        if self.kind == "tight_partition":
            return self.base.support_radius * self.scale
        return math.inf

    @property
    def reach(self) -> float:
        """Support radius, or the radius beyond which a Gaussian is numerically zero"""
        if self.kind == "gaussian":
            return GAUSSIAN_REACH * self.width * self.scale
        return self.support_radius

    @property
    def gevrey_order(self) -> float:
        if self.kind == "gaussian":
            return 1.0
        if self.kind == "tight_partition":
            return self.base.gevrey_order
        return self.order

    @property
    def window_id(self) -> str:
        if self.kind == "gevrey":
            label = f"gevrey(σ={self.order:g},R={self.radius:g})"
        elif self.kind == "gaussian":
            label = f"gaussian(w={self.width:g})"
        elif self.kind == "plateau":
            label = f"plateau(σ={self.order:g},r={self.inner:g},R={self.radius:g})"
        else:
            prefix = "tight" if self.power != 1.0 else "dual"
            label = f"{prefix}[{self.base.window_id}]"
        return label if self.scale == 1.0 else f"{label}@{self.scale:g}"

    def evaluate(self, points: Any) -> np.ndarray:
        pts, _ = as_points(points, self.dim)
        y = pts / self.scale
        if self.kind == "gevrey":
            return self.amplitude * _gevrey_profile(np.linalg.norm(y, axis=1) / self.radius, self.order)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-np.sum(y * y, axis=1) / (2.0 * self.width ** 2))
        if self.kind == "plateau":
            u = (np.linalg.norm(y, axis=1) - self.inner) / (self.radius - self.inner)
            rise = _flat_edge(1.0 - u, self.order)
            fall = _flat_edge(u, self.order)
            total = rise + fall
            out = np.zeros_like(u)
            np.divide(rise, total, out=out, where=total > 0)
            return self.amplitude * out
        values = self.base.evaluate(y)
        out = np.zeros_like(values)
        active = values != 0
        if np.any(active):
            partition = self.partition_sum(y[active])
            out[active] = values[active] / (self.kappa * partition ** self.power)
        return self.amplitude * out

    __call__ = evaluate

    def partition_sum(self, y: np.ndarray) -> np.ndarray:
        """Σ_j base(y − x_j)² over lattice points, for unscaled points y inside the base support"""
        if self.lattice is None:
            raise AtomError(f"{self.window_id} has no lattice")
        reach = 2.0 * self.base.support_radius
        nodes = self.lattice.points_in_ball(np.zeros(self.dim), reach)
        total = np.zeros(y.shape[0])
        for node in nodes:
            total += self.base.evaluate(y - node) ** 2
        return total

    def scaled(self, eps: float) -> "Window":
        """φ(·/ε)"""
        if eps <= 0:
            raise AtomError(f"scale must be positive, got {eps}")
        return replace(self, scale=self.scale * eps)

    def integral(self) -> float:
        if self.kind == "gevrey":
            return self.amplitude * (self.radius * self.scale) ** self.dim * _gevrey_mass(self.order, self.dim)
        if self.kind == "gaussian":
            return self.amplitude * (math.sqrt(2.0 * math.pi) * self.width * self.scale) ** self.dim
        reach = self.support_radius
        if self.dim == 1:
            value, _ = integrate.quad(lambda t: float(self.evaluate(t)), -reach, reach,
                                      epsabs=1e-13, limit=400)
            return value
        if self.kind == "plateau":
            value, _ = integrate.quad(lambda r: float(self.evaluate((r, 0.0))) * r, 0.0, reach,
                                      epsabs=1e-13, limit=400)
            return 2.0 * math.pi * value
        value, _ = integrate.dblquad(lambda u, v: float(self.evaluate((u, v))),
                                     -reach, reach, -reach, reach, epsabs=1e-10)
        return value

    def normalized(self) -> "Window":
        """Same shape with ∫φ = 1"""
        return replace(self, amplitude=self.amplitude / self.integral())

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "dim": self.dim}
        if self.kind in ("gevrey", "plateau"):
            data.update(order=self.order, radius=self.radius)
        if self.kind == "plateau":
            data["inner"] = self.inner
        if self.kind == "gaussian":
            data["width"] = self.width
        if self.kind == "tight_partition":
            data.update(base=self.base.to_dict(), lattice=self.lattice.to_dict(),
                        power=self.power, kappa=self.kappa)
        if self.scale != 1.0:
            data["scale"] = self.scale
        data["amplitude"] = self.amplitude
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Window":
        if not isinstance(data, dict) or "kind" not in data:
            raise AtomError(f"window must be an object with a 'kind', got {data!r}")
        kind = data["kind"]
        dim = int(data.get("dim", 1))
        if kind in ("gevrey", "gevrey_bump"):
            window = gevrey_bump(float(data.get("order", 2.0)), float(data.get("radius", 1.0)), dim)
        elif kind == "gaussian":
            window = gaussian_window(float(data.get("width", 1.0)), dim)
        elif kind == "plateau":
            window = plateau(float(data["inner"]), float(data.get("radius", 1.0)),
                             float(data.get("order", 2.0)), dim)
        elif kind == "tight_partition":
            window = cls(kind, dim=dim, base=cls.from_dict(data["base"]),
                         lattice=Lattice.from_dict(data["lattice"]),
                         power=float(data.get("power", 0.5)), kappa=float(data.get("kappa", 1.0)))
        else:
            raise AtomError(f"unknown window kind '{kind}'")
        if "amplitude" in data:
            window = replace(window, amplitude=float(data["amplitude"]))
        if "scale" in data:
            window = replace(window, scale=float(data["scale"]))
        return window


def gevrey_bump(sigma: float, R: float = 1.0, dim: int = 1, normalize: bool = True) -> Window:
    """N·exp(−(1−|x/R|²)^{−1/(σ−1)}) on |x| < R, with ∫φ = 1 when normalized"""
    if sigma <= 1:
        raise AtomError(
            f"Gevrey order must exceed 1, got {sigma}: classes with σ <= 1 are "
            f"quasi-analytic and contain no compactly supported functions"
        )
    window = Window("gevrey", dim=dim, order=float(sigma), radius=float(R))
    return window.normalized() if normalize else window


def gaussian_window(width: float = 1.0, dim: int = 1, l2_normalize: bool = False) -> Window:
    """exp(−|x|²/(2w²))"""
    window = Window("gaussian", dim=dim, width=float(width))
    if l2_normalize:
        window = replace(window, amplitude=(math.pi * width * width) ** (-dim / 4.0))
    return window


def plateau(inner: float, outer: float, sigma: float = 2.0, dim: int = 1) -> Window:
    """Gevrey cutoff equal to 1 on |x| <= inner and 0 on |x| >= outer"""
    return Window("plateau", dim=dim, order=float(sigma), radius=float(outer), inner=float(inner))


def tight_window(phi: Window, lattice: Lattice) -> Window:
    """φ/(Σ_j φ(·−x_j)²)^{1/2}, whose squared translates sum to one"""
    return Window("tight_partition", dim=phi.dim, base=phi, lattice=lattice, power=0.5, kappa=1.0)


def gevrey_constants(window: Window, n_max: int = 8, size: int = 4096) -> Tuple[float, float]:
    """Estimate (C, A) with sup|φ^{(n)}| <= C·A^n·(n!)^σ for n <= n_max (1D windows)

    Derivatives are taken spectrally on a periodic box twice the support, with
    Fourier coefficients below roundoff discarded.
    """
    from .transform import fft_radix2

    if window.dim != 1 or not window.is_compact:
        raise AtomError("derivative bounds are estimated for compact 1D windows")
    half = 2.0 * window.support_radius
    h = 2.0 * half / size
    x = -half + h * np.arange(size)
    spectrum = fft_radix2(window.evaluate(x))
    spectrum[np.abs(spectrum) < 1e-13 * np.max(np.abs(spectrum))] = 0.0
    freq = 2.0 * math.pi / (size * h) * np.concatenate([np.arange(size // 2), np.arange(-size // 2, 0)])
    sigma = window.gevrey_order
    sups = [float(np.max(np.abs(fft_radix2((1j * freq) ** n * spectrum, inverse=True))))
            for n in range(n_max + 1)]
    C = sups[0]
    A = max((sups[n] / (C * math.factorial(n) ** sigma)) ** (1.0 / n) for n in range(1, n_max + 1))
    return C, A


@dataclass(frozen=True, eq=False)
class Signal:
    """Samples on a box grid"""
    grid: BoxGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise AtomError(f"samples of shape {values.shape} do not match grid {self.grid.shape}")
        object.__setattr__(self, "values", values)

    def support_box(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        """Corners of the smallest box holding every nonzero sample"""
        nonzero = np.nonzero(self.values)
        if len(nonzero[0]) == 0:
            return None
        lo = np.array([self.grid.axis[idx.min()] for idx in nonzero])
        hi = np.array([self.grid.axis[idx.max()] for idx in nonzero])
        return lo, hi

    def norm2(self) -> float:
        return math.sqrt(self.grid.cell_volume * float(np.sum(np.abs(self.values) ** 2)))

    def to_rows(self) -> List[List[float]]:
        pts = self.grid.points()
        flat = self.values.reshape(-1)
        return [list(p) + [v.real, v.imag] for p, v in zip(pts.tolist(), flat)]


@dataclass(frozen=True)
class SingularPiece:
    """A piece of a ground-truth wave-front set"""
    kind: str  # "point", "hyperplane" or "sphere"
    anchor: Tuple[float, ...]
    normal: Tuple[float, ...] = ()
    radius: float = 0.0

    def contains_point(self, x0: Any, tol: float = 1e-9) -> bool:
        x = np.atleast_1d(np.asarray(x0, dtype=float)) - np.asarray(self.anchor)
        if self.kind == "point":
            return float(np.linalg.norm(x)) <= tol
        if self.kind == "hyperplane":
            return abs(float(np.dot(x, self.normal))) <= tol
        return abs(float(np.linalg.norm(x)) - self.radius) <= tol

    def directions_at(self, x0: Any) -> Optional[np.ndarray]:
        """Singular unit directions at x0; None means every direction"""
        if self.kind == "point":
            return None
        if self.kind == "hyperplane":
            n = np.asarray(self.normal)
        else:
            offset = np.atleast_1d(np.asarray(x0, dtype=float)) - np.asarray(self.anchor)
            n = offset / np.linalg.norm(offset)
        return np.stack([n, -n])

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "anchor": list(self.anchor)}
        if self.normal:
            data["normal"] = list(self.normal)
        if self.kind == "sphere":
            data["radius"] = self.radius
        return data


def _heaviside(u: np.ndarray) -> np.ndarray:
    return np.where(u > 0, 1.0, np.where(u == 0, 0.5, 0.0))


def _half_line_transform(eta: np.ndarray, width: float) -> np.ndarray:
    """(2π)^{-1/2}∫_0^∞ e^{−t²/(2w²)} e^{−itη} dt"""
    z = width * eta / math.sqrt(2.0)
    return 0.5 * width * np.exp(-z * z) - 1j * (width / math.sqrt(math.pi)) * special.dawsn(z)


@dataclass(frozen=True)
class Atom:
    """A test distribution"""
    kind: str
    dim: int = 1
    center: Tuple[float, ...] = ()
    order: float = 2.0
    radius: float = 1.0
    width: float = 1.0
    carrier: Tuple[float, ...] = ()
    normal: Tuple[float, ...] = ()
    terms: Tuple["Atom", ...] = ()
    parent: Optional["Atom"] = None
    cutoff: Optional[Window] = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in ATOM_KINDS:
            raise AtomError(f"unknown atom kind '{self.kind}', expected one of {ATOM_KINDS}")
        center = tuple(float(v) for v in np.atleast_1d(self.center)) or (0.0,) * self.dim
        if len(center) != self.dim:
            raise AtomError(f"center {center} does not have dimension {self.dim}")
        object.__setattr__(self, "center", center)
        if self.kind == "jump" and self.dim != 1:
            raise AtomError("jump atoms are one-dimensional; use half_plane in 2D")
        if self.kind == "half_plane":
            if self.dim != 2:
                raise AtomError("half_plane atoms are two-dimensional")
            n = np.asarray(self.normal, dtype=float)
            if n.shape != (2,) or np.linalg.norm(n) == 0:
                raise AtomError(f"half_plane needs a nonzero 2D normal, got {self.normal}")
            object.__setattr__(self, "normal", tuple(float(v) for v in n / np.linalg.norm(n)))
        if self.kind == "modulated_bump":
            carrier = tuple(float(v) for v in np.atleast_1d(self.carrier))
            if len(carrier) != self.dim:
                raise AtomError(f"carrier {self.carrier} does not have dimension {self.dim}")
            object.__setattr__(self, "carrier", carrier)
        if self.kind == "gevrey_bump":
            gevrey_bump(self.order, self.radius, self.dim)
        if self.kind in ("jump", "modulated_bump", "half_plane") and self.width <= 0:
            raise AtomError(f"envelope width must be positive, got {self.width}")
        if self.kind == "sum":
            if not self.terms:
                raise AtomError("sum atoms need at least one term")
            if any(t.dim != self.dim for t in self.terms):
                raise AtomError("sum terms must share the dimension")
        if self.kind == "localized":
            if self.parent is None or self.cutoff is None:
                raise AtomError("localized atoms need a parent and a cutoff")
            if self.parent.dim != self.dim or self.cutoff.dim != self.dim:
                raise AtomError("localized atom, parent and cutoff must share the dimension")

    # constructors

    @classmethod
    def delta(cls, x0: Any = 0.0, dim: int = 1) -> "Atom":
        return cls("delta", dim=dim, center=tuple(np.broadcast_to(np.atleast_1d(x0), (dim,))))

    @classmethod
    def jump(cls, x0: float = 0.0, width: float = 1.0) -> "Atom":
        return cls("jump", dim=1, center=(float(x0),), width=float(width))

    @classmethod
    def gevrey(cls, order: float = 2.0, radius: float = 1.0, center: Any = 0.0,
               dim: int = 1) -> "Atom":
        return cls("gevrey_bump", dim=dim, center=tuple(np.broadcast_to(np.atleast_1d(center), (dim,))),
                   order=float(order), radius=float(radius))

    @classmethod
    def modulated(cls, carrier: Any = 8.0, width: float = 1.0, center: Any = 0.0) -> "Atom":
        carrier = tuple(float(v) for v in np.atleast_1d(carrier))
        dim = len(carrier)
        return cls("modulated_bump", dim=dim, carrier=carrier, width=float(width),
                   center=tuple(np.broadcast_to(np.atleast_1d(center), (dim,))))

    @classmethod
    def half_plane(cls, normal: Any = (0.0, 1.0), width: float = 1.0,
                   center: Any = (0.0, 0.0)) -> "Atom":
        return cls("half_plane", dim=2, normal=tuple(normal), width=float(width), center=tuple(center))

    @classmethod
    def sum(cls, *terms: "Atom") -> "Atom":
        if not terms:
            raise AtomError("sum atoms need at least one term")
        return cls("sum", dim=terms[0].dim, terms=tuple(terms))

    def localize(self, cutoff: Window, x0: Any) -> "Atom":
        """f·cutoff(·−x0)"""
        return Atom("localized", dim=self.dim, center=tuple(np.broadcast_to(np.atleast_1d(x0), (self.dim,))),
                    parent=self, cutoff=cutoff)

    @property
    def window(self) -> Window:
        if self.kind != "gevrey_bump":
            raise AtomError(f"{self.kind} atoms have no bump window")
        return gevrey_bump(self.order, self.radius, self.dim)

    @property
    def atom_id(self) -> str:
        if self.name:
            return self.name
        at = ",".join(f"{v:g}" for v in self.center)
        if self.kind == "gevrey_bump":
            return f"gevrey_bump(σ={self.order:g},R={self.radius:g})@{at}"
        if self.kind == "modulated_bump":
            return f"modulated_bump(ξ={','.join(f'{v:g}' for v in self.carrier)})@{at}"
        if self.kind == "half_plane":
            return f"half_plane(n={','.join(f'{v:g}' for v in self.normal)})@{at}"
        if self.kind == "sum":
            return "sum:[" + ",".join(t.atom_id for t in self.terms) + "]"
        if self.kind == "localized":
            return f"{self.parent.atom_id}·{self.cutoff.window_id}@{at}"
        return f"{self.kind}@{at}"

    def support_ball(self) -> Tuple[np.ndarray, float]:
        """Center and radius of a ball holding the (numerical) support"""
        center = np.asarray(self.center)
        if self.kind == "delta":
            return center, 0.0
        if self.kind == "gevrey_bump":
            return center, self.radius
        if self.kind == "localized":
            return center, self.cutoff.reach
        if self.kind == "sum":
            balls = [t.support_ball() for t in self.terms]
            middle = np.mean([c for c, _ in balls], axis=0)
            return middle, max(float(np.linalg.norm(c - middle)) + r for c, r in balls)
        return center, GAUSSIAN_REACH * self.width

    @property
    def is_compact(self) -> bool:
        if self.kind in ("delta", "gevrey_bump"):
            return True
        if self.kind == "localized":
            return self.cutoff.is_compact or self.parent.is_compact
        if self.kind == "sum":
            return all(t.is_compact for t in self.terms)
        return False

    # values

    def evaluate(self, points: Any) -> np.ndarray:
        """Pointwise values (not defined for deltas)"""
        pts, _ = as_points(points, self.dim)
        shifted = pts - np.asarray(self.center)
        if self.kind == "delta":
            raise AtomError("delta atoms have no pointwise values; sample them on a grid")
        if self.kind == "gevrey_bump":
            return self.window.evaluate(shifted).astype(complex)
        envelope = np.exp(-np.sum(shifted * shifted, axis=1) / (2.0 * self.width ** 2))
        if self.kind == "jump":
            return (_heaviside(shifted[:, 0]) * envelope).astype(complex)
        if self.kind == "half_plane":
            return (_heaviside(shifted @ np.asarray(self.normal)) * envelope).astype(complex)
        if self.kind == "modulated_bump":
            return envelope * np.exp(1j * (pts @ np.asarray(self.carrier)))
        if self.kind == "sum":
            return sum(t.evaluate(pts) for t in self.terms)
        return self.parent.evaluate(pts) * self.cutoff.evaluate(shifted)

    def samples(self, grid: Optional[BoxGrid] = None) -> Signal:
        grid = get_settings().grid(self.dim) if grid is None else grid
        if grid.dim != self.dim:
            raise AtomError(f"grid dimension {grid.dim} does not match atom dimension {self.dim}")
        if self.kind == "delta":
            values = np.zeros(grid.shape, dtype=complex)
            index = grid.nearest_index(self.center)
            node = grid.axis[list(index)]
            if np.max(np.abs(node - np.asarray(self.center))) > 1e-12:
                logger.warning("Delta at %s snapped to grid node %s", self.center, node.tolist())
            values[index] = 1.0 / grid.cell_volume
            return Signal(grid, values)
        if self.kind == "sum":
            total = np.zeros(grid.shape, dtype=complex)
            for term in self.terms:
                total += term.samples(grid).values
            return Signal(grid, total)
        if self.kind == "localized":
            parent = self.parent.samples(grid).values
            shifted = grid.points() - np.asarray(self.center)
            return Signal(grid, parent * self.cutoff.evaluate(shifted).reshape(grid.shape))
        return Signal(grid, self.evaluate(grid.points()).reshape(grid.shape))

    # Fourier side

    def fourier(self, xi: Any):
        """Closed-form f̂(ξ) with the (2π)^{−d/2} convention"""
        pts, single = as_points(xi, self.dim)
        norm = (2.0 * math.pi) ** (-self.dim / 2.0)
        phase = np.exp(-1j * (pts @ np.asarray(self.center)))
        if self.kind == "delta":
            value = norm * phase
        elif self.kind == "jump":
            value = phase * _half_line_transform(pts[:, 0], self.width)
        elif self.kind == "modulated_bump":
            eta = pts - np.asarray(self.carrier)
            shift = np.exp(-1j * (eta @ np.asarray(self.center)))
            value = self.width ** self.dim * np.exp(-0.5 * self.width ** 2 * np.sum(eta * eta, axis=1)) * shift
        elif self.kind == "half_plane":
            n = np.asarray(self.normal)
            tangent = np.array([-n[1], n[0]])
            along = pts @ tangent
            value = phase * self.width * np.exp(-0.5 * (self.width * along) ** 2) \
                * _half_line_transform(pts @ n, self.width)
        elif self.kind == "sum":
            value = sum(t.fourier(pts) for t in self.terms)
        else:
            raise OracleUnavailableError(f"{self.atom_id} has no closed-form Fourier transform")
        return complex(value[0]) if single else value

    @property
    def has_closed_form(self) -> bool:
        if self.kind == "sum":
            return all(t.has_closed_form for t in self.terms)
        return self.kind in ("delta", "jump", "modulated_bump", "half_plane")

    # ground truth

    def ground_truth(self, s: Optional[float] = None) -> List[SingularPiece]:
        """Singular pieces of the s-wave-front set"""
        s = get_settings().s if s is None else s
        if self.kind in ("delta", "jump"):
            return [SingularPiece("point", self.center)]
        if self.kind == "half_plane":
            return [SingularPiece("hyperplane", self.center, normal=self.normal)]
        if self.kind == "gevrey_bump":
            # analytic inside the ball, flat on its boundary
            return [SingularPiece("sphere", self.center, radius=self.radius)] if s < self.order else []
        if self.kind == "sum":
            return [piece for t in self.terms for piece in t.ground_truth(s)]
        if self.kind == "localized":
            return self.parent.ground_truth(s)
        return []

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "sum":
            return {"name": "sum", "terms": [t.to_dict() for t in self.terms]}
        if self.kind == "localized":
            return {"name": "localized", "parent": self.parent.to_dict(),
                    "cutoff": self.cutoff.to_dict(), "x0": list(self.center)}
        data: Dict[str, Any] = {"name": self.kind}
        center = list(self.center)
        if self.kind == "delta":
            data["x0"] = center
        elif self.kind == "jump":
            data.update(x0=center[0], width=self.width)
        elif self.kind == "gevrey_bump":
            data.update(order=self.order, radius=self.radius, center=center)
        elif self.kind == "modulated_bump":
            data.update(carrier=list(self.carrier), width=self.width, center=center)
        elif self.kind == "half_plane":
            data.update(normal=list(self.normal), width=self.width, center=center)
        return data


def ground_truth_wf(atom: Atom, s: Optional[float] = None) -> List[Tuple[Tuple[float, ...], str]]:
    """(anchor, direction description) pairs of the ground-truth wave-front set"""
    out = []
    for piece in atom.ground_truth(s):
        if piece.kind == "point":
            out.append((piece.anchor, "all"))
        elif piece.kind == "hyperplane":
            out.append((piece.anchor, f"±{list(piece.normal)} along the hyperplane"))
        else:
            out.append((piece.anchor, f"radial on the sphere of radius {piece.radius:g}"))
    return out


def expected_singular(atom: Atom, x0: Any, cone: Cone, s: Optional[float] = None,
                      resolution: float = 0.0, tol: float = 1e-9) -> bool:
    """Whether ground truth puts (x0, some direction of the cone) in the wave-front set

    With resolution > 0 a cone also counts when a singular direction lies within
    that angle of it.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=float))
    if atom.kind == "localized":
        if np.linalg.norm(x - np.asarray(atom.center)) >= atom.cutoff.support_radius:
            return False
    for piece in atom.ground_truth(s):
        if not piece.contains_point(x, tol):
            continue
        directions = piece.directions_at(x)
        if directions is None:
            return True
        if cone.dim == 1:
            if np.any(cone.contains(directions)):
                return True
            continue
        angles = cone.angle_to(directions)
        if np.any(angles < cone.half_angle + resolution):
            return True
    return False


def fourier_quadrature(atom: Atom, xi: Any, grid: Optional[BoxGrid] = None) -> Tuple[np.ndarray, np.ndarray]:
    """f̂(ξ) by quadrature, with an error bound per frequency"""
    pts, single = as_points(xi, atom.dim)
    values = np.zeros(pts.shape[0], dtype=complex)
    errors = np.zeros(pts.shape[0])
    if atom.has_closed_form:
        values = np.atleast_1d(atom.fourier(pts))
    elif atom.kind == "gevrey_bump":
        window = atom.window
        R = window.radius
        for i, point in enumerate(pts):
            rho = float(np.linalg.norm(point))
            shift = np.exp(-1j * float(point @ np.asarray(atom.center)))
            if atom.dim == 1:
                def profile(u):
                    return float(window.evaluate(u))

                if rho == 0:
                    value, err = integrate.quad(profile, 0.0, R, epsabs=1e-15, limit=200)
                else:
                    value, err = integrate.quad(profile, 0.0, R, weight="cos", wvar=rho,
                                                epsabs=1e-15, limit=200)
                values[i] = shift * 2.0 * value / math.sqrt(2.0 * math.pi)
                errors[i] = 2.0 * err / math.sqrt(2.0 * math.pi)
            else:
                def radial(r):
                    return float(window.evaluate((r, 0.0))) * special.j0(rho * r) * r

                value, err = integrate.quad(radial, 0.0, R, epsabs=1e-14, limit=400)
                values[i] = shift * value
                errors[i] = err
    elif atom.kind == "sum":
        for term in atom.terms:
            v, e = fourier_quadrature(term, pts, grid)
            values += v
            errors += e
    else:
        grid = get_settings().grid(atom.dim) if grid is None else grid
        values, errors = _sampled_transform(atom.samples(grid), pts)
    if single:
        return values[0], errors[0]
    return values, errors


def _sampled_transform(signal: Signal, pts: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Direct Riemann sum of the Fourier integral on the grid, error from a 2h subgrid"""
    grid = signal.grid
    nodes = grid.points()
    flat = signal.values.reshape(-1)
    active = flat != 0
    nodes, flat = nodes[active], flat[active]
    norm = (2.0 * math.pi) ** (-grid.dim / 2.0)
    kernel = np.exp(-1j * (pts @ nodes.T))
    fine = norm * grid.cell_volume * (kernel @ flat)
    index = np.round((nodes + grid.half_width) / grid.spacing).astype(int)
    even = np.all(index % 2 == 0, axis=1)
    coarse = norm * grid.cell_volume * 2 ** grid.dim * (kernel[:, even] @ flat[even])
    return fine, np.abs(fine - coarse)


def fourier_oracle(atom: Atom, xi: Any, grid: Optional[BoxGrid] = None):
    """f̂(ξ), falling back to quadrature when no closed form exists"""
    try:
        return atom.fourier(xi)
    except OracleUnavailableError:
        values, errors = fourier_quadrature(atom, xi, grid)
        logger.info("Quadrature oracle for %s, error bound %.2e", atom.atom_id, float(np.max(errors)))
        return values


# catalog

def _parse_sum(spec: str) -> List[str]:
    body = spec[len("sum:"):].strip()
    if not (body.startswith("[") and body.endswith("]")):
        raise AtomError(f"sum atoms are written sum:[a,b,...], got '{spec}'")
    parts, depth, current = [], 0, ""
    for ch in body[1:-1]:
        if ch == "," and depth == 0:
            parts.append(current.strip())
            current = ""
            continue
        depth += {"[": 1, "]": -1}.get(ch, 0)
        current += ch
    if current.strip():
        parts.append(current.strip())
    if not parts:
        raise AtomError("sum atoms need at least one term")
    return parts


_ATOM_PARAMETERS = {
    "delta": {"x0", "dim"},
    "jump": {"x0", "width"},
    "gevrey_bump": {"order", "radius", "center", "dim"},
    "modulated_bump": {"carrier", "width", "center"},
    "half_plane": {"normal", "width", "center"},
    "sum": {"terms"},
    "localized": {"parent", "cutoff", "x0"},
}


def make_atom(spec: Any) -> Atom:
    """Build an atom from a catalog name, a 'sum:[...]' string or a parameter object"""
    if isinstance(spec, Atom):
        return spec
    if isinstance(spec, str):
        text = spec.strip()
        if text.startswith("sum:"):
            return Atom.sum(*(make_atom(part) for part in _parse_sum(text)))
        spec = {"name": text}
    if not isinstance(spec, dict) or "name" not in spec:
        raise AtomError(f"atom spec must be a name or an object with a 'name', got {spec!r}")
    name = spec["name"]
    if isinstance(name, str) and name.startswith("sum:"):
        return Atom.sum(*(make_atom(part) for part in _parse_sum(name)))
    if name not in _ATOM_PARAMETERS:
        raise AtomError(f"unknown atom '{name}', expected one of {sorted(_ATOM_PARAMETERS)}")
    params = {k: v for k, v in spec.items() if k != "name"}
    unknown = set(params) - _ATOM_PARAMETERS[name]
    if unknown:
        raise AtomError(f"unknown parameters for atom '{name}': {sorted(unknown)}")
    if name == "delta":
        x0 = params.get("x0", 0.0)
        dim = int(params.get("dim", len(np.atleast_1d(x0))))
        return Atom.delta(x0, dim)
    if name == "jump":
        return Atom.jump(float(params.get("x0", 0.0)), float(params.get("width", 1.0)))
    if name == "gevrey_bump":
        center = params.get("center", 0.0)
        dim = int(params.get("dim", len(np.atleast_1d(center))))
        return Atom.gevrey(float(params.get("order", 2.0)), float(params.get("radius", 1.0)), center, dim)
    if name == "modulated_bump":
        carrier = params.get("carrier", 8.0)
        dim = len(np.atleast_1d(carrier))
        return Atom.modulated(carrier, float(params.get("width", 1.0)), params.get("center", [0.0] * dim))
    if name == "half_plane":
        return Atom.half_plane(tuple(params.get("normal", (0.0, 1.0))), float(params.get("width", 1.0)),
                               tuple(params.get("center", (0.0, 0.0))))
    if name == "sum":
        return Atom.sum(*(make_atom(t) for t in params.get("terms", [])))
    parent = make_atom(params["parent"])
    return parent.localize(Window.from_dict(params["cutoff"]), params.get("x0", [0.0] * parent.dim))


def corpus() -> Dict[str, Atom]:
    """The six reference atoms"""
    return {
        "delta": Atom.delta(0.0),
        "jump": Atom.jump(0.0),
        "gevrey_bump": Atom.gevrey(2.0, 1.0),
        "modulated_bump": Atom.modulated(8.0, 1.0),
        "half_plane": Atom.half_plane((0.0, 1.0)),
        "sum": Atom.sum(Atom.delta(-3.0), Atom.jump(2.0)),
    }
