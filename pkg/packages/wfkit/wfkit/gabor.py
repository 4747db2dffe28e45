"""
Gabor pairs on strongly admissible lattice pairs

Duals are built in the painless case: when the window support is shorter than
the frequency period 2π/b the frame operator is multiplication by Σ_jφ(·−x_j)²
and ψ = φ/(‖Λ₁‖·Σ_jφ(·−x_j)²) satisfies Σ_jφψ(·−x_j) = ‖Λ₁‖^{−1}. The same
identity holds for the dilates (φ^ε, ψ^ε, εΛ₁), so one dual serves every ε.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .atoms import Atom, Signal, Window, gaussian_window
from .config import get_settings
from .errors import FrameError, IllConditionedFrameError, PainlessConditionError
from .geometry import BoxGrid, Lattice, LatticePair, as_points
from .norms import log_abs, log_mixed_norm
from .transform import (
    TWO_PI,
    analysis_column,
    as_signal,
    centered,
    covering_indices,
    fftn_radix2,
    frequency_period,
    map_ordered,
    synthesis_column,
)
from .weights import Weight, evaluate_log_at

logger = logging.getLogger(__name__)

# smallest admissible value of Σ_j φ(·−x_j)² on a cell
PARTITION_FLOOR = 1e-8


def _cell_samples(lattice: Lattice, per_axis: int) -> np.ndarray:
    """Dense samples of the fundamental cell of the lattice"""
    u = (np.arange(per_axis) + 0.5) / per_axis
    mesh = np.stack(np.meshgrid(*([u] * lattice.dim), indexing="ij"), axis=-1).reshape(-1, lattice.dim)
    return mesh @ lattice.matrix.T + np.asarray(lattice.offset)


def partition_minimum(phi: Window, lattice: Lattice, per_axis: Optional[int] = None) -> float:
    """min over a dense cell of Σ_j φ(y − x_j)²"""
    per_axis = per_axis or (2001 if phi.dim == 1 else 161)
    ys = _cell_samples(lattice, per_axis)
    span = float(np.max(np.linalg.norm(ys, axis=1))) + phi.support_radius
    total = np.zeros(len(ys))
    for node in lattice.points_in_ball(np.zeros(lattice.dim), span):
        total += phi.evaluate(ys - node) ** 2
    return float(total.min())


def painless_dual(phi: Window, pair: LatticePair) -> Window:
    """ψ = φ/(‖Λ₁‖·Σ_jφ(·−x_j)²)"""
    if not phi.is_compact:
        raise FrameError(f"painless duals need a compactly supported window, got {phi.window_id}")
    pair.require_strong()
    _, b = pair.steps
    diameter = 2.0 * phi.support_radius
    period = TWO_PI / b
    if diameter >= period:
        raise PainlessConditionError(
            f"window support of diameter {diameter:.6g} does not fit the frequency period "
            f"2π/b = {period:.6g}; the frequency step must satisfy b < {TWO_PI / diameter:.6g}",
            required_step=TWO_PI / diameter,
        )
    floor = partition_minimum(phi, pair.lambda1)
    if floor < PARTITION_FLOOR:
        raise IllConditionedFrameError(
            f"translates of {phi.window_id} over Λ₁ leave gaps: min Σ_jφ(·−x_j)² = {floor:.3g} "
            f"< {PARTITION_FLOOR:g}"
        )
    logger.debug("Painless dual of %s, partition floor %.3g", phi.window_id, floor)
    return Window("tight_partition", dim=phi.dim, base=phi, lattice=pair.lambda1,
                  power=1.0, kappa=pair.lambda1.cell_volume())


@dataclass(frozen=True, eq=False)
class GaborSystem:
    """Window φ, dual ψ, lattice pair and scale ε with c_{j,l} = C·(f, ψ^ε_{j,l})"""
    window: Window
    dual: Window
    pair: LatticePair
    eps: float = 1.0
    frame_constant: float = 1.0

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise FrameError(f"scale ε must lie in (0, 1], got {self.eps}")

    @property
    def dim(self) -> int:
        return self.pair.dim

    @property
    def support_radius(self) -> float:
        """Support radius of φ^ε and ψ^ε"""
        return self.eps * self.window.support_radius

    def at_scale(self, eps: float) -> "GaborSystem":
        return replace(self, eps=eps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "window": self.window.to_dict(),
            "dual": self.dual.window_id,
            "pair": self.pair.to_dict(),
            "eps": self.eps,
            "frame_constant": self.frame_constant,
        }


@dataclass(frozen=True, eq=False)
class CoefficientTable:
    """c[j, l] for the stored Λ₁ indices j and all ξ_l of one frequency period"""
    system: GaborSystem
    grid: BoxGrid
    indices: np.ndarray
    values: np.ndarray
    period: int

    @property
    def eps(self) -> float:
        return self.system.eps

    @property
    def points(self) -> np.ndarray:
        if len(self.indices) == 0:
            return np.zeros((0, self.grid.dim))
        return self.eps * self.system.pair.lambda1.points(self.indices)

    @property
    def frequency_axis(self) -> np.ndarray:
        b = self.system.pair.lambda2.step
        return b * np.arange(-self.period // 2, self.period // 2)

    def frequency_points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.frequency_axis] * self.grid.dim), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.grid.dim)

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.values))

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def with_values(self, values: Any) -> "CoefficientTable":
        values = np.asarray(values, dtype=complex)
        if values.shape != self.values.shape:
            raise FrameError(f"coefficients of shape {values.shape} do not match {self.values.shape}")
        return CoefficientTable(self.system, self.grid, self.indices, values, self.period)

    def to_rows(self) -> List[List[float]]:
        rows = []
        for j, column in enumerate(self.values):
            for l in np.flatnonzero(column):
                rows.append([j, int(l), float(column[l].real), float(column[l].imag)])
        return rows

    def summary(self, p: float = 2.0, q: float = 2.0) -> Dict[str, Any]:
        return {
            "nnz": self.nnz,
            "sup_norm": self.sup_norm,
            "mixed_norm": {"p": p, "q": q,
                           "value": discrete_modulation_norm(self, Weight.constant(), p, q)},
        }


def _reference_constant(window: Window, dual: Window, pair: LatticePair, grid: BoxGrid) -> float:
    """C making analysis followed by synthesis the identity on a Gaussian"""
    draft = GaborSystem(window, dual, pair, 1.0, 1.0)
    reference = Signal(grid, gaussian_window(1.0, grid.dim).evaluate(grid.points()).reshape(grid.shape))
    rebuilt = synthesize(coefficients(reference, draft, grid))
    f = reference.values
    return float(np.real(np.vdot(rebuilt, f)) / np.real(np.vdot(rebuilt, rebuilt)))


def build_gabor_system(window: Window, pair: LatticePair, eps: float = 1.0,
                       grid: Optional[BoxGrid] = None) -> GaborSystem:
    """Painless Gabor pair with the frame constant calibrated on a reference Gaussian"""
    dual = painless_dual(window, pair)
    grid = get_settings().grid(pair.dim) if grid is None else grid
    C = _reference_constant(window, dual, pair, grid)
    _, b = pair.steps
    expected = pair.lambda1.cell_volume() * (b / TWO_PI) ** pair.dim
    if not math.isclose(C, expected, rel_tol=1e-6):
        logger.warning("Calibrated frame constant %.10g differs from ‖Λ₁‖(b/2π)^d = %.10g", C, expected)
    logger.info("Built Gabor system on %s (ε=%g, C=%.6g)", window.window_id, eps, C)
    return GaborSystem(window, dual, pair, eps, C)


def coefficients(f: Union[Atom, Signal, np.ndarray], sys: GaborSystem, grid: Optional[BoxGrid] = None,
                 indices: Optional[np.ndarray] = None, threads: Optional[int] = None) -> CoefficientTable:
    """c[j, l] = C·(f, ψ^ε_{j,l}) by grid quadrature, stored for translates meeting supp f"""
    signal = as_signal(f, grid)
    grid = signal.grid
    _, b = sys.pair.steps
    P = frequency_period(grid, b)
    if indices is None:
        indices = covering_indices(signal, sys.dual, sys.pair, sys.eps)
    indices = np.asarray(indices, dtype=int).reshape(-1, grid.dim)
    nodes = sys.eps * sys.pair.lambda1.points(indices) if len(indices) else np.zeros((0, grid.dim))
    dual = sys.dual.scaled(sys.eps)
    factor = sys.frame_constant * TWO_PI ** (grid.dim / 2.0)
    columns = map_ordered(lambda node: factor * analysis_column(signal, dual, node, b, P), list(nodes), threads)
    values = np.array(columns, dtype=complex).reshape(len(nodes), P ** grid.dim)
    return CoefficientTable(sys, grid, indices, values, P)


def synthesize(table: CoefficientTable, sys: Optional[GaborSystem] = None) -> np.ndarray:
    """Σ_{j,l} c[j, l]·φ^ε(·−εx_j)·e^{i⟨·,ξ_l⟩} on the grid"""
    sys = table.system if sys is None else sys
    _, b = sys.pair.steps
    window = sys.window.scaled(sys.eps)
    nodes = sys.eps * sys.pair.lambda1.points(table.indices) if len(table.indices) else []
    out = np.zeros(table.grid.shape, dtype=complex)
    # fixed summation order over j
    for node, column in zip(nodes, table.values):
        if np.any(column):
            out += synthesis_column(table.grid, window, node, column, b, table.period)
    return out


def local_index_set(x0: Any, sys: GaborSystem) -> np.ndarray:
    """Λ₁ indices j with x₀ inside the (open) support of φ^ε(·−εx_j)"""
    pts, _ = as_points(x0, sys.dim)
    return sys.pair.lambda1.indices_in_ball(pts[0] / sys.eps, sys.window.support_radius, strict=True)


def _log_weights(table: CoefficientTable, w: Weight, freq: np.ndarray) -> np.ndarray:
    if w.domain == "frequency":
        row = evaluate_log_at(w, None, freq)
        return np.broadcast_to(row, (len(table.indices), len(freq)))
    return np.array([evaluate_log_at(w, x, freq) for x in table.points]).reshape(len(table.indices), len(freq))


def log_discrete_modulation_norm(table: CoefficientTable, w: Weight, p: float = 2.0, q: float = 2.0,
                                 frequencies: Optional[np.ndarray] = None) -> float:
    """log (Σ_l (Σ_j |c_{j,l} ω(εx_j, ξ_l)|^p)^{q/p})^{1/q}, optionally over a subset of columns"""
    values = table.values
    freq = table.frequency_points()
    if frequencies is not None:
        mask = np.asarray(frequencies)
        values, freq = values[:, mask], freq[mask]
    if values.size == 0:
        return -math.inf
    return log_mixed_norm(log_abs(values) + _log_weights(table, w, freq), p, q)


def discrete_modulation_norm(table: CoefficientTable, w: Weight, p: float = 2.0, q: float = 2.0,
                             eps: Optional[float] = None) -> float:
    """Weighted mixed ℓ^{p,q} norm of the coefficient table"""
    if eps is not None and not math.isclose(eps, table.eps):
        raise FrameError(f"table was computed at ε={table.eps:g}, not {eps:g}")
    with np.errstate(over="ignore"):
        return float(np.exp(log_discrete_modulation_norm(table, w, p, q)))


def normalization_residual(sys: GaborSystem, per_axis: Optional[int] = None) -> float:
    """max |‖Λ₁‖·Σ_jφ^ε(·−εx_j)ψ^ε(·−εx_j) − 1| on a dense cell of εΛ₁"""
    lattice = sys.pair.lambda1.scaled(sys.eps)
    per_axis = per_axis or (2001 if sys.dim == 1 else 161)
    ys = _cell_samples(lattice, per_axis)
    phi, psi = sys.window.scaled(sys.eps), sys.dual.scaled(sys.eps)
    span = float(np.max(np.linalg.norm(ys, axis=1))) + sys.support_radius
    total = np.zeros(len(ys))
    for node in lattice.points_in_ball(np.zeros(sys.dim), span):
        total += phi.evaluate(ys - node) * psi.evaluate(ys - node)
    return float(np.max(np.abs(sys.pair.lambda1.cell_volume() * total - 1.0)))


def reconstruction_error(f: Union[Atom, Signal, np.ndarray], sys: GaborSystem,
                         grid: Optional[BoxGrid] = None) -> float:
    """Relative L² error of synthesis after analysis"""
    signal = as_signal(f, grid)
    rebuilt = synthesize(coefficients(signal, sys))
    norm = float(np.linalg.norm(signal.values))
    error = float(np.linalg.norm(rebuilt - signal.values))
    return error / norm if norm > 0 else error


@dataclass(frozen=True, eq=False)
class FourierSeries:
    """f = Σ_l c_l e^{i⟨x,ξ_l⟩} on the cell corner + [0, 2π/b)^d"""
    coefficients: np.ndarray
    b: float
    corner: np.ndarray

    @property
    def period(self) -> int:
        return self.coefficients.shape[0]

    def frequencies(self) -> np.ndarray:
        return self.b * np.arange(-self.period // 2, self.period // 2)

    def evaluate(self, points: Any) -> np.ndarray:
        dim = self.coefficients.ndim
        pts, single = as_points(points, dim)
        axis = self.frequencies()
        mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        values = np.exp(1j * pts @ mesh.T) @ self.coefficients.reshape(-1)
        return values[0] if single else values


def fourier_series(signal: Signal, b: float, corner: Any) -> FourierSeries:
    """c_l = |Δ|^{−1}∫_Δ f e^{−i⟨y,ξ_l⟩}dy as a Riemann sum over the cell Δ"""
    grid = signal.grid
    P = frequency_period(grid, b)
    start = np.asarray(grid.nearest_index(corner))
    if np.any(start + P > grid.size):
        raise FrameError(f"cell of side {TWO_PI / b:.6g} at {list(np.atleast_1d(corner))} leaves the sample box")
    block = signal.values[tuple(slice(s, s + P) for s in start)]
    origin = grid.axis[start]
    raw = centered(fftn_radix2(block))
    ls = b * np.arange(-P // 2, P // 2)
    phase = np.ones((P,) * grid.dim, dtype=complex)
    for k in range(grid.dim):
        shape = [1] * grid.dim
        shape[k] = P
        phase = phase * np.exp(-1j * ls * origin[k]).reshape(shape)
    return FourierSeries(phase * raw / P ** grid.dim, b, origin)
