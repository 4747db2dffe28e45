"""
Discrete Fourier machinery on sample boxes

Transforms use the (2π)^{−d/2}∫f(x)e^{−i⟨x,ξ⟩}dx convention, realized as grid
Riemann sums over a radix-2 decimation-in-time FFT. The STFT samples
V_φf(x,ξ) = (2π)^{−d/2}∫f(y)·conj φ(y−x)·e^{−i⟨ξ,y⟩}dy on ε·Λ₁ × Λ₂.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from .atoms import Atom, Signal, Window
from .config import get_settings
from .errors import TransformError, WindowOverflowError
from .geometry import BoxGrid, LatticePair, as_points

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi

# relative size below which STFT values are treated as roundoff
DYNAMIC_RANGE = 1e-14


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and not n & (n - 1)


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=64)
def _twiddles(size: int, inverse: bool) -> np.ndarray:
    sign = 1.0 if inverse else -1.0
    tw = np.exp(sign * 2j * math.pi * np.arange(size // 2) / size)
    tw.setflags(write=False)
    return tw


def fft_radix2(values: Any, inverse: bool = False, axis: int = -1) -> np.ndarray:
    """Radix-2 DIT transform along one axis

    Forward is Σ_n x_n e^{−2πimn/N}; inverse uses e^{+2πimn/N} and divides by N.
    """
    x = np.moveaxis(np.asarray(values, dtype=complex), axis, -1)
    n = x.shape[-1]
    if not _is_power_of_two(n):
        raise TransformError(f"radix-2 transform needs a power-of-two length, got {n}")
    x = x[..., _bit_reversal(n)]
    lead = x.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        blocks = x.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * _twiddles(size, inverse)
        x = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        size *= 2
    if inverse:
        x = x / n
    return np.moveaxis(x, -1, axis)


def fftn_radix2(values: Any, inverse: bool = False,
                axes: Optional[Sequence[int]] = None) -> np.ndarray:
    x = np.asarray(values, dtype=complex)
    for axis in (range(x.ndim) if axes is None else axes):
        x = fft_radix2(x, inverse=inverse, axis=axis)
    return x


def centered(raw: np.ndarray) -> np.ndarray:
    """FFT order → frequencies −N/2 … N/2−1 along every axis"""
    return np.roll(raw, [s // 2 for s in raw.shape], axis=tuple(range(raw.ndim)))


def uncentered(shifted: np.ndarray) -> np.ndarray:
    return np.roll(shifted, [-(s // 2) for s in shifted.shape], axis=tuple(range(shifted.ndim)))


def _phase(axis_values: np.ndarray, dim: int, shift: float) -> np.ndarray:
    """e^{i·shift·Σ_k u_k} on the tensor grid axis_values^dim"""
    one = np.exp(1j * shift * axis_values)
    out = one
    for _ in range(dim - 1):
        out = np.multiply.outer(out, one)
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """f̂ sampled at ξ_k = k·π/L, k = −N/2 … N/2−1 on every axis"""
    grid: BoxGrid
    values: np.ndarray

    def frequency_points(self) -> np.ndarray:
        return self.grid.frequency_points()

    def norm2(self) -> float:
        step = self.grid.frequency_step ** self.grid.dim
        return math.sqrt(step * float(np.sum(np.abs(self.values) ** 2)))

    def values_at(self, points: Any) -> np.ndarray:
        """Spectrum values at frequency grid points"""
        pts, single = as_points(points, self.grid.dim)
        scaled = pts / self.grid.frequency_step
        index = np.round(scaled).astype(int)
        if np.any(np.abs(scaled - index) > 1e-6):
            raise TransformError("frequencies must lie on the DFT grid (multiples of π/L)")
        index = index + self.grid.size // 2
        if np.any(index < 0) or np.any(index >= self.grid.size):
            raise TransformError(f"frequencies beyond the Nyquist limit {self.grid.nyquist:.6g}")
        out = self.values[tuple(index.T)]
        return out[0] if single else out

    def to_rows(self) -> List[List[float]]:
        pts = self.frequency_points()
        flat = self.values.reshape(-1)
        return [list(p) + [v.real, v.imag] for p, v in zip(pts.tolist(), flat)]


def as_signal(f: Union[Atom, Signal, np.ndarray], grid: Optional[BoxGrid] = None) -> Signal:
    if isinstance(f, Signal):
        return f
    if isinstance(f, Atom):
        return f.samples(grid)
    values = np.asarray(f, dtype=complex)
    if any(not _is_power_of_two(n) for n in values.shape) or len(set(values.shape)) != 1:
        raise TransformError(f"samples need an equal power-of-two size per axis, got {values.shape}")
    if grid is None:
        settings = get_settings()
        half = settings.half_width_1d if values.ndim == 1 else settings.half_width_2d
        grid = BoxGrid(values.ndim, values.shape[0], half)
    return Signal(grid, values)


def dft(f: Union[Atom, Signal, np.ndarray], grid: Optional[BoxGrid] = None) -> Spectrum:
    """Sampled Fourier transform on the frequency grid of the box"""
    signal = as_signal(f, grid)
    grid = signal.grid
    raw = fftn_radix2(signal.values)
    scale = (TWO_PI) ** (-grid.dim / 2.0) * grid.cell_volume
    values = scale * _phase(grid.frequency_axis, grid.dim, grid.half_width) * centered(raw)
    return Spectrum(grid, values)


def idft(spectrum: Spectrum) -> Signal:
    """Inverse of dft"""
    grid = spectrum.grid
    scale = (TWO_PI) ** (-grid.dim / 2.0) * grid.cell_volume
    shifted = spectrum.values / (scale * _phase(grid.frequency_axis, grid.dim, grid.half_width))
    return Signal(grid, fftn_radix2(uncentered(shifted), inverse=True))


def frequency_period(grid: BoxGrid, b: float) -> int:
    """P = 2π/(b·h), the period in samples of e^{−ibly}"""
    ratio = TWO_PI / (b * grid.spacing)
    P = int(round(ratio))
    if abs(ratio - P) > 1e-9 * ratio or not _is_power_of_two(P) or P > grid.size or P < 2:
        raise TransformError(
            f"frequency step b={b:.6g} is not commensurate with the sample box: "
            f"use b = 2^m·{grid.frequency_step:.6g} (m >= 0) with 2π/(b·h) >= 2"
        )
    return P


def _fold(values: np.ndarray, P: int) -> np.ndarray:
    """Sum samples that share residues modulo P on every axis"""
    dim = values.ndim
    n = values.shape[0]
    shape: Tuple[int, ...] = ()
    for _ in range(dim):
        shape += (n // P, P)
    return values.reshape(shape).sum(axis=tuple(range(0, 2 * dim, 2)))


def _unfold(values: np.ndarray, n: int) -> np.ndarray:
    P = values.shape[0]
    return np.tile(values, (n // P,) * values.ndim)


def window_samples(grid: BoxGrid, window: Window, node: np.ndarray) -> np.ndarray:
    return window.evaluate(grid.points() - node).reshape(grid.shape)


def analysis_column(signal: Signal, window: Window, node: np.ndarray, b: float, P: int) -> np.ndarray:
    grid = signal.grid
    product = signal.values * np.conj(window_samples(grid, window, node))
    raw = centered(fftn_radix2(_fold(product, P)))
    ls = b * np.arange(-P // 2, P // 2)
    scale = (TWO_PI) ** (-grid.dim / 2.0) * grid.cell_volume
    return (scale * _phase(ls, grid.dim, grid.half_width) * raw).reshape(-1)


def synthesis_column(grid: BoxGrid, window: Window, node: np.ndarray, column: np.ndarray,
                      b: float, P: int) -> np.ndarray:
    """Σ_l F_l·φ(y − node)·e^{i⟨ξ_l,y⟩} on the grid"""
    ls = b * np.arange(-P // 2, P // 2)
    shaped = column.reshape((P,) * grid.dim) * _phase(ls, grid.dim, -grid.half_width)
    periodic = P ** grid.dim * fftn_radix2(uncentered(shaped), inverse=True)
    return window_samples(grid, window, node) * _unfold(periodic, grid.size)


def map_ordered(fn, items: Sequence[Any], threads: Optional[int] = None) -> List[Any]:
    workers = threads or get_settings().worker_count
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _box_distance(points: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    gap = np.maximum(np.maximum(lo - points, 0.0), points - hi)
    return np.linalg.norm(gap, axis=1)


def _touches_edge(signal: Signal) -> bool:
    box = signal.support_box()
    if box is None:
        return False
    lo, hi = box
    grid = signal.grid
    return bool(np.any(lo <= grid.axis[0]) or np.any(hi >= grid.axis[-1]))


@dataclass(frozen=True, eq=False)
class StftGrid:
    """V[j, l] = V_{φ^ε}f(ε·x_j, ξ_l) for the stored space nodes j and all ξ_l"""
    grid: BoxGrid
    window: Window
    eps: float
    pair: LatticePair
    indices: np.ndarray
    values: np.ndarray
    period: int
    # nodes left out because their window leaves the box
    dropped: int = 0
    # whether the kept windows still reach every nonzero sample
    covered: bool = True
    # signal cut by the box edge where a window reaches past it
    truncated: bool = False
    # products wider than the folding period 2π/b
    aliased: bool = False

    @property
    def points(self) -> np.ndarray:
        if len(self.indices) == 0:
            return np.zeros((0, self.grid.dim))
        return self.eps * self.pair.lambda1.points(self.indices)

    @property
    def frequency_axis(self) -> np.ndarray:
        b = self.pair.lambda2.step
        return b * np.arange(-self.period // 2, self.period // 2)

    def frequency_points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.frequency_axis] * self.grid.dim), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.grid.dim)

    @property
    def space_cell(self) -> float:
        return self.eps ** self.grid.dim * self.pair.lambda1.cell_volume()

    @property
    def frequency_cell(self) -> float:
        return self.pair.lambda2.cell_volume()

    @property
    def scaled_window(self) -> Window:
        return self.window.scaled(self.eps)

    @property
    def exact(self) -> bool:
        """No node dropped and no edge or folding effect"""
        return not (self.dropped or self.truncated or self.aliased)

    def with_values(self, values: np.ndarray) -> "StftGrid":
        values = np.asarray(values, dtype=complex)
        if values.shape != self.values.shape:
            raise TransformError(f"values of shape {values.shape} do not match {self.values.shape}")
        return replace(self, values=values)

    def to_rows(self) -> List[List[float]]:
        rows = []
        for j, column in enumerate(self.values):
            for l, v in enumerate(column):
                rows.append([j, l, float(v.real), float(v.imag)])
        return rows


def covering_indices(signal: Signal, window: Window, pair: LatticePair, eps: float) -> np.ndarray:
    """Λ₁ indices whose scaled window reaches a nonzero sample"""
    dim = signal.grid.dim
    box = signal.support_box()
    if box is None:
        return np.zeros((0, dim), dtype=int)
    lo, hi = box
    reach = window.scaled(eps).reach
    center = 0.5 * (lo + hi)
    radius = float(np.linalg.norm(hi - center)) + reach
    candidates = pair.lambda1.indices_in_ball(center / eps, radius / eps)
    if len(candidates) == 0:
        return candidates.reshape(0, dim).astype(int)
    nodes = eps * pair.lambda1.points(candidates)
    return candidates[_box_distance(nodes, lo, hi) < reach].astype(int)


def _covers(signal: Signal, nodes: np.ndarray, reach: float) -> bool:
    """Every nonzero sample lies strictly inside some window around nodes"""
    flat = np.flatnonzero(signal.values)
    if len(flat) == 0:
        return True
    if len(nodes) == 0:
        return False
    pts = signal.grid.points()[flat]
    nearest = np.full(len(pts), math.inf)
    for node in nodes:
        nearest = np.minimum(nearest, np.linalg.norm(pts - node, axis=1))
    return bool(np.all(nearest < reach))


def stft(f: Union[Atom, Signal, np.ndarray], window: Window, pair: LatticePair,
         eps: float = 1.0, grid: Optional[BoxGrid] = None,
         indices: Optional[np.ndarray] = None, threads: Optional[int] = None,
         clip: bool = False) -> StftGrid:
    """Sample the STFT with window φ^ε = φ(·/ε) on ε·Λ₁ × Λ₂

    A compact window leaving the box raises WindowOverflowError unless clip is
    set, in which case those nodes are dropped and the result records whether
    the remaining windows still cover the signal.
    """
    if not 0 < eps <= 1:
        raise TransformError(f"scale ε must lie in (0, 1], got {eps}")
    signal = as_signal(f, grid)
    grid = signal.grid
    if pair.dim != grid.dim or window.dim != grid.dim:
        raise TransformError("signal, window and lattice pair must share the dimension")
    b = pair.lambda2.step
    if b is None:
        raise TransformError("the frequency lattice must be bZ^d")
    P = frequency_period(grid, b)
    scaled = window.scaled(eps)
    if indices is None:
        indices = covering_indices(signal, window, pair, eps)
    indices = np.asarray(indices, dtype=int).reshape(-1, grid.dim)
    nodes = eps * pair.lambda1.points(indices) if len(indices) else np.zeros((0, grid.dim))

    dropped, covered, truncated, aliased = 0, True, False, False
    reach = scaled.reach
    box = signal.support_box()
    if len(nodes) and box is not None:
        extent = np.max(np.abs(nodes), axis=1) + reach + grid.spacing
        outside = extent > grid.half_width
        if np.any(outside):
            needed = float(np.max(extent))
            if _touches_edge(signal):
                truncated = True
                logger.warning("Signal reaches the edge of [−%g, %g]^%d and windows of reach %.6g "
                               "leave it (half-width %.6g needed); edge values are truncated",
                               grid.half_width, grid.half_width, grid.dim, reach, needed)
            elif clip and scaled.is_compact:
                dropped = int(np.count_nonzero(outside))
                indices, nodes = indices[~outside], nodes[~outside]
                covered = _covers(signal, nodes, reach)
                logger.debug("Dropped %d STFT nodes whose window leaves the box", dropped)
                if not covered:
                    logger.warning("Windows inside [−%g, %g]^%d no longer cover the signal",
                                   grid.half_width, grid.half_width, grid.dim)
            elif scaled.is_compact:
                raise WindowOverflowError(
                    f"window of radius {reach:.6g} around the outermost node "
                    f"leaves the box [−{grid.half_width:g}, {grid.half_width:g}]^{grid.dim}; "
                    f"a half-width of at least {needed:.6g} is required",
                    required_half_width=needed,
                )
        width = float(np.max(np.minimum(2.0 * reach, box[1] - box[0])))
        if width > TWO_PI / b:
            aliased = True
            logger.warning("Window products %.6g wide exceed the folding period %.6g and wrap around",
                           width, TWO_PI / b)

    columns = map_ordered(lambda node: analysis_column(signal, scaled, node, b, P), list(nodes), threads)
    values = np.array(columns, dtype=complex).reshape(len(nodes), P ** grid.dim)
    logger.debug("STFT of %d nodes × %d frequencies (ε=%g, P=%d)", len(nodes), P ** grid.dim, eps, P)
    return StftGrid(grid, window, eps, pair, indices, values, P, dropped, covered, truncated, aliased)


def stft_adjoint(F: StftGrid, window: Optional[Window] = None) -> np.ndarray:
    """Riemann-sum realization of V*_φ on the sample box"""
    grid = F.grid
    scaled = (F.window if window is None else window).scaled(F.eps)
    b = F.pair.lambda2.step
    out = np.zeros(grid.shape, dtype=complex)
    # fixed summation order over j
    for node, column in zip(F.points, F.values):
        if np.any(column):
            out += synthesis_column(grid, scaled, node, column, b, F.period)
    return F.space_cell * F.frequency_cell * (TWO_PI) ** (-grid.dim / 2.0) * out


def signal_inner(u: Any, v: Any, grid: BoxGrid) -> complex:
    """h^d·Σ u·conj v"""
    u = u.values if isinstance(u, Signal) else np.asarray(u)
    v = v.values if isinstance(v, Signal) else np.asarray(v)
    return complex(grid.cell_volume * np.sum(u * np.conj(v)))


def stft_inner(F: StftGrid, G: Union[StftGrid, np.ndarray]) -> complex:
    """‖εΛ₁‖·‖Λ₂‖·Σ F·conj G"""
    g = G.values if isinstance(G, StftGrid) else np.asarray(G)
    return complex(F.space_cell * F.frequency_cell * np.sum(F.values * np.conj(g)))


def stft_frame_multiplier(V: StftGrid) -> np.ndarray:
    """ε^d‖Λ₁‖·Σ_j |φ^ε(y − εx_j)|², the symbol of V*V when 2·reach < 2π/b"""
    total = np.zeros(V.grid.shape)
    scaled = V.scaled_window
    for node in V.points:
        total += np.abs(window_samples(V.grid, scaled, node)) ** 2
    return V.space_cell * total


def stft_space_support(V: StftGrid, tol: float = 1e-12) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Bounding box of the space nodes where |V| exceeds tol·max|V|"""
    if V.values.size == 0:
        return None
    peak = float(np.max(np.abs(V.values)))
    if peak == 0:
        return None
    active = np.max(np.abs(V.values), axis=1) > tol * peak
    pts = V.points[active]
    return pts.min(axis=0), pts.max(axis=0)


class DecayProbe(NamedTuple):
    """Fitted STFT decay rates in space (h) and frequency (eps)"""
    h_fit: float
    eps_fit: float


def _band_rms_fit(freqs: np.ndarray, moduli: np.ndarray, s: float, bins: int = 16) -> float:
    keep = moduli > 0
    freqs, moduli = freqs[keep], moduli[keep]
    if len(freqs) < 3:
        return -math.inf
    xs, ys = [], []
    for chunk_f, chunk_m in zip(np.array_split(freqs, bins), np.array_split(moduli, bins)):
        if len(chunk_f):
            xs.append(float(np.mean(chunk_f ** (1.0 / s))))
            ys.append(0.5 * math.log(float(np.mean(chunk_m ** 2))))
    if len(xs) < 3:
        return -math.inf
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def stft_decay_probe(f: Union[Atom, Signal], window: Window, s: Optional[float] = None,
                     grid: Optional[BoxGrid] = None, step: float = 0.25) -> DecayProbe:
    """Fit log|V| against −|x|^{1/s} at ξ = 0 and against |ξ|^{1/s} at the support centre"""
    s = get_settings().s if s is None else s
    signal = as_signal(f, grid)
    grid = signal.grid
    box = signal.support_box()
    if box is None:
        raise TransformError("insufficient dynamic range: the signal vanishes on the grid")
    center = 0.5 * (box[0] + box[1])
    extent = float(np.max(box[1] - box[0])) / 2.0 + window.reach
    count = int(math.ceil(extent / step))
    direction = np.eye(grid.dim)[0]
    ks = [k for k in range(-count, count + 1) if grid.contains_ball(center + step * k * direction, 0.0)]
    nodes = [center + step * k * direction for k in ks]
    P = grid.size
    b = grid.frequency_step
    columns = map_ordered(lambda node: analysis_column(signal, window, node, b, P), nodes)
    V = np.abs(np.array(columns))
    peak = float(np.max(V))
    if peak == 0:
        raise TransformError("insufficient dynamic range: the STFT vanishes on the probe nodes")
    V[V < DYNAMIC_RANGE * peak] = 0.0

    zero = np.ravel_multi_index((P // 2,) * grid.dim, (P,) * grid.dim)
    distances = step * np.abs(np.array(ks, dtype=float))
    at_zero = V[:, zero]
    keep = at_zero > 0
    if np.count_nonzero(keep) < 3:
        h_fit = math.inf
    else:
        slope, _ = np.polyfit(-distances[keep] ** (1.0 / s), np.log(at_zero[keep]), 1)
        h_fit = float(slope)

    middle = int(np.argmin(distances))
    axis = b * np.arange(-P // 2, P // 2)
    band = (axis >= 0.1 * grid.nyquist) & (axis <= 0.6 * grid.nyquist)
    line = V[middle].reshape((P,) * grid.dim)
    if grid.dim == 2:
        line = line[:, P // 2]
    eps_fit = _band_rms_fit(axis[band], line[band], s)
    logger.debug("Decay probe: h_fit=%.4g eps_fit=%.4g", h_fit, eps_fit)
    return DecayProbe(h_fit, eps_fit)
