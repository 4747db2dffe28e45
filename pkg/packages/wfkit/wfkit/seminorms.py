"""
Cone semi-norms and their tail bookkeeping

Every semi-norm is truncated at dyadic radii R_max·2^{−i}. Finiteness is
decided from the slope of log(annulus contribution) against R^{1/s} over the
outermost annuli: slope ≤ −τ is convergent (regular), slope ≥ τ divergent
(singular), anything in between indeterminate.
"""

import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import roots_legendre

from .atoms import Atom, Window, fourier_oracle
from .config import get_settings
from .errors import AtomError, NormError, TransformError
from .geometry import BoxGrid, Cone, Lattice, lattice_points_in, separation_constant
from .norms import log_abs, log_lp_norm
from .transform import Spectrum, StftGrid, dft
from .weights import Weight, evaluate_log_at

logger = logging.getLogger(__name__)

VARIANTS = ("Mpq", "Wpq")
CLASSIFICATIONS = ("regular", "singular", "indeterminate")

# polar quadrature refinement
MIN_NODES = 16
MAX_NODES = 1024
STABILITY = 0.01


@dataclass(frozen=True)
class ConeSeminormResult:
    """Truncated semi-norm values at dyadic radii, in log space"""
    radii: Tuple[float, ...]
    log_partials: Tuple[float, ...]
    log_annuli: Tuple[float, ...]
    q: float
    weight_id: str
    cone_id: str
    tail_slope: float
    s: float
    flagged: bool = False
    vacuous: bool = False
    p: Optional[float] = None
    variant: Optional[str] = None

    @property
    def value_at_radius(self) -> List[Tuple[float, float]]:
        with np.errstate(over="ignore"):
            return [(R, float(np.exp(v))) for R, v in zip(self.radii, self.log_partials)]

    @property
    def value(self) -> float:
        """Partial value at the largest radius"""
        with np.errstate(over="ignore"):
            return float(np.exp(self.log_partials[-1])) if self.log_partials else 0.0

    def classify(self, tau: Optional[float] = None) -> str:
        if self.vacuous:
            return "regular"
        return classify_slope(self.tail_slope, tau)

    def to_rows(self) -> List[List[Any]]:
        rows = []
        with np.errstate(over="ignore"):
            for R, part, ann in zip(self.radii, self.log_partials, self.log_annuli):
                rows.append([self.cone_id, self.weight_id, self.q, R,
                             float(np.exp(part)), float(np.exp(ann)), self.tail_slope])
        return rows

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["radii"] = list(self.radii)
        data["log_partials"] = list(self.log_partials)
        data["log_annuli"] = list(self.log_annuli)
        data["classification"] = self.classify()
        return data


def dyadic_radii(R_max: float, levels: Optional[int] = None) -> Tuple[float, ...]:
    """R_max·2^{−i} for i = levels−1 … 0"""
    levels = get_settings().levels if levels is None else levels
    if R_max <= 0:
        raise NormError(f"truncation radius must be positive, got {R_max}")
    if levels < 2:
        raise NormError(f"need at least 2 dyadic levels, got {levels}")
    return tuple(R_max * 2.0 ** (i - levels + 1) for i in range(levels))


def fit_tail_slope(radii: Sequence[float], log_annuli: Sequence[float], s: float,
                   count: Optional[int] = None) -> float:
    """Least-squares slope of log(annulus) against R^{1/s} over the outermost annuli"""
    count = get_settings().fit_annuli if count is None else count
    xs = np.asarray(radii[-count:], dtype=float) ** (1.0 / s)
    ys = np.asarray(log_annuli[-count:], dtype=float)
    if ys[-1] == -math.inf:
        return -math.inf
    finite = np.isfinite(ys)
    if np.count_nonzero(finite) < 2:
        return math.nan
    slope, _ = np.polyfit(xs[finite], ys[finite], 1)
    return float(slope)


def classify_slope(slope: float, tau: Optional[float] = None) -> str:
    tau = get_settings().tau if tau is None else tau
    if math.isnan(slope):
        return "indeterminate"
    if slope <= -tau:
        return "regular"
    if slope >= tau:
        return "singular"
    return "indeterminate"


def _cell_term(log_cell: float, p: float) -> float:
    return 0.0 if p == math.inf else log_cell / p


def _result(radii, log_partials, log_annuli, q, w: Weight, cone: Cone, s: float, **extra) -> ConeSeminormResult:
    slope = fit_tail_slope(radii, log_annuli, s)
    return ConeSeminormResult(tuple(radii), tuple(float(v) for v in log_partials),
                              tuple(float(v) for v in log_annuli), q, w.weight_id,
                              cone.cone_id, slope, s, **extra)


# continuous Fourier-Lebesgue semi-norm

@lru_cache(maxsize=16)
def _legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(n)
    return nodes, weights


def _polar_nodes(cone: Cone, r_lo: float, r_hi: float, n: int, sup: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Points and log quadrature weights covering cone ∩ {r_lo < |ξ| ≤ r_hi}"""
    if sup:
        start = r_lo if r_lo > 0 else r_hi / n
        radii = np.linspace(start, r_hi, n)
        log_dr = np.zeros(n)
    else:
        t, wt = _legendre(n)
        radii = 0.5 * (r_hi - r_lo) * t + 0.5 * (r_hi + r_lo)
        log_dr = np.log(0.5 * (r_hi - r_lo) * wt)
    if cone.dim == 1:
        signs = [1.0, -1.0] if cone.is_full else [cone.axis[0]]
        pts = np.concatenate([sign * radii for sign in signs])[:, None]
        return pts, np.tile(log_dr, len(signs))
    center = math.atan2(cone.axis[1], cone.axis[0])
    if cone.is_full:
        theta = center + 2.0 * math.pi * np.arange(n) / n
        w_theta = np.full(n, 2.0 * math.pi / n)
    else:
        theta = center + np.linspace(-cone.half_angle, cone.half_angle, n)
        w_theta = np.full(n, 2.0 * cone.half_angle / (n - 1))
        w_theta[[0, -1]] *= 0.5
    rr, tt = np.meshgrid(radii, theta, indexing="ij")
    pts = np.stack([rr * np.cos(tt), rr * np.sin(tt)], axis=-1).reshape(-1, 2)
    log_w = (log_dr[:, None] + np.log(radii)[:, None] + np.log(w_theta)[None, :]).reshape(-1)
    return pts, log_w


def _annulus_oracle(f: Atom, cone: Cone, w: Weight, x0: np.ndarray, q: float,
                    r_lo: float, r_hi: float) -> Tuple[float, bool]:
    """log (∫_{annulus ∩ Γ} |f̂ ω|^q)^{1/q}, refined until 1% stable"""
    sup = q == math.inf
    previous = None
    n = MIN_NODES
    while n <= MAX_NODES:
        pts, log_w = _polar_nodes(cone, r_lo, r_hi, n, sup)
        log_g = log_abs(f.fourier(pts)) + evaluate_log_at(w, x0, pts)
        if sup:
            current = float(np.max(log_g))
        else:
            current = float(log_lp_norm(log_g + log_w / q, q))
        if previous is not None:
            if previous == current or (math.isfinite(current) and abs(math.expm1(current - previous)) < STABILITY):
                return current, False
        previous = current
        n *= 2
    logger.warning("Quadrature on (%g, %g] of %s did not stabilize to 1%%", r_lo, r_hi, cone.cone_id)
    return previous, True


def fl_cone_seminorm(f: Atom, cone: Cone, w: Weight, q: float = 2.0, R_max: Optional[float] = None,
                     x0: Any = None, grid: Optional[BoxGrid] = None,
                     spectrum: Optional[Spectrum] = None, levels: Optional[int] = None,
                     s: Optional[float] = None) -> ConeSeminormResult:
    """(∫_{Γ, |ξ|≤R} |f̂(ξ)ω(x₀,ξ)|^q dξ)^{1/q} at dyadic R

    Closed-form transforms are integrated in polar coordinates; anything else
    is summed over the nodes of its sampled spectrum.
    """
    settings = get_settings()
    s = settings.s if s is None else s
    x0 = np.zeros(f.dim) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    if spectrum is None and f.has_closed_form:
        if R_max is None:
            R_max = settings.grid(f.dim).default_radius()
        radii = dyadic_radii(R_max, levels)
        log_annuli, flagged = [], False
        r_lo = 0.0
        for R in radii:
            value, unstable = _annulus_oracle(f, cone, w, x0, q, r_lo, R)
            log_annuli.append(value)
            flagged = flagged or unstable
            r_lo = R
        log_partials = [log_lp_norm(np.array(log_annuli[:i + 1]), q) for i in range(len(radii))]
        return _result(radii, log_partials, log_annuli, q, w, cone, s, flagged=flagged)

    if spectrum is None:
        spectrum = dft(f.samples(grid))
    return _spectrum_seminorm(spectrum, cone, w, q, R_max, x0, levels, s)


def _spectrum_seminorm(spectrum: Spectrum, cone: Cone, w: Weight, q: float, R_max: Optional[float],
                       x0: np.ndarray, levels: Optional[int], s: float) -> ConeSeminormResult:
    grid = spectrum.grid
    R_max = grid.default_radius() if R_max is None else R_max
    if R_max > grid.nyquist:
        raise TransformError(f"truncation radius {R_max:g} exceeds the Nyquist frequency {grid.nyquist:.6g}")
    radii = dyadic_radii(R_max, levels)
    pts = spectrum.frequency_points()
    r = np.linalg.norm(pts, axis=1)
    moduli = np.abs(spectrum.values.reshape(-1))
    peak = float(moduli.max()) if moduli.size else 0.0
    keep = cone.contains(pts) & (r <= R_max) & (moduli >= get_settings().noise_floor * peak) & (moduli > 0)
    log_g = np.full(len(r), -math.inf)
    log_g[keep] = np.log(moduli[keep]) + evaluate_log_at(w, x0, pts[keep])
    log_cell = grid.dim * math.log(grid.frequency_step)
    index = np.round(pts / grid.frequency_step).astype(int)
    coarse = np.all(index % 2 == 0, axis=1)

    def annulus(mask: np.ndarray, cell: float) -> float:
        if not np.any(mask):
            return -math.inf
        return float(log_lp_norm(log_g[mask], q)) + _cell_term(cell, q)

    log_annuli, r_lo = [], 0.0
    for R in radii:
        log_annuli.append(annulus((r > r_lo) & (r <= R), log_cell))
        r_lo = R
    log_partials = [log_lp_norm(np.array(log_annuli[:i + 1]), q) for i in range(len(radii))]
    fine = log_partials[-1]
    rough = annulus((r <= R_max) & coarse, grid.dim * math.log(2.0 * grid.frequency_step))
    flagged = bool(math.isfinite(fine) and (not math.isfinite(rough) or abs(math.expm1(rough - fine)) > STABILITY))
    return _result(radii, log_partials, log_annuli, q, w, cone, s, flagged=flagged)


# discrete Fourier-Lebesgue semi-norm

def fl_discrete_seminorm(f: Union[Atom, Spectrum], H: Any, w: Weight, q: float = 2.0,
                         R_max: Optional[float] = None, x0: Any = None,
                         levels: Optional[int] = None, s: Optional[float] = None,
                         cone: Optional[Cone] = None) -> ConeSeminormResult:
    """(Σ_{ξ_l∈H, |ξ_l|≤R} |f̂(ξ_l)ω(ξ_l)|^q)^{1/q} at dyadic R"""
    s = get_settings().s if s is None else s
    dim = f.grid.dim if isinstance(f, Spectrum) else f.dim
    cone = Cone.full(dim) if cone is None else cone
    x0 = np.zeros(dim) if x0 is None else np.atleast_1d(np.asarray(x0, dtype=float))
    H = np.asarray(H, dtype=float).reshape(-1, dim)
    if len(H) == 0:
        radii = dyadic_radii(R_max or 1.0, levels)
        empty = [-math.inf] * len(radii)
        return _result(radii, empty, empty, q, w, cone, s, vacuous=True)
    r = np.linalg.norm(H, axis=1)
    R_max = float(r.max()) if R_max is None else R_max
    radii = dyadic_radii(R_max, levels)
    if isinstance(f, Spectrum):
        values = f.values_at(H)
        peak = float(np.max(np.abs(f.values)))
        values = np.where(np.abs(values) >= get_settings().noise_floor * peak, values, 0.0)
    else:
        values = np.atleast_1d(fourier_oracle(f, H))
    log_g = log_abs(values) + evaluate_log_at(w, x0, H)

    log_annuli, r_lo = [], 0.0
    for R in radii:
        mask = (r > r_lo) & (r <= R)
        log_annuli.append(float(log_lp_norm(log_g[mask], q)) if np.any(mask) else -math.inf)
        r_lo = R
    log_partials = [log_lp_norm(np.array(log_annuli[:i + 1]), q) for i in range(len(radii))]
    return _result(radii, log_partials, log_annuli, q, w, cone, s)


# modulation semi-norms

def mixed_cone_seminorm(log_values: np.ndarray, space_points: np.ndarray, freq_points: np.ndarray,
                        cone: Cone, w: Weight, p: float, q: float, variant: str = "Mpq",
                        log_space_cell: float = 0.0, log_freq_cell: float = 0.0,
                        R_max: Optional[float] = None, levels: Optional[int] = None,
                        s: Optional[float] = None) -> ConeSeminormResult:
    """Weighted mixed norm of a (space node × frequency node) table over Γ at dyadic radii

    Mpq takes the p-norm over space nodes first and the q-norm over
    frequencies second; Wpq reverses the order.
    """
    if variant not in VARIANTS:
        raise NormError(f"unknown mixed-norm variant '{variant}', expected one of {VARIANTS}")
    s = get_settings().s if s is None else s
    r = np.linalg.norm(freq_points, axis=1)
    R_max = float(r.max()) if R_max is None else R_max
    radii = dyadic_radii(R_max, levels)
    vacuous = log_values.shape[0] == 0
    if vacuous:
        empty = [-math.inf] * len(radii)
        return _result(radii, empty, empty, q, w, cone, s, vacuous=True, p=p, variant=variant)
    within = r <= R_max
    in_cone = cone.contains(freq_points) & within
    # columns beyond R_max never enter a sum
    log_w = np.full(log_values.shape, -math.inf)
    if np.any(within):
        inside = freq_points[within]
        if w.domain == "phase":
            log_w[:, within] = np.array([evaluate_log_at(w, x, inside) for x in space_points])
        else:
            log_w[:, within] = evaluate_log_at(w, None, inside)[None, :]
    log_g = log_values + log_w
    space_term = _cell_term(log_space_cell, p)
    freq_term = _cell_term(log_freq_cell, q)

    def norm(cols: np.ndarray) -> float:
        if not np.any(cols):
            return -math.inf
        block = log_g[:, cols]
        if variant == "Mpq":
            inner = log_lp_norm(block, p, axis=0) + space_term
            return float(log_lp_norm(inner, q)) + freq_term
        inner = log_lp_norm(block, q, axis=1) + freq_term
        return float(log_lp_norm(inner, p)) + space_term

    log_annuli, log_partials, r_lo = [], [], 0.0
    for R in radii:
        log_annuli.append(norm(in_cone & (r > r_lo) & (r <= R)))
        log_partials.append(norm(in_cone & (r <= R)))
        r_lo = R
    return _result(radii, log_partials, log_annuli, q, w, cone, s, p=p, variant=variant)


def mod_cone_seminorm(V: StftGrid, cone: Cone, w: Weight, p: float = 2.0, q: float = 2.0,
                      variant: str = "Mpq", R_max: Optional[float] = None,
                      levels: Optional[int] = None, s: Optional[float] = None) -> ConeSeminormResult:
    """‖V_φf·ω‖_{L^{p,q}(R^d × Γ)} as a Riemann sum over the STFT lattice"""
    log_v = log_abs(V.values)
    if V.values.size:
        peak = float(np.max(np.abs(V.values)))
        log_v[np.abs(V.values) < get_settings().noise_floor * peak] = -math.inf
    if R_max is None:
        R_max = min(V.grid.default_radius(), float(np.max(np.abs(V.frequency_axis))))
    return mixed_cone_seminorm(log_v, V.points, V.frequency_points(), cone, w, p, q, variant,
                               math.log(V.space_cell), math.log(V.frequency_cell),
                               R_max, levels, s)


# localization and diagnostics

def localize(f: Atom, cutoff: Window, x0: Any) -> Atom:
    """f·cutoff(·−x₀)"""
    if not cutoff.is_compact:
        raise AtomError(f"cutoffs must be compactly supported, got {cutoff.window_id}")
    if float(cutoff.evaluate(np.zeros(cutoff.dim))[0]) == 0.0:
        raise AtomError(f"cutoff {cutoff.window_id} vanishes at its centre")
    return f.localize(cutoff, x0)


def cutoff_estimate(f: Atom, cutoff: Window, x0: Any, inner: Cone, outer: Cone, w: Weight,
                    q: float = 2.0, N: Optional[float] = None, grid: Optional[BoxGrid] = None,
                    R_max: Optional[float] = None) -> float:
    """Smallest C with |φf|_{Γ₂} ≤ C·(|f|_{Γ₁} + sup_ξ|f̂ω|e^{−N|ξ|^{1/s}}) at every dyadic radius

    Γ₂ is the inner cone and Γ₁ the outer one.
    """
    settings = get_settings()
    s = settings.s
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    grid = settings.grid(f.dim) if grid is None else grid
    if N is None:
        c = separation_constant(inner, outer)
        N = 2.0 * max(w.certificate().k, 1e-12) / c * 1.1
    local = dft(localize(f, cutoff, x0).samples(grid))
    parent = dft(f.samples(grid))
    lhs = _spectrum_seminorm(local, inner, w, q, R_max, x0, None, s)
    rhs = _spectrum_seminorm(parent, outer, w, q, R_max, x0, None, s)
    pts = parent.frequency_points()
    norms = np.linalg.norm(pts, axis=1)
    log_tail = log_abs(parent.values.reshape(-1)) + evaluate_log_at(w, x0, pts) - N * norms ** (1.0 / s)
    log_sup = float(np.max(log_tail))
    ratios = [a - np.logaddexp(b, log_sup) for a, b in zip(lhs.log_partials, rhs.log_partials)
              if math.isfinite(a)]
    return float(math.exp(max(ratios))) if ratios else 0.0


def fourier_decay_exponent(f: Union[Atom, Spectrum], s: Optional[float] = None, cone: Optional[Cone] = None,
                           band: Optional[Tuple[float, float]] = None, grid: Optional[BoxGrid] = None,
                           bins: int = 16) -> float:
    """Slope a of the band-RMS fit log|f̂(ξ)| ≈ a·|ξ|^{1/s} + c along the cone axis"""
    s = get_settings().s if s is None else s
    dim = f.grid.dim if isinstance(f, Spectrum) else f.dim
    cone = Cone((1.0,) + (0.0,) * (dim - 1), math.pi / 2) if cone is None else cone
    if isinstance(f, Atom) and (f.has_closed_form or f.kind == "gevrey_bump"):
        lo, hi = band or (50.0, 500.0)
        r = np.linspace(lo, hi, 8 * bins)
        moduli = np.abs(np.atleast_1d(fourier_oracle(f, r[:, None] * np.asarray(cone.axis)[None, :])))
    else:
        spectrum = f if isinstance(f, Spectrum) else dft(f.samples(grid))
        nyquist = spectrum.grid.nyquist
        lo, hi = band or (0.1 * nyquist, 0.6 * nyquist)
        pts = spectrum.frequency_points()
        r_all = np.linalg.norm(pts, axis=1)
        sel = cone.contains(pts) & (r_all >= lo) & (r_all <= hi)
        order = np.argsort(r_all[sel], kind="stable")
        r = r_all[sel][order]
        moduli = np.abs(spectrum.values.reshape(-1)[sel][order])
        peak = float(np.max(np.abs(spectrum.values)))
        moduli = np.where(moduli >= get_settings().noise_floor * peak, moduli, 0.0)
    keep = moduli > 0
    r, moduli = r[keep], moduli[keep]
    if len(r) < 3:
        return -math.inf
    xs, ys = [], []
    for chunk_r, chunk_m in zip(np.array_split(r, bins), np.array_split(moduli, bins)):
        if len(chunk_r):
            xs.append(float(np.mean(chunk_r ** (1.0 / s))))
            ys.append(0.5 * math.log(float(np.mean(chunk_m ** 2))))
    if len(xs) < 2:
        return -math.inf
    slope, _ = np.polyfit(xs, ys, 1)
    return float(slope)


def lattice_frequencies(cone: Cone, b: float, R_max: float) -> np.ndarray:
    """Γ ∩ bZ^d ∩ ball(0, R_max), ordered by modulus"""
    pts = lattice_points_in(Lattice.scaled_integers(b, cone.dim), cone, R_max)
    order = np.argsort(np.linalg.norm(pts, axis=1), kind="stable")
    return pts[order]
