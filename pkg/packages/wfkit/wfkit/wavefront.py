"""
Wave-front detectors and the equivalence cross-checker

Four detectors decide whether (x₀, Γ) is singular for a weight ω_k:

- WF_FL     Fourier-Lebesgue cone semi-norm of the localized atom
- WF_Mod    modulation (STFT) cone semi-norm of the localized atom
- DF_FL     discrete Fourier-Lebesgue semi-norm over Γ₀ ∩ Λ₂
- DF_Gabor  Gabor coefficients over J_{x₀}(ε) × (Γ₀ ∩ Λ₂)

A cell is regular as soon as one cutoff (or one scale ε) gives a convergent
tail, so each verdict carries the smallest tail slope found.
"""

import logging
import math
import threading
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .atoms import Atom, Signal, Window, expected_singular, gevrey_bump
from .config import get_settings
from .errors import WavefrontError
from .gabor import GaborSystem, build_gabor_system, coefficients, local_index_set
from .geometry import BoxGrid, Cone, ConeCover, LatticePair, make_pair
from .norms import log_abs
from .seminorms import (
    ConeSeminormResult,
    classify_slope,
    fl_cone_seminorm,
    fl_discrete_seminorm,
    fourier_decay_exponent,
    lattice_frequencies,
    localize,
    mixed_cone_seminorm,
    mod_cone_seminorm,
)
from .transform import Spectrum, StftGrid, dft, stft
from .weights import Weight

logger = logging.getLogger(__name__)

SCHEMA = "wfreport/1"
DETECTORS = ("WF_FL", "WF_Mod", "DF_FL", "DF_Gabor")
ESTIMATE = "WF_s"


@dataclass(frozen=True)
class AnalysisParameters:
    """Knobs of one analysis run; None fields are filled by resolved()"""
    s: Optional[float] = None
    p: float = 2.0
    q: float = 2.0
    k_grid: Tuple[float, ...] = (0.5, 1.0, 2.0, 4.0)
    cover: Optional[ConeCover] = None
    pair: Optional[LatticePair] = None
    window: Optional[Window] = None
    cutoffs: Optional[Tuple[Window, ...]] = None
    eps_list: Tuple[float, ...] = (1.0, 0.5)
    grid: Optional[BoxGrid] = None
    tau: Optional[float] = None
    R_max: Optional[float] = None
    levels: Optional[int] = None
    detectors: Tuple[str, ...] = DETECTORS
    q_grid: Tuple[float, ...] = ()
    microlocality: bool = True
    threads: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if not self.k_grid or any(k <= 0 for k in self.k_grid) or list(self.k_grid) != sorted(self.k_grid):
            raise WavefrontError(f"k_grid must be increasing and positive, got {self.k_grid}")
        unknown = set(self.detectors) - set(DETECTORS)
        if unknown:
            raise WavefrontError(f"unknown detectors {sorted(unknown)}, expected some of {DETECTORS}")
        if any(not 0 < e <= 1 for e in self.eps_list) or not self.eps_list:
            raise WavefrontError(f"ε values must lie in (0, 1], got {self.eps_list}")

    def resolved(self, dim: int) -> "AnalysisParameters":
        """Copy with every default filled in for dimension dim"""
        settings = get_settings()
        s = settings.s if self.s is None else self.s
        grid = self.grid or settings.grid(dim)
        if dim == 1:
            pair = self.pair or make_pair(1.0, math.pi / 2, 1)
            radius, cover = 1.0, self.cover or ConeCover.uniform(1)
        else:
            pair = self.pair or make_pair(1.5, math.pi / 2, 2)
            radius, cover = 1.5, self.cover or ConeCover.uniform(2)
        window = self.window or gevrey_bump(min(1.5, 1.0 + (s - 1.0) / 2.0), radius, dim)
        cutoffs = self.cutoffs or default_cutoffs(pair, s, dim)
        R_max = grid.default_radius() if self.R_max is None else self.R_max
        if R_max > settings.frequency_cap:
            logger.warning("Truncation radius %g clipped to the frequency cap %g", R_max, settings.frequency_cap)
            R_max = settings.frequency_cap
        return replace(
            self, s=s, grid=grid, pair=pair, cover=cover, window=window, cutoffs=tuple(cutoffs),
            tau=settings.tau if self.tau is None else self.tau,
            R_max=R_max,
            levels=settings.levels if self.levels is None else self.levels,
        )

    def weights(self) -> List[Weight]:
        return [Weight.subexponential(k, self.s) for k in self.k_grid]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s": self.s, "p": self.p, "q": self.q, "k_grid": list(self.k_grid),
            "cover": self.cover.to_dict() if self.cover else None,
            "pair": self.pair.to_dict() if self.pair else None,
            "window": self.window.to_dict() if self.window else None,
            "cutoffs": [c.to_dict() for c in self.cutoffs] if self.cutoffs else None,
            "eps_list": list(self.eps_list),
            "grid": self.grid.to_dict() if self.grid else None,
            "tau": self.tau, "R_max": self.R_max, "levels": self.levels,
            "detectors": list(self.detectors), "q_grid": list(self.q_grid),
            "microlocality": self.microlocality, "seed": self.seed,
        }


def default_cutoffs(pair: LatticePair, s: float, dim: int) -> Tuple[Window, ...]:
    """Two radii {0.45a, 0.3a} × two Gevrey orders {1+(s−1)/2, 1+(s−1)/4}"""
    a = pair.lambda1.step or float(min(np.linalg.norm(pair.lambda1.matrix, axis=0)))
    orders = (1.0 + (s - 1.0) / 2.0, 1.0 + (s - 1.0) / 4.0)
    return tuple(gevrey_bump(order, factor * a, dim, normalize=False)
                 for factor in (0.45, 0.3) for order in orders)


@dataclass(frozen=True)
class CellVerdict:
    """Verdict of one detector on one (point, cone, k, q) cell"""
    point: Tuple[float, ...]
    cone_id: str
    detector: str
    k: float
    q: float
    classification: str
    tail_slope: float
    diagnostics: Dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def key(self) -> Tuple[Tuple[float, ...], str, float, float]:
        return self.point, self.cone_id, self.k, self.q

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": list(self.point), "cone_id": self.cone_id, "detector": self.detector,
            "k": self.k, "q": self.q, "classification": self.classification,
            "tail_slope": self.tail_slope, "diagnostics": self.diagnostics,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CellVerdict":
        return cls(tuple(float(v) for v in data["point"]), data["cone_id"], data["detector"],
                   float(data["k"]), float(data["q"]), data["classification"],
                   float(data["tail_slope"]), dict(data.get("diagnostics", {})))


def _combine(results: Sequence[Tuple[str, ConeSeminormResult]], tau: float) -> Tuple[str, float, Dict[str, Any]]:
    """Regular when some result converges: the verdict keeps the smallest slope"""
    slopes = [-math.inf if r.vacuous else r.tail_slope for _, r in results]
    finite_or_inf = [v for v in slopes if not math.isnan(v)]
    slope = min(finite_or_inf) if finite_or_inf else math.nan
    diagnostics = {
        "slopes": {label: (-math.inf if r.vacuous else r.tail_slope) for label, r in results},
        "flagged": any(r.flagged for _, r in results),
        "vacuous": bool(results) and all(r.vacuous for _, r in results),
    }
    return classify_slope(slope, tau), slope, diagnostics


class AnalysisContext:
    """Per-atom caches of localized samples, spectra, STFTs and Gabor systems"""

    def __init__(self, atom: Atom, params: AnalysisParameters, inner_threads: Optional[int] = None):
        self.atom = atom
        self.params = params.resolved(atom.dim)
        self.grid = self.params.grid
        self.inner_threads = inner_threads
        self._lock = threading.Lock()
        self._cache: Dict[Any, Any] = {}

    def _cached(self, key: Any, build: Callable[[], Any]) -> Any:
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = build()
        with self._lock:
            return self._cache.setdefault(key, value)

    @property
    def signal(self) -> Signal:
        return self._cached("signal", lambda: self.atom.samples(self.grid))

    def local_signal(self, x0: Tuple[float, ...], cutoff: Window) -> Signal:
        def build():
            shifted = self.grid.points() - np.asarray(x0)
            return Signal(self.grid, self.signal.values * cutoff.evaluate(shifted).reshape(self.grid.shape))
        return self._cached(("local", x0, cutoff.window_id), build)

    def local_spectrum(self, x0: Tuple[float, ...], cutoff: Window) -> Spectrum:
        return self._cached(("spectrum", x0, cutoff.window_id), lambda: dft(self.local_signal(x0, cutoff)))

    def local_stft(self, x0: Tuple[float, ...], cutoff: Window) -> StftGrid:
        return self._cached(
            ("stft", x0, cutoff.window_id),
            lambda: stft(self.local_signal(x0, cutoff), self.params.window, self.params.pair,
                         1.0, threads=self.inner_threads, clip=True),
        )

    def system(self, eps: float) -> GaborSystem:
        base = self._cached("system", lambda: build_gabor_system(self.params.window, self.params.pair,
                                                                 1.0, self.grid))
        return base.at_scale(eps)

    def use_system(self, sys: GaborSystem):
        with self._lock:
            self._cache["system"] = sys.at_scale(1.0)

    def table(self, x0: Tuple[float, ...], eps: float):
        def build():
            sys = self.system(eps)
            return coefficients(self.signal, sys, self.grid, local_index_set(x0, sys), self.inner_threads)
        return self._cached(("table", x0, eps), build)


class Detector(ABC):
    """A wave-front detector"""

    name = ""

    @abstractmethod
    def seminorms(self, ctx: AnalysisContext, x0: Tuple[float, ...], cone: Cone,
                  w: Weight, q: float) -> List[Tuple[str, ConeSeminormResult]]:
        """Semi-norm results for every cutoff or scale tried"""
        pass

    def verdict(self, ctx: AnalysisContext, x0: Tuple[float, ...], cone: Cone,
                w: Weight, q: Optional[float] = None) -> CellVerdict:
        q = ctx.params.q if q is None else q
        results = self.seminorms(ctx, x0, cone, w, q)
        classification, slope, diagnostics = _combine(results, ctx.params.tau)
        logger.debug("%s at %s cone %s k=%g: %s (slope %.4g)", self.name, x0, cone.cone_id, w.k,
                     classification, slope)
        return CellVerdict(tuple(x0), cone.cone_id, self.name, w.k, q, classification, slope, diagnostics)


class FourierLebesgueDetector(Detector):
    name = "WF_FL"

    def seminorms(self, ctx, x0, cone, w, q):
        p = ctx.params
        return [(c.window_id, fl_cone_seminorm(ctx.atom, cone, w, q, p.R_max, x0,
                                               spectrum=ctx.local_spectrum(x0, c), levels=p.levels, s=p.s))
                for c in p.cutoffs]


class ModulationDetector(Detector):
    name = "WF_Mod"

    def seminorms(self, ctx, x0, cone, w, q):
        p = ctx.params
        results = []
        for c in p.cutoffs:
            V = ctx.local_stft(x0, c)
            result = mod_cone_seminorm(V, cone, w, p.p, q, "Mpq", p.R_max, p.levels, p.s)
            if not V.covered:
                # part of the localized atom sits under no window inside the box
                result = replace(result, tail_slope=math.nan, flagged=True, vacuous=False)
            elif not V.exact:
                result = replace(result, flagged=True)
            results.append((c.window_id, result))
        return results


def _inner_cone(cone: Cone) -> Cone:
    """Γ₀ with closure inside Γ"""
    return cone.shrink(cone.half_angle / 4.0)


class DiscreteFourierLebesgueDetector(Detector):
    name = "DF_FL"

    def seminorms(self, ctx, x0, cone, w, q):
        p = ctx.params
        inner = _inner_cone(cone)
        H = lattice_frequencies(inner, p.pair.steps[1], p.R_max)
        return [(c.window_id, fl_discrete_seminorm(ctx.local_spectrum(x0, c), H, w, q, p.R_max, x0,
                                                   p.levels, p.s, inner))
                for c in p.cutoffs]

    def verdict(self, ctx, x0, cone, w, q=None):
        cell = super().verdict(ctx, x0, cone, w, q)
        cell.diagnostics["avoids_lattice"] = ctx.params.pair.avoids(x0)
        return cell


class DiscreteGaborDetector(Detector):
    name = "DF_Gabor"

    def seminorms(self, ctx, x0, cone, w, q):
        p = ctx.params
        inner = _inner_cone(cone)
        noise = get_settings().noise_floor
        results = []
        for eps in p.eps_list:
            table = ctx.table(x0, eps)
            log_c = log_abs(table.values)
            if table.values.size:
                peak = float(np.max(np.abs(table.values)))
                log_c[np.abs(table.values) < noise * peak] = -math.inf
            result = mixed_cone_seminorm(log_c, table.points, table.frequency_points(), inner, w,
                                         p.p, q, "Mpq", 0.0, 0.0, p.R_max, p.levels, p.s)
            results.append((f"eps={eps:g}", result))
        return results


DETECTOR_CLASSES = {
    "WF_FL": FourierLebesgueDetector,
    "WF_Mod": ModulationDetector,
    "DF_FL": DiscreteFourierLebesgueDetector,
    "DF_Gabor": DiscreteGaborDetector,
}


def _point(x0: Any, dim: int) -> Tuple[float, ...]:
    return tuple(float(v) for v in np.broadcast_to(np.atleast_1d(np.asarray(x0, dtype=float)), (dim,)))


def _run(detector: Detector, f: Atom, x0: Any, cover: ConeCover, w: Weight,
         params: AnalysisParameters, q: float) -> List[CellVerdict]:
    ctx = AnalysisContext(f, params)
    point = _point(x0, f.dim)
    return [detector.verdict(ctx, point, cone, w, q) for cone in cover.cones]


def detect_wf_fl(f: Atom, x0: Any, cover: ConeCover, w: Weight, q: float = 2.0,
                 cutoff: Optional[Window] = None, params: Optional[AnalysisParameters] = None) -> List[CellVerdict]:
    """Fourier-Lebesgue verdict for each cone of the cover"""
    params = replace(params or AnalysisParameters(), cover=cover, q=q,
                     cutoffs=(cutoff,) if cutoff else None)
    return _run(FourierLebesgueDetector(), f, x0, cover, w, params, q)


def detect_wf_mod(f: Atom, x0: Any, cover: ConeCover, w: Weight, p: float = 2.0, q: float = 2.0,
                  window: Optional[Window] = None, cutoff: Optional[Window] = None,
                  params: Optional[AnalysisParameters] = None) -> List[CellVerdict]:
    """Modulation verdict for each cone of the cover"""
    params = replace(params or AnalysisParameters(), cover=cover, p=p, q=q, window=window,
                     cutoffs=(cutoff,) if cutoff else None)
    return _run(ModulationDetector(), f, x0, cover, w, params, q)


def detect_df_fl(f: Atom, x0: Any, cover: ConeCover, w: Weight, q: float = 2.0,
                 pair: Optional[LatticePair] = None, cutoff: Optional[Window] = None,
                 params: Optional[AnalysisParameters] = None) -> List[CellVerdict]:
    """Discrete Fourier-Lebesgue verdict for each cone of the cover"""
    if pair is not None:
        pair.require_strong()
    params = replace(params or AnalysisParameters(), cover=cover, q=q, pair=pair,
                     cutoffs=(cutoff,) if cutoff else None)
    return _run(DiscreteFourierLebesgueDetector(), f, x0, cover, w, params, q)


def detect_df_gabor(f: Atom, x0: Any, cover: ConeCover, w: Weight, p: float = 2.0, q: float = 2.0,
                    sys: Optional[GaborSystem] = None,
                    params: Optional[AnalysisParameters] = None) -> List[CellVerdict]:
    """Discrete Gabor verdict for each cone of the cover"""
    params = params or AnalysisParameters()
    if sys is not None:
        params = replace(params, pair=sys.pair, window=sys.window, eps_list=(sys.eps,))
    params = replace(params, cover=cover, p=p, q=q)
    ctx = AnalysisContext(f, params)
    if sys is not None:
        ctx.use_system(sys)
    point = _point(x0, f.dim)
    detector = DiscreteGaborDetector()
    return [detector.verdict(ctx, point, cone, w, q) for cone in cover.cones]


def _monotone(classifications: Sequence[str]) -> bool:
    """No regular verdict after a singular one"""
    seen_singular = False
    for c in classifications:
        if c == "singular":
            seen_singular = True
        elif c == "regular" and seen_singular:
            return False
    return True


def _estimate_cell(point, cone_id, per_k: Sequence[CellVerdict], k_grid, q) -> CellVerdict:
    classes = [c.classification for c in per_k]
    if all(c == "singular" for c in classes):
        classification = "singular"
    elif not _monotone(classes):
        classification = "indeterminate"
    elif any(c == "regular" for c in classes):
        classification = "regular"
    else:
        classification = "indeterminate"
    slope = per_k[0].tail_slope
    diagnostics = {"per_k": {f"{c.k:g}": c.classification for c in per_k}}
    return CellVerdict(point, cone_id, ESTIMATE, min(k_grid), q, classification, slope, diagnostics)


def _decay_diagnostic(ctx: AnalysisContext, x0, cone: Cone) -> float:
    spectrum = ctx.local_spectrum(x0, ctx.params.cutoffs[0])
    axis_cone = Cone(cone.axis, min(cone.half_angle, math.pi / 2))
    return fourier_decay_exponent(spectrum, ctx.params.s, axis_cone)


def estimate_wf_s(f: Atom, x0: Any, cover: ConeCover, s: Optional[float] = None,
                  k_grid: Optional[Sequence[float]] = None, q: float = 2.0,
                  params: Optional[AnalysisParameters] = None) -> List[CellVerdict]:
    """Intersection over k of the Fourier-Lebesgue wave-front sets

    A cell is singular iff it is singular for every k; verdicts that flip back
    to regular as k grows make it indeterminate.
    """
    params = params or AnalysisParameters()
    params = replace(params, cover=cover, q=q, s=s if s is not None else params.s,
                     k_grid=tuple(k_grid) if k_grid is not None else params.k_grid)
    ctx = AnalysisContext(f, params)
    point = _point(x0, f.dim)
    detector = FourierLebesgueDetector()
    out = []
    for cone in cover.cones:
        per_k = [detector.verdict(ctx, point, cone, w, q) for w in ctx.params.weights()]
        cell = _estimate_cell(point, cone.cone_id, per_k, ctx.params.k_grid, q)
        a = _decay_diagnostic(ctx, point, cone)
        cell.diagnostics["decay_exponent"] = a
        cell.diagnostics["decay_criterion"] = "singular" if a >= -min(ctx.params.k_grid) else "regular"
        out.append(cell)
    return out


@dataclass(frozen=True)
class MicrolocalEntry:
    """Verdict of g·f against the verdict of f at the same cell"""
    point: Tuple[float, ...]
    cone_id: str
    k: float
    q: float
    cutoff: str
    parent: str
    localized: str
    parent_slope: float
    localized_slope: float

    def to_dict(self) -> Dict[str, Any]:
        return {"point": list(self.point), "cone_id": self.cone_id, "k": self.k, "q": self.q,
                "cutoff": self.cutoff, "parent": self.parent, "localized": self.localized,
                "parent_slope": self.parent_slope, "localized_slope": self.localized_slope}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "MicrolocalEntry":
        return cls(tuple(float(v) for v in data["point"]), data["cone_id"], float(data["k"]),
                   float(data["q"]), data["cutoff"], data["parent"], data["localized"],
                   float(data["parent_slope"]), float(data["localized_slope"]))


@dataclass
class WavefrontReport:
    """Cells of every detector for one atom"""
    atom_id: str
    atom: Dict[str, Any]
    parameters: Dict[str, Any]
    cells: List[CellVerdict] = field(default_factory=list)
    microlocal: List[MicrolocalEntry] = field(default_factory=list)
    schema: str = SCHEMA

    @property
    def points(self) -> List[Tuple[float, ...]]:
        seen: List[Tuple[float, ...]] = []
        for cell in self.cells:
            if cell.point not in seen:
                seen.append(cell.point)
        return seen

    def cells_for(self, detector: str) -> List[CellVerdict]:
        return [c for c in self.cells if c.detector == detector]

    def indeterminate(self) -> List[CellVerdict]:
        return [c for c in self.cells if c.classification == "indeterminate"]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": self.schema,
            "atom_id": self.atom_id,
            "atom": self.atom,
            "parameters": self.parameters,
            "cells": [c.to_dict() for c in self.cells],
            "microlocal": [m.to_dict() for m in self.microlocal],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "WavefrontReport":
        schema = data.get("schema")
        if schema != SCHEMA:
            raise WavefrontError(f"unsupported report schema {schema!r}, expected {SCHEMA!r}")
        return cls(
            atom_id=data["atom_id"],
            atom=data.get("atom", {}),
            parameters=data.get("parameters", {}),
            cells=[CellVerdict.from_dict(c) for c in data.get("cells", [])],
            microlocal=[MicrolocalEntry.from_dict(m) for m in data.get("microlocal", [])],
        )

    def to_csv_rows(self) -> List[List[Any]]:
        rows: List[List[Any]] = [["point", "cone_id", "detector", "k", "q", "classification", "tail_slope"]]
        for c in self.cells:
            rows.append([" ".join(f"{v:g}" for v in c.point), c.cone_id, c.detector, c.k, c.q,
                         c.classification, c.tail_slope])
        return rows


def _microlocal_entries(ctx: AnalysisContext, point, parents: Dict[Tuple[str, float], CellVerdict]
                        ) -> List[MicrolocalEntry]:
    p = ctx.params
    detector = FourierLebesgueDetector()
    entries = []
    for g in p.cutoffs:
        sub = AnalysisContext(localize(ctx.atom, g, point), p, ctx.inner_threads)
        for cone in p.cover.cones:
            for w in p.weights():
                parent = parents[(cone.cone_id, w.k)]
                local = detector.verdict(sub, point, cone, w, p.q)
                entries.append(MicrolocalEntry(point, cone.cone_id, w.k, p.q, g.window_id,
                                               parent.classification, local.classification,
                                               parent.tail_slope, local.tail_slope))
    return entries


def analyze(atom: Atom, points: Sequence[Any], params: Optional[AnalysisParameters] = None) -> WavefrontReport:
    """Run every configured detector, the WF_s estimate and the micro-locality probes"""
    params = (params or AnalysisParameters()).resolved(atom.dim)
    workers = params.threads or get_settings().worker_count
    ctx = AnalysisContext(atom, params, inner_threads=1 if workers > 1 else None)
    pts = [_point(x, atom.dim) for x in points]
    detectors = [DETECTOR_CLASSES[name]() for name in params.detectors]
    logger.info("Analyzing %s at %d points with %s", atom.atom_id, len(pts), ", ".join(params.detectors))

    def work(item):
        point, detector = item
        cells = []
        for w in params.weights():
            for cone in params.cover.cones:
                cells.append(detector.verdict(ctx, point, cone, w, params.q))
                if detector.name == "WF_FL":
                    for q in params.q_grid:
                        if q != params.q:
                            cells.append(detector.verdict(ctx, point, cone, w, q))
        return cells

    items = [(point, d) for point in pts for d in detectors]
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(work, items))
    else:
        batches = [work(item) for item in items]
    cells = [c for batch in batches for c in batch]

    report = WavefrontReport(atom.atom_id, atom.to_dict(), params.to_dict(), cells)
    if "WF_FL" in params.detectors:
        fl = {(c.point, c.cone_id, c.k): c for c in cells if c.detector == "WF_FL" and c.q == params.q}
        for point in pts:
            for cone in params.cover.cones:
                per_k = [fl[(point, cone.cone_id, k)] for k in params.k_grid]
                cell = _estimate_cell(point, cone.cone_id, per_k, params.k_grid, params.q)
                a = _decay_diagnostic(ctx, point, cone)
                cell.diagnostics["decay_exponent"] = a
                cell.diagnostics["decay_criterion"] = "singular" if a >= -min(params.k_grid) else "regular"
                report.cells.append(cell)
            if params.microlocality:
                parents = {(cone_id, k): c for (pt, cone_id, k), c in fl.items() if pt == point}
                report.microlocal.extend(_microlocal_entries(ctx, point, parents))
    logger.info("Analysis of %s produced %d cells (%d indeterminate)", atom.atom_id,
                len(report.cells), len(report.indeterminate()))
    return report


@dataclass
class CrosscheckSummary:
    """Agreement and violation bookkeeping of a report"""
    agreement: Dict[str, Dict[str, Optional[float]]]
    disagreements: List[Dict[str, Any]]
    k_violations: List[Dict[str, Any]]
    q_violations: List[Dict[str, Any]]
    microlocal_violations: List[Dict[str, Any]]
    indeterminate: List[Dict[str, Any]]
    total_cells: int

    @property
    def violations(self) -> int:
        return len(self.disagreements) + len(self.k_violations) + len(self.q_violations) \
            + len(self.microlocal_violations)

    @property
    def passed(self) -> bool:
        return self.violations == 0

    @property
    def all_indeterminate(self) -> bool:
        return self.total_cells > 0 and len(self.indeterminate) == self.total_cells

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": self.passed,
            "total_cells": self.total_cells,
            "agreement": self.agreement,
            "disagreements": self.disagreements,
            "k_violations": self.k_violations,
            "q_violations": self.q_violations,
            "microlocal_violations": self.microlocal_violations,
            "indeterminate": self.indeterminate,
        }


def _describe(cell: CellVerdict) -> Dict[str, Any]:
    return {"point": list(cell.point), "cone_id": cell.cone_id, "detector": cell.detector,
            "k": cell.k, "q": cell.q, "classification": cell.classification}


def crosscheck(report: WavefrontReport) -> CrosscheckSummary:
    """Detector agreement, k- and q-monotonicity and micro-locality of a report"""
    by_key: Dict[Tuple, Dict[str, CellVerdict]] = {}
    for cell in report.cells:
        if cell.detector in DETECTORS:
            by_key.setdefault(cell.key, {})[cell.detector] = cell

    agreement: Dict[str, Dict[str, Optional[float]]] = {}
    for a in DETECTORS:
        agreement[a] = {}
        for b in DETECTORS:
            shared = [(v[a], v[b]) for v in by_key.values() if a in v and b in v
                      and v[a].classification != "indeterminate" and v[b].classification != "indeterminate"]
            agreement[a][b] = (sum(x.classification == y.classification for x, y in shared) / len(shared)
                               if shared else None)

    disagreements = []
    for key, verdicts in by_key.items():
        decided = {d: c.classification for d, c in verdicts.items() if c.classification != "indeterminate"}
        if len(set(decided.values())) > 1:
            disagreements.append({"point": list(key[0]), "cone_id": key[1], "k": key[2], "q": key[3],
                                  "verdicts": decided})

    k_violations = []
    series: Dict[Tuple, List[CellVerdict]] = {}
    for cell in report.cells:
        if cell.detector in DETECTORS:
            series.setdefault((cell.point, cell.cone_id, cell.detector, cell.q), []).append(cell)
    for cells in series.values():
        ordered = sorted(cells, key=lambda c: c.k)
        if not _monotone([c.classification for c in ordered]):
            k_violations.extend(_describe(c) for c in ordered)

    q_violations = []
    fl: Dict[Tuple, List[CellVerdict]] = {}
    for cell in report.cells_for("WF_FL"):
        fl.setdefault((cell.point, cell.cone_id, cell.k), []).append(cell)
    for cells in fl.values():
        for big in cells:
            for small in cells:
                if small.q < big.q and big.classification == "singular" and small.classification == "regular":
                    q_violations.append({"singular": _describe(big), "regular": _describe(small)})

    microlocal_violations = [m.to_dict() for m in report.microlocal
                             if m.localized == "singular" and m.parent == "regular"]
    indeterminate = [_describe(c) for c in report.indeterminate()]
    summary = CrosscheckSummary(agreement, disagreements, k_violations, q_violations,
                                microlocal_violations, indeterminate, len(report.cells))
    if not summary.passed:
        logger.warning("Cross-check of %s found %d violations", report.atom_id, summary.violations)
    return summary


def ground_truth_check(report: WavefrontReport, atom: Atom, resolution: float = 0.0,
                       cover: Optional[ConeCover] = None) -> List[Dict[str, Any]]:
    """Decided cells whose verdict contradicts the known wave-front set

    Cones within resolution of a singular direction without containing it are
    ambiguous and skipped.
    """
    s = report.parameters.get("s") or get_settings().s
    if cover is None:
        cover_data = report.parameters.get("cover")
        cover = ConeCover(tuple(Cone.from_dict(c) for c in cover_data["cones"])) if cover_data \
            else ConeCover.uniform(atom.dim)
    cones = {c.cone_id: c for c in cover.cones}
    mismatches = []
    for cell in report.cells:
        if cell.classification == "indeterminate" or cell.cone_id not in cones:
            continue
        cone = cones[cell.cone_id]
        strict = expected_singular(atom, cell.point, cone, s)
        loose = expected_singular(atom, cell.point, cone, s, resolution)
        if strict != loose:
            continue
        if (cell.classification == "singular") != strict:
            entry = _describe(cell)
            entry["expected"] = "singular" if strict else "regular"
            mismatches.append(entry)
    return mismatches
