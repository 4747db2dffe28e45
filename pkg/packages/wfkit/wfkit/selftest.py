"""
Invariant suite behind `wfkit selftest`

Checks register themselves with @check and run on a small 1D box. A named
fault corrupts one step of one check so the suite can be shown to fail.
"""

import logging
import math
import time
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .atoms import Atom, gevrey_bump
from .errors import InvalidLatticePairError, WavefrontError
from .gabor import build_gabor_system, normalization_residual, reconstruction_error
from .geometry import BoxGrid, make_pair
from .transform import Spectrum, dft, fft_radix2, signal_inner, stft, stft_adjoint, stft_inner
from .wavefront import AnalysisParameters, analyze, crosscheck
from .weights import Weight, beurling_domar_increment, check_moderate, random_pairs

logger = logging.getLogger(__name__)

GRID = BoxGrid(1, 1024, 8.0)
PAIR = make_pair(1.0, math.pi / 2, 1)
WINDOW = gevrey_bump(1.5, 1.0)


@dataclass
class CheckResult:
    """Outcome of one invariant check"""
    name: str
    passed: bool
    value: float
    bound: float
    detail: str = ""
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "bound": self.bound,
            "detail": self.detail,
            "seconds": self.seconds,
        }


CheckFn = Callable[[Optional[str]], CheckResult]
CHECKS: Dict[str, CheckFn] = {}
FAULTS: Dict[str, str] = {}


def check(name: str, fault: Optional[str] = None):
    """Register a check; fault names the defect the check knows how to inject"""
    def register(fn: CheckFn) -> CheckFn:
        if name in CHECKS:
            raise WavefrontError(f"duplicate self-test check '{name}'")
        CHECKS[name] = fn
        if fault:
            FAULTS[fault] = name
        return fn
    return register


def _below(name: str, value: float, bound: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(value <= bound), float(value), bound, detail)


def _relative(a: Any, b: Any) -> float:
    scale = max(float(np.max(np.abs(b))), 1e-300)
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) / scale


@check("fft", fault="fft_sign")
def _check_fft(fault: Optional[str]) -> CheckResult:
    rng = np.random.default_rng(0)
    x = rng.normal(size=256) + 1j * rng.normal(size=256)
    ours = fft_radix2(x)
    if fault == "fft_sign":
        ours = np.conj(ours)
    return _below("fft", _relative(ours, np.fft.fft(x)), 1e-12, "radix-2 against numpy.fft")


@check("parseval", fault="parseval_scale")
def _check_parseval(fault: Optional[str]) -> CheckResult:
    signal = Atom.jump(0.0).samples(GRID)
    spectrum = dft(signal)
    if fault == "parseval_scale":
        spectrum = Spectrum(GRID, 1.01 * spectrum.values)
    norm_f, norm_hat = signal.norm2(), spectrum.norm2()
    return _below("parseval", abs(norm_hat - norm_f) / norm_f, 1e-9, "‖f̂‖ against ‖f‖ on the jump atom")


@check("adjoint", fault="adjoint_conjugate")
def _check_adjoint(fault: Optional[str]) -> CheckResult:
    signal = Atom.gevrey(2.0, 1.0, 0.3).samples(GRID)
    V = stft(signal, WINDOW, PAIR, grid=GRID)
    rng = np.random.default_rng(1)
    F = V.with_values(rng.normal(size=V.values.shape) + 1j * rng.normal(size=V.values.shape))
    lhs = stft_inner(V, F)
    back = stft_adjoint(F)
    rhs = signal_inner(signal, np.conj(back) if fault == "adjoint_conjugate" else back, GRID)
    return _below("adjoint", abs(lhs - rhs) / abs(lhs), 1e-8, "(Vf, F) against (f, V*F)")


@check("delta_stft")
def _check_delta_stft(fault: Optional[str]) -> CheckResult:
    V = stft(Atom.delta(0.0).samples(GRID), WINDOW, PAIR, grid=GRID)
    worst = 0.0
    for column in np.abs(V.values):
        peak = float(column.max())
        if peak > 0:
            worst = max(worst, float(column.max() - column.min()) / peak)
    return _below("delta_stft", worst, 1e-3, "|V_φδ(x_j, ·)| constant in frequency")


@check("lattice", fault="lattice_swap")
def _check_lattice(fault: Optional[str]) -> CheckResult:
    strong = make_pair(1.0, math.pi / 2, 2).classification
    weak = make_pair(1.0, 2 * math.pi, 1).classification
    if fault == "lattice_swap":
        strong, weak = weak, strong
    try:
        make_pair(2.0, 2 * math.pi, 1)
        rejected = False
    except InvalidLatticePairError:
        rejected = True
    ok = strong == "strong" and weak == "weak" and rejected
    return CheckResult("lattice", ok, 0.0 if ok else 1.0, 0.0,
                       f"ab=π/2 → {strong}, ab=2π → {weak}, ab=4π rejected: {rejected}")


@check("frames", fault="frame_constant")
def _check_frames(fault: Optional[str]) -> CheckResult:
    sys = build_gabor_system(WINDOW, PAIR, 1.0, GRID)
    if fault == "frame_constant":
        sys = replace(sys, frame_constant=sys.frame_constant * 1.001)
    f = Atom.gevrey(2.0, 1.0, 0.3).samples(GRID)
    worst = max(reconstruction_error(f, sys.at_scale(eps), GRID) for eps in (1.0, 0.5, 0.25))
    return _below("frames", worst, 1e-10, "synthesis after analysis at ε ∈ {1, ½, ¼}")


@check("normalization")
def _check_normalization(fault: Optional[str]) -> CheckResult:
    sys = build_gabor_system(WINDOW, PAIR, 1.0, GRID)
    worst = max(normalization_residual(sys.at_scale(eps)) for eps in (1.0, 0.5, 0.25))
    return _below("normalization", worst, 1e-10, "‖Λ₁‖·Σφψ(·−x_j) = 1")


@check("moderation", fault="moderation_rate")
def _check_moderation(fault: Optional[str]) -> CheckResult:
    w = Weight.subexponential(1.0, 2.0)
    cert = w.certificate()
    if fault == "moderation_rate":
        cert = replace(cert, k=0.5 * cert.k)
    pairs = random_pairs(2, 2000, radius=50.0, seed=3)
    ok = check_moderate(w, cert, pairs)
    return CheckResult("moderation", ok, 0.0 if ok else 1.0, 0.0, "ω(x+y) ≤ C e^{k|x|^{1/s}} ω(y)")


@check("beurling_domar")
def _check_beurling_domar(fault: Optional[str]) -> CheckResult:
    w = Weight.subexponential(1.0, 2.0)
    coarse = beurling_domar_increment(w, 1.0, 64)
    fine = beurling_domar_increment(w, 1.0, 4096)
    return CheckResult("beurling_domar", fine < coarse and fine < 0.05, fine, 0.05,
                       f"Cauchy increments {coarse:.4g} → {fine:.4g}")


@check("agreement", fault="flip_verdict")
def _check_agreement(fault: Optional[str]) -> CheckResult:
    params = AnalysisParameters(grid=GRID, k_grid=(0.5,), microlocality=False, threads=1)
    report = analyze(Atom.jump(0.0), [0.0, 3.0], params)
    if fault == "flip_verdict":
        flip = {"regular": "singular", "singular": "regular"}
        report.cells = [replace(c, classification=flip.get(c.classification, c.classification))
                        if c.detector == "WF_Mod" else c for c in report.cells]
    summary = crosscheck(report)
    fl = {c.point[0]: c.classification for c in report.cells_for("WF_FL") if c.cone_id == "+"}
    truth = fl.get(0.0) == "singular" and fl.get(3.0) == "regular"
    ok = summary.passed and truth
    return CheckResult("agreement", ok, float(summary.violations), 0.0,
                       f"jump at 0: {fl.get(0.0)}, smooth at 3: {fl.get(3.0)}, "
                       f"{len(summary.indeterminate)} indeterminate cells")


def run_selftest(names: Optional[Sequence[str]] = None, fault: Optional[str] = None) -> List[CheckResult]:
    """Run the selected checks (all by default), optionally with one injected fault"""
    selected = list(CHECKS) if names is None else list(names)
    if not selected:
        raise WavefrontError("self-test selection is empty")
    unknown = [n for n in selected if n not in CHECKS]
    if unknown:
        raise WavefrontError(f"unknown self-test checks {unknown}, expected some of {sorted(CHECKS)}")
    if fault is not None and fault not in FAULTS:
        raise WavefrontError(f"unknown fault '{fault}', expected one of {sorted(FAULTS)}")
    if fault is not None:
        logger.warning("Injecting fault '%s' into check '%s'", fault, FAULTS[fault])

    results = []
    for name in selected:
        start = time.perf_counter()
        try:
            result = CHECKS[name](fault)
        except WavefrontError as e:
            result = CheckResult(name, False, math.nan, math.nan, f"raised {type(e).__name__}: {e}")
        result.seconds = time.perf_counter() - start
        logger.info("Self-test %s: %s", name, "passed" if result.passed else "FAILED")
        results.append(result)
    return results
