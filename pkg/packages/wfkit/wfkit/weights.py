"""
Weights on frequency space and phase space

Weights are evaluated in log space. Every weight can produce a moderation
certificate (s, k, C) asserting ω(x+y) ≤ C·e^{k|x|^{1/s}}·ω(y).
"""

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .config import get_settings
from .errors import WeightError

logger = logging.getLogger(__name__)

KINDS = ("constant", "polynomial", "subexponential", "product")
DOMAINS = ("frequency", "phase")

# slack allowed in sampled inequality checks
CHECK_TOLERANCE = 1e-9


class BeurlingDomarWarning(UserWarning):
    """Weight outside the non-quasi-analytic classes"""


def _norms(points: Any) -> np.ndarray:
    """Euclidean norms along the last axis; a bare number is a 1D point"""
    pts = np.atleast_1d(np.asarray(points, dtype=float))
    return np.linalg.norm(pts, axis=-1)


@dataclass(frozen=True)
class ModerationCertificate:
    """Constants (s, k, C) of a moderation estimate"""
    s: float
    k: float
    C: float

    def __post_init__(self):
        if self.s < 1:
            raise WeightError(f"certificate exponent s must be >= 1, got {self.s}")
        if self.k < 0:
            raise WeightError(f"certificate rate k must be >= 0, got {self.k}")
        if self.C < 1:
            raise WeightError(f"certificate constant C must be >= 1, got {self.C}")

    def log_bound(self, points: Any) -> np.ndarray:
        """log C + k|x|^{1/s}"""
        return math.log(self.C) + self.k * _norms(points) ** (1.0 / self.s)

    def to_dict(self) -> Dict[str, float]:
        return {"s": self.s, "k": self.k, "C": self.C}


@dataclass(frozen=True)
class Weight:
    """A weight ω(ξ) or ω(x, ξ) of one of four kinds"""
    kind: str
    k: float = 0.0
    s: float = 0.0
    t: float = 0.0
    factors: Tuple["Weight", ...] = ()
    domain: str = "frequency"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise WeightError(f"unknown weight kind '{self.kind}', expected one of {KINDS}")
        if self.domain not in DOMAINS:
            raise WeightError(f"unknown weight domain '{self.domain}', expected one of {DOMAINS}")
        if self.kind == "subexponential":
            if self.k <= 0:
                raise WeightError(f"sub-exponential rate k must be positive, got {self.k}")
            if self.s < 1:
                raise WeightError(f"sub-exponential exponent s must be >= 1, got {self.s}")
        if self.kind == "product":
            if not self.factors:
                raise WeightError("product weight needs at least one factor")
            domains = {f.domain for f in self.factors}
            if domains != {self.domain}:
                raise WeightError(f"product factors must share domain '{self.domain}', got {sorted(domains)}")

    @classmethod
    def constant(cls, domain: str = "frequency") -> "Weight":
        return cls("constant", domain=domain)

    @classmethod
    def polynomial(cls, t: float, domain: str = "frequency") -> "Weight":
        return cls("polynomial", t=float(t), domain=domain)

    @classmethod
    def subexponential(cls, k: float, s: Optional[float] = None,
                       domain: str = "frequency") -> "Weight":
        s = get_settings().s if s is None else s
        return cls("subexponential", k=float(k), s=float(s), domain=domain)

    @classmethod
    def product(cls, *factors: "Weight") -> "Weight":
        if not factors:
            raise WeightError("product weight needs at least one factor")
        return cls("product", factors=tuple(factors), domain=factors[0].domain)

    @property
    def weight_id(self) -> str:
        prefix = "phase:" if self.domain == "phase" else ""
        if self.kind == "constant":
            return prefix + "constant"
        if self.kind == "polynomial":
            return f"{prefix}polynomial(t={self.t:g})"
        if self.kind == "subexponential":
            return f"{prefix}subexp(k={self.k:g},s={self.s:g})"
        return prefix + "*".join(f.weight_id for f in self.factors)

    @property
    def in_class(self) -> bool:
        """False when the weight violates the Beurling-Domar condition"""
        if self.kind == "subexponential":
            return self.s > 1
        if self.kind == "product":
            return all(f.in_class for f in self.factors)
        return True

    def log_value(self, points: Any) -> np.ndarray:
        """log ω at points given as an array of shape (..., dim)"""
        if self.kind == "constant":
            return np.zeros_like(_norms(points))
        if self.kind == "polynomial":
            r = _norms(points)
            return 0.5 * self.t * np.log1p(r * r)
        if self.kind == "subexponential":
            return self.k * _norms(points) ** (1.0 / self.s)
        total = self.factors[0].log_value(points)
        for factor in self.factors[1:]:
            total = total + factor.log_value(points)
        return total

    def certificate(self) -> ModerationCertificate:
        """Moderation constants valid for every pair of points"""
        if self.kind == "constant":
            return ModerationCertificate(get_settings().s, 0.0, 1.0)
        if self.kind == "subexponential":
            return ModerationCertificate(self.s, self.k, 1.0)
        if self.kind == "polynomial":
            s = get_settings().s
            return ModerationCertificate(s, 1.0, math.exp(_peetre_log_constant(self.t, s)))

        certs = [f.certificate() for f in self.factors]
        s = min(c.s for c in certs)
        k = sum(c.k for c in certs)
        log_c = sum(math.log(c.C) for c in certs)
        # |x|^{1/s_i} <= 1 + |x|^{1/s} whenever s <= s_i
        log_c += sum(c.k for c in certs if c.s != s)
        return ModerationCertificate(s, k, math.exp(log_c))

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind}
        if self.kind == "polynomial":
            data["t"] = self.t
        elif self.kind == "subexponential":
            data["k"] = self.k
            data["s"] = self.s
        elif self.kind == "product":
            data["factors"] = [f.to_dict() for f in self.factors]
        if self.domain != "frequency":
            data["domain"] = self.domain
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Weight":
        if not isinstance(data, dict) or "kind" not in data:
            raise WeightError(f"weight must be an object with a 'kind', got {data!r}")
        kind = str(data["kind"]).lower().replace("_", "").replace("-", "")
        aliases = {"subexp": "subexponential", "poly": "polynomial"}
        kind = aliases.get(kind, kind)
        domain = data.get("domain", "frequency")
        if kind == "constant":
            return cls.constant(domain=domain)
        if kind == "polynomial":
            return cls.polynomial(data.get("t", 0.0), domain=domain)
        if kind == "subexponential":
            return cls.subexponential(data["k"], data.get("s"), domain=domain)
        if kind == "product":
            return cls.product(*(cls.from_dict(f) for f in data.get("factors", [])))
        raise WeightError(f"unknown weight kind '{data['kind']}'")


def _peetre_log_constant(t: float, s: float) -> float:
    """log C with ⟨x+y⟩^t ≤ C e^{|x|^{1/s}} ⟨y⟩^t

    Peetre gives ⟨x+y⟩^t ≤ 2^{|t|/2} ⟨x⟩^{|t|} ⟨y⟩^t, and ⟨x⟩^{|t|} e^{-|x|^{1/s}}
    is maximized over u = |x|^{1/s} in [0, 2s|t| + 10].
    """
    a = abs(t)
    if a == 0:
        return 0.0
    u = np.linspace(0.0, 2.0 * s * a + 10.0, 20001)
    g = 0.5 * a * np.log1p(u ** (2.0 * s)) - u
    spacing = u[1] - u[0]
    return 0.5 * a * math.log(2.0) + float(g.max()) + spacing * (a * s + 1.0)


def _check_cap(pts: np.ndarray):
    """Frequencies must stay within the configured cap"""
    cap = get_settings().frequency_cap
    if pts.size == 0:
        return
    largest = float(np.max(np.linalg.norm(pts, axis=-1)))
    if largest > cap:
        raise WeightError(f"frequency |ξ| = {largest:.6g} exceeds the frequency cap {cap:g}")


def evaluate_log(w: Weight, xi: Any) -> float:
    """log ω(ξ) at a single frequency"""
    if w.domain == "phase":
        raise WeightError("phase-space weight needs a space point; use evaluate_log_at")
    _check_cap(np.atleast_2d(np.asarray(xi, dtype=float)))
    return float(np.asarray(w.log_value(xi)).reshape(-1)[0])


def evaluate_log_at(w: Weight, x: Any, xi: Any) -> np.ndarray:
    """log ω(x, ξ) for frequency points xi of shape (n, d) at a fixed space point x"""
    pts = np.atleast_2d(np.asarray(xi, dtype=float))
    _check_cap(pts)
    if w.domain == "frequency":
        return w.log_value(pts)
    base = np.broadcast_to(np.atleast_1d(np.asarray(x, dtype=float)), pts.shape)
    return w.log_value(np.concatenate([base, pts], axis=-1))


def _split_pairs(samples: Union[Sequence[Tuple[Any, Any]], Tuple[np.ndarray, np.ndarray]]):
    if isinstance(samples, tuple) and len(samples) == 2 and isinstance(samples[0], np.ndarray) \
            and samples[0].ndim == 2:
        xs, ys = samples
    else:
        pairs = list(samples)
        if not pairs:
            raise WeightError("samples must be nonempty")
        xs = np.array([np.atleast_1d(np.asarray(x, dtype=float)) for x, _ in pairs])
        ys = np.array([np.atleast_1d(np.asarray(y, dtype=float)) for _, y in pairs])
    if xs.shape != ys.shape or xs.shape[0] == 0:
        raise WeightError("samples must be nonempty pairs of points of equal dimension")
    return xs, ys


def check_moderate(w: Weight, cert: ModerationCertificate, samples: Any) -> bool:
    """True iff log ω(x+y) ≤ log C + k|x|^{1/s} + log ω(y) on every sampled pair"""
    xs, ys = _split_pairs(samples)
    lhs = w.log_value(xs + ys)
    rhs = cert.log_bound(xs) + w.log_value(ys) + CHECK_TOLERANCE
    violations = int(np.count_nonzero(lhs > rhs))
    if violations:
        logger.debug("%s violates certificate %s on %d pairs", w.weight_id, cert, violations)
    return violations == 0


def check_bounds(w: Weight, cert: ModerationCertificate, points: Any) -> bool:
    """Sampled check of 1/v ≲ ω ≲ v"""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    values = w.log_value(pts)
    bound = cert.log_bound(pts)
    origin = float(w.log_value(np.zeros(pts.shape[-1])))
    upper = np.all(values <= bound + origin + CHECK_TOLERANCE)
    lower = np.all(values >= -bound + origin - CHECK_TOLERANCE)
    return bool(upper and lower)


def random_pairs(dim: int, count: int, radius: float = 10.0,
                 seed: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """Pairs of points drawn uniformly from [-radius, radius]^dim"""
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-radius, radius, size=(count, dim))
    ys = rng.uniform(-radius, radius, size=(count, dim))
    return xs, ys


def _beurling_domar_terms(w: Weight, x: Any, n_max: int) -> np.ndarray:
    if n_max < 1:
        raise WeightError(f"N must be >= 1, got {n_max}")
    if not w.in_class:
        message = f"{w.weight_id} violates the Beurling-Domar condition (s must exceed 1)"
        logger.warning(message)
        warnings.warn(message, BeurlingDomarWarning, stacklevel=3)
    n = np.arange(1, n_max + 1, dtype=float)
    direction = np.atleast_1d(np.asarray(x, dtype=float))
    return w.log_value(n[:, None] * direction[None, :]) / (n * n)


def beurling_domar_partial_sum(w: Weight, x: Any, N: int) -> float:
    """Σ_{n=1}^{N} log ω(n·x)/n²"""
    return float(np.sum(_beurling_domar_terms(w, x, N)))


def beurling_domar_increment(w: Weight, x: Any, N: int) -> float:
    """Partial sum at N minus the partial sum at ⌊N/2⌋ (Cauchy diagnostic)"""
    terms = _beurling_domar_terms(w, x, N)
    return float(np.sum(terms[N // 2:]))


def weight_family(ks: Iterable[float], s: Optional[float] = None) -> Tuple[Weight, ...]:
    """Sub-exponential weights ω_k for each k"""
    return tuple(Weight.subexponential(k, s) for k in ks)
