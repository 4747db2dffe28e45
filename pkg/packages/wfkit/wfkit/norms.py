"""
Lebesgue and mixed Lebesgue sequence norms

The log-space variants take log-moduli, so weighted sums such as
|c|·e^{k|ξ|^{1/s}} never overflow.
"""

import math
from typing import Any, Optional

import numpy as np
from scipy.special import logsumexp

from .errors import NormError


def _check_exponent(p: float):
    if not (p >= 1 or p == math.inf):
        raise NormError(f"Lebesgue exponent must lie in [1, ∞], got {p}")


def lp_norm(x: Any, p: float = 2.0, axis: Optional[int] = None) -> Any:
    """(Σ|x|^p)^{1/p}, or max|x| for p = ∞"""
    _check_exponent(p)
    a = np.abs(np.asarray(x))
    if a.size == 0:
        return 0.0 if axis is None else np.zeros(np.delete(a.shape, axis))
    if p == math.inf:
        return a.max(axis=axis)
    if p == 1:
        return a.sum(axis=axis)
    return (a ** p).sum(axis=axis) ** (1.0 / p)


def mixed_norm(x: Any, p: float = 2.0, q: float = 2.0) -> float:
    """ℓ^q over the last axis of the ℓ^p norms over axis 0"""
    a = np.asarray(x)
    if a.ndim == 1:
        a = a[:, None]
    inner = lp_norm(a.reshape(a.shape[0], -1), p, axis=0)
    return float(lp_norm(inner, q))


def log_lp_norm(log_x: Any, p: float = 2.0, axis: Optional[int] = None) -> Any:
    """log of lp_norm(exp(log_x)); entries of −∞ stand for zeros"""
    _check_exponent(p)
    a = np.asarray(log_x, dtype=float)
    if a.size == 0:
        return -math.inf if axis is None else np.full(np.delete(a.shape, axis), -math.inf)
    if p == math.inf:
        return a.max(axis=axis)
    with np.errstate(divide="ignore", invalid="ignore"):
        return logsumexp(p * a, axis=axis) / p


def log_mixed_norm(log_x: Any, p: float = 2.0, q: float = 2.0) -> float:
    """log of mixed_norm(exp(log_x), p, q)"""
    a = np.asarray(log_x, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    if a.shape[0] == 0:
        return -math.inf
    inner = log_lp_norm(a.reshape(a.shape[0], -1), p, axis=0)
    return float(log_lp_norm(inner, q))


def log_abs(x: Any) -> np.ndarray:
    """log|x| with log 0 = −∞"""
    with np.errstate(divide="ignore"):
        return np.log(np.abs(np.asarray(x)))
