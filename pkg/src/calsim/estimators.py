"""Robust and classical mean estimation.

The Catoni M-estimator is the root of ``f(z) = sum_i psi(alpha * (X_i - z))``.
``f`` is continuous and strictly decreasing in ``z``, so bisection on a bracket
with a guaranteed sign change finds it deterministically.
"""
import math
from dataclasses import dataclass

import numpy as np

from .errors import EstimatorFailure


@dataclass(frozen=True)
class CatoniConfig:
    alpha: float
    tolerance: float = 1e-10
    max_iterations: int = 200

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.tolerance > 0:
            raise ValueError(f"tolerance must be positive, got {self.tolerance}")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


def psi(y):
    """Catoni's influence function; odd, and ``log(1 + y + y^2/2)`` for ``y >= 0``."""
    y = np.asarray(y, dtype=float)
    out = np.sign(y) * np.log1p(np.abs(y) + 0.5 * y * y)
    return float(out) if out.ndim == 0 else out


def catoni_score(values, z, alpha, weights=None):
    """``f(z) = sum_i w_i psi(alpha (X_i - z))``."""
    terms = psi(alpha * (np.asarray(values, dtype=float) - z))
    if weights is None:
        return float(np.sum(terms))
    return float(np.dot(weights, terms))


def catoni_bracket(values, alpha):
    values = np.asarray(values, dtype=float)
    pad = 2.0 / alpha
    return float(values.min()) - pad, float(values.max()) + pad


def catoni_estimate(samples, cfg, weights=None):
    """Catoni mean estimate of ``samples``.

    ``weights`` (non-negative multiplicities) lets callers pass each distinct
    value once; the result equals the estimate on the expanded sample.
    """
    values = np.asarray(samples, dtype=float).ravel()
    if values.size == 0:
        raise ValueError("Catoni estimate of an empty sample")
    if weights is not None:
        weights = np.asarray(weights, dtype=float).ravel()
        if weights.shape != values.shape or np.any(weights < 0) or weights.sum() <= 0:
            raise ValueError("weights must be non-negative, match the samples and not all vanish")
    alpha = cfg.alpha
    lo, hi = catoni_bracket(values, alpha)
    for _ in range(cfg.max_iterations):
        if hi - lo <= cfg.tolerance:
            return 0.5 * (lo + hi)
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            # bracket is down to adjacent floats
            return mid
        if catoni_score(values, mid, alpha, weights) > 0:
            lo = mid
        else:
            hi = mid
    if hi - lo <= cfg.tolerance:
        return 0.5 * (lo + hi)
    raise EstimatorFailure(
        f"bisection did not reach tolerance {cfg.tolerance} in {cfg.max_iterations} steps "
        f"(bracket width {hi - lo:.3g}, alpha {alpha:.3g})")


def catoni_alpha_for_pair(beta3, q_min, rho_hat, N):
    """Influence scale ``sqrt(beta3 * q_min / (5 * N * rho_hat))`` for one pair's gap samples."""
    if not 0 < q_min <= 1:
        raise ValueError(f"q_min must lie in (0, 1], got {q_min}")
    if not rho_hat > 0:
        raise ValueError("alpha is undefined when the empirical disagreement is zero")
    if N < 1:
        raise ValueError("N must be at least 1")
    return math.sqrt(beta3 * q_min / (5.0 * N * rho_hat))


def certified_gap_radius(beta3, q_min, rho_hat, N):
    """Deviation allowed between a robust pair-gap estimate and its target."""
    return math.sqrt(10.0 * beta3 * rho_hat / (N * q_min))


def catoni_pair_gap(values, counts, beta3, q_min, rho_hat, N):
    """Default robust estimator for a pair's importance-weighted loss differences."""
    alpha = catoni_alpha_for_pair(beta3, q_min, rho_hat, N)
    return catoni_estimate(values, CatoniConfig(alpha), weights=counts)


def bernstein_radius(variance_proxy, beta, n):
    """``sqrt(2 beta v / n) + beta / n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return math.sqrt(2.0 * beta * variance_proxy / n) + beta / n
