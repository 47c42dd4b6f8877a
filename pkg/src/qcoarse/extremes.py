"""Extreme-value statistics for the largest deviation in a sample of pairs.

The pairwise distances behave like |N(0,1)| values scaled by f*e^{-S/2}, so
the largest of d draws grows like the Gaussian upper quantile at 1/d.  The
forecast returned here combines that quantile with the e^{-S/2} floor, and a
(k, k') exponent bracket pins the result between pure-exponential envelopes.
"""
from __future__ import annotations

from dataclasses import dataclass

import math
import numpy as np
from scipy import optimize, stats

from .qcore import _generator


@dataclass(frozen=True)
class SuppressionForecast:
    """Predicted largest pairwise deviation at entropy S, with its envelope.

    ``leading_form`` is the bare sqrt(S)*e^{-S/2} shape the prediction tracks
    up to constants; ``bracket = (k, k')`` are exponents with
    e^{-kS} <= predicted_D <= e^{-k'S}.
    """

    S: float
    x_d: float
    envelope: float
    predicted_D: float
    bracket: tuple
    leading_form: float = 0.0

    def __post_init__(self):
        k_up, k_low = self.bracket
        if not k_low <= k_up:
            raise ValueError(f"bracket exponents out of order: {self.bracket}")
        lo = math.exp(-k_up * self.S) if math.isfinite(k_up) else 0.0
        hi = math.exp(-k_low * self.S)
        if not lo - 1e-12 <= self.predicted_D <= hi + 1e-12:
            raise ValueError(f"predicted_D={self.predicted_D:.6g} escapes its own "
                             f"envelope [{lo:.6g}, {hi:.6g}]")


def expected_max_quantile(d: float) -> float:
    """Location x_d of the expected maximum of d standard normals: sf(x)=1/d."""
    if d < 2:
        raise ValueError(f"need at least two draws, got d={d}")
    return float(optimize.brentq(lambda x: stats.norm.sf(x) - 1.0 / d,
                                 -1.0, 40.0, xtol=1e-12))


def monte_carlo_max_mean(d: int, reps: int, rng) -> float:
    """Sample mean of max of d standard normals (the oracle for x_d's quality)."""
    if d < 1 or reps < 1:
        raise ValueError("d and reps must be positive")
    g = _generator(rng)
    return float(g.standard_normal((reps, d)).max(axis=1).mean())


def forecast_suppression(S: float, f: float, n_pairs: int) -> SuppressionForecast:
    """Largest expected deviation among n_pairs at entropy S and envelope f.

    A single pair deviates by ~ f e^{-S/2} |z|/sqrt(2) per independent real
    direction; pushing the half-width through the Gaussian max quantile at
    1/n_pairs gives predicted_D = (f/sqrt(2)) * x_d * e^{-S/2}.  The bracket
    (k, k') satisfies e^{-kS} <= predicted_D <= e^{-k'S} with k > k' whenever
    the prediction is positive and subunit.
    """
    if S <= 0:
        raise ValueError(f"entropy must be positive, got S={S}")
    if f < 0:
        raise ValueError(f"envelope must be nonnegative, got f={f}")
    if n_pairs < 2:
        raise ValueError("need at least two pairs for a maximum")
    x_d = expected_max_quantile(n_pairs)
    predicted = (f / math.sqrt(2.0)) * x_d * math.exp(-S / 2.0)
    leading = math.sqrt(S) * math.exp(-S / 2.0)
    if predicted <= 0.0:
        bracket = (math.inf, 0.0)
    else:
        k_up = -math.log(predicted) / S
        k_low = min(k_up, 0.5 - math.log(max(S, 1e-300)) / (2.0 * S))
        k_low = max(k_low, 0.0)
        k_low = min(k_low, k_up)
        bracket = (k_up, k_low)
    return SuppressionForecast(S=S, x_d=x_d, envelope=f,
                               predicted_D=predicted, bracket=bracket,
                               leading_form=leading)


def fit_suppression_curve(points) -> dict:
    """Least-squares fit of log D - (1/2) log S against S over (S, D) points.

    The regressed quantity divides out the sqrt(S) prefactor, so a curve
    following sqrt(S)*e^{-S/2} fits with slope exactly -1/2.  Returns the
    slope/intercept of that regression, its r^2, and the tightest
    pure-exponential envelope exponents k_upper = max_i(-log D_i / S_i),
    k_lower = min_i(-log D_i / S_i), so that
    e^{-k_upper S_i} <= D_i <= e^{-k_lower S_i} holds pointwise.
    """
    pts = [(float(s), float(d)) for s, d in points]
    if len(pts) < 3:
        raise ValueError(f"need at least 3 points to fit, got {len(pts)}")
    s = np.array([p[0] for p in pts])
    d = np.array([p[1] for p in pts])
    if np.any(d <= 0):
        raise ValueError("distances must be positive to fit in log space")
    if np.any(s <= 0):
        raise ValueError("entropies must be positive")
    if np.ptp(s) < 1e-12:
        raise ValueError("need at least two distinct entropies to fit a slope")
    logd = np.log(d)
    res = stats.linregress(s, logd - 0.5 * np.log(s))
    k_each = -logd / s
    return {
        "slope": float(res.slope),
        "intercept": float(res.intercept),
        "r_squared": float(res.rvalue ** 2),
        "k_upper": float(np.max(k_each)),
        "k_lower": float(np.min(k_each)),
    }
