"""Generalized extreme value distribution utilities.

Evaluation (cdf, log-density, quantile), shape summaries (mode, a
mode-based skewness coefficient, the first three moments), and a
moment-matching routine that picks the member closest to the standard
normal in (mean, variance, skewness).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import gamma as _gamma, zeta as _zeta

# Below this |xi| the Gumbel limiting formulas are used.  The seam is
# continuous to well under 1e-7 on any bounded x range.
GUMBEL_XI_EPS = 1e-8

# The closed-form moment expressions cancel catastrophically as xi -> 0
# (the skewness numerator is O(xi^3)), so the moment seam sits higher.
_MOMENT_XI_EPS = 1e-3

# Skewness of the Gumbel distribution: 12*sqrt(6)*zeta(3)/pi^3.
GUMBEL_SKEWNESS = 12.0 * np.sqrt(6.0) * _zeta(3.0, 1.0) / np.pi**3

# Bracket for the shape parameter when matching the standard normal; the
# skewness coefficient changes sign inside it.
_MATCH_BRACKET = (-0.45, -0.05)


@dataclass(frozen=True)
class GevParams:
    """Location/scale/shape triple for a GEV distribution.

    Parameters
    ----------
    mu : float
        Location.
    sigma : float
        Scale, strictly positive.
    xi : float
        Shape.  Negative values give a distribution bounded above,
        positive values one bounded below, and xi = 0 the Gumbel case.
    """

    mu: float
    sigma: float
    xi: float

    def __post_init__(self) -> None:
        for name in ("mu", "sigma", "xi"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.sigma <= 0.0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")


class GevMoments(NamedTuple):
    mean: float
    variance: float
    skewness: float


def _standardize(x, params: GevParams):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    scalar = x.ndim == 0
    z = np.atleast_1d((x - params.mu) / params.sigma)
    return z, scalar


def gev_cdf(x, params: GevParams):
    """GEV cumulative distribution function.

    Evaluates exp[-{1 + xi*(x - mu)/sigma}^(-1/xi)] on the support, with
    the Gumbel limit exp{-exp(-z)} used for |xi| below the seam.  Points
    outside the support return exactly 0.0 (below a lower endpoint) or
    1.0 (above an upper endpoint).

    Parameters
    ----------
    x : float or array_like
        Evaluation points, finite.
    params : GevParams
        Distribution parameters.

    Returns
    -------
    float or ndarray
        Probabilities in [0, 1], scalar when `x` is scalar.
    """
    z, scalar = _standardize(x, params)
    xi = params.xi
    if abs(xi) < GUMBEL_XI_EPS:
        with np.errstate(over="ignore"):
            out = np.exp(-np.exp(-z))
    else:
        t = 1.0 + xi * z
        out = np.empty_like(z)
        inside = t > 0.0
        with np.errstate(over="ignore", divide="ignore"):
            out[inside] = np.exp(-t[inside] ** (-1.0 / xi))
        # t <= 0 means below the lower endpoint (xi > 0) or above the
        # upper endpoint (xi < 0).
        out[~inside] = 0.0 if xi > 0 else 1.0
    return float(out[0]) if scalar else out


def gev_log_pdf(x, params: GevParams):
    """Log-density of the GEV distribution; -inf outside the support.

    Parameters
    ----------
    x : float or array_like
    params : GevParams

    Returns
    -------
    float or ndarray
    """
    z, scalar = _standardize(x, params)
    xi = params.xi
    log_sigma = np.log(params.sigma)
    if abs(xi) < GUMBEL_XI_EPS:
        with np.errstate(over="ignore"):
            out = -log_sigma - z - np.exp(-z)
    else:
        t = 1.0 + xi * z
        out = np.full_like(z, -np.inf)
        inside = t > 0.0
        lt = np.log(t[inside])
        with np.errstate(over="ignore"):
            out[inside] = -log_sigma - (1.0 + 1.0 / xi) * lt - np.exp(-lt / xi)
    return float(out[0]) if scalar else out


def gev_quantile(q, params: GevParams):
    """Inverse cdf.  `q` must lie strictly inside (0, 1).

    Parameters
    ----------
    q : float or array_like
        Probabilities, each strictly between 0 and 1.
    params : GevParams

    Returns
    -------
    float or ndarray
    """
    q = np.asarray(q, dtype=float)
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    if not np.all((q > 0.0) & (q < 1.0)):
        raise ValueError("q must lie strictly between 0 and 1")
    u = -np.log(q)
    xi = params.xi
    if abs(xi) < GUMBEL_XI_EPS:
        out = params.mu - params.sigma * np.log(u)
    else:
        out = params.mu + params.sigma * (u**-xi - 1.0) / xi
    return float(out[0]) if scalar else out


def gev_mode(params: GevParams) -> float:
    """Mode of the density: mu + sigma*{(1+xi)^(-xi) - 1}/xi.

    Undefined for xi <= -1, where the density has no interior maximum.
    """
    xi = params.xi
    if xi <= -1.0:
        raise ValueError(
            f"mode undefined for xi <= -1 (density has no interior maximum), got xi={xi!r}"
        )
    if abs(xi) < GUMBEL_XI_EPS:
        return params.mu
    return params.mu + params.sigma * ((1.0 + xi) ** -xi - 1.0) / xi


def ag_skewness(xi: float) -> float:
    """Mode-based skewness coefficient 1 - 2*F(mode) = 1 - 2*exp{-(1+xi)}.

    Strictly increasing in xi, zero at xi = log(2) - 1, and defined only
    where the mode exists (xi > -1).
    """
    if not np.isfinite(xi):
        raise ValueError(f"xi must be finite, got {xi!r}")
    if xi <= -1.0:
        raise ValueError(
            f"mode-based skewness undefined for xi <= -1, got xi={xi!r}"
        )
    return 1.0 - 2.0 * np.exp(-(1.0 + xi))


def _undefined_moments(xi: float) -> str:
    if xi >= 1.0:
        return "mean, variance, and skewness"
    if xi >= 0.5:
        return "variance and skewness"
    return "skewness"


def gev_moments(params: GevParams) -> GevMoments:
    """Mean, variance, and moment skewness coefficient.

    Uses g_k = Gamma(1 - k*xi):

        mean     = mu + sigma*(g_1 - 1)/xi
        variance = sigma^2*(g_2 - g_1^2)/xi^2
        skewness = sign(xi)*(g_3 - 3 g_1 g_2 + 2 g_1^3)/(g_2 - g_1^2)^(3/2)

    with the Gumbel limits (mu + sigma*euler_gamma, sigma^2*pi^2/6,
    12*sqrt(6)*zeta(3)/pi^3) below the moment seam.  All three moments
    are finite only for xi < 1/3.

    Raises
    ------
    ValueError
        If xi >= 1/3, naming which moments are undefined.
    """
    xi = params.xi
    if xi >= 1.0 / 3.0:
        raise ValueError(
            f"{_undefined_moments(xi)} undefined for xi={xi!r} (requires xi < 1/3)"
        )
    mu, sigma = params.mu, params.sigma
    if abs(xi) < _MOMENT_XI_EPS:
        mean = mu + sigma * np.euler_gamma
        variance = sigma**2 * np.pi**2 / 6.0
        skewness = GUMBEL_SKEWNESS
    else:
        g1 = _gamma(1.0 - xi)
        g2 = _gamma(1.0 - 2.0 * xi)
        g3 = _gamma(1.0 - 3.0 * xi)
        mean = mu + sigma * (g1 - 1.0) / xi
        spread = g2 - g1**2
        variance = sigma**2 * spread / xi**2
        skewness = np.sign(xi) * (g3 - 3.0 * g1 * g2 + 2.0 * g1**3) / spread**1.5
    return GevMoments(float(mean), float(variance), float(skewness))


def moment_match_normal() -> GevParams:
    """GEV parameters matching the standard normal's first three moments.

    Solves skewness(xi) = 0 by bisection on a bracket where the
    coefficient changes sign, then scales and shifts to unit variance
    and zero mean.

    Returns
    -------
    GevParams
        Parameters with moments (0, 1, 0) to floating-point accuracy.
    """

    def skew(xi: float) -> float:
        return gev_moments(GevParams(0.0, 1.0, xi)).skewness

    lo, hi = _MATCH_BRACKET
    f_lo = skew(lo)
    if not f_lo < 0.0 < skew(hi):
        raise RuntimeError("skewness does not change sign on the bracket")
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if skew(mid) < 0.0:
            lo, f_lo = mid, skew(mid)
        else:
            hi = mid
    xi_star = 0.5 * (lo + hi)
    base = gev_moments(GevParams(0.0, 1.0, xi_star))
    sigma_star = 1.0 / np.sqrt(base.variance)
    mu_star = -sigma_star * base.mean
    return GevParams(float(mu_star), float(sigma_star), float(xi_star))
