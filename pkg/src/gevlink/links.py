"""Link functions for binary regression.

Each link maps a linear predictor eta to a success probability.  Four
families are supported: logit, probit, cloglog, and a GEV link indexed
by a shape parameter xi, where p = 1 - GEV_cdf(-eta; 0, 1, xi).  The GEV
link reduces to cloglog as xi -> 0 and is asymmetric for every xi.

Probabilities are never clamped here: predictors beyond a GEV support
edge return exactly 0.0 or 1.0 so that callers can detect degeneracy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit as _logit_fn, ndtr, ndtri

from .gev import GUMBEL_XI_EPS

LINK_KINDS = ("logit", "probit", "cloglog", "gev")


@dataclass(frozen=True)
class Link:
    """A link family, with shape parameter for the GEV case.

    Parameters
    ----------
    kind : str
        One of ``"logit"``, ``"probit"``, ``"cloglog"``, ``"gev"``.
    xi : float, optional
        GEV shape; required (and finite) when `kind` is ``"gev"``,
        disallowed otherwise.
    """

    kind: str
    xi: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in LINK_KINDS:
            raise ValueError(f"unknown link kind {self.kind!r}; expected one of {LINK_KINDS}")
        if self.kind == "gev":
            if self.xi is None or not np.isfinite(self.xi):
                raise ValueError("gev link requires a finite xi")
        elif self.xi is not None:
            raise ValueError(f"{self.kind} link carries no shape parameter")


LOGIT = Link("logit")
PROBIT = Link("probit")
CLOGLOG = Link("cloglog")


def gev_link(xi: float) -> Link:
    """GEV link with shape `xi`."""
    return Link("gev", float(xi))


def _as_1d(values, name: str):
    arr = np.asarray(values, dtype=float)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    return arr, scalar


def _cloglog_p(eta):
    with np.errstate(over="ignore"):
        return -np.expm1(-np.exp(eta))


def inv_link(eta, link: Link):
    """Success probability at linear predictor `eta`.

    Parameters
    ----------
    eta : float or array_like
        Linear predictor, finite.
    link : Link

    Returns
    -------
    float or ndarray
        Probability in [0, 1].  For the GEV link the value is exactly
        1.0 when xi > 0 and eta >= 1/xi, and exactly 0.0 when xi < 0 and
        eta <= 1/xi.
    """
    eta, scalar = _as_1d(eta, "eta")
    if link.kind == "logit":
        p = expit(eta)
    elif link.kind == "probit":
        p = ndtr(eta)
    elif link.kind == "cloglog":
        p = _cloglog_p(eta)
    else:
        xi = link.xi
        if abs(xi) < GUMBEL_XI_EPS:
            p = _cloglog_p(eta)
        else:
            t = 1.0 - xi * eta
            p = np.empty_like(eta)
            inside = t > 0.0
            with np.errstate(over="ignore"):
                s = t[inside] ** (-1.0 / xi)
                p[inside] = -np.expm1(-s)
            p[~inside] = 1.0 if xi > 0 else 0.0
    return float(p[0]) if scalar else p


def link_fn(p, link: Link):
    """Linear predictor producing probability `p`; inverse of `inv_link`.

    `p` must lie strictly between 0 and 1.
    """
    p = np.asarray(p, dtype=float)
    scalar = p.ndim == 0
    p = np.atleast_1d(p)
    if not np.all((p > 0.0) & (p < 1.0)):
        raise ValueError("p must lie strictly between 0 and 1")
    if link.kind == "logit":
        eta = _logit_fn(p)
    elif link.kind == "probit":
        eta = ndtri(p)
    elif link.kind == "cloglog":
        eta = np.log(-np.log1p(-p))
    else:
        xi = link.xi
        u = -np.log1p(-p)
        if abs(xi) < GUMBEL_XI_EPS:
            eta = np.log(u)
        else:
            eta = (1.0 - u**-xi) / xi
    return float(eta[0]) if scalar else eta


def dinv_link_deta(eta, link: Link):
    """Derivative dp/deta of `inv_link`; nonnegative, 0 beyond a GEV edge."""
    eta, scalar = _as_1d(eta, "eta")
    if link.kind == "logit":
        p = expit(eta)
        d = p * (1.0 - p)
    elif link.kind == "probit":
        d = np.exp(-0.5 * eta**2) / np.sqrt(2.0 * np.pi)
    elif link.kind == "cloglog":
        with np.errstate(over="ignore"):
            d = np.exp(eta - np.exp(eta))
    else:
        xi = link.xi
        if abs(xi) < GUMBEL_XI_EPS:
            with np.errstate(over="ignore"):
                d = np.exp(eta - np.exp(eta))
        else:
            t = 1.0 - xi * eta
            d = np.zeros_like(eta)
            inside = t > 0.0
            # log-space keeps the 0 * inf cancellation at the edges clean
            with np.errstate(over="ignore", divide="ignore"):
                lt = np.log(t[inside])
                d[inside] = np.exp(-np.exp(-lt / xi) + (-1.0 / xi - 1.0) * lt)
    return float(d[0]) if scalar else d
