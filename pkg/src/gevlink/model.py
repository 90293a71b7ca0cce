"""Bernoulli regression model over a linear predictor and a link.

Holds the dataset container, the prior system (independent normals, a
flat-beta/uniform-shape prior, and a design-dependent Jeffreys prior for
the GEV link), and the likelihood / posterior evaluations the sampler
and the comparison tools consume.

Parameter packing: a model over k regression coefficients exposes
theta = (beta_1, ..., beta_k) for fixed-shape links and
theta = (beta_1, ..., beta_k, xi) under the GEV link, where the shape is
a sampled parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import expit

from .gev import GUMBEL_XI_EPS
from .links import LINK_KINDS, Link, inv_link

# Probabilities are clamped to [P_CLAMP, 1 - P_CLAMP] inside likelihood
# sums; exact degeneracy is detected before clamping and contributes
# exactly 0 (agreement) or -inf (disagreement).
P_CLAMP = 1e-15

COLUMN_KINDS = ("intercept", "continuous", "dummy")


@dataclass(frozen=True)
class ColumnTransform:
    """Record of how a raw continuous column was standardized.

    `center` and `scale` map raw (possibly logged) values v to
    (v - center)/scale; `log_applied` says whether v = log(raw).
    """

    log_applied: bool
    center: float
    scale: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.center) and np.isfinite(self.scale)):
            raise ValueError("center and scale must be finite")
        if self.scale <= 0.0:
            raise ValueError(f"scale must be positive, got {self.scale!r}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Binary response with design matrix and per-column metadata.

    Parameters
    ----------
    y : ndarray
        Binary responses, length n >= 1.
    X : ndarray
        n x k design matrix.  When an intercept is present it is the
        first column (all ones) and carries kind ``"intercept"``.
    column_names : tuple of str
        One unique label per column.
    column_kinds : tuple of str
        Per column, one of ``"intercept"``, ``"continuous"``, ``"dummy"``.
    standardization : mapping, optional
        ColumnTransform per standardized continuous column name.
    """

    y: np.ndarray
    X: np.ndarray
    column_names: tuple
    column_kinds: tuple
    standardization: Mapping[str, ColumnTransform] = field(default_factory=dict)

    def __post_init__(self) -> None:
        y = np.asarray(self.y, dtype=float)
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        n, k = X.shape
        if n < 1:
            raise ValueError("dataset needs at least one row")
        if y.shape != (n,):
            raise ValueError(f"y has shape {y.shape}, expected ({n},)")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains NaN or infinite entries")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("y entries must all be 0 or 1")
        names = tuple(self.column_names)
        kinds = tuple(self.column_kinds)
        if len(names) != k or len(set(names)) != k:
            raise ValueError(f"column_names must be {k} unique labels")
        if len(kinds) != k or any(kd not in COLUMN_KINDS for kd in kinds):
            raise ValueError(f"column_kinds must be {k} values from {COLUMN_KINDS}")
        if "intercept" in kinds:
            if kinds[0] != "intercept" or kinds.count("intercept") != 1:
                raise ValueError("the intercept must be the single first column")
            if not np.all(X[:, 0] == 1.0):
                raise ValueError("intercept column must be all ones")
        standardization = dict(self.standardization or {})
        for name, tf in standardization.items():
            if name not in names:
                raise ValueError(f"standardization references unknown column {name!r}")
            if kinds[names.index(name)] != "continuous":
                raise ValueError(f"standardization only applies to continuous columns, not {name!r}")
            if not isinstance(tf, ColumnTransform):
                raise ValueError("standardization values must be ColumnTransform records")
        y.flags.writeable = False
        X.flags.writeable = False
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "column_names", names)
        object.__setattr__(self, "column_kinds", kinds)
        object.__setattr__(self, "standardization", standardization)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    def take(self, rows) -> "Dataset":
        """Row subset with metadata preserved."""
        rows = np.asarray(rows)
        return Dataset(
            self.y[rows],
            self.X[rows],
            self.column_names,
            self.column_kinds,
            self.standardization,
        )


@dataclass(frozen=True)
class NormalPrior:
    """Independent zero-mean normal priors on every parameter.

    `beta_variances` is a scalar applied to every coefficient or a
    per-coefficient sequence; `xi_variance` applies to the GEV shape
    when the model has one.
    """

    beta_variances: float | tuple = 1e4
    xi_variance: float = 1e4

    def __post_init__(self) -> None:
        v = np.atleast_1d(np.asarray(self.beta_variances, dtype=float))
        if not np.all(np.isfinite(v)) or np.any(v <= 0.0):
            raise ValueError("beta variances must be finite and positive")
        if not np.isfinite(self.xi_variance) or self.xi_variance <= 0.0:
            raise ValueError("xi_variance must be finite and positive")


@dataclass(frozen=True)
class FlatBetaUniformXiPrior:
    """Improper flat prior on beta, uniform prior on xi over [low, high)."""

    xi_low: float = -1.0
    xi_high: float = 1.0

    def __post_init__(self) -> None:
        if not self.xi_low < self.xi_high:
            raise ValueError("xi_low must be below xi_high")


@dataclass(frozen=True)
class JeffreysPrior:
    """Design-dependent 0.5*logdet(X' Omega X) prior on beta (GEV link
    only), with an independent zero-mean normal on xi."""

    xi_prior_variance: float = 1e4

    def __post_init__(self) -> None:
        if not np.isfinite(self.xi_prior_variance) or self.xi_prior_variance <= 0.0:
            raise ValueError("xi_prior_variance must be finite and positive")


def _normal_logpdf(x, variance):
    return -0.5 * (np.log(2.0 * np.pi * variance) + x * x / variance)


def jeffreys_weights(eta, xi: float):
    """Fisher weights omega_i for the GEV link at predictor values `eta`.

    omega = (1 - xi*eta)^(-2/xi - 2) / [exp{(1 - xi*eta)^(-1/xi)} - 1],
    equal to (dp/deta)^2 / (p(1-p)).  Requires (1 - xi*eta) > 0 for
    every entry; raises otherwise.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if abs(xi) < GUMBEL_XI_EPS:
        log_t = np.zeros_like(eta)
        s = np.exp(eta)
    else:
        t = 1.0 - xi * eta
        if np.any(t <= 0.0):
            raise ValueError("jeffreys weights need (1 - xi*eta) > 0 for every row")
        log_t = np.log(t)
        s = np.exp(-log_t / xi)
    # log(e^s - 1) = s + log1p(-e^{-s}); switch forms to dodge overflow
    with np.errstate(over="ignore", divide="ignore"):
        log_em1 = np.where(s > 33.0, s, np.log(np.expm1(s)))
        log_omega = 2.0 * np.log(s) - 2.0 * log_t - log_em1
        return np.exp(log_omega)


class BinaryRegressionModel:
    """Binary regression with one of the supported links.

    Parameters
    ----------
    data : Dataset
    link : str
        ``"logit"``, ``"probit"``, ``"cloglog"``, or ``"gev"``.  Under
        ``"gev"`` the shape xi is an extra sampled parameter.
    prior : NormalPrior or FlatBetaUniformXiPrior or JeffreysPrior, optional
        Defaults to independent normals with variance 1e4.
    """

    def __init__(self, data: Dataset, link: str, prior=None):
        if link not in LINK_KINDS:
            raise ValueError(f"unknown link kind {link!r}; expected one of {LINK_KINDS}")
        if prior is None:
            prior = NormalPrior()
        if isinstance(prior, JeffreysPrior) and link != "gev":
            raise ValueError("the jeffreys prior is defined only for the gev link")
        if isinstance(prior, NormalPrior):
            v = np.atleast_1d(np.asarray(prior.beta_variances, dtype=float))
            if v.size == 1:
                v = np.full(data.k, float(v[0]))
            elif v.size != data.k:
                raise ValueError(
                    f"beta_variances has length {v.size}, expected {data.k}"
                )
            self._beta_variances = v
        self.data = data
        self.link = link
        self.prior = prior
        self._fixed_link = Link(link) if link != "gev" else None

    # ----- shape of the parameter vector -----

    @property
    def has_shape(self) -> bool:
        return self.link == "gev"

    @property
    def k(self) -> int:
        return self.data.k

    @property
    def n_obs(self) -> int:
        return self.data.n

    @property
    def dim(self) -> int:
        return self.k + (1 if self.has_shape else 0)

    @property
    def param_names(self) -> tuple:
        names = tuple(self.data.column_names)
        return names + ("xi",) if self.has_shape else names

    @property
    def has_improper_prior(self) -> bool:
        return isinstance(self.prior, FlatBetaUniformXiPrior)

    def with_data(self, data: Dataset) -> "BinaryRegressionModel":
        """Same link and prior over a different dataset."""
        if data.k != self.k:
            raise ValueError("replacement data must keep the column count")
        return BinaryRegressionModel(data, self.link, self.prior)

    def split_params(self, theta):
        """Unpack theta into (beta, xi-or-None)."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.dim,):
            raise ValueError(f"theta has shape {theta.shape}, expected ({self.dim},)")
        if self.has_shape:
            return theta[: self.k], float(theta[-1])
        return theta, None

    def _check_args(self, beta, xi):
        beta = np.asarray(beta, dtype=float)
        if beta.shape != (self.k,):
            raise ValueError(f"beta has shape {beta.shape}, expected ({self.k},)")
        if self.has_shape:
            if xi is None:
                raise ValueError("the gev link requires a shape value xi")
            xi = float(xi)
        elif xi is not None:
            raise ValueError(f"the {self.link} link takes no shape parameter")
        return beta, xi

    def _link_at(self, xi):
        return self._fixed_link if self._fixed_link is not None else Link("gev", xi)

    # ----- likelihood / prior / posterior -----

    def log_likelihood(self, beta, xi=None) -> float:
        """Bernoulli log-likelihood at (beta, xi).

        Exactly degenerate probabilities contribute 0 when they agree
        with the observed response and force -inf when they disagree;
        interior probabilities are clamped away from 0 and 1 before the
        logs.
        """
        beta, xi = self._check_args(beta, xi)
        eta = self.data.X @ beta
        p = inv_link(eta, self._link_at(xi))
        y = self.data.y
        exact1 = p == 1.0
        exact0 = p == 0.0
        if np.any(exact1 & (y == 0.0)) or np.any(exact0 & (y == 1.0)):
            return -np.inf
        pc = np.clip(p, P_CLAMP, 1.0 - P_CLAMP)
        log_p = np.log(pc)
        log_q = np.log1p(-pc)
        log_p[exact1] = 0.0
        log_q[exact0] = 0.0
        return float(y @ log_p + (1.0 - y) @ log_q)

    def deviance(self, beta, xi=None) -> float:
        """-2 times the log-likelihood (not relative to a saturated model)."""
        return -2.0 * self.log_likelihood(beta, xi)

    def log_prior(self, beta, xi=None) -> float:
        beta, xi = self._check_args(beta, xi)
        prior = self.prior
        if isinstance(prior, NormalPrior):
            total = float(np.sum(_normal_logpdf(beta, self._beta_variances)))
            if self.has_shape:
                total += float(_normal_logpdf(xi, prior.xi_variance))
            return total
        if isinstance(prior, FlatBetaUniformXiPrior):
            if not self.has_shape:
                return 0.0
            if prior.xi_low <= xi < prior.xi_high:
                return float(-np.log(prior.xi_high - prior.xi_low))
            return -np.inf
        # Jeffreys: design-dependent beta prior, normal on xi
        eta = self.data.X @ beta
        if abs(xi) >= GUMBEL_XI_EPS and np.any(1.0 - xi * eta <= 0.0):
            return -np.inf
        omega = jeffreys_weights(eta, xi)
        info = (self.data.X * omega[:, None]).T @ self.data.X
        sign, logdet = np.linalg.slogdet(info)
        if sign <= 0.0 or not np.isfinite(logdet):
            return -np.inf
        return 0.5 * float(logdet) + float(_normal_logpdf(xi, prior.xi_prior_variance))

    def log_posterior(self, beta, xi=None) -> float:
        """Unnormalized log posterior; -inf propagates from either part."""
        lp = self.log_prior(beta, xi)
        if lp == -np.inf:
            return -np.inf
        ll = self.log_likelihood(beta, xi)
        return lp + ll

    # ----- packed-parameter interface used by the sampler -----

    def log_posterior_parts(self, theta):
        """(log_posterior, log_likelihood) at packed theta.

        The likelihood slot is NaN when the prior already excludes the
        point and the likelihood was never evaluated.
        """
        beta, xi = self.split_params(theta)
        lp = self.log_prior(beta, xi)
        if lp == -np.inf:
            return -np.inf, np.nan
        ll = self.log_likelihood(beta, xi)
        return lp + ll, ll

    def deviance_at(self, theta) -> float:
        beta, xi = self.split_params(theta)
        return self.deviance(beta, xi)

    # ----- starting point and proposal heuristics -----

    def _irls_logit(self):
        """Newton fit of a logit model; (beta, covariance) or (None, None)."""
        X, y = self.data.X, self.data.y
        beta = np.zeros(self.k)
        try:
            for _ in range(25):
                p = expit(X @ beta)
                w = np.clip(p * (1.0 - p), 1e-10, None)
                info = (X * w[:, None]).T @ X
                step = np.linalg.solve(info, X.T @ (y - p))
                if not np.all(np.isfinite(step)):
                    return None, None
                beta = beta + step
                if np.max(np.abs(step)) < 1e-8:
                    break
            cov = np.linalg.inv((X * w[:, None]).T @ X)
            if not np.all(np.isfinite(cov)):
                return None, None
            return beta, cov
        except np.linalg.LinAlgError:
            return None, None

    def initial_params(self):
        """Starting point with finite log posterior.

        Coefficients come from a logit Newton fit (zeros when that
        fails); the shape starts at 0.1 with fallbacks nearer 0.
        """
        beta, _ = self._irls_logit()
        candidates = []
        for b in ([beta] if beta is not None else []) + [np.zeros(self.k)]:
            if self.has_shape:
                candidates.extend([np.append(b, 0.1), np.append(b, -0.1)])
            else:
                candidates.append(np.asarray(b, dtype=float))
        for theta in candidates:
            if np.isfinite(self.log_posterior_parts(theta)[0]):
                return theta
        raise RuntimeError("no starting point with finite posterior was found")

    def default_proposal_scales(self):
        """Per-parameter random-walk scales before global adaptation."""
        _, cov = self._irls_logit()
        if cov is None:
            se = np.full(self.k, 0.1)
        else:
            se = np.sqrt(np.clip(np.diag(cov), 1e-6, None))
        scales = se
        if self.has_shape:
            xi_scale = max(0.05, 1.5 * float(np.mean(se)))
            scales = np.append(se, xi_scale)
        return 2.4 / np.sqrt(self.dim) * scales
