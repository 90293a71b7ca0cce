"""Model-adequacy and predictive criteria over posterior chains.

DIC and BIC from per-draw deviances, a single-block marginal-likelihood
estimator built on the sampler's frozen proposal kernel, posterior
predictive deviance on a holdout set, and the reproducible holdout
split itself.  All criteria treat the chain as a multiset of draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .model import Dataset
from .sampler import Chain, long_run_variance, posterior_mean

# Fixed stream tags keep every stochastic helper on its own Philox
# stream for a given user seed (chains use tags 0..n_chains-1).
_HOLDOUT_STREAM = 1 << 32
_PROPOSAL_STREAM = (1 << 32) + 1


class DicResult(NamedTuple):
    dic: float
    p_d: float
    d_avg: float
    d_at_mean: float


def _chain_deviances(chain: Chain, model) -> np.ndarray:
    return np.array([model.deviance_at(theta) for theta in chain.draws])


def dic(chain: Chain, model) -> DicResult:
    """Deviance information criterion of a fitted chain.

    d_avg averages the deviance over retained draws, d_at_mean is the
    deviance at the posterior mean, p_d = d_avg - d_at_mean is the
    effective parameter count, and dic = d_avg + p_d.  A chain of
    identical draws gives p_d = 0 and dic = d_at_mean exactly.
    """
    if chain.n_draws == 0:
        raise ValueError("chain has no retained draws")
    devs = _chain_deviances(chain, model)
    if np.all(devs == devs[0]):
        d_avg = float(devs[0])
    else:
        d_avg = float(np.mean(devs))
    d_at_mean = float(model.deviance_at(posterior_mean(chain)))
    p_d = d_avg - d_at_mean
    return DicResult(d_avg + p_d, p_d, d_avg, d_at_mean)


def bic(chain: Chain, model) -> float:
    """Bayesian information criterion: deviance at the posterior mean
    plus dim * log(n); dim counts every sampled parameter."""
    if chain.n_draws == 0:
        raise ValueError("chain has no retained draws")
    d_at_mean = float(model.deviance_at(posterior_mean(chain)))
    return d_at_mean + model.dim * float(np.log(model.n_obs))


def _proposal_log_density(delta, scales):
    # diagonal normal density of an offset `delta` under jump scales
    z = delta / scales
    return -0.5 * np.sum(z * z, axis=-1) - np.sum(np.log(scales)) - 0.5 * delta.shape[-1] * np.log(2.0 * np.pi)


def marginal_likelihood_mh(chain: Chain, model, n_proposal_draws: int | None = None, seed: int | None = None):
    """Marginal likelihood from a single-block random-walk chain.

    Estimates the posterior ordinate at the posterior mean theta* as

        pi_hat = mean_g[ alpha(theta_g, theta*) q(theta_g, theta*) ]
                 / mean_j[ alpha(theta*, theta_j) ],

    with alpha the acceptance probability under the chain's frozen
    proposal q and theta_j ~ q(theta*, .) fresh draws, and returns
    (log_ml, mc_se) where log_ml = log-lik + log-prior - log pi_hat at
    theta*.  The standard error combines batch-means variances of the
    two averages by the delta method.

    Parameters
    ----------
    chain : Chain
    model : object
        Must expose ``log_posterior_parts``; proper prior required.
    n_proposal_draws : int, optional
        Fresh draws J for the denominator; defaults to the chain length.
    seed : int, optional
        Stream seed for the fresh draws; defaults to the chain's seed.

    Raises
    ------
    ValueError
        Improper prior, empty chain, or nonpositive J.
    RuntimeError
        Degenerate (zero) numerator or denominator estimate.
    """
    if getattr(model, "has_improper_prior", False):
        raise ValueError("marginal likelihood undefined under improper prior")
    if chain.n_draws == 0:
        raise ValueError("chain has no retained draws")
    J = chain.n_draws if n_proposal_draws is None else int(n_proposal_draws)
    if J < 1:
        raise ValueError("n_proposal_draws must be positive")
    scales = np.asarray(chain.proposal_scales, dtype=float)
    if scales.shape != (chain.dim,) or np.any(scales <= 0.0):
        raise ValueError("chain carries no usable frozen proposal scales")

    theta_star = posterior_mean(chain)
    lp_star, ll_star = model.log_posterior_parts(theta_star)
    if not np.isfinite(lp_star):
        raise RuntimeError("posterior mean has non-finite posterior density")
    log_prior_star = lp_star - ll_star

    # numerator: acceptance-weighted proposal density over posterior draws
    delta_to_star = theta_star - chain.draws
    log_q = _proposal_log_density(delta_to_star, scales)
    log_alpha_num = np.minimum(0.0, lp_star - chain.log_post)
    num_terms = np.exp(log_alpha_num + log_q)
    num = float(np.mean(num_terms))

    # denominator: mean acceptance of fresh proposals away from theta*
    rng = np.random.Generator(
        np.random.Philox(key=np.array([chain.seed_used if seed is None else seed, _PROPOSAL_STREAM], dtype=np.uint64))
    )
    z = rng.standard_normal((J, chain.dim))
    proposals = theta_star + z * scales
    lp_props = np.array([model.log_posterior_parts(p)[0] for p in proposals])
    with np.errstate(invalid="ignore"):
        den_terms = np.exp(np.minimum(0.0, lp_props - lp_star))
    den_terms[lp_props == -np.inf] = 0.0
    den = float(np.mean(den_terms))
    if num <= 0.0 or den <= 0.0:
        raise RuntimeError("degenerate ordinate estimate (zero numerator or denominator)")

    log_ml = float(ll_star + log_prior_star - np.log(num) + np.log(den))
    var_num = long_run_variance(num_terms) / num_terms.shape[0]
    var_den = long_run_variance(den_terms) / den_terms.shape[0]
    mc_se = float(np.sqrt(var_num / num**2 + var_den / den**2))
    return log_ml, mc_se


def posterior_predictive_deviance(theta, model, holdout: Dataset | None) -> float:
    """Deviance of a holdout set at fixed parameters (usually the
    training posterior mean); 0.0 for an absent holdout."""
    if holdout is None:
        return 0.0
    return float(model.with_data(holdout).deviance_at(np.asarray(theta, dtype=float)))


def holdout_split(data: Dataset, fraction: float, seed: int):
    """Reproducible split into (train, holdout) with a holdout of
    round(fraction * n) rows; both parts must end up nonempty."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must lie in (0, 1)")
    n = data.n
    n_hold = int(np.round(fraction * n))
    if n_hold == 0 or n_hold == n:
        raise ValueError(
            f"fraction {fraction} leaves an empty part for n={n} (holdout would be {n_hold})"
        )
    rng = np.random.Generator(np.random.Philox(key=np.array([seed, _HOLDOUT_STREAM], dtype=np.uint64)))
    perm = rng.permutation(n)
    hold_rows = np.sort(perm[:n_hold])
    train_rows = np.sort(perm[n_hold:])
    return data.take(train_rows), data.take(hold_rows)


@dataclass(frozen=True)
class ComparisonReport:
    """All criteria for one fitted model, JSON-serializable.

    log_ml/log_ml_se are None when the marginal likelihood was not
    computed (improper prior); d_post is None without a holdout.
    """

    d_avg: float
    d_at_mean: float
    p_d: float
    dic: float
    bic: float
    log_ml: float | None
    log_ml_se: float | None
    d_post: float | None

    def to_dict(self) -> dict:
        return {
            "d_avg": self.d_avg,
            "d_at_mean": self.d_at_mean,
            "p_d": self.p_d,
            "dic": self.dic,
            "bic": self.bic,
            "log_ml": self.log_ml,
            "log_ml_se": self.log_ml_se,
            "d_post": self.d_post,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def evaluate_model(chain: Chain, model, holdout: Dataset | None = None, marginal: bool = True,
                   n_proposal_draws: int | None = None) -> ComparisonReport:
    """Bundle DIC, BIC, optional marginal likelihood, and optional
    holdout predictive deviance into one report."""
    d = dic(chain, model)
    b = bic(chain, model)
    log_ml = log_ml_se = None
    if marginal:
        log_ml, log_ml_se = marginal_likelihood_mh(chain, model, n_proposal_draws)
    d_post = None
    if holdout is not None:
        d_post = posterior_predictive_deviance(posterior_mean(chain), model, holdout)
    return ComparisonReport(
        d_avg=d.d_avg,
        d_at_mean=d.d_at_mean,
        p_d=d.p_d,
        dic=d.dic,
        bic=b,
        log_ml=log_ml,
        log_ml_se=log_ml_se,
        d_post=d_post,
    )
