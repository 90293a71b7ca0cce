"""Random-walk Metropolis-Hastings over the model parameters.

Single-block joint updates with a diagonal normal proposal.  A global
scale multiplier is tuned toward a target acceptance rate during burn-in
(Robbins-Monro on windowed acceptance) and frozen afterward, so the
retained draws come from a fixed kernel.  Chains are a pure function of
(model, config): chain c under seed s draws from a counter-based
generator keyed by (s, c).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TARGET_ACCEPTANCE = 0.234


@dataclass(frozen=True)
class McmcConfig:
    """Run-length, seeding, and proposal settings for `run_mh`.

    `proposal_scales` is either ``"auto"`` (per-parameter scales from the
    model's heuristic, with burn-in adaptation of a global multiplier)
    or an explicit vector of positive per-parameter scales used as-is.
    """

    n_iterations: int = 25000
    burn_in: int = 5000
    thin: int = 1
    seed: int = 0
    n_chains: int = 1
    proposal_scales: object = "auto"
    adapt_window: int = 50
    target_acceptance: float = TARGET_ACCEPTANCE

    def __post_init__(self) -> None:
        if self.n_iterations < 1:
            raise ValueError("n_iterations must be positive")
        if not 0 <= self.burn_in < self.n_iterations:
            raise ValueError("burn_in must be nonnegative and below n_iterations")
        if self.thin < 1:
            raise ValueError("thin must be positive")
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.n_chains < 1:
            raise ValueError("n_chains must be positive")
        if self.adapt_window < 1:
            raise ValueError("adapt_window must be positive")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError("target_acceptance must lie in (0, 1)")
        if isinstance(self.proposal_scales, str):
            if self.proposal_scales != "auto":
                raise ValueError('proposal_scales must be "auto" or a vector of positive reals')
        else:
            scales = tuple(float(s) for s in np.atleast_1d(self.proposal_scales))
            if len(scales) == 0 or any(not np.isfinite(s) or s <= 0.0 for s in scales):
                raise ValueError("explicit proposal scales must all be positive")
            object.__setattr__(self, "proposal_scales", scales)

    @property
    def n_retained(self) -> int:
        return (self.n_iterations - self.burn_in) // self.thin


@dataclass(frozen=True, eq=False)
class Chain:
    """Retained draws of one chain plus the frozen kernel metadata.

    draws has one row per retained iteration; log_post and log_lik are
    the unnormalized log posterior and the log likelihood at each row.
    proposal_scales records the post-burn-in (frozen) jump scales, which
    downstream marginal-likelihood estimation reuses.
    """

    draws: np.ndarray
    log_post: np.ndarray
    log_lik: np.ndarray
    acceptance_rate: float
    seed_used: int
    chain_index: int
    param_names: tuple
    proposal_scales: np.ndarray

    def __post_init__(self) -> None:
        for name in ("draws", "log_post", "log_lik", "proposal_scales"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "param_names", tuple(self.param_names))

    @property
    def n_draws(self) -> int:
        return self.draws.shape[0]

    @property
    def dim(self) -> int:
        return self.draws.shape[1]

    def column(self, column) -> np.ndarray:
        """A single parameter trace, selected by index or name."""
        return self.draws[:, self._column_index(column)]

    def _column_index(self, column) -> int:
        if isinstance(column, str):
            if column not in self.param_names:
                raise ValueError(f"unknown parameter {column!r}; have {self.param_names}")
            return self.param_names.index(column)
        idx = int(column)
        if not -self.dim <= idx < self.dim:
            raise ValueError(f"column {idx} out of range for dim {self.dim}")
        return idx


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, chain_index], dtype=np.uint64)))


def run_mh(model, config: McmcConfig | None = None):
    """Sample the model posterior; returns one Chain per configured chain.

    Parameters
    ----------
    model : object
        Anything exposing ``dim``, ``log_posterior_parts(theta)`` and
        (optionally) ``initial_params()``, ``default_proposal_scales()``
        and ``param_names``.
    config : McmcConfig, optional

    Returns
    -------
    list of Chain

    Raises
    ------
    RuntimeError
        When no finite-posterior starting point is available.
    ValueError
        When explicit proposal scales do not match the model dimension.
    """
    if config is None:
        config = McmcConfig()
    dim = model.dim
    auto = isinstance(config.proposal_scales, str)
    if auto:
        if hasattr(model, "default_proposal_scales"):
            base = np.asarray(model.default_proposal_scales(), dtype=float)
        else:
            base = np.full(dim, 0.5)
    else:
        base = np.asarray(config.proposal_scales, dtype=float)
    if base.shape != (dim,):
        raise ValueError(f"proposal scales have shape {base.shape}, expected ({dim},)")

    if hasattr(model, "initial_params"):
        theta0 = np.asarray(model.initial_params(), dtype=float)
    else:
        theta0 = np.zeros(dim)
    lp0, ll0 = model.log_posterior_parts(theta0)
    if not np.isfinite(lp0):
        raise RuntimeError("initialization failed: starting point has non-finite posterior")

    names = tuple(getattr(model, "param_names", tuple(f"p{i}" for i in range(dim))))
    chains = []
    for c in range(config.n_chains):
        chains.append(_run_single_chain(model, config, c, base, auto, theta0, lp0, ll0, names))
    return chains


def _run_single_chain(model, config, chain_index, base, auto, theta0, lp0, ll0, names):
    rng = _chain_rng(config.seed, chain_index)
    dim = theta0.shape[0]
    n_keep = config.n_retained
    draws = np.empty((n_keep, dim))
    log_post = np.empty(n_keep)
    log_lik = np.empty(n_keep)

    theta, lp, ll = theta0.copy(), lp0, ll0
    log_mult = 0.0
    window_sum = 0.0
    window_n = 0
    window_count = 0
    accepted_post = 0
    total_post = 0
    row = 0

    for t in range(config.n_iterations):
        scales = base * np.exp(log_mult) if auto else base
        z = rng.standard_normal(dim)
        u = rng.random()
        proposal = theta + scales * z
        lp_prop, ll_prop = model.log_posterior_parts(proposal)
        if lp_prop == -np.inf:
            alpha = 0.0
        else:
            delta = lp_prop - lp
            alpha = 1.0 if delta >= 0.0 else float(np.exp(delta))
        accepted = u < alpha
        if accepted:
            theta, lp, ll = proposal, lp_prop, ll_prop

        if auto and t < config.burn_in:
            window_sum += alpha
            window_n += 1
            if window_n == config.adapt_window:
                window_count += 1
                step = (window_sum / window_n - config.target_acceptance) / np.sqrt(window_count)
                log_mult = float(np.clip(log_mult + step, -15.0, 15.0))
                window_sum = 0.0
                window_n = 0

        if t >= config.burn_in:
            total_post += 1
            accepted_post += accepted
            if (t - config.burn_in) % config.thin == config.thin - 1:
                draws[row] = theta
                log_post[row] = lp
                log_lik[row] = ll
                row += 1

    frozen = base * np.exp(log_mult) if auto else base
    return Chain(
        draws=draws,
        log_post=log_post,
        log_lik=log_lik,
        acceptance_rate=accepted_post / total_post,
        seed_used=config.seed,
        chain_index=chain_index,
        param_names=names,
        proposal_scales=frozen,
    )


def posterior_mean(chain: Chain) -> np.ndarray:
    """Column means of the retained draws.

    Identical rows average to that row exactly (summation rounding would
    otherwise perturb the degenerate case by an ulp)."""
    if chain.n_draws == 0:
        raise ValueError("chain has no retained draws")
    if np.all(chain.draws == chain.draws[0]):
        return chain.draws[0].copy()
    return chain.draws.mean(axis=0)


def hpd_interval(chain_or_draws, column=None, credibility: float = 0.95):
    """Shortest interval of consecutive order statistics covering the
    requested posterior mass (empirical highest-density interval).

    Sorts the trace and scans every window of ceil(credibility * m)
    consecutive order statistics, returning the narrowest (leftmost on
    ties).

    Parameters
    ----------
    chain_or_draws : Chain or 1-D array
        With a Chain, `column` selects the trace by index or name.
    column : int or str, optional
    credibility : float
        Coverage level in (0, 1).

    Returns
    -------
    (float, float)
    """
    if not 0.0 < credibility < 1.0:
        raise ValueError("credibility must lie in (0, 1)")
    if isinstance(chain_or_draws, Chain):
        x = chain_or_draws.column(column if column is not None else 0)
    else:
        x = np.asarray(chain_or_draws, dtype=float)
        if x.ndim != 1:
            raise ValueError("draws must be a 1-D trace")
    m = x.shape[0]
    if m < 10:
        raise ValueError(f"need at least 10 draws for an hpd interval, got {m}")
    width = int(np.ceil(credibility * m))
    width = min(max(width, 1), m)
    s = np.sort(x)
    spans = s[width - 1 :] - s[: m - width + 1]
    left = int(np.argmin(spans))
    return float(s[left]), float(s[left + width - 1])


def effective_sample_size(x) -> float:
    """ESS from the initial positive sequence of paired autocorrelations.

    Pairs rho_{2t} + rho_{2t+1} are summed while positive; the chain
    length is divided by the resulting integrated autocorrelation time.
    Constant traces return 0.0.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    if m < 4:
        return 0.0
    centered = x - x.mean()
    if np.all(centered == 0.0):
        return 0.0
    nfft = 1 << int(np.ceil(np.log2(2 * m)))
    f = np.fft.rfft(centered, nfft)
    acov = np.fft.irfft(f * np.conj(f), nfft)[:m].real / m
    rho = acov / acov[0]
    tau = 0.0
    t = 0
    while 2 * t + 1 < m:
        pair = rho[2 * t] + rho[2 * t + 1]
        if pair <= 0.0:
            break
        tau += pair
        t += 1
    tau = max(2.0 * tau - 1.0, 1e-12)
    return float(m / tau)


def long_run_variance(x) -> float:
    """Batch-means estimate of the long-run variance (spectral density
    at frequency zero), used for Monte Carlo standard errors."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    b = max(int(np.sqrt(m)), 1)
    nb = m // b
    if nb < 2:
        return float(np.var(x, ddof=1)) if m > 1 else 0.0
    means = x[: nb * b].reshape(nb, b).mean(axis=1)
    return float(b * np.var(means, ddof=1))


def geweke_z(x, first: float = 0.1, last: float = 0.5) -> float:
    """Geweke convergence score comparing early and late segment means.

    Uses the first `first` fraction against the last `last` fraction,
    with batch-means long-run variances.  NaN for traces too short or
    too degenerate to score.
    """
    x = np.asarray(x, dtype=float)
    m = x.shape[0]
    n_a = int(first * m)
    n_b = int(last * m)
    if n_a < 2 or n_b < 2:
        return float("nan")
    a = x[:n_a]
    b = x[m - n_b :]
    var_a = long_run_variance(a)
    var_b = long_run_variance(b)
    denom = var_a / n_a + var_b / n_b
    if denom <= 0.0:
        return float("nan")
    return float((a.mean() - b.mean()) / np.sqrt(denom))


def chain_diagnostics(chain: Chain) -> dict:
    """Per-parameter Geweke z and ESS plus the block acceptance rate.

    Constant parameter traces are flagged degenerate and carry NaN z and
    zero ESS.
    """
    dim = chain.dim
    z = np.empty(dim)
    ess = np.empty(dim)
    degenerate = np.zeros(dim, dtype=bool)
    for j in range(dim):
        trace = chain.draws[:, j]
        if np.all(trace == trace[0]):
            degenerate[j] = True
            z[j] = np.nan
            ess[j] = 0.0
        else:
            z[j] = geweke_z(trace)
            ess[j] = effective_sample_size(trace)
    return {
        "geweke_z": z,
        "ess": ess,
        "degenerate": degenerate,
        "acceptance_rate": chain.acceptance_rate,
    }


def chain_to_csv(chain: Chain, path) -> None:
    """Write retained draws to CSV: one row per draw, headered columns."""
    header = ",".join(list(chain.param_names) + ["log_post", "log_lik"])
    body = np.column_stack([chain.draws, chain.log_post, chain.log_lik])
    np.savetxt(path, body, delimiter=",", header=header, comments="", fmt="%.17g")
