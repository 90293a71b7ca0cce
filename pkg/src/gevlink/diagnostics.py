"""Data-overlap checking and binned observed-vs-fitted summaries.

Separation checking protects the flat-prior fits: when some direction
beta satisfies tau_i * x_i' beta >= 0 for every row (tau_i = 2y_i - 1)
with at least one strict inequality, the data are completely or
quasi-completely separated and an improper-prior posterior need not be
proper.  The check solves one linear program and returns the separating
direction as an explicit certificate so the verdict can be re-verified
by direct multiplication.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .links import Link, inv_link
from .model import BinaryRegressionModel, Dataset
from .sampler import Chain, posterior_mean

# Relative tolerances for reading the LP solution: a direction counts as
# separating when no constraint is violated beyond _FEAS_TOL and the
# objective clears _OPT_TOL, both scaled by the design magnitude.
_FEAS_TOL = 1e-9
_OPT_TOL = 1e-7


@dataclass(frozen=True)
class SeparationReport:
    """Outcome of the overlap check.

    separated is True iff certificate is a direction with
    X* @ certificate >= 0 componentwise and not identically zero.
    """

    x_star_rank: int
    separated: bool
    certificate: np.ndarray | None
    blocks_checked: str


def _certificate_separates(x_star: np.ndarray, direction: np.ndarray, scale: float) -> bool:
    v = x_star @ direction
    return bool(np.min(v) >= -_FEAS_TOL * scale and np.max(v) > _OPT_TOL * scale)


def separation_check(data: Dataset) -> SeparationReport:
    """Detect complete or quasi-complete separation in a binary design.

    Parameters
    ----------
    data : Dataset

    Returns
    -------
    SeparationReport

    Raises
    ------
    ValueError
        If the design is rank deficient (including n < k).
    """
    tau = 2.0 * data.y - 1.0
    x_star = tau[:, None] * data.X
    rank = int(np.linalg.matrix_rank(x_star))
    if rank < data.k:
        raise ValueError(
            f"design not identifiable: rank {rank} < {data.k} columns"
        )
    # Maximize 1'X* beta subject to X* beta >= 0 and box bounds; a
    # strictly positive optimum yields a separating direction, while a
    # zero optimum means beta = 0 is the only feasible point (X* has
    # full column rank, so X* beta = 0 forces beta = 0).
    scale = float(max(1.0, np.abs(x_star).max()))
    objective = -x_star.sum(axis=0)
    result = linprog(
        objective, A_ub=-x_star, b_ub=np.zeros(data.n), bounds=[(-1.0, 1.0)] * data.k,
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"separation feasibility solve failed: {result.message}")
    description = f"single feasibility program over all {data.n} rows"
    direction = np.asarray(result.x, dtype=float)
    if -result.fun > _OPT_TOL * scale and _certificate_separates(x_star, direction, scale):
        return SeparationReport(rank, True, direction, description)
    return SeparationReport(rank, False, None, description)


def binned_fit_table(chain: Chain, model: BinaryRegressionModel, column: str, bin_edges):
    """Observed and expected success counts per bin of one column.

    Expected counts use success probabilities at the posterior mean.
    Bins are right-open intervals between consecutive edges with
    open-ended outer bins, so every observation lands in exactly one
    bin; an empty edge list yields a single all-covering bin.

    Returns
    -------
    list of dict
        Rows with keys ``bin``, ``n_obs``, ``observed_ones``,
        ``expected_ones``.
    """
    if chain.dim != model.dim:
        raise ValueError(
            f"chain dimension {chain.dim} does not match model dimension {model.dim}"
        )
    data = model.data
    if column not in data.column_names:
        raise ValueError(f"unknown column {column!r}; have {data.column_names}")
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1:
        raise ValueError("bin_edges must be a 1-D sequence")
    if edges.size and not np.all(np.isfinite(edges)):
        raise ValueError("bin_edges must be finite")
    if np.any(np.diff(edges) <= 0):
        raise ValueError("bin_edges must be strictly increasing")

    beta, xi = model.split_params(posterior_mean(chain))
    link = Link(model.link, xi) if model.link == "gev" else Link(model.link)
    p_hat = inv_link(data.X @ beta, link)

    values = data.X[:, data.column_names.index(column)]
    which = np.searchsorted(edges, values, side="right")
    labels = [-np.inf, *edges.tolist(), np.inf]
    table = []
    for b in range(edges.size + 1):
        mask = which == b
        lo, hi = labels[b], labels[b + 1]
        table.append(
            {
                "bin": f"[{lo:g}, {hi:g})",
                "n_obs": int(mask.sum()),
                "observed_ones": int(data.y[mask].sum()),
                "expected_ones": float(p_hat[mask].sum()),
            }
        )
    return table
