"""Reproducible synthetic binary-regression datasets.

The covariate generator produces a fixed five-column design: intercept,
one standardized continuous covariate, two dummies coding a three-level
nominal factor, and one Bernoulli(0.5) dummy.  The presets pair that
design with known coefficient vectors under the cloglog and probit
links, which makes them useful as ground truth for sampler and
model-comparison checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .links import CLOGLOG, PROBIT, Link, inv_link
from .model import ColumnTransform, Dataset

# Philox stream tags; sampler chains use small tags and the comparison
# helpers use the 1<<32 block, so these cannot collide with either.
_COVARIATE_STREAM = 1 << 33
_RESPONSE_STREAM = (1 << 33) + 1

# Three-level nominal factor: reference category 0.25, each coded
# category 0.375.  Calibrated so the presets produce roughly 70% ones.
_CATEGORY_CUTS = (0.25, 0.625)

COLUMN_NAMES = ("intercept", "x2", "x3", "x4", "x5")
COLUMN_KINDS = ("intercept", "continuous", "dummy", "dummy", "dummy")

# x2 is recorded as a standardized log2-scale measurement: doubling the
# raw covariate moves the design column by exactly one unit.
_X2_TRANSFORM = ColumnTransform(log_applied=True, center=0.0, scale=math.log(2.0))


class CovariateDesign(NamedTuple):
    """A design matrix with its column metadata, without responses."""

    X: np.ndarray
    column_names: tuple
    column_kinds: tuple
    standardization: dict


@dataclass(frozen=True)
class Preset:
    """A named simulation scenario: link plus true coefficients."""

    name: str
    link: Link
    beta: tuple


PRESETS = {
    "sim1-cloglog": Preset("sim1-cloglog", CLOGLOG, (0.0, 1.0, 1.0, 0.5, -0.5)),
    "sim2-probit": Preset("sim2-probit", PROBIT, (0.0, 1.0, 1.0, 1.25, -0.25)),
}


def _stream_rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, tag], dtype=np.uint64)))


def simulate_covariates(n: int, seed: int = 0) -> CovariateDesign:
    """Draw the five-column synthetic design.

    Parameters
    ----------
    n : int
        Number of rows; must be positive.
    seed : int, optional
        Stream seed; the same seed always reproduces the same design.

    Returns
    -------
    CovariateDesign
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    rng = _stream_rng(seed, _COVARIATE_STREAM)
    x2 = rng.standard_normal(n)
    category = np.searchsorted(_CATEGORY_CUTS, rng.random(n))
    x3 = (category == 1).astype(float)
    x4 = (category == 2).astype(float)
    x5 = (rng.random(n) < 0.5).astype(float)
    X = np.column_stack([np.ones(n), x2, x3, x4, x5])
    return CovariateDesign(X, COLUMN_NAMES, COLUMN_KINDS, {"x2": _X2_TRANSFORM})


def simulate_binary(X: np.ndarray, beta, link: Link, seed: int = 0) -> np.ndarray:
    """Draw Bernoulli responses with success probability inv_link(X beta).

    Deterministic under ``seed``; the response stream is independent of
    the covariate stream, so the same seed can drive both.
    """
    X = np.asarray(X, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if X.ndim != 2 or beta.shape != (X.shape[1],):
        raise ValueError(f"beta has shape {beta.shape}, expected ({X.shape[1]},)")
    p = inv_link(X @ beta, link)
    rng = _stream_rng(seed, _RESPONSE_STREAM)
    return (rng.random(X.shape[0]) < p).astype(float)


def preset_dataset(name: str, n: int, seed: int = 0) -> Dataset:
    """Generate a full dataset from a named scenario.

    Parameters
    ----------
    name : str
        One of ``PRESETS``.
    n : int
        Number of rows.
    seed : int, optional
        Drives both the covariate and response streams.

    Returns
    -------
    Dataset
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; expected one of {tuple(PRESETS)}")
    preset = PRESETS[name]
    design = simulate_covariates(n, seed)
    y = simulate_binary(design.X, preset.beta, preset.link, seed)
    return Dataset(
        y, design.X, design.column_names, design.column_kinds,
        standardization=design.standardization,
    )
