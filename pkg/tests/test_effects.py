"""Tests for posterior-averaged covariate effects."""

import math

import numpy as np
import pytest
from scipy.special import expit

from gevlink.effects import CHANGE_KINDS, CovariateChange, average_covariate_effect
from gevlink.model import BinaryRegressionModel, ColumnTransform, Dataset
from gevlink.sampler import Chain


def make_chain(draws, names):
    draws = np.asarray(draws, dtype=float)
    m, d = draws.shape
    return Chain(
        draws=draws,
        log_post=np.zeros(m),
        log_lik=np.zeros(m),
        acceptance_rate=0.3,
        seed_used=0,
        chain_index=0,
        param_names=tuple(names),
        proposal_scales=np.ones(d),
    )


def dummy_model(dummy_values, link="logit"):
    dummy_values = np.asarray(dummy_values, dtype=float)
    n = dummy_values.shape[0]
    X = np.column_stack([np.ones(n), dummy_values])
    ds = Dataset(np.zeros(n), X, ("intercept", "d"), ("intercept", "dummy"))
    return BinaryRegressionModel(ds, link)


def continuous_model(values, standardization=None, names=("intercept", "x2"), link="logit"):
    values = np.asarray(values, dtype=float)
    X = np.column_stack([np.ones(values.shape[0]), values])
    ds = Dataset(
        np.zeros(values.shape[0]), X, names, ("intercept", "continuous"),
        standardization=standardization,
    )
    return BinaryRegressionModel(ds, link)


class TestValidation:
    def test_kinds_enumerated(self):
        assert CHANGE_KINDS == (
            "zero_to_one", "double_original", "add_original", "add_standardized",
        )

    def test_delta_required_only_for_additive_kinds(self):
        CovariateChange("x2", "add_original", delta=1.0)
        CovariateChange("d", "zero_to_one")
        with pytest.raises(ValueError, match="delta"):
            CovariateChange("x2", "add_original")
        with pytest.raises(ValueError, match="delta"):
            CovariateChange("d", "zero_to_one", delta=1.0)
        with pytest.raises(ValueError, match="unknown change kind"):
            CovariateChange("x2", "halve")

    def test_unknown_column_rejected(self):
        model = dummy_model([0.0, 1.0])
        chain = make_chain([[0.0, 0.5]], model.param_names)
        with pytest.raises(ValueError, match="unknown column"):
            average_covariate_effect(chain, model, CovariateChange("q", "zero_to_one"))

    def test_zero_to_one_requires_dummy(self):
        model = continuous_model([0.2, -0.4])
        chain = make_chain([[0.0, 0.5]], model.param_names)
        with pytest.raises(ValueError, match="dummy"):
            average_covariate_effect(chain, model, CovariateChange("x2", "zero_to_one"))

    def test_double_requires_log_metadata(self):
        model = continuous_model([0.2, -0.4])
        chain = make_chain([[0.0, 0.5]], model.param_names)
        with pytest.raises(ValueError, match="log-transformed"):
            average_covariate_effect(chain, model, CovariateChange("x2", "double_original"))

    def test_add_original_rejects_logged_column(self):
        std = {"x2": ColumnTransform(log_applied=True, center=0.0, scale=math.log(2.0))}
        model = continuous_model([0.2, -0.4], standardization=std)
        chain = make_chain([[0.0, 0.5]], model.param_names)
        with pytest.raises(ValueError, match="log-transformed"):
            average_covariate_effect(
                chain, model, CovariateChange("x2", "add_original", delta=1.0)
            )

    def test_thin_draws_positive(self):
        model = dummy_model([0.0, 1.0])
        chain = make_chain([[0.0, 0.5]], model.param_names)
        with pytest.raises(ValueError, match="thin_draws"):
            average_covariate_effect(
                chain, model, CovariateChange("d", "zero_to_one"), thin_draws=0
            )

    def test_chain_model_dim_mismatch(self):
        model = dummy_model([0.0, 1.0])
        chain = make_chain([[0.0, 0.5, 0.1]], ("a", "b", "c"))
        with pytest.raises(ValueError, match="dimension"):
            average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))


class TestZeroToOne:
    def test_single_draw_single_row_hand_case(self):
        model = dummy_model([0.0])
        chain = make_chain([[0.0, 1.0]], model.param_names)
        result = average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))
        assert result.estimate == pytest.approx(expit(1.0) - 0.5, rel=1e-14)
        assert result.mc_se == 0.0
        estimate, mc_se = result
        assert (estimate, mc_se) == (result.estimate, result.mc_se)

    def test_zero_coefficient_gives_exact_zero(self):
        model = dummy_model([0.0, 1.0, 1.0, 0.0])
        rng = np.random.default_rng(0)
        draws = np.column_stack([rng.normal(size=40), np.zeros(40)])
        chain = make_chain(draws, model.param_names)
        result = average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))
        assert result.estimate == 0.0
        assert result.mc_se == 0.0

    def test_invariant_to_observed_dummy_values(self):
        rng = np.random.default_rng(1)
        draws = rng.normal(size=(30, 2))
        results = []
        for values in ([0.0] * 6, [1.0] * 6, [0, 1, 1, 0, 1, 0]):
            model = dummy_model(values)
            chain = make_chain(draws, model.param_names)
            results.append(
                average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))
            )
        assert results[1].estimate == pytest.approx(results[0].estimate, abs=1e-12)
        assert results[2].estimate == pytest.approx(results[0].estimate, abs=1e-12)

    def test_positive_coefficient_positive_effect(self):
        for link in ("logit", "probit", "cloglog"):
            model = dummy_model([0.0, 1.0, 0.0], link=link)
            rng = np.random.default_rng(2)
            draws = np.column_stack([rng.normal(0, 0.5, 50), rng.uniform(0.2, 1.5, 50)])
            chain = make_chain(draws, model.param_names)
            result = average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))
            assert result.estimate > 0.0


class TestContinuousChanges:
    def test_add_standardized_hand_case(self):
        model = continuous_model([0.0])
        chain = make_chain([[0.0, 1.0]], model.param_names)
        result = average_covariate_effect(
            chain, model, CovariateChange("x2", "add_standardized", delta=1.0)
        )
        assert result.estimate == pytest.approx(expit(1.0) - 0.5, rel=1e-14)

    def test_add_original_maps_through_scale(self):
        std = {"x2": ColumnTransform(log_applied=False, center=3.0, scale=2.5)}
        model = continuous_model(np.linspace(-1, 1, 5), standardization=std)
        rng = np.random.default_rng(3)
        draws = rng.normal(size=(25, 2))
        chain = make_chain(draws, model.param_names)
        a = average_covariate_effect(
            chain, model, CovariateChange("x2", "add_original", delta=-10.0)
        )
        b = average_covariate_effect(
            chain, model, CovariateChange("x2", "add_standardized", delta=-4.0)
        )
        assert a.estimate == b.estimate

    def test_double_original_uses_log_scale(self):
        std = {"x2": ColumnTransform(log_applied=True, center=0.4, scale=math.log(2.0))}
        model = continuous_model(np.linspace(-1, 1, 5), standardization=std)
        rng = np.random.default_rng(4)
        draws = rng.normal(size=(25, 2))
        chain = make_chain(draws, model.param_names)
        a = average_covariate_effect(chain, model, CovariateChange("x2", "double_original"))
        b = average_covariate_effect(
            chain, model, CovariateChange("x2", "add_standardized", delta=1.0)
        )
        assert a.estimate == b.estimate

    def test_double_original_general_scale(self):
        scale = 0.8
        std = {"x2": ColumnTransform(log_applied=True, center=0.0, scale=scale)}
        model = continuous_model([0.1, -0.2], standardization=std)
        chain = make_chain([[0.0, 1.0]], model.param_names)
        result = average_covariate_effect(
            chain, model, CovariateChange("x2", "double_original")
        )
        reference = average_covariate_effect(
            chain, model,
            CovariateChange("x2", "add_standardized", delta=math.log(2.0) / scale),
        )
        assert result.estimate == reference.estimate


class TestProperties:
    def test_antisymmetry_under_swapped_designs(self):
        delta = 0.7
        rng = np.random.default_rng(5)
        values = rng.normal(size=8)
        draws = rng.normal(size=(40, 2))
        model_a = continuous_model(values)
        model_b = continuous_model(values + delta)
        chain_a = make_chain(draws, model_a.param_names)
        chain_b = make_chain(draws, model_b.param_names)
        fwd = average_covariate_effect(
            chain_a, model_a, CovariateChange("x2", "add_standardized", delta=delta)
        )
        back = average_covariate_effect(
            chain_b, model_b, CovariateChange("x2", "add_standardized", delta=-delta)
        )
        assert back.estimate == pytest.approx(-fwd.estimate, abs=1e-12)

    def test_bounded_by_one(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            link = ("logit", "probit", "cloglog")[int(rng.integers(3))]
            model = dummy_model(rng.integers(0, 2, size=5).astype(float), link=link)
            draws = rng.normal(0, 3, size=(15, 2))
            chain = make_chain(draws, model.param_names)
            result = average_covariate_effect(chain, model, CovariateChange("d", "zero_to_one"))
            assert abs(result.estimate) <= 1.0

    def test_monotone_in_shift_for_positive_slopes(self):
        rng = np.random.default_rng(7)
        model = continuous_model(rng.normal(size=10))
        draws = np.column_stack([rng.normal(0, 0.3, 30), rng.uniform(0.3, 1.0, 30)])
        chain = make_chain(draws, model.param_names)
        estimates = [
            average_covariate_effect(
                chain, model, CovariateChange("x2", "add_standardized", delta=d)
            ).estimate
            for d in (0.25, 0.5, 1.0, 2.0)
        ]
        assert all(b > a for a, b in zip(estimates, estimates[1:]))
        assert all(e > 0 for e in estimates)

    def test_thin_draws_subsamples(self):
        rng = np.random.default_rng(8)
        model = continuous_model(rng.normal(size=12))
        # even-indexed draws have slope 0, odd-indexed slope 1; thinning by
        # 2 keeps only the zero-slope draws, so the thinned ACE vanishes
        slopes = np.where(np.arange(200) % 2 == 0, 0.0, 1.0)
        draws = np.column_stack([np.zeros(200), slopes])
        chain = make_chain(draws, model.param_names)
        change = CovariateChange("x2", "add_standardized", delta=1.0)
        full = average_covariate_effect(chain, model, change)
        thin = average_covariate_effect(chain, model, change, thin_draws=2)
        assert thin.estimate == 0.0
        assert full.estimate > 0.05

    def test_mc_se_tracks_draw_dispersion(self):
        rng = np.random.default_rng(9)
        model = continuous_model(rng.normal(size=10))
        tight = np.column_stack([np.zeros(400), rng.normal(1.0, 0.01, 400)])
        wide = np.column_stack([np.zeros(400), rng.normal(1.0, 0.8, 400)])
        change = CovariateChange("x2", "add_standardized", delta=1.0)
        se_tight = average_covariate_effect(
            make_chain(tight, model.param_names), model, change
        ).mc_se
        se_wide = average_covariate_effect(
            make_chain(wide, model.param_names), model, change
        ).mc_se
        assert 0.0 < se_tight < se_wide
