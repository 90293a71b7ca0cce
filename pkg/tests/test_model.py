"""Tests for the dataset container, priors, and posterior evaluations.

Likelihood oracles are brute-force per-observation products computed
inline with math-module closed forms; the Jeffreys weights are checked
against both a substitution spot value and the generic Bernoulli Fisher
information identity.
"""

import math

import numpy as np
import pytest

from gevlink.links import dinv_link_deta, gev_link, inv_link
from gevlink.model import (
    BinaryRegressionModel,
    ColumnTransform,
    Dataset,
    FlatBetaUniformXiPrior,
    JeffreysPrior,
    NormalPrior,
    jeffreys_weights,
)


def make_dataset(n=20, k=3, seed=0, y=None):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.normal(size=(n, k - 1))])
    if y is None:
        y = rng.integers(0, 2, size=n).astype(float)
    names = tuple(["intercept"] + [f"x{j}" for j in range(2, k + 1)])
    kinds = tuple(["intercept"] + ["continuous"] * (k - 1))
    return Dataset(y, X, names, kinds)


class TestDataset:
    def test_basic_properties(self):
        ds = make_dataset(12, 3)
        assert ds.n == 12
        assert ds.k == 3
        assert ds.column_kinds[0] == "intercept"

    def test_rejects_nan(self):
        X = np.array([[1.0, np.nan], [1.0, 2.0]])
        with pytest.raises(ValueError, match="NaN or infinite"):
            Dataset(np.array([0.0, 1.0]), X, ("intercept", "x2"), ("intercept", "continuous"))

    def test_rejects_nonbinary_response(self):
        X = np.ones((3, 1))
        with pytest.raises(ValueError, match="must all be 0 or 1"):
            Dataset(np.array([0.0, 0.5, 1.0]), X, ("intercept",), ("intercept",))

    def test_rejects_empty(self):
        with pytest.raises(ValueError, match="at least one row"):
            Dataset(np.empty(0), np.empty((0, 1)), ("intercept",), ("intercept",))

    def test_rejects_bad_intercept(self):
        X = np.array([[1.0, 0.5], [2.0, 0.1]])
        with pytest.raises(ValueError, match="all ones"):
            Dataset(np.array([0.0, 1.0]), X, ("intercept", "x2"), ("intercept", "continuous"))

    def test_rejects_duplicate_names(self):
        X = np.ones((2, 2))
        X[:, 1] = [0.1, 0.2]
        with pytest.raises(ValueError, match="unique labels"):
            Dataset(np.array([0.0, 1.0]), X, ("a", "a"), ("intercept", "continuous"))

    def test_standardization_must_reference_continuous(self):
        ds_args = dict(
            y=np.array([0.0, 1.0]),
            X=np.array([[1.0, 0.3], [1.0, -0.4]]),
            column_names=("intercept", "x2"),
            column_kinds=("intercept", "continuous"),
        )
        tf = ColumnTransform(False, 0.0, 1.0)
        Dataset(**ds_args, standardization={"x2": tf})
        with pytest.raises(ValueError, match="unknown column"):
            Dataset(**ds_args, standardization={"zz": tf})
        with pytest.raises(ValueError, match="only applies to continuous"):
            Dataset(**ds_args, standardization={"intercept": tf})

    def test_transform_rejects_bad_scale(self):
        with pytest.raises(ValueError, match="scale must be positive"):
            ColumnTransform(True, 0.0, 0.0)

    def test_take_preserves_metadata(self):
        ds = make_dataset(10, 3)
        sub = ds.take([1, 3, 5])
        assert sub.n == 3
        assert sub.column_names == ds.column_names
        np.testing.assert_array_equal(sub.X, ds.X[[1, 3, 5]])

    def test_arrays_are_read_only(self):
        ds = make_dataset(5, 2)
        with pytest.raises(ValueError):
            ds.X[0, 0] = 7.0


class TestPriorValidation:
    def test_normal_rejects_nonpositive_variance(self):
        with pytest.raises(ValueError, match="finite and positive"):
            NormalPrior(beta_variances=0.0)
        with pytest.raises(ValueError, match="finite and positive"):
            NormalPrior(xi_variance=-1.0)

    def test_normal_variance_length_checked_at_model(self):
        ds = make_dataset(10, 3)
        with pytest.raises(ValueError, match="length 2, expected 3"):
            BinaryRegressionModel(ds, "logit", NormalPrior(beta_variances=(1.0, 2.0)))

    def test_jeffreys_requires_gev(self):
        ds = make_dataset(10, 2)
        with pytest.raises(ValueError, match="only for the gev link"):
            BinaryRegressionModel(ds, "logit", JeffreysPrior())

    def test_uniform_bounds_ordered(self):
        with pytest.raises(ValueError, match="below xi_high"):
            FlatBetaUniformXiPrior(1.0, -1.0)


class TestLogLikelihood:
    def test_single_observation_logit(self):
        ds = Dataset(np.array([1.0]), np.array([[1.0]]), ("intercept",), ("intercept",))
        m = BinaryRegressionModel(ds, "logit")
        assert m.log_likelihood(np.array([0.0])) == pytest.approx(math.log(0.5), rel=1e-14)
        assert m.deviance(np.array([0.0])) == pytest.approx(1.3862943611198906, rel=1e-12)

    def test_degenerate_agreement_contributes_zero(self):
        # xi=0.5 edge at eta=2: row one sits past it with y=1, row two interior
        X = np.array([[1.0, 1.0], [1.0, -1.0]])
        ds = Dataset(np.array([1.0, 0.0]), X, ("intercept", "x2"), ("intercept", "continuous"))
        m = BinaryRegressionModel(ds, "gev")
        beta = np.array([1.5, 1.0])  # eta = (2.5, 0.5)
        p2 = inv_link(0.5, gev_link(0.5))
        assert inv_link(2.5, gev_link(0.5)) == 1.0
        assert m.log_likelihood(beta, 0.5) == pytest.approx(math.log(1.0 - p2), rel=1e-13)

    def test_degenerate_disagreement_is_neg_inf(self):
        X = np.array([[1.0, 1.0], [1.0, -1.0]])
        ds = Dataset(np.array([0.0, 0.0]), X, ("intercept", "x2"), ("intercept", "continuous"))
        m = BinaryRegressionModel(ds, "gev")
        assert m.log_likelihood(np.array([1.5, 1.0]), 0.5) == -np.inf
        assert m.deviance(np.array([1.5, 1.0]), 0.5) == np.inf

    def test_matches_brute_force_product(self):
        rng = np.random.default_rng(4)
        for link, xi in [("logit", None), ("probit", None), ("cloglog", None), ("gev", -0.3), ("gev", 0.4)]:
            ds = make_dataset(20, 3, seed=rng.integers(1 << 30))
            m = BinaryRegressionModel(ds, link)
            beta = rng.normal(scale=0.5, size=3)
            expected = 0.0
            for i in range(20):
                eta = float(ds.X[i] @ beta)
                if link == "logit":
                    p = 1.0 / (1.0 + math.exp(-eta))
                elif link == "probit":
                    p = 0.5 * (1.0 + math.erf(eta / math.sqrt(2.0)))
                elif link == "cloglog":
                    p = 1.0 - math.exp(-math.exp(eta))
                else:
                    t = 1.0 - xi * eta
                    p = 1.0 - math.exp(-(t ** (-1.0 / xi))) if t > 0 else (1.0 if xi > 0 else 0.0)
                # mirror the degeneracy-then-clamp contract
                if (p == 1.0 and ds.y[i] == 0.0) or (p == 0.0 and ds.y[i] == 1.0):
                    expected = -math.inf
                    break
                if p in (0.0, 1.0):
                    continue  # exact agreement adds log 1 = 0
                p = min(max(p, 1e-15), 1.0 - 1e-15)
                expected += math.log(p) if ds.y[i] == 1.0 else math.log(1.0 - p)
            got = m.log_likelihood(beta, xi)
            if math.isinf(expected):
                assert got == -np.inf
            else:
                assert got == pytest.approx(expected, rel=1e-12)

    def test_row_permutation_invariance(self):
        ds = make_dataset(40, 3, seed=8)
        m = BinaryRegressionModel(ds, "cloglog")
        beta = np.array([0.2, -0.5, 0.7])
        perm = np.random.default_rng(1).permutation(40)
        m2 = BinaryRegressionModel(ds.take(perm), "cloglog")
        assert m2.log_likelihood(beta) == pytest.approx(m.log_likelihood(beta), rel=1e-12)

    def test_symmetric_link_flip(self):
        ds = make_dataset(30, 3, seed=9)
        flipped = Dataset(1.0 - ds.y, ds.X, ds.column_names, ds.column_kinds)
        beta = np.array([0.4, -0.2, 0.9])
        for link in ("logit", "probit"):
            a = BinaryRegressionModel(ds, link).log_likelihood(beta)
            b = BinaryRegressionModel(flipped, link).log_likelihood(-beta)
            assert b == pytest.approx(a, rel=1e-10)

    def test_dimension_mismatch(self):
        m = BinaryRegressionModel(make_dataset(10, 3), "logit")
        with pytest.raises(ValueError, match="beta has shape"):
            m.log_likelihood(np.zeros(2))
        with pytest.raises(ValueError, match="takes no shape"):
            m.log_likelihood(np.zeros(3), 0.2)
        mg = BinaryRegressionModel(make_dataset(10, 3), "gev")
        with pytest.raises(ValueError, match="requires a shape"):
            mg.log_likelihood(np.zeros(3))


class TestLogPrior:
    def test_normal_at_zero(self):
        ds = make_dataset(10, 2)
        m = BinaryRegressionModel(ds, "gev", NormalPrior(1e4, 1e4))
        expected = -(2 + 1) / 2.0 * math.log(2.0 * math.pi * 1e4)
        assert m.log_prior(np.zeros(2), 0.0) == pytest.approx(expected, rel=1e-13)
        # fixed-shape links drop the xi term
        m2 = BinaryRegressionModel(ds, "logit", NormalPrior(1e4))
        assert m2.log_prior(np.zeros(2)) == pytest.approx(
            -2 / 2.0 * math.log(2.0 * math.pi * 1e4), rel=1e-13
        )

    def test_flat_uniform_xi(self):
        ds = make_dataset(10, 2)
        m = BinaryRegressionModel(ds, "gev", FlatBetaUniformXiPrior())
        assert m.log_prior(np.array([3.0, -8.0]), 0.3) == pytest.approx(math.log(0.5))
        assert m.log_prior(np.zeros(2), 1.0) == -np.inf
        assert m.log_prior(np.zeros(2), -1.0) == pytest.approx(math.log(0.5))
        assert m.log_prior(np.zeros(2), -1.001) == -np.inf

    def test_jeffreys_weight_spot_value(self):
        # omega at eta=0, xi=0.5: 1^{-6} / (e - 1)
        w = jeffreys_weights(np.array([0.0]), 0.5)
        assert w[0] == pytest.approx(1.0 / (math.e - 1.0), rel=1e-13)
        assert w[0] == pytest.approx(0.5819767068693265, rel=1e-12)

    def test_jeffreys_matches_fisher_information_identity(self):
        # omega == (dp/deta)^2 / (p(1-p)) for the gev link
        for xi in (-0.5, -0.2, 0.3, 0.7, 0.0):
            if xi > 0:
                eta = np.linspace(-2.0, 0.9 / xi, 40)
            elif xi < 0:
                eta = np.linspace(0.9 / xi, 2.0, 40)
            else:
                eta = np.linspace(-2.0, 2.0, 40)
            w = jeffreys_weights(eta, xi)
            link = gev_link(xi)
            p = inv_link(eta, link)
            d = dinv_link_deta(eta, link)
            # keep rows where p is comfortably interior: the reference
            # ratio only carries about -log10(1-p) fewer digits than the
            # 1e-8 comparison needs once p saturates toward 1
            ok = (p > 1e-8) & (p < 1.0 - 1e-8)
            assert np.count_nonzero(ok) > 30
            fisher = d[ok] ** 2 / (p[ok] * (1.0 - p[ok]))
            np.testing.assert_allclose(w[ok], fisher, rtol=1e-8)

    def test_jeffreys_log_prior_spot(self):
        ds = Dataset(np.array([1.0]), np.array([[1.0]]), ("intercept",), ("intercept",))
        m = BinaryRegressionModel(ds, "gev", JeffreysPrior(1e4))
        expected = 0.5 * math.log(1.0 / (math.e - 1.0)) + (
            -0.5 * (math.log(2.0 * math.pi * 1e4) + 0.25 / 1e4)
        )
        assert m.log_prior(np.array([0.0]), 0.5) == pytest.approx(expected, rel=1e-12)

    def test_jeffreys_outside_support(self):
        ds = make_dataset(10, 2, seed=3)
        m = BinaryRegressionModel(ds, "gev", JeffreysPrior())
        # pick beta so some 1 - xi*eta <= 0
        assert m.log_prior(np.array([10.0, 0.0]), 0.5) == -np.inf

    def test_jeffreys_singular_design(self):
        X = np.column_stack([np.ones(6), np.full(6, 1.0)])
        ds = Dataset(
            np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]),
            X,
            ("intercept", "x2"),
            ("intercept", "continuous"),
        )
        m = BinaryRegressionModel(ds, "gev", JeffreysPrior())
        assert m.log_prior(np.zeros(2), 0.1) == -np.inf


class TestLogPosterior:
    def test_sum_of_parts(self):
        ds = make_dataset(25, 3, seed=6)
        m = BinaryRegressionModel(ds, "gev")
        beta = np.array([0.1, 0.4, -0.3])
        expected = m.log_likelihood(beta, -0.2) + m.log_prior(beta, -0.2)
        assert m.log_posterior(beta, -0.2) == pytest.approx(expected, rel=1e-13)

    def test_neg_inf_propagates(self):
        ds = make_dataset(25, 3, seed=6)
        m = BinaryRegressionModel(ds, "gev", FlatBetaUniformXiPrior())
        assert m.log_posterior(np.zeros(3), 1.5) == -np.inf

    def test_packed_interface(self):
        ds = make_dataset(25, 3, seed=6)
        m = BinaryRegressionModel(ds, "gev")
        theta = np.array([0.1, 0.4, -0.3, -0.2])
        lp, ll = m.log_posterior_parts(theta)
        assert lp == pytest.approx(m.log_posterior(theta[:3], -0.2), rel=1e-13)
        assert ll == pytest.approx(m.log_likelihood(theta[:3], -0.2), rel=1e-13)
        assert m.deviance_at(theta) == pytest.approx(-2.0 * ll, rel=1e-13)
        bad = BinaryRegressionModel(ds, "gev", FlatBetaUniformXiPrior())
        lp_bad, ll_bad = bad.log_posterior_parts(np.array([0.0, 0.0, 0.0, 1.5]))
        assert lp_bad == -np.inf
        assert np.isnan(ll_bad)

    def test_gradient_matches_finite_differences(self):
        # analytic score: X'[(y - p) g / (p(1-p))] - beta/var, checked
        # against central differences of the implementation
        for link, xi in [("logit", None), ("gev", -0.3)]:
            ds = make_dataset(30, 3, seed=13)
            m = BinaryRegressionModel(ds, link, NormalPrior(4.0, 1.0))
            beta = np.array([0.3, -0.4, 0.2])
            lnk = gev_link(xi) if link == "gev" else __import__("gevlink.links", fromlist=["LOGIT"]).LOGIT
            eta = ds.X @ beta
            p = inv_link(eta, lnk)
            g = dinv_link_deta(eta, lnk)
            analytic = ds.X.T @ ((ds.y - p) * g / (p * (1.0 - p))) - beta / 4.0
            h = 1e-6
            for j in range(3):
                e = np.zeros(3)
                e[j] = h
                fd = (m.log_posterior(beta + e, xi) - m.log_posterior(beta - e, xi)) / (2.0 * h)
                assert fd == pytest.approx(analytic[j], rel=1e-5)


class TestModelShape:
    def test_dimensions_and_names(self):
        ds = make_dataset(10, 3)
        m = BinaryRegressionModel(ds, "gev")
        assert m.dim == 4
        assert m.param_names == ds.column_names + ("xi",)
        m2 = BinaryRegressionModel(ds, "probit")
        assert m2.dim == 3
        assert m2.param_names == ds.column_names

    def test_split_params(self):
        ds = make_dataset(10, 3)
        m = BinaryRegressionModel(ds, "gev")
        beta, xi = m.split_params(np.array([1.0, 2.0, 3.0, -0.2]))
        np.testing.assert_array_equal(beta, [1.0, 2.0, 3.0])
        assert xi == -0.2
        with pytest.raises(ValueError, match="theta has shape"):
            m.split_params(np.zeros(3))

    def test_initial_params_has_finite_posterior(self):
        rng = np.random.default_rng(17)
        X = np.column_stack([np.ones(200), rng.normal(size=200)])
        eta = 0.5 + 1.2 * X[:, 1]
        y = (rng.random(200) < inv_link(eta, gev_link(-0.2))).astype(float)
        ds = Dataset(y, X, ("intercept", "x2"), ("intercept", "continuous"))
        for link in ("logit", "gev"):
            for prior in (NormalPrior(), FlatBetaUniformXiPrior(), JeffreysPrior() if link == "gev" else NormalPrior()):
                m = BinaryRegressionModel(ds, link, prior)
                theta = m.initial_params()
                assert theta.shape == (m.dim,)
                assert np.isfinite(m.log_posterior_parts(theta)[0])

    def test_default_proposal_scales_positive(self):
        ds = make_dataset(50, 3, seed=2)
        m = BinaryRegressionModel(ds, "gev")
        s = m.default_proposal_scales()
        assert s.shape == (4,)
        assert np.all(s > 0)

    def test_with_data_swaps_rows(self):
        ds = make_dataset(30, 3, seed=5)
        m = BinaryRegressionModel(ds, "cloglog")
        m2 = m.with_data(ds.take(range(10)))
        assert m2.n_obs == 10
        assert m2.link == "cloglog"

    def test_improper_prior_flag(self):
        ds = make_dataset(10, 2)
        assert BinaryRegressionModel(ds, "gev", FlatBetaUniformXiPrior()).has_improper_prior
        assert not BinaryRegressionModel(ds, "gev").has_improper_prior
