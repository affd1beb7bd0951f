import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from dcclab import DccGarch, DynamicCorrelation, GarchStandardizer, fit_dcc, fit_garch
from dcclab.estimators import fit_thread_count

from conftest import assert_valid_correlation_path


def test_get_params_round_trip():
    est = GarchStandardizer(tol_f=1e-6, max_iter=900)
    params = est.get_params()
    assert params["tol_f"] == 1e-6
    assert params["max_iter"] == 900
    cloned = clone(est)
    assert cloned.get_params() == params


def test_set_params():
    est = DynamicCorrelation().set_params(mode="scalar")
    assert est.mode == "scalar"


def test_transform_before_fit_raises():
    with pytest.raises(NotFittedError):
        GarchStandardizer().transform(np.ones((60, 2)))


def test_standardizer_matches_functional_api(small_panel):
    X = small_panel.returns
    est = GarchStandardizer().fit(X)
    eps = est.transform(X)
    for i in range(X.shape[1]):
        fit = fit_garch(X[:, i])
        assert est.fits_[i].params == fit.params
        np.testing.assert_allclose(
            eps[:, i], (X[:, i] - fit.mean) / np.sqrt(fit.variance_path), rtol=1e-12
        )
    assert np.all((0.8 < np.var(eps, axis=0)) & (np.var(eps, axis=0) < 1.2))


def test_standardizer_rejects_width_change(small_panel):
    est = GarchStandardizer().fit(small_panel.returns)
    with pytest.raises(ValueError):
        est.transform(small_panel.returns[:, :2])


def test_dynamic_correlation_attributes(small_panel):
    eps = GarchStandardizer().fit_transform(small_panel.returns)
    est = DynamicCorrelation().fit(eps)
    assert est.alphas_.shape == (4,)
    assert 0.0 <= est.beta_ < 1.0
    assert est.q_bar_.shape == (4, 4)
    assert len(est.correlation_path_) == eps.shape[0]
    assert est.intercept_min_eigenvalue() >= -1e-10
    assert_valid_correlation_path(est.correlation_path_)
    # score is the average per-observation likelihood of the fitted params
    assert est.score(eps) == pytest.approx(est.log_likelihood_ / eps.shape[0], rel=1e-12)


def test_two_step_estimator_composes_the_stages(small_panel):
    X = small_panel.returns
    model = DccGarch(mode="generalized").fit(X)
    eps = model.standardizer_.transform(X)
    direct = fit_dcc(eps, mode="generalized")
    np.testing.assert_allclose(model.alphas_, direct.params.alphas, atol=1e-12)
    assert model.beta_ == pytest.approx(direct.params.beta, abs=1e-12)
    assert_valid_correlation_path(model.correlation_path_)


def test_pipeline_compatibility(small_panel):
    pipe = Pipeline([
        ("volatility", GarchStandardizer()),
        ("correlation", DynamicCorrelation(mode="scalar")),
    ])
    pipe.fit(small_panel.returns)
    corr = pipe.named_steps["correlation"]
    assert np.all(corr.alphas_ == corr.alphas_[0])


def test_pairwise_accessor(small_panel):
    model = DccGarch().fit(small_panel.returns)
    series = model.pairwise(0, 3)
    assert series.shape == (small_panel.returns.shape[0],)
    np.testing.assert_array_equal(series, model.pairwise(3, 0))


def test_path_relabelling(small_panel):
    model = DccGarch().fit(small_panel.returns)
    labelled = model.path(dates=small_panel.dates, assets=small_panel.assets)
    np.testing.assert_array_equal(labelled.matrices, model.correlation_path_.matrices)
    assert labelled.assets == small_panel.assets
    np.testing.assert_array_equal(
        labelled.pair("asset_1", "asset_2"), model.pairwise(0, 1)
    )


def test_thread_count_env(monkeypatch):
    monkeypatch.delenv("DCC_LAB_THREADS", raising=False)
    assert fit_thread_count() == 1
    monkeypatch.setenv("DCC_LAB_THREADS", "4")
    assert fit_thread_count() == 4
    monkeypatch.setenv("DCC_LAB_THREADS", "junk")
    assert fit_thread_count() == 1
    monkeypatch.setenv("DCC_LAB_THREADS", "-2")
    assert fit_thread_count() == 1


def test_threaded_fit_matches_serial(small_panel, monkeypatch):
    X = small_panel.returns
    monkeypatch.setenv("DCC_LAB_THREADS", "1")
    serial = GarchStandardizer().fit(X)
    monkeypatch.setenv("DCC_LAB_THREADS", "3")
    threaded = GarchStandardizer().fit(X)
    for a, b in zip(serial.fits_, threaded.fits_):
        assert a.params == b.params
