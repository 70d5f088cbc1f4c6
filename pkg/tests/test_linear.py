import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_frame
from ghiforecast.errors import FeatureMismatch, InsufficientRows, RankDeficientWarning
from ghiforecast.models import LinearModel, fit_linear, load_model, predict_linear, save_model
from ghiforecast.preprocess import Frame
from oracles import normal_equations


def _frame(X, y, names=None):
    X = np.asarray(X, dtype=float)
    keys = np.datetime64("2019-05-01T07:00") + np.arange(X.shape[0]).astype("timedelta64[m]")
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))
    return Frame(tuple(names), X, np.asarray(y, dtype=float), keys)


def test_exact_recovery(rng):
    X = rng.normal(size=(40, 2))
    m = fit_linear(_frame(X, 2 * X[:, 0] - 3 * X[:, 1] + 5))
    assert m.weights == pytest.approx([2, -3], abs=1e-8)
    assert m.bias == pytest.approx(5, abs=1e-8)


def test_constant_target(rng):
    m = fit_linear(_frame(rng.normal(size=(20, 3)), np.full(20, 4.5)))
    assert np.allclose(m.weights, 0, atol=1e-12)
    assert m.bias == pytest.approx(4.5)


def test_matches_normal_equations(rng):
    for _ in range(20):
        f = random_frame(rng, 50, 4)
        m = fit_linear(f)
        w, b = normal_equations(f.X, f.y)
        assert np.allclose(m.weights, w, rtol=1e-6, atol=0)
        assert m.bias == pytest.approx(b, rel=1e-6)


# scales stay well above the <= -9000 missing-value range that Frame rejects
@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(12, 120), p=st.integers(1, 6), scale=st.sampled_from([1e-3, 1.0, 1e2]))
def test_residuals_orthogonal(seed, n, p, scale):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, p)) * scale + rng.normal(size=p) * scale
    y = X @ rng.normal(size=p) + rng.normal(size=n) * scale
    m = fit_linear(_frame(X, y))
    r = y - predict_linear(m, X)
    tol = 1e-6 * np.abs(y).max() * max(1.0, np.abs(X).max()) * n
    assert abs(r.sum()) <= tol
    assert np.all(np.abs(X.T @ r) <= tol)


def test_predict_examples():
    m = LinearModel(np.array([1.0]), 0.0, ("x",))
    assert predict_linear(m, np.array([[7.0]])).tolist() == [7.0]
    m = LinearModel(np.array([2.0, -1.0]), 3.0)
    assert predict_linear(m, np.zeros((1, 2))).tolist() == [3.0]


def test_batch_equals_loop(rng):
    f = random_frame(rng, 30, 3)
    m = fit_linear(f)
    batch = predict_linear(m, f.X)
    loop = [predict_linear(m, row)[0] for row in f.X]
    assert np.allclose(batch, loop, rtol=0, atol=1e-12)


def test_feature_mismatch(rng):
    f = random_frame(rng, 30, 3)
    m = fit_linear(f)
    with pytest.raises(FeatureMismatch):
        predict_linear(m, np.zeros((2, 4)))
    with pytest.raises(FeatureMismatch):
        predict_linear(m, f.select_columns(["x2", "x1", "x0"]))


def test_too_few_rows():
    with pytest.raises(InsufficientRows):
        fit_linear(_frame(np.zeros((3, 3)), np.zeros(3)))


def test_rank_deficient_warns_and_returns_min_norm(rng):
    x = rng.normal(size=30)
    X = np.column_stack([x, x])
    with pytest.warns(RankDeficientWarning):
        m = fit_linear(_frame(X, 4 * x + 1))
    # minimum-norm solution splits the weight evenly over the duplicated column
    assert m.weights == pytest.approx([2, 2], abs=1e-9)
    assert m.rank == 1


def test_full_rank_is_silent(rng):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fit_linear(random_frame(rng, 30, 3))


def test_save_load_round_trip(tmp_path, rng):
    f = random_frame(rng, 30, 3)
    m = fit_linear(f)
    back = load_model(save_model(m, tmp_path / "lr.json"))
    assert np.array_equal(predict_linear(back, f), predict_linear(m, f))
    assert back.columns == m.columns
