"""Standardizer, kNN, forests, SMO, MLP, LR-SGD and metrics."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adspeech.models import (MLP, SVC, SVR, KNNClassifier, ModelConfig, RandomForest,
                             SGDRegressor, Standardizer, classification_report, confusion,
                             kkt_violation_svc, kkt_violation_svr, regression_report, rmse)
from adspeech.models.mlp import mlp_loss_and_grad


def _blobs(n=40, seed=0, gap=3.0):
    rng = np.random.default_rng(seed)
    a = rng.normal([-gap / 2, 0], 0.5, (n // 2, 2))
    b = rng.normal([gap / 2, 0], 0.5, (n // 2, 2))
    return np.vstack([a, b]), ["AD"] * (n // 2) + ["nonAD"] * (n // 2)


# ---------------------------------------------------------------- standardizer

def test_two_point_standardization():
    s = Standardizer.fit([[1.0], [3.0]])
    np.testing.assert_allclose(s.transform([[1.0], [3.0]])[:, 0], [-1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_constant_feature_untouched():
    s = Standardizer.fit([[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]])
    assert np.all(s.transform([[5.0, 2.0], [9.0, 2.0]])[:, 0] == [5.0, 9.0])


def test_unseen_rows_independent():
    s = Standardizer.fit(np.random.default_rng(1).normal(size=(10, 3)))
    row = np.array([[0.3, -1.0, 2.0]])
    alone = s.transform(row)
    with_others = s.transform(np.vstack([row, np.random.default_rng(2).normal(size=(5, 3))]))
    np.testing.assert_array_equal(alone[0], with_others[0])


def test_model_config_validation():
    assert ModelConfig("knn").params == {"k": 5}
    for bad in (dict(kind="boosting"), dict(kind="knn", params={"k": 0}),
                dict(kind="knn", params={"neighbours": 3})):
        with pytest.raises(ValueError):
            ModelConfig(**bad)


# ---------------------------------------------------------------- kNN

def _brute_force_knn(Xtr, ytr, q, k):
    dists = sorted((math.dist(q, x), i) for i, x in enumerate(Xtr))[:k]
    votes = {}
    exact = [i for d, i in dists if d == 0.0]
    if exact:
        for i in exact:
            votes[ytr[i]] = votes.get(ytr[i], 0.0) + 1.0
    else:
        for d, i in dists:
            votes[ytr[i]] = votes.get(ytr[i], 0.0) + 1.0 / d
    top = max(votes.values())
    return min(c for c, v in votes.items() if v == top)


def test_knn_matches_brute_force_on_grid():
    rng = np.random.default_rng(7)
    Xtr = rng.uniform(-1, 1, (20, 2))
    ytr = ["AD" if x[0] + 0.3 * rng.normal() > 0 else "nonAD" for x in Xtr]
    g = np.linspace(-1, 1, 21)
    grid = np.array([[a, b] for a in g for b in g])
    pred = KNNClassifier(5).fit(Xtr, ytr).predict(grid)
    assert pred == [_brute_force_knn(Xtr, ytr, q, 5) for q in grid]


def test_knn_zero_distance_and_k1():
    X, y = _blobs(20)
    m = KNNClassifier(5).fit(X, y)
    assert m.predict(X) == y
    near = KNNClassifier(1).fit(X, y)
    q = X + 1e-6
    assert near.predict(q) == y


# ---------------------------------------------------------------- forests

def test_constant_labels():
    X = np.random.default_rng(0).normal(size=(10, 3))
    assert RandomForest(True, trees=5).fit(X, ["AD"] * 10).predict(X[:4]) == ["AD"] * 4


def test_forest_separable_blobs():
    X, y = _blobs(40)
    assert RandomForest(True, trees=25, seed=1).fit(X, y).predict(X) == y


def test_forest_regression_interpolates():
    x = np.arange(10.0)[:, None]
    pred = RandomForest(False, trees=50, seed=3).fit(x, x[:, 0]).predict([[4.5]])
    assert 3.0 <= pred[0] <= 6.0


def test_forest_seed_determinism():
    X, y = _blobs(30, seed=4, gap=0.5)
    a = RandomForest(True, trees=10, seed=9).fit(X, y).predict(X + 0.1)
    b = RandomForest(True, trees=10, seed=9).fit(X, y).predict(X + 0.1)
    assert a == b


# ---------------------------------------------------------------- SMO

def test_svc_blobs_kkt():
    X, y = _blobs(40)
    m = SVC(C=1.0).fit(X, y)
    assert m.predict(X) == y
    assert kkt_violation_svc(m) <= 1e-3


def test_svc_duplicate_support_vector():
    X, y = _blobs(40, seed=2, gap=2.0)
    # fixed kernel scale and a tight tolerance: both fits reach the same optimum
    base = SVC(C=1.0, tol=1e-9, scale=0.5).fit(X, y)
    sv = int(np.flatnonzero((base.alpha_ > 1e-8) & (base.alpha_ < base.C - 1e-8))[0])
    dup = SVC(C=1.0, tol=1e-9, scale=0.5).fit(np.vstack([X, X[sv]]), y + [y[sv]])
    g = np.linspace(-3, 3, 21)
    grid = np.array([[a, b] for a in g for b in g])
    np.testing.assert_allclose(dup.decision_function(grid), base.decision_function(grid), atol=1e-6)


def test_untrained_duals_give_bias_sign():
    X, y = _blobs(10)
    with pytest.warns(RuntimeWarning):
        m = SVC(max_iter=0).fit(X, y)
    assert np.all(m.alpha_ == 0)
    f = m.decision_function(np.random.default_rng(0).normal(size=(5, 2)))
    assert np.all(f == m.b_)
    assert set(m.predict(X)) == {m.classes_[0] if m.b_ >= 0 else m.classes_[1]}


def test_svr_constant_target():
    x = np.linspace(-1, 1, 15)[:, None]
    m = SVR(C=1.0, epsilon=0.1).fit(x, np.full(15, 4.0))
    assert np.max(np.abs(m.predict(x) - 4.0)) <= 0.1


def test_svr_cubic_and_slackness():
    x = np.linspace(-1, 1, 41)[:, None]
    y = x[:, 0] ** 3
    m = SVR(C=10.0, epsilon=0.01, coef0=1.0).fit(x, y)
    assert rmse(y, m.predict(x)) <= 0.01 + 0.05
    viol, slack = kkt_violation_svr(m, y)
    assert viol <= 1e-3
    assert slack == 0.0


# ---------------------------------------------------------------- MLP

@pytest.mark.parametrize("linear", [False, True])
def test_gradient_check(linear):
    rng = np.random.default_rng(4)
    X = rng.normal(size=(7, 3))
    T = rng.uniform(size=(7, 2))
    params = [rng.uniform(-0.5, 0.5, s) for s in ((3, 4), (4,), (4, 2), (2,))]
    _, grads = mlp_loss_and_grad(params, X, T, linear)
    h = 1e-5
    worst = 0.0
    for p, g in zip(params, grads):
        for idx in np.ndindex(p.shape):
            keep = p[idx]
            p[idx] = keep + h
            up, _ = mlp_loss_and_grad(params, X, T, linear)
            p[idx] = keep - h
            down, _ = mlp_loss_and_grad(params, X, T, linear)
            p[idx] = keep
            num = (up - down) / (2 * h)
            worst = max(worst, abs(num - g[idx]) / max(abs(num), abs(g[idx]), 1e-8))
    assert worst < 1e-4


def test_and_truth_table():
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], float)
    y = ["0", "0", "0", "1"]
    # 2000 full-batch epochs: the mean loss needs more steps than the default 500
    best = max(np.mean(np.array(MLP(True, hidden=2, lr=0.5, epochs=2000, seed=s).fit(X, y).predict(X)) == y)
               for s in range(10))
    assert best == 1.0


def test_zero_epochs_uses_seeded_init():
    X = np.random.default_rng(0).normal(size=(20, 3))
    y = X @ [1.0, 2.0, -1.0]
    a = MLP(False, epochs=0, seed=3).fit(X, y)
    b = MLP(False, epochs=0, seed=3).fit(X, y)
    np.testing.assert_array_equal(a.predict(X), b.predict(X))
    # untrained output in standardized units stays near 0
    assert np.all(np.abs((a.predict(X) - y.mean()) / y.std(ddof=1)) < 1.5)


def test_mlp_loss_decreases():
    X, y = _blobs(30)
    m = MLP(True, epochs=300, seed=1).fit(X, y)
    assert m.loss_curve_[-1] < m.loss_curve_[0]


# ---------------------------------------------------------------- LR-SGD

def _line():
    x = np.linspace(-1, 1, 50)
    return x[:, None], 3 * x + 1


def test_sgd_slope_matches_normal_equations():
    X, y = _line()
    A = np.column_stack([X[:, 0], np.ones(50)])
    slope = np.linalg.solve(A.T @ A, A.T @ y)[0]
    m = SGDRegressor(eta0=0.01, l2=1e-4, seed=0).fit(X, y)
    learned = m.coef_[0] * m.y_sd_
    assert abs(learned - slope) <= 0.05


def test_sgd_constant_target():
    X = np.random.default_rng(0).normal(size=(30, 2))
    m = SGDRegressor(seed=0).fit(X, np.full(30, 7.5))
    assert np.all(np.abs(m.coef_) < 1e-3)
    np.testing.assert_allclose(m.predict(X), 7.5, atol=1e-3)


def test_l2_monotone():
    X, y = _line()
    norms = [np.linalg.norm(SGDRegressor(l2=l2, tol=0, epochs=30, seed=2).fit(X, y).coef_)
             for l2 in (0.01, 0.02, 0.04, 0.08, 0.16)]
    assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


# ---------------------------------------------------------------- metrics

def test_hand_confusion():
    y_true = ["AD"] * 24 + ["nonAD"] * 24
    y_pred = ["AD"] * 21 + ["nonAD"] * 3 + ["AD"] * 5 + ["nonAD"] * 19
    r = classification_report(y_true, y_pred)
    ad = r.per_class[0]
    assert ad.precision == pytest.approx(21 / 26) and ad.recall == 0.875
    assert r.accuracy == pytest.approx(40 / 48)


def test_metric_identities_random_matrices():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        m = rng.integers(0, 30, (2, 2))
        if m.sum() == 0:
            continue
        labels = ["AD", "nonAD"]
        y_true = [labels[i] for i in range(2) for j in range(2) for _ in range(m[i, j])]
        y_pred = [labels[j] for i in range(2) for j in range(2) for _ in range(m[i, j])]
        r = classification_report(y_true, y_pred, labels=labels)
        assert r.confusion == m.tolist()
        assert r.accuracy == float(Fraction(int(np.trace(m)), int(m.sum())))
        for i, c in enumerate(r.per_class):
            tp, fp, fn = int(m[i, i]), int(m[1 - i, i]), int(m[i, 1 - i])
            assert c.precision == (float(Fraction(tp, tp + fp)) if tp + fp else 0.0)
            assert c.recall == (float(Fraction(tp, tp + fn)) if tp + fn else 0.0)
            assert c.f1 == (float(Fraction(2 * tp, 2 * tp + fp + fn)) if tp else 0.0)
            assert c.support == tp + fn
        assert sum(c.support for c in r.per_class) == r.n


def test_regression_metrics():
    y = np.array([3.0, 10.0, 22.0])
    assert rmse(y, y) == 0.0
    assert rmse(y, y + 2) == 2.0
    assert regression_report(y, y + 2).rmse == 2.0


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from(["AD", "nonAD"]), min_size=1, max_size=40))
def test_perfect_predictions(labels):
    r = classification_report(labels, labels)
    assert r.accuracy == 1.0
    assert all(c.f1 == 1.0 for c in r.per_class if c.support)
    assert confusion(labels, labels)[1].trace() == len(labels)
