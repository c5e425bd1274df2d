"""Cross-validation folds, model files and holdout evaluation."""
import numpy as np
import pytest

from adspeech.features import PROSODY_NAMES, FeatureTable
from adspeech.models import ModelConfig, cross_validate, load_model, save_model, train_model
from adspeech.models.harness import mmse_strata, stratified_folds
from adspeech.pipeline import CorpusError, evaluate_holdout


def _dataset(n=108, seed=0, d=4):
    """Two classes split by the first column; MMSE affine in it."""
    rng = np.random.default_rng(seed)
    labels = ["AD" if i % 2 else "nonAD" for i in range(n)]
    X = rng.normal(size=(n, d))
    X[:, 0] += np.where(np.array(labels) == "AD", -2.0, 2.0)
    mmse = np.clip(np.round(24 + 2.0 * X[:, 0] + rng.normal(0, 1.5, n)), 0, 30)
    return X, labels, mmse


def _table(X, labels, mmse, prefix="S"):
    ids = [f"{prefix}{i:03d}" for i in range(len(labels))]
    return FeatureTable(ids, list(labels), [int(m) for m in mmse], list(PROSODY_NAMES), X.copy())


# ---------------------------------------------------------------- folds

def test_partition_108_rows():
    _, labels, _ = _dataset()
    folds = stratified_folds(labels, 10, seed=3)
    assert sorted(len(f) for f in folds) == [10] * 2 + [11] * 8
    allidx = np.concatenate(folds)
    assert sorted(allidx.tolist()) == list(range(108))


def test_folds_balanced_by_label():
    _, labels, _ = _dataset()
    for f in stratified_folds(labels, 10, seed=1):
        ad = sum(labels[i] == "AD" for i in f)
        assert abs(ad - (len(f) - ad)) <= 1


def test_mmse_strata_quartiles():
    y = np.arange(1.0, 41.0)
    assert np.bincount(mmse_strata(y)).tolist() == [10, 10, 10, 10]


def test_too_many_folds_rejected():
    X, labels, _ = _dataset(12)
    with pytest.raises(ValueError):
        cross_validate(ModelConfig("knn"), X, labels, folds=10)


def test_perfect_oracle_scores_one():
    X, labels, _ = _dataset()
    X = np.column_stack([X, [1.0 if l == "AD" else 0.0 for l in labels]])
    oracle = lambda tr_X, tr_y, te_X: ["AD" if v == 1.0 else "nonAD" for v in te_X[:, -1]]
    r = cross_validate(ModelConfig("knn"), X, labels, folds=10, seed=0, model_fn=oracle).report
    assert r.accuracy == 1.0
    assert all(c.precision == c.recall == c.f1 == 1.0 for c in r.per_class)


def _report_key(res):
    r = res.report
    return (r.accuracy, r.rmse, r.confusion, [f["score"] for f in r.folds], res.predictions)


@pytest.mark.parametrize("kind", ["rf_class", "svm_smo", "mlp_class", "linreg_sgd"])
def test_serial_parallel_and_repeat_identical(kind):
    X, labels, mmse = _dataset()
    cfg = ModelConfig(kind, {"trees": 20} if kind == "rf_class" else {"epochs": 50}
                      if kind in ("mlp_class", "linreg_sgd") else {})
    y = labels if cfg.is_classifier else mmse
    serial = cross_validate(cfg, X, y, folds=10, seed=5)
    again = cross_validate(cfg, X, y, folds=10, seed=5)
    parallel = cross_validate(cfg, X, y, folds=10, seed=5, n_jobs=4)
    assert _report_key(serial) == _report_key(again) == _report_key(parallel)


def test_each_row_predicted_once():
    X, labels, _ = _dataset()
    res = cross_validate(ModelConfig("knn"), X, labels, folds=10, seed=2)
    assert len(res.predictions) == 108 and None not in res.predictions
    seen = np.concatenate([f.test_index for f in res.folds])
    assert sorted(seen.tolist()) == list(range(108))


def test_separable_data_scores_high():
    X, labels, _ = _dataset()
    assert cross_validate(ModelConfig("rf_class", {"trees": 30}), X, labels).report.accuracy >= 0.95


# ---------------------------------------------------------------- model files

@pytest.mark.parametrize("kind", ["rf_class", "knn", "svm_smo", "mlp_class",
                                  "rf_reg", "svr_smo", "mlp_reg", "linreg_sgd"])
def test_model_round_trip(tmp_path, kind):
    X, labels, mmse = _dataset(40)
    cfg = ModelConfig(kind, {"trees": 10} if kind.startswith("rf") else {})
    y = labels if cfg.is_classifier else mmse
    m = train_model(cfg, X, y, ["a", "b", "c", "d"])
    path = tmp_path / "m.json"
    save_model(path, m, {"note": "x"})
    back = load_model(path)
    q = np.random.default_rng(9).normal(size=(15, 4)) * 2
    if cfg.is_classifier:
        assert back.predict(q) == m.predict(q)
    else:
        np.testing.assert_array_equal(back.predict(q), m.predict(q))
    assert back.feature_names == ["a", "b", "c", "d"]


def test_bad_model_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text('{"format": "other"}')
    with pytest.raises(ValueError):
        load_model(p)


# ---------------------------------------------------------------- holdout

def test_holdout_memorization_and_order():
    X, labels, mmse = _dataset(60, d=len(PROSODY_NAMES))
    train = _table(X, labels, mmse)
    test = _table(X[::-1], labels[::-1], mmse[::-1], prefix="T")
    res = evaluate_holdout(train, test, ModelConfig("knn"), "pros", demographics=False)
    assert res.report.accuracy == 1.0
    assert len(res.predictions) == len(test) and res.predictions == list(test.labels)


def test_holdout_regression_noise_floor():
    X, labels, mmse = _dataset(200, seed=4, d=len(PROSODY_NAMES))
    train = _table(X[:120], labels[:120], mmse[:120])
    test = _table(X[120:], labels[120:], mmse[120:], prefix="T")
    res = evaluate_holdout(train, test, ModelConfig("linreg_sgd", seed=1), "pros",
                           demographics=False)
    assert res.report.rmse <= 2 * 1.5


def test_holdout_rejects_shared_ids():
    X, labels, mmse = _dataset(20, d=len(PROSODY_NAMES))
    t = _table(X, labels, mmse)
    with pytest.raises(CorpusError):
        evaluate_holdout(t, t, ModelConfig("knn"), "pros", demographics=False)


def test_holdout_never_reads_test_rows():
    X, labels, mmse = _dataset(60, d=len(PROSODY_NAMES))
    train = _table(X[:40], labels[:40], mmse[:40])
    test = _table(X[40:], labels[40:], mmse[40:], prefix="T")
    cfg = ModelConfig("svm_smo")
    a = evaluate_holdout(train, test, cfg, "pros", demographics=False).model
    test.X[3] = 1e3                       # perturb one test row
    b = evaluate_holdout(train, test, cfg, "pros", demographics=False).model
    assert a.to_dict() == b.to_dict()
