"""Group tests, correlation, significance tables and outlier filtering."""
import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special
from scipy import stats as sps

from adspeech.features import FeatureTable
from adspeech.stats import (OutlierRule, betainc_reg, filter_outliers, format_significance,
                            pearson, pooled_t_test, scatter_svg, significance_csv,
                            significance_table, t_sf_two_sided, welch_t_test)


def test_identical_samples():
    r = welch_t_test([1, 2, 3, 4, 5], [1, 2, 3, 4, 5])
    assert r.t == 0.0 and r.p == 1.0


def test_welch_hand_example():
    r = welch_t_test([1, 2, 3, 4, 5], [2, 3, 4, 5, 6])
    assert r.t == pytest.approx(-1.0, abs=1e-12)
    assert r.df == pytest.approx(8.0, abs=1e-12)
    assert r.p == pytest.approx(0.3466, abs=5e-4)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.01, 50), st.floats(0.01, 50), st.floats(0.0, 1.0))
def test_incomplete_beta_matches_reference(a, b, x):
    assert betainc_reg(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-10)


@pytest.mark.parametrize("t,df", [(0.5, 3), (2.1, 10), (-4.0, 7.5), (12.0, 2)])
def test_t_tail_matches_reference(t, df):
    assert t_sf_two_sided(t, df) == pytest.approx(2 * sps.t.sf(abs(t), df), rel=1e-9, abs=1e-14)


def test_welch_matches_reference_on_random_data():
    rng = np.random.default_rng(0)
    for _ in range(20):
        a = rng.normal(0, 1, rng.integers(3, 30))
        b = rng.normal(0.5, 2, rng.integers(3, 30))
        ours, ref = welch_t_test(a, b), sps.ttest_ind(a, b, equal_var=False)
        assert ours.t == pytest.approx(ref.statistic, rel=1e-10)
        assert ours.p == pytest.approx(ref.pvalue, rel=1e-8)
        pooled, ref = pooled_t_test(a, b), sps.ttest_ind(a, b)
        assert pooled.p == pytest.approx(ref.pvalue, rel=1e-8)


def test_samples_too_small():
    with pytest.raises(ValueError):
        welch_t_test([1.0], [1.0, 2.0])


def test_pearson_fixtures():
    x = np.arange(10.0)
    assert abs(pearson(x, 2 * x + 1).r - 1.0) <= 1e-12
    assert abs(pearson(x, -3 * x + 4).r + 1.0) <= 1e-12
    assert pearson([1, 2, 3], [1, 3, 2]).r == pytest.approx(0.5, abs=1e-12)


def test_pearson_constant_input():
    with pytest.raises(ValueError):
        pearson([1, 1, 1], [1, 2, 3])


def _table(n, shift, seed, n_null=10):
    """Gaussian features; only ``planted`` differs between groups."""
    rng = np.random.default_rng(seed)
    labels = ["nonAD"] * n + ["AD"] * n
    planted = rng.normal(0, 1, 2 * n) + np.r_[np.zeros(n), np.full(n, shift)]
    X = np.column_stack([planted] + [rng.normal(0, 1, 2 * n) for _ in range(n_null)])
    names = ["planted"] + [f"null{k}" for k in range(n_null)]
    mmse = list(rng.integers(10, 30, 2 * n))
    return FeatureTable([f"S{i:03d}" for i in range(2 * n)], labels, mmse, names, X)


def test_planted_feature_found_null_spread():
    found, null_clear = 0, 0
    for seed in range(40):
        rows = significance_table(_table(24, -1.5, seed), alpha=0.05)
        names = {r.name for r in rows}
        found += "planted" in names
        null_clear += "null0" not in names
    assert found == 40
    assert null_clear >= 36


def test_alpha_one_lists_everything_testable():
    t = _table(10, 0.0, 1)
    t.X[:, 3] = 7.0                      # constant: untestable
    rows = significance_table(t, alpha=1.0)
    assert len(rows) == len(t.names) - 1
    assert len(significance_table(t, full=True)) == len(t.names)


def test_tiny_alpha_on_null_corpus():
    empty = sum(not significance_table(_table(24, 0.0, s), alpha=1e-9) for s in range(100))
    assert empty >= 99


def test_report_formats():
    rows = significance_table(_table(24, -2.0, 3), alpha=0.05)
    text = format_significance(rows, "title")
    assert "planted" in text and text.splitlines()[0] == "title"
    csv_text = significance_csv(rows)
    assert csv_text.splitlines()[0].startswith("feature,")
    assert len(csv_text.strip().splitlines()) == len(rows) + 1


# ---------------------------------------------------------------- outliers

def _outlier_set():
    ids = [f"S{i:02d}" for i in range(10)]
    labels = ["AD", "AD", "AD", "nonAD", "nonAD", "nonAD", "nonAD", "nonAD", "nonAD", "nonAD"]
    mmse = [30, 18, 20, 29, 28, 30, 27, 29, 30, 28]
    lex = [0.5, 0.2, 0.3, 0.05, 0.06, 0.07, 0.3, 0.4, 0.5, 0.6]
    return ids, labels, mmse, lex


def test_paper_pattern_drops_four():
    ids, labels, mmse, lex = _outlier_set()
    kept, dropped = filter_outliers(ids, labels, mmse, lex, OutlierRule(True, 3))
    assert [ids[i] for i in dropped] == ["S00", "S03", "S04", "S05"]
    assert sorted(kept + dropped) == list(range(10))
    assert not set(kept) & set(dropped)


def test_noop_rule_is_identity():
    ids, labels, mmse, lex = _outlier_set()
    assert filter_outliers(ids, labels, mmse, lex, OutlierRule(False, 0)) == (list(range(10)), [])


def test_tie_at_minimum_drops_smaller_id():
    ids = ["S9", "S2", "S5"]
    kept, dropped = filter_outliers(ids, ["nonAD"] * 3, [29] * 3, [0.1, 0.1, 0.4], OutlierRule(False, 1))
    assert [ids[i] for i in dropped] == ["S2"]


def test_rule_parsing():
    assert OutlierRule.parse("ad30:1,lexlow:3") == OutlierRule(True, 3)
    assert OutlierRule.parse("").is_noop
    for bad in ("ad30:2", "lexlow:x", "mmse:1"):
        with pytest.raises(ValueError):
            OutlierRule.parse(bad)


def test_scatter_markers():
    ids, labels, mmse, lex = _outlier_set()
    _, dropped = filter_outliers(ids, labels, mmse, lex, OutlierRule(True, 3))
    svg = scatter_svg(lex, mmse, labels, ids, dropped=dropped)
    assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
    assert len(re.findall(r'<circle class="session"', svg)) == 6
    assert len(re.findall(r'<path class="outlier"', svg)) == 4


def test_alpha_one_keeps_p_equal_one():
    t = _table(10, 0.0, 2)
    t.X[:, 1] = np.r_[np.arange(10.0), np.arange(10.0)]      # identical groups: p = 1
    assert "null0" in {r.name for r in significance_table(t, alpha=1.0)}
