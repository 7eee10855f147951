import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from markovmix.association import (
    ContingencyTable2x2,
    build_table,
    covariate_proportions,
    group_summary,
    log_odds_ratio,
    odds_ratio_rows,
)
from markovmix.errors import InvalidInputError, ZeroCellError
from markovmix.formats import ODDS_COLUMNS, read_odds_table, write_odds_table
from markovmix.simulate import PRESETS, CovariatePlan, simulate_cohort


def test_symmetric_table():
    r = log_odds_ratio(ContingencyTable2x2(10, 10, 10, 10))
    assert r.log_or == 0.0
    assert r.std_error == pytest.approx(math.sqrt(0.4), abs=1e-12)
    assert (r.ci_low, r.ci_high) == pytest.approx((-1.2396, 1.2396), abs=1e-4)


def test_log_four_table():
    r = log_odds_ratio(ContingencyTable2x2(20, 10, 10, 20))
    assert r.log_or == pytest.approx(math.log(4), abs=1e-12)
    assert r.std_error == pytest.approx(math.sqrt(0.3), abs=1e-12)
    assert r.ci_low == r.log_or - 1.96 * r.std_error
    assert r.ci_high == r.log_or + 1.96 * r.std_error


def test_zero_cell_named():
    with pytest.raises(ZeroCellError) as err:
        log_odds_ratio(ContingencyTable2x2(2, 1, 1, 0))
    assert err.value.cell == "n22"
    r = log_odds_ratio(ContingencyTable2x2(2, 1, 1, 0), correction=True)
    assert r.corrected and r.log_or == pytest.approx(math.log(2.5 * 0.5 / 1.5**2))


def test_negative_or_empty_table():
    with pytest.raises(InvalidInputError):
        ContingencyTable2x2(-1, 1, 1, 1)
    with pytest.raises(InvalidInputError):
        ContingencyTable2x2(0, 0, 0, 0)


@given(*(st.integers(1, 500) for _ in range(4)))
def test_swapping_rows_negates(a, b, c, d):
    t = ContingencyTable2x2(a, b, c, d)
    r, s = log_odds_ratio(t), log_odds_ratio(t.swap_rows())
    assert s.log_or == -r.log_or
    assert s.std_error == r.std_error


def test_four_participant_table():
    assignments = {"a": 1, "b": 1, "c": 1, "d": 2}
    flags = {"a": {"X"}, "b": {"X"}, "c": set(), "d": {"X"}}
    table, cov = build_table(assignments, flags, 1, "X")
    assert (table.n11, table.n12, table.n21, table.n22) == (2, 1, 1, 0)
    assert cov.n_reporting == 4 and cov.excluded == []


def test_empty_covariate_column_excludes_all():
    assignments = {"a": 1, "b": 2}
    table, cov = build_table(assignments, {"a": None, "b": None}, 1, "X")
    assert table is None
    assert cov.excluded == ["a", "b"]


def test_unknown_cluster_or_covariate():
    assignments = {"a": 1, "b": 2}
    flags = {"a": {"X"}, "b": set()}
    with pytest.raises(InvalidInputError):
        build_table(assignments, flags, 3, "X")
    with pytest.raises(InvalidInputError):
        build_table(assignments, flags, 1, "Y")


@pytest.fixture(scope="module")
def cohort():
    coh = simulate_cohort(*PRESETS["four"], S=400, T=2, seed=12, covariates=CovariatePlan.default(4))
    flags = {}
    for row in coh.covariates:
        v = row["conditions"]
        flags[row["participant_id"]] = None if v == "" else frozenset() if v == "none" else frozenset(v.split(";"))
    return coh, flags


def test_tables_match_generator_tally(cohort):
    coh, flags = cohort
    reporters = [p for p in flags if flags[p] is not None]
    for k in range(1, 5):
        for cov in ("Fibromyalgia", "Gout", "Osteoarthritis"):
            t, coverage = build_table(coh.labels, flags, k, cov)
            in_k = [p for p in reporters if coh.labels[p] == k]
            holders = [p for p in reporters if cov in flags[p]]
            assert t.n11 + t.n21 == len(in_k)
            assert t.n11 + t.n12 == len(holders)
            assert t.n11 == len(set(in_k) & set(holders))
            assert t.total == coverage.n_reporting == len(reporters)


def test_proportions(cohort):
    coh, flags = cohort
    p = covariate_proportions(coh.labels, flags)
    for j, cov in enumerate(p.covariates):
        assert p.across_clusters[j].sum() == pytest.approx(1, abs=1e-12)
        for i, k in enumerate(p.clusters):
            members = [q for q in flags if flags[q] is not None and coh.labels[q] == k]
            assert p.within_cluster[i, j] == sum(cov in flags[q] for q in members) / len(members)


def test_single_cluster_proportions():
    p = covariate_proportions({"a": 1, "b": 1}, {"a": {"X"}, "b": {"X", "Y"}})
    np.testing.assert_array_equal(p.across_clusters, 1.0)


def test_cluster_without_reporters():
    p = covariate_proportions({"a": 1, "b": 2}, {"a": {"X"}, "b": None})
    assert p.empty_clusters == [2]
    np.testing.assert_array_equal(p.within_cluster[1], 0)


def test_group_summary_examples():
    rows = group_summary({"a": 1, "b": 1, "c": 1, "d": 1}, {"a": "40", "b": 50, "c": "NA", "d": "60"})
    c1 = next(r for r in rows if r.cluster == "Cluster 1")
    assert c1.mean == 50 and c1.response_rate == 75
    rows = group_summary({"a": 1}, {"a": None})
    assert rows[0].mean is None and rows[0].response_rate == 0


def test_group_summary_by_sex(cohort):
    coh, _ = cohort
    ages = {r["participant_id"]: r["age"] for r in coh.covariates}
    sex = {r["participant_id"]: r["sex"] for r in coh.covariates}
    rows = group_summary(coh.labels, ages, sex)
    assert {r.group for r in rows} == {"F", "M"}
    overall = [r for r in rows if r.cluster == "Overall"]
    assert sum(r.n for r in overall) == 400
    plan = CovariatePlan.default(4)
    for k in range(1, 5):
        vals = [float(ages[p]) for p in ages if coh.labels[p] == k and ages[p]]
        # planted mean within four standard errors
        assert abs(np.mean(vals) - plan.age_mean[k - 1]) < 4 * plan.age_sd / math.sqrt(len(vals))


def test_odds_rows_order_and_zero_cells():
    assignments = {"a": 1, "b": 2, "c": 2, "d": 1}
    flags = {"a": {"X", "Y"}, "b": {"Y"}, "c": set(), "d": set()}
    rows, _ = odds_ratio_rows(assignments, flags)
    assert [(r.covariate, r.cluster) for r in rows] == [("X", 1), ("X", 2), ("Y", 1), ("Y", 2)]
    assert rows[0].result is None and rows[0].zero_cell == "n12"
    rows, _ = odds_ratio_rows(assignments, flags, correction=True)
    assert all(r.result is not None for r in rows)


def test_odds_table_layout(tmp_path):
    class Res:
        log_or, std_error, ci_low, ci_high = 1.64, 0.10, 1.45, 1.84

    class Row:
        cluster, covariate, result = 2, "Fibromyalgia", Res

    path = tmp_path / "odds.csv"
    write_odds_table(path, [Row] * 22, decimals=2)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(ODDS_COLUMNS) == "row,cluster,covariate,log_or,std_error,ci_low,ci_high"
    assert lines[22] == "22,Cluster 2,Fibromyalgia,1.64,0.10,1.45,1.84"
    parsed = read_odds_table(path)[21]
    assert parsed == {"row": 22, "cluster": "Cluster 2", "covariate": "Fibromyalgia",
                      "log_or": 1.64, "std_error": 0.10, "ci_low": 1.45, "ci_high": 1.84}
    # interval consistent with the 1.96 multiplier at the printed precision
    assert parsed["log_or"] - 1.96 * parsed["std_error"] == pytest.approx(parsed["ci_low"], abs=0.01)
