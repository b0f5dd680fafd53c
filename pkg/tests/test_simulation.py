import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import overlapk.simulation as sim
from overlapk import DistributionSpec, IndexSubset, ParameterError, Support
from overlapk.config import paper_study_config
from overlapk.errors import DegenerateSampleError
from overlapk.simulation import (
    StudyCase,
    StudyConfig,
    relative_bias,
    relative_rmse,
    replicate_stream,
    run_replicate,
    run_study,
)

N = DistributionSpec.normal
W = DistributionSpec.weibull
STUDY = {c.case_id: c for c in paper_study_config().cases}
FULL3 = [IndexSubset.full(3)]


def small_config(replicates=20, seed=7, **kw):
    cases = kw.pop("cases", [STUDY["1"], STUDY["10"]])
    return StudyConfig(
        cases=cases,
        size_tuples=kw.pop("sizes", [(12, 12, 12), (10, 15, 20)]),
        replicates=replicates,
        seed=seed,
        estimators=kw.pop("estimators", [(1,), (1, 2), (2, 3), (1, 2, 3)]),
    )


# metrics

def test_metrics_trivial():
    assert relative_bias([0.5, 0.5], 0.5) == 0.0
    assert relative_rmse([0.5, 0.5], 0.5) == 0.0


def test_metrics_symmetric_pair():
    assert relative_bias([0.8, 0.9], 0.85) == pytest.approx(0.0, abs=1e-15)
    assert relative_rmse([0.8, 0.9], 0.85) == pytest.approx(0.05 / 0.85, rel=1e-12)
    assert relative_rmse([0.8, 0.9], 0.85) == pytest.approx(0.05882, abs=1e-5)


def test_relative_bias_repeated_value():
    assert relative_bias([0.7572] * 1000, 0.8602) == pytest.approx(-0.11974, abs=1e-5)


@pytest.mark.parametrize("bad", [0.0, -0.3])
def test_metrics_reject_nonpositive_exact(bad):
    with pytest.raises(ParameterError):
        relative_bias([0.5], bad)
    with pytest.raises(ParameterError):
        relative_rmse([0.5], bad)


def test_metrics_reject_empty():
    with pytest.raises(ParameterError):
        relative_bias([], 0.5)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=50),
    st.floats(min_value=1e-3, max_value=1.0),
)
def test_bias_bounded_by_rmse(est, exact):
    assert abs(relative_bias(est, exact)) <= relative_rmse(est, exact) * (1 + 1e-12) + 1e-15


# replicate streams

def test_streams_are_reproducible():
    a = replicate_stream(1, "3", (50, 50, 50), 17).random(4)
    b = replicate_stream(1, "3", (50, 50, 50), 17).random(4)
    assert np.array_equal(a, b)


@pytest.mark.parametrize(
    "other",
    [(2, "3", (50, 50, 50), 17), (1, "4", (50, 50, 50), 17), (1, "3", (50, 100, 150), 17), (1, "3", (50, 50, 50), 18)],
)
def test_streams_differ_per_key(other):
    base = replicate_stream(1, "3", (50, 50, 50), 17).random(4)
    assert not np.array_equal(base, replicate_stream(*other).random(4))


def test_run_replicate_deterministic():
    r1 = run_replicate(STUDY["1"], (50, 50, 50), replicate_stream(5, "1", (50, 50, 50), 0), FULL3)
    r2 = run_replicate(STUDY["1"], (50, 50, 50), replicate_stream(5, "1", (50, 50, 50), 0), FULL3)
    assert r1 == r2


def test_run_replicate_bounded():
    subsets = [IndexSubset.of(3, *s) for s in [(1,), (2,), (3,), (1, 2), (1, 2, 3)]]
    for r in range(30):
        for res in run_replicate(STUDY["1"], (50, 50, 50), replicate_stream(9, "1", (50, 50, 50), r), subsets):
            assert 0 < res.value <= 1


def test_case4_replicates_are_small():
    vals = [
        run_replicate(STUDY["4"], (50, 50, 50), replicate_stream(11, "4", (50, 50, 50), r), FULL3)[0].value
        for r in range(200)
    ]
    assert np.median(vals) < 0.2
    assert np.mean(np.array(vals) < 0.2) > 0.9


def test_weibull_cases_use_reflection(monkeypatch):
    seen = []
    real_fit = sim.fit

    def spy(sample):
        model = real_fit(sample)
        seen.append(model.boundary.name)
        return model

    monkeypatch.setattr(sim, "fit", spy)
    run_replicate(STUDY["9"], (20, 20, 20), replicate_stream(0, "9", (20, 20, 20), 0), FULL3)
    run_replicate(STUDY["1"], (20, 20, 20), replicate_stream(0, "1", (20, 20, 20), 0), FULL3)
    assert seen == ["REFLECTION"] * 3 + ["STANDARD"] * 3


def test_declared_real_support_keeps_standard_mode():
    case = StudyCase("w", (W(2, 1), W(2, 2)), supports=(Support.REAL_LINE, Support.REAL_LINE))
    stream = replicate_stream(0, "w", (30, 30), 0)
    res = run_replicate(case, (30, 30), stream, [IndexSubset.full(2)])
    assert 0 < res[0].value <= 1


def test_run_replicate_wrong_sizes():
    with pytest.raises(ParameterError):
        run_replicate(STUDY["1"], (50, 50), replicate_stream(0, "1", (50, 50), 0), FULL3)


# config validation

def test_study_case_validation():
    with pytest.raises(ParameterError):
        StudyCase("x", (N(0, 1),))
    with pytest.raises(ParameterError):
        StudyCase("x", (N(0, 1), N(1, 1)), supports=(Support.NON_NEGATIVE, Support.REAL_LINE))


@pytest.mark.parametrize(
    "kw",
    [
        {"replicates": 0},
        {"sizes": [(1, 5, 5)]},
        {"sizes": [(5, 5)]},
        {"estimators": [(1, 4)]},
        {"cases": [STUDY["1"], STUDY["1"]]},
    ],
)
def test_study_config_validation(kw):
    with pytest.raises((ParameterError, ValueError)):
        small_config(**kw)


# run_study

def test_report_cardinality_and_order():
    report = run_study(small_config())
    assert len(report.rows) == 2 * 2 * 4
    keys = [(r.case_id, r.sizes, r.subset.indices) for r in report.rows]
    assert keys[:4] == [("1", (12, 12, 12), s) for s in [(1,), (1, 2), (2, 3), (1, 2, 3)]]
    assert keys[4][1] == (10, 15, 20)
    assert keys[8][0] == "10"


def test_report_row_invariants():
    report = run_study(small_config())
    for row in report.rows:
        assert 0 < row.average <= 1
        assert row.rmse >= 0
        assert row.rb >= -1
        assert abs(row.rb) <= row.rmse * (1 + 1e-12)
        assert row.replicates_used == 20
    assert report.quality_errors == []


def test_single_replicate_report():
    config = small_config(replicates=1, cases=[STUDY["2"]], sizes=[(30, 30, 30)], estimators=[(1, 2, 3)])
    report = run_study(config)
    (row,) = report.rows
    est = run_replicate(STUDY["2"], (30, 30, 30), replicate_stream(7, "2", (30, 30, 30), 0), FULL3)[0].value
    truth = report.exact["2"]
    assert row.average == est
    assert row.rmse == pytest.approx(abs(est - truth) / truth, rel=1e-14)


def test_report_matches_manual_aggregation():
    config = small_config(replicates=60, cases=[STUDY["3"]], sizes=[(15, 15, 15)], estimators=[(1, 2, 3)])
    report = run_study(config)
    est = [
        run_replicate(STUDY["3"], (15, 15, 15), replicate_stream(7, "3", (15, 15, 15), r), FULL3)[0].value
        for r in range(60)
    ]
    row = report.rows[0]
    assert row.average == math.fsum(est) / 60
    assert row.rb == relative_bias(est, report.exact["3"])


@pytest.mark.parametrize("threads", [2, 3, 8, 0])
def test_thread_count_does_not_change_report(threads):
    config = small_config(replicates=120)
    assert run_study(config, threads=threads).rows == run_study(config, threads=1).rows


def test_seed_changes_report():
    a = run_study(small_config(seed=1)).rows
    b = run_study(small_config(seed=2)).rows
    assert a != b


def test_reference_mismatch_is_warned():
    case = StudyCase("n", (N(0, 1), N(1, 1)), reference_delta=0.9)
    config = StudyConfig([case], [(20, 20)], 3, 0, [(1, 2)])
    report = run_study(config)
    assert report.exact["n"] == pytest.approx(math.erfc(0.5 / math.sqrt(2)), abs=1e-9)
    assert len(report.warnings) == 1
    # metrics use the quadrature value, not the reference
    assert report.rows[0].rb == pytest.approx(report.rows[0].average / report.exact["n"] - 1, rel=1e-12)


def test_discarded_replicates_raise_quality_error(monkeypatch):
    real = sim.run_replicate
    calls = {"n": 0}

    def flaky(case, sizes, stream, subsets, diagnostics=None):
        calls["n"] += 1
        if calls["n"] % 10 == 0:
            raise DegenerateSampleError("constant sample")
        return real(case, sizes, stream, subsets, diagnostics)

    monkeypatch.setattr(sim, "run_replicate", flaky)
    config = small_config(replicates=50, cases=[STUDY["1"]], sizes=[(10, 10, 10)])
    report = run_study(config)
    assert report.discarded[("1", (10, 10, 10))] == 5
    assert report.rows[0].replicates_used == 45
    assert len(report.quality_errors) == 1


def test_row_lookup():
    report = run_study(small_config(replicates=2))
    row = report.row("10", (10, 15, 20), (2, 3))
    assert row.subset == IndexSubset.of(3, 2, 3)
    with pytest.raises(KeyError):
        report.row("99", (10, 15, 20), (2, 3))
