import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpcai500.core import DomainError
from hpcai500.repeatability import (
    Repeatability,
    VariationReport,
    classify_repeatability,
    group_epochs,
    variation,
)
from helpers import make_run


def test_zero_spread():
    report = variation([50, 50, 50, 50])
    assert report.variation == 0.0
    assert report.runs == 4
    assert report.mean_epochs == 50.0


def test_hand_computed_n_minus_1():
    report = variation([9, 10, 11])
    assert report.mean_epochs == 10.0
    assert report.stddev_epochs == 1.0
    assert report.variation == 0.1


def test_two_sample_spreadsheet_oracle():
    # sqrt(2)/61, checked against an independent high-precision evaluation
    report = variation([60, 62])
    assert report.variation * 100 == pytest.approx(2.3184, abs=1e-3)
    assert report.variation == pytest.approx(math.sqrt(2) / 61, rel=1e-12)


def test_too_few_samples():
    with pytest.raises(DomainError, match="at least 2"):
        variation([50])


def test_non_positive_sample():
    with pytest.raises(DomainError, match="non-positive"):
        variation([10, 0])


@settings(max_examples=200, deadline=None)
@given(
    samples=st.lists(
        st.floats(min_value=0.5, max_value=1e6), min_size=2, max_size=12
    ),
    c=st.floats(min_value=1e-3, max_value=1e3),
)
def test_scale_invariance(samples, c):
    base = variation(samples).variation
    scaled = variation([c * s for s in samples]).variation
    assert scaled == pytest.approx(base, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    samples=st.lists(
        st.floats(min_value=1.0, max_value=1e4), min_size=2, max_size=10
    ),
    shift=st.floats(min_value=0.1, max_value=1e4),
)
def test_translation_strictly_decreases_variation(samples, shift):
    base = variation(samples)
    shifted = variation([s + shift for s in samples])
    if base.variation == 0.0:
        assert shifted.variation == 0.0
    else:
        assert shifted.variation < base.variation


@settings(max_examples=100, deadline=None)
@given(
    samples=st.lists(
        st.floats(min_value=0.5, max_value=1e5), min_size=2, max_size=10
    )
)
def test_permutation_invariance(samples):
    forward = variation(sorted(samples))
    backward = variation(sorted(samples, reverse=True))
    assert forward.variation == backward.variation
    assert forward.mean_epochs == backward.mean_epochs


def test_classify_table_fixtures():
    report = variation([9, 10, 11])  # 10%
    assert classify_repeatability(report) is Repeatability.UNREPEATABLE
    low = variation([1000, 1000, 1001])
    assert low.variation < 0.02
    assert classify_repeatability(low) is Repeatability.REPEATABLE


def test_classify_boundary_inclusive():
    report = variation([9, 10, 11])  # exactly 10%
    assert classify_repeatability(report, threshold=0.1) is Repeatability.REPEATABLE
    assert (
        classify_repeatability(report, threshold=0.0999)
        is Repeatability.UNREPEATABLE
    )


def _fixed_report(fraction):
    return VariationReport(
        workload_id="w", runs=5, mean_epochs=100.0,
        stddev_epochs=fraction * 100.0, variation=fraction,
    )


def test_classify_published_variation_values():
    assert classify_repeatability(_fixed_report(0.0112)) is Repeatability.REPEATABLE
    assert classify_repeatability(_fixed_report(0.3846)) is Repeatability.UNREPEATABLE
    assert classify_repeatability(_fixed_report(0.02)) is Repeatability.REPEATABLE


def test_group_epochs_seed_only_when_present():
    runs = [
        make_run(run_id="a", epochs_run=88),
        make_run(run_id="b", epochs_run=92),
        make_run(run_id="c", epochs_run=90, seed=7),
        make_run(run_id="d", epochs_run=90, seed=7),
        make_run(run_id="e", epochs_run=91, seed=8),
    ]
    groups = group_epochs(runs)
    assert len(groups) == 3
    unseeded = [k for k in groups if "seed=" not in k]
    assert len(unseeded) == 1
    assert sorted(groups[unseeded[0]]) == [88.0, 92.0]
    assert groups[[k for k in groups if "seed=7" in k][0]] == [90.0, 90.0]


def test_group_epochs_unknown_field():
    with pytest.raises(DomainError, match="unknown group field"):
        group_epochs([make_run()], fields=("benchmark_id", "nope"))
