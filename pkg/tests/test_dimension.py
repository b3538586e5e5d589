import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_lab.dimension import (
    DimensionEstimate,
    default_fit_range,
    estimate_dimension,
    threshold_profile,
)
from fractal_lab.errors import DegenerateFitError, DomainError, EmptyLevelError
from fractal_lab.grid import CantorSpec, GridSet, GridSpec, cantor_set, scale_counts

LOG23 = math.log(2) / math.log(3)


def test_cantor_slope_depth20():
    counts = scale_counts(cantor_set(CantorSpec(3, (0, 2), 20)))
    est = estimate_dimension(counts, 5, 20, base=3)
    assert est.slope == pytest.approx(LOG23, abs=1e-9)
    assert est.rms_residual < 1e-12
    assert est.points_used == 16


def test_full_set_slope_exactly_one():
    counts = scale_counts(cantor_set(CantorSpec(2, (0, 1), 16)))
    est = estimate_dimension(counts, 0, 16, base=2)
    assert est.slope == 1.0
    assert est.rms_residual == 0.0


def test_singleton_slope_exactly_zero():
    counts = scale_counts(GridSet(GridSpec(2, 10), np.array([77])))
    est = estimate_dimension(counts, 0, 10, base=2)
    assert est.slope == 0.0


def test_fit_errors():
    with pytest.raises(EmptyLevelError):
        estimate_dimension([0, 1, 2], 0, 2, base=2)
    with pytest.raises(DegenerateFitError):
        estimate_dimension([1, 2, 4], 1, 1, base=2)
    with pytest.raises(DomainError):
        estimate_dimension([1, 2, 4], 0, 3, base=2)
    with pytest.raises(DomainError):
        estimate_dimension([1, 2, 4], 0, 2, base=1)


def test_default_fit_range():
    assert default_fit_range(20) == (5, 20)
    assert default_fit_range(1) == (0, 1)
    with pytest.raises(DegenerateFitError):
        default_fit_range(0)


@settings(max_examples=30)
@given(
    st.sampled_from([(2, (0,)), (2, (0, 1)), (3, (0, 2)), (3, (0, 1, 2)), (5, (0, 4))]),
    st.integers(4, 10),
    st.data(),
)
def test_self_similar_slope_any_subrange(spec_args, depth, data):
    base, kept = spec_args
    expected = math.log(len(kept)) / math.log(base)
    counts = scale_counts(cantor_set(CantorSpec(base, kept, depth)))
    lo = data.draw(st.integers(1, depth - 1))
    hi = data.draw(st.integers(lo + 1, depth))
    est = estimate_dimension(counts, lo, hi, base=base)
    assert est.slope == pytest.approx(expected, abs=1e-9)


def test_union_slope_is_max_of_dimensions():
    # disjoint self-similar halves of different dimension, base 4 depth 16
    d = 16
    low = cantor_set(CantorSpec(4, (0, 3), d - 1))        # dim 1/2 inside [0, 1/4)
    high = cantor_set(CantorSpec(4, (0, 1, 2), d - 1))    # dim log3/log4 inside [3/4, 1)
    cells = np.concatenate([low.cells, 3 * 4 ** (d - 1) + high.cells])
    union = GridSet(GridSpec(4, d), cells)
    lo, hi = default_fit_range(d)
    est = estimate_dimension(scale_counts(union), lo, hi, base=4)
    assert abs(est.slope - math.log(3) / math.log(4)) <= 0.02


def test_estimate_serialization():
    counts = scale_counts(cantor_set(CantorSpec(2, (0, 1), 8)))
    est = estimate_dimension(counts, 2, 8, base=2)
    blob = json.loads(est.to_json())
    assert blob["slope"] == est.slope
    assert blob["points_used"] == 7
    row = est.to_csv_row().split(",")
    assert row[0] == "2" and row[1] == "8"
    assert float(row[2]) == est.slope


def test_clamped_slope_is_display_only():
    est = DimensionEstimate(
        slope=1.2, intercept=0.0, level_lo=0, level_hi=3, rms_residual=0.0, points_used=4
    )
    assert est.slope == 1.2
    assert est.clamped_slope == pytest.approx(1.0, abs=1e-5)


def test_threshold_profile_cantor_closed_form():
    gs = cantor_set(CantorSpec(3, (0, 2), 20))
    betas = (0.5, LOG23, 0.75)
    profile = threshold_profile(gs, betas)
    for beta, total in zip(profile.betas, profile.sums):
        assert total == pytest.approx((2.0 / 3.0**beta) ** 20, rel=1e-9)
    assert profile.sums[0] > 1.0 > profile.sums[2]
    assert profile.sums[1] == pytest.approx(1.0, abs=1e-12)


def test_threshold_profile_empty_and_full():
    empty = GridSet(GridSpec(3, 6), np.array([], dtype=np.int64))
    assert threshold_profile(empty, (0.2, 0.8)).sums == (0.0, 0.0)
    full = cantor_set(CantorSpec(2, (0, 1), 10))
    assert threshold_profile(full, (1.0,)).sums[0] == pytest.approx(1.0, abs=1e-12)


def test_threshold_profile_strictly_decreasing():
    gs = cantor_set(CantorSpec(3, (0, 2), 8))
    profile = threshold_profile(gs, tuple(i / 10 for i in range(11)))
    assert all(a > b for a, b in zip(profile.sums, profile.sums[1:]))


def test_threshold_profile_validation():
    gs = cantor_set(CantorSpec(3, (0, 2), 4))
    with pytest.raises(DomainError):
        threshold_profile(gs, (0.5, 0.4))
    with pytest.raises(DomainError):
        threshold_profile(gs, (0.5, 1.2))


def test_threshold_profile_csv():
    gs = cantor_set(CantorSpec(3, (0, 2), 4))
    text = threshold_profile(gs, (0.25, 0.75)).to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == "beta,sum"
    assert len(lines) == 3
