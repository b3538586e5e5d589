import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractal_lab.errors import CapacityError, DomainError
from fractal_lab.grid import (
    CantorSpec,
    GridSet,
    GridSpec,
    cantor_set,
    coarsen,
    hausdorff_sum,
    scale_counts,
)

LOG23 = math.log(2) / math.log(3)


@st.composite
def grid_sets(draw, max_depth=8, max_cells=64):
    base = draw(st.sampled_from([2, 3]))
    depth = draw(st.integers(0, max_depth))
    size = base**depth
    cells = draw(st.sets(st.integers(0, size - 1), max_size=min(size, max_cells)))
    return GridSet(GridSpec(base, depth), np.array(sorted(cells), dtype=np.int64))


def brute_counts(gs):
    # independent oracle: project index sets through python sets
    out = []
    for level in range(gs.depth + 1):
        width = gs.base ** (gs.depth - level)
        out.append(len({int(c) // width for c in gs.cells}))
    return out


# -- cantor_set ---------------------------------------------------------


def test_cantor_level1_triadic():
    gs = cantor_set(CantorSpec(3, (0, 2), 1))
    assert list(gs.cells) == [0, 2]
    assert gs.count == 2


def test_cantor_full_digit_set_keeps_everything():
    gs = cantor_set(CantorSpec(3, (0, 1, 2), 4))
    assert gs.count == 81
    assert list(gs.cells) == list(range(81))


def test_cantor_depth3_matches_digit_enumeration():
    gs = cantor_set(CantorSpec(3, (0, 2), 3))
    # oracle: enumerate all 3-digit base-3 strings over {0,2}
    expect = sorted(
        d0 * 9 + d1 * 3 + d2 for d0, d1, d2 in itertools.product((0, 2), repeat=3)
    )
    assert list(gs.cells) == expect == [0, 2, 6, 8, 18, 20, 24, 26]


def test_cantor_count_law():
    for depth in range(0, 9):
        assert cantor_set(CantorSpec(3, (0, 2), depth)).count == 2**depth


def test_cantor_capacity_guard():
    with pytest.raises(CapacityError):
        cantor_set(CantorSpec(2, (0, 1), 27))


def test_cantor_spec_validation():
    with pytest.raises(DomainError):
        CantorSpec(3, (), 2)
    with pytest.raises(DomainError):
        CantorSpec(3, (0, 3), 2)
    with pytest.raises(DomainError):
        CantorSpec(1, (0,), 2)


# -- coarsen ------------------------------------------------------------


def test_coarsen_example():
    gs = GridSet(GridSpec(3, 2), np.array([0, 2, 6, 8]))
    assert list(coarsen(gs, 1).cells) == [0, 2]


def test_coarsen_identity_and_empty():
    gs = cantor_set(CantorSpec(3, (0, 2), 4))
    assert coarsen(gs, 4) == gs
    empty = GridSet(GridSpec(3, 4), np.array([], dtype=np.int64))
    assert coarsen(empty, 2).count == 0


def test_coarsen_range_errors():
    gs = cantor_set(CantorSpec(3, (0, 2), 4))
    with pytest.raises(DomainError):
        coarsen(gs, 5)
    with pytest.raises(DomainError):
        coarsen(gs, -1)


@settings(max_examples=60)
@given(grid_sets(), st.data())
def test_coarsen_composition(gs, data):
    a = data.draw(st.integers(0, gs.depth))
    b = data.draw(st.integers(0, a))
    assert coarsen(coarsen(gs, a), b) == coarsen(gs, b)


# -- scale_counts -------------------------------------------------------


def test_scale_counts_cantor_depth5():
    gs = cantor_set(CantorSpec(3, (0, 2), 5))
    counts = scale_counts(gs)
    assert counts == [1, 2, 4, 8, 16, 32]
    assert counts == brute_counts(gs)


def test_scale_counts_full_and_singleton():
    full = cantor_set(CantorSpec(2, (0, 1), 3))
    assert scale_counts(full) == [1, 2, 4, 8]
    single = GridSet(GridSpec(2, 3), np.array([5]))
    assert scale_counts(single) == [1, 1, 1, 1]


@settings(max_examples=60)
@given(grid_sets())
def test_scale_counts_matches_oracle_and_invariants(gs):
    counts = scale_counts(gs)
    assert counts == brute_counts(gs)
    assert counts[0] in (0, 1)
    assert counts[gs.depth] == gs.count
    for m in range(gs.depth):
        assert counts[m] <= counts[m + 1] <= gs.base * counts[m]
        assert counts[m] <= min(gs.count, gs.base**m)


@settings(max_examples=40)
@given(grid_sets(), st.integers(1, 10**6))
def test_translation_invariance_of_finest_count(gs, shift):
    size = gs.spec.size
    shifted = np.sort((gs.cells + shift % size) % size)
    translated = GridSet(gs.spec, shifted)
    assert scale_counts(translated)[gs.depth] == scale_counts(gs)[gs.depth]


# -- hausdorff_sum ------------------------------------------------------


def test_hausdorff_sum_cantor_critical_beta_is_one():
    for depth in (1, 4, 8, 12):
        gs = cantor_set(CantorSpec(3, (0, 2), depth))
        assert hausdorff_sum(gs, LOG23, depth) == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_sum_full_set_beta_one():
    gs = cantor_set(CantorSpec(2, (0, 1), 10))
    assert hausdorff_sum(gs, 1.0, 10) == pytest.approx(1.0, abs=1e-12)


def test_hausdorff_sum_cantor_beta_one_closed_form():
    gs = cantor_set(CantorSpec(3, (0, 2), 10))
    assert hausdorff_sum(gs, 1.0, 10) == pytest.approx(1024 / 59049, rel=1e-12)


def test_hausdorff_sum_empty_and_errors():
    empty = GridSet(GridSpec(2, 4), np.array([], dtype=np.int64))
    assert hausdorff_sum(empty, 0.5, 4) == 0.0
    gs = cantor_set(CantorSpec(2, (0, 1), 4))
    with pytest.raises(DomainError):
        hausdorff_sum(gs, 1.5, 4)
    with pytest.raises(DomainError):
        hausdorff_sum(gs, 0.5, 5)


@settings(max_examples=40)
@given(grid_sets(), st.data())
def test_hausdorff_sum_strictly_decreasing_in_beta(gs, data):
    if gs.count == 0 or gs.depth == 0:
        return
    level = data.draw(st.integers(1, gs.depth))
    b1 = data.draw(st.floats(0.0, 0.89))
    b2 = b1 + 0.1
    assert hausdorff_sum(gs, b1, level) > hausdorff_sum(gs, b2, level)


# -- capacity and validation -------------------------------------------


def test_grid_spec_capacity():
    GridSpec(2, 63)
    with pytest.raises(CapacityError):
        GridSpec(2, 64)
    with pytest.raises(DomainError):
        GridSpec(2, -1)


def test_grid_set_validation():
    spec = GridSpec(2, 3)
    with pytest.raises(DomainError):
        GridSet(spec, np.array([3, 1]))
    with pytest.raises(DomainError):
        GridSet(spec, np.array([1, 1]))
    with pytest.raises(DomainError):
        GridSet(spec, np.array([8]))
    with pytest.raises(DomainError):
        GridSet(spec, np.array([-1]))


def test_grid_set_immutability():
    gs = cantor_set(CantorSpec(3, (0, 2), 2))
    with pytest.raises(ValueError):
        gs.cells[0] = 5


# -- serialization ------------------------------------------------------


@settings(max_examples=40)
@given(grid_sets(max_depth=12, max_cells=40))
def test_serialization_round_trip(gs):
    assert GridSet.from_json(gs.to_json()) == gs
    assert GridSet.from_binary(gs.to_binary()) == gs


def test_binary_round_trip_deep_sparse():
    gs = GridSet(GridSpec(2, 45), np.array([0, 1, 2**44, 2**45 - 1]))
    blob = gs.to_binary()
    assert GridSet.from_binary(blob) == gs


def test_binary_trailing_bytes_rejected():
    gs = cantor_set(CantorSpec(3, (0, 2), 2))
    with pytest.raises(DomainError):
        GridSet.from_binary(gs.to_binary() + b"\x00")
