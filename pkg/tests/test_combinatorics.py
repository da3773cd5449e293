import itertools

import pytest
from hypothesis import given, strategies as st

from schurdyn.combinatorics import (
    PlanePartition, PlanePartitionShape, conjugate, count_gt_patterns, diagonal_slices,
    from_slices, gt_patterns, interlaces, interlacing_below, is_gt_pattern, partition,
    partitions_in_box, signature_interlaces, signatures_in_range, up_steps, volume,
)

# 4x3 box with back wall (2,1,1,0); rows listed top to bottom, None on the wall
FIG_SHAPE = PlanePartitionShape(4, 3, (2, 1, 1, 0))
FIG_GRID = [[None, None, 8], [None, 10, 6], [None, 5, 2], [4, 3, 1]]


def fig_pp():
    return PlanePartition.from_grid(FIG_SHAPE, FIG_GRID)


def test_partition_canonical_form():
    assert partition((3, 1, 0, 0)) == (3, 1)
    assert partition(()) == ()
    with pytest.raises(ValueError):
        partition((1, 2))
    with pytest.raises(ValueError):
        partition((1, -1))


@pytest.mark.parametrize("mu, nu, expected", [
    ((5, 1), (10, 2), True),
    ((), (), True),
    ((3,), (2,), False),
    ((2, 2), (2, 1), False),
    ((1,), (2, 1), True),
])
def test_interlaces(mu, nu, expected):
    assert interlaces(mu, nu) is expected


def test_signature_interlaces():
    assert signature_interlaces((3,), (4, -1))
    assert signature_interlaces((5, 0, -5), (5, 1, -2, -7))
    assert not signature_interlaces((5,), (4, -1))
    with pytest.raises(ValueError):
        signature_interlaces((0,), (1, 2))
    with pytest.raises(ValueError):
        signature_interlaces((0,), (0,))


@pytest.mark.parametrize("A, B, pi, expected", [
    (4, 3, (2, 1, 1, 0), {1, 3, 4, 6}),
    (1, 1, (), {1}),
    (2, 2, (2, 2), {3, 4}),
    (3, 2, (), {1, 2, 3}),
])
def test_up_steps(A, B, pi, expected):
    assert up_steps(PlanePartitionShape(A, B, pi)) == expected


def test_figure_slices_and_volume():
    pp = fig_pp()
    assert diagonal_slices(pp) == ((), (4,), (3,), (5, 1), (10, 2), (6,), (8,), ())
    assert volume(pp) == 39
    assert from_slices(diagonal_slices(pp), FIG_SHAPE) == pp


def test_small_slices():
    sh = PlanePartitionShape(2, 2)
    pp = PlanePartition.from_grid(sh, [[2, 1], [1, 0]])
    assert diagonal_slices(pp) == ((), (1,), (2,), (1,), ())
    assert volume(pp) == 4
    assert from_slices([(), (1,), (2, 0), (1,), ()], sh) == pp
    one = PlanePartitionShape(1, 1)
    assert diagonal_slices(PlanePartition.from_grid(one, [[3]])) == ((), (3,), ())


def test_zero_filling():
    pp = PlanePartition.zero(FIG_SHAPE)
    assert all(s == () for s in diagonal_slices(pp))
    assert volume(pp) == 0
    assert from_slices([()] * 8, FIG_SHAPE) == pp


def test_from_slices_rejects_bad_input():
    sh = PlanePartitionShape(2, 2)
    with pytest.raises(ValueError):
        from_slices([(), (1,), (3,), (5,), ()], sh)
    with pytest.raises(ValueError):
        from_slices([(), (1,), (1, 1, 1), (1,), ()], sh)
    with pytest.raises(ValueError):
        from_slices([(1,), (1,), (1,), (1,), ()], sh)


def test_plane_partition_validation():
    sh = PlanePartitionShape(2, 2)
    with pytest.raises(ValueError):
        PlanePartition.from_grid(sh, [[1, 2], [0, 0]])
    with pytest.raises(ValueError):
        PlanePartition.from_grid(sh, [[1, 1], [2, 0]])
    with pytest.raises(ValueError):
        PlanePartitionShape(2, 2, (3,))


@st.composite
def plane_partitions(draw):
    A = draw(st.integers(1, 3))
    B = draw(st.integers(1, 3))
    pi = sorted(draw(st.lists(st.integers(0, B), min_size=A, max_size=A)), reverse=True)
    shape = PlanePartitionShape(A, B, tuple(pi))
    # fill from bottom-right so monotonicity holds by construction
    grid = [[0] * B for _ in range(A)]
    for i in reversed(range(A)):
        for j in reversed(range(shape.row_start(i), B)):
            lo = max(grid[i][j + 1] if j + 1 < B else 0,
                     grid[i + 1][j] if i + 1 < A and j >= shape.row_start(i + 1) else 0)
            grid[i][j] = lo + draw(st.integers(0, 3))
    return PlanePartition.from_grid(shape, grid)


@given(plane_partitions())
def test_slices_round_trip(pp):
    slices = diagonal_slices(pp)
    assert from_slices(slices, pp.shape) == pp
    assert volume(pp) == sum(sum(s) for s in slices)
    ups = up_steps(pp.shape)
    for j in range(1, len(slices)):
        lo, hi = slices[j - 1], slices[j]
        assert interlaces(lo, hi) if j in ups else interlaces(hi, lo)


@given(st.integers(1, 5), st.integers(1, 5), st.data())
def test_up_steps_shape(A, B, data):
    pi = sorted(data.draw(st.lists(st.integers(0, B), min_size=A, max_size=A)), reverse=True)
    sh = PlanePartitionShape(A, B, tuple(pi))
    labels = [A + (pi[i]) - (i + 1) + 1 for i in range(A)]
    assert len(up_steps(sh)) == A
    assert all(1 <= x <= A + B for x in labels)
    assert all(labels[i] > labels[i + 1] for i in range(A - 1))


def test_count_gt_patterns_examples():
    assert count_gt_patterns((1, 0)) == 2
    assert count_gt_patterns((7,)) == 1
    top = (5, 1, -2, -7)
    assert count_gt_patterns(top) == sum(1 for _ in gt_patterns(top))


def test_count_gt_patterns_exhaustive():
    for n in range(1, 5):
        for top in signatures_in_range(n, -4 if n < 4 else -2, 4 if n < 4 else 2):
            pats = list(gt_patterns(top))
            assert len(pats) == count_gt_patterns(top)
            assert all(is_gt_pattern(p) for p in pats)


def test_is_gt_pattern():
    assert is_gt_pattern([(3,), (4, -1), (5, 0, -5), (5, 1, -2, -7)])
    assert not is_gt_pattern([(3,), (2, -1)])
    assert not is_gt_pattern([(3, 1)])


def test_enumerators():
    box = list(partitions_in_box(2, 2))
    assert sorted(box) == sorted([(), (1,), (2,), (1, 1), (2, 1), (2, 2)])
    assert sorted(interlacing_below((2, 1))) == sorted([(2, 1), (2,), (1, 1), (1,)])
    assert conjugate((3, 1)) == (2, 1, 1)
    assert conjugate(()) == ()


@given(st.lists(st.integers(0, 6), max_size=5))
def test_conjugate_involution(parts):
    lam = partition(sorted(parts, reverse=True))
    assert conjugate(conjugate(lam)) == lam
    assert sum(conjugate(lam)) == sum(lam)
