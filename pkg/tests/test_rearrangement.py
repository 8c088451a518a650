import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fracweight.grid import build_disk, build_interval, build_rectangle
from fracweight.rearrangement import (
    WeightClass,
    decreasing_rearrangement,
    distribution_function,
    equimeasurable,
    linear_maximize,
    linear_minimize,
    majorizes,
    parse_weights,
    steiner_symmetrize,
    symmetry_error,
)

small_ints = st.integers(-5, 5).map(float)
vectors = st.integers(1, 9).flatmap(lambda n: arrays(float, n, elements=small_ints))


def permutations(values):
    return {p for p in itertools.permutations(values)}


# distribution function and rearrangement


def test_distribution_function_examples():
    f = (2, -1, 3)
    assert distribution_function(f, 0, 1 / 3) == pytest.approx(2 / 3)
    assert distribution_function(f, -10, 1 / 3) == pytest.approx(1.0)
    assert distribution_function(f, 3, 1 / 3) == 0.0


def test_decreasing_rearrangement_example():
    fs = decreasing_rearrangement((2, -1, 3), 1 / 3)
    np.testing.assert_allclose(fs.breakpoints, [0, 1 / 3, 2 / 3, 1])
    np.testing.assert_array_equal(fs.values, [3, 2, -1])
    assert fs(0.0) == 3 and fs(1 / 3) == 2 and fs(0.9) == -1
    assert fs.integral() == pytest.approx(4 / 3)


@given(vectors, st.floats(-6, 6))
def test_rearrangement_preserves_distribution(f, t):
    fs = decreasing_rearrangement(f, 0.5)
    assert distribution_function(fs.values, t, 0.5) == distribution_function(f, t, 0.5)
    assert np.all(np.diff(fs.values) <= 0)


@given(vectors, st.randoms(use_true_random=False))
def test_permutation_has_same_rearrangement(f, r):
    g = f.copy()
    r.shuffle(g)
    np.testing.assert_array_equal(decreasing_rearrangement(f).values, decreasing_rearrangement(g).values)
    assert equimeasurable(f, g)


def test_equimeasurable_examples():
    assert not equimeasurable((1, 1, 0), (1, 0, 0))
    f = np.array([0.2, 0.7, -0.1])
    assert not equimeasurable(f, f + 1e-9)
    with pytest.raises(ValueError, match="grid mismatch"):
        equimeasurable((1, 2), (1, 2, 3))


# majorization


def test_majorization_examples():
    f = np.array([2.0, -1.0, 5.0, 0.0])
    assert majorizes(f, np.full(4, f.mean()))
    assert majorizes(f, f[::-1]) and majorizes(f[::-1], f)
    assert not majorizes((2, 0), (3, -1))


@given(vectors, st.floats(0, 1))
def test_convex_combinations_of_permutations_are_majorized(f, t):
    # members of the convex hull of the class
    g = t * f + (1 - t) * f[::-1]
    assert majorizes(f, g, atol=1e-9)


@given(vectors)
def test_prefix_sums_match_brute_force(f):
    if len(f) > 6:
        f = f[:6]
    g = np.full(len(f), f.mean())
    expect = all(
        sum(sorted(g, reverse=True)[:k]) <= sum(sorted(f, reverse=True)[:k]) + 1e-12 for k in range(1, len(f) + 1)
    )
    assert majorizes(f, g) == expect


# weight classes


def test_from_fractions_apportions_cells():
    w = WeightClass.from_fractions([(1, 0.25), (-1, 0.75)], 128)
    assert w.values == (1.0, -1.0) and w.counts == (32, 96)
    w = WeightClass.from_fractions([(1, 1 / 3), (0, 1 / 3), (-1, 1 / 3)], 8)
    assert w.total_cells == 8 and sorted(w.counts) == [2, 3, 3]


def test_fractions_must_sum_to_one():
    with pytest.raises(ValueError, match="fractions sum 1.1"):
        parse_weights("w:1@0.5,-1@0.6", 10)


@pytest.mark.parametrize("spec", ["1@1", "w:", "w:1", "w:a@1", "v:1@1"])
def test_bad_weight_specs(spec):
    with pytest.raises(ValueError):
        parse_weights(spec, 10)


def test_class_invariants():
    with pytest.raises(ValueError):
        WeightClass((1.0, 2.0), (1, 1))
    with pytest.raises(ValueError):
        WeightClass((1.0,), (0,))
    w = WeightClass.from_values([3, -1, 3, 0], 0.5)
    assert w.values == (3.0, 0.0, -1.0) and w.counts == (2, 1, 1)
    assert w.mass == pytest.approx(2.5)
    assert w.negated().values == (1.0, -0.0, -3.0)
    assert w.contains([0, 3, -1, 3]) and not w.contains([0, 3, 3, 3])


# linear optimization over the class


def test_linear_examples():
    w = WeightClass.from_values([-1, 0, 2])
    u = (0.1, 0.5, 0.3)
    np.testing.assert_array_equal(linear_maximize(w, u), [-1, 2, 0])
    np.testing.assert_array_equal(linear_minimize(w, u), [2, -1, 0])
    np.testing.assert_array_equal(linear_maximize(w, np.ones(3)), [-1, 0, 2])
    np.testing.assert_array_equal(linear_minimize(w, np.ones(3)), [2, 0, -1])
    np.testing.assert_array_equal(linear_maximize(WeightClass.from_values([7]), [0.3]), [7])


def test_linear_size_mismatch():
    with pytest.raises(ValueError, match="size mismatch"):
        linear_maximize(WeightClass.from_values([1, 2]), [1.0, 2.0, 3.0])


@settings(max_examples=60)
@given(arrays(float, 5, elements=small_ints), arrays(float, 5, elements=st.floats(-3, 3)))
def test_linear_optimizers_match_enumeration(values, u):
    w = WeightClass.from_values(values)
    objs = [np.dot(p, u) for p in permutations(values)]
    hi, lo = linear_maximize(w, u), linear_minimize(w, u)
    assert w.contains(hi) and w.contains(lo)
    assert np.dot(hi, u) == pytest.approx(max(objs), abs=1e-12)
    assert np.dot(lo, u) == pytest.approx(min(objs), abs=1e-12)


@given(arrays(float, 7, elements=small_ints), arrays(float, 7, elements=st.integers(0, 3).map(float)))
def test_minimize_is_maximize_of_negation(values, u):
    # with distinct u the two rules coincide exactly; ties may differ only in
    # which equal-u cell gets which value
    w = WeightClass.from_values(values)
    lo, mirror = linear_minimize(w, u), linear_maximize(w, -u)
    assert np.dot(lo, u) == np.dot(mirror, u)


# Steiner symmetrization


def test_steiner_row_example():
    g = build_interval(0, 3, 3)
    np.testing.assert_array_equal(steiner_symmetrize(g, [3, 1, 2]), [1, 3, 2])
    assert symmetry_error(g, [3, 1, 2]) == 2


def test_symmetric_decreasing_is_fixed():
    g = build_interval(-1, 1, 6)
    u = np.array([1, 2, 3, 3, 2, 1.0])
    np.testing.assert_array_equal(steiner_symmetrize(g, u), u)
    assert symmetry_error(g, u) == 0


@pytest.mark.parametrize("grid", [build_interval(-1, 1, 9), build_rectangle((2, 1), (8, 4)), build_disk(1, 11)])
def test_steiner_properties(grid, rng):
    for _ in range(20):
        u = rng.integers(0, 4, grid.n_active).astype(float)
        us = steiner_symmetrize(grid, u)
        assert equimeasurable(u, us)
        assert symmetry_error(grid, us) == 0
        np.testing.assert_array_equal(steiner_symmetrize(grid, us), us)
        # values never increase moving away from the center along a line
        centers = grid.centers
        for i in range(grid.n_active):
            same = np.flatnonzero(np.all(centers[:, 1:] == centers[i, 1:], axis=1))
            farther = same[np.abs(centers[same, 0]) > abs(centers[i, 0]) + 1e-12]
            assert np.all(us[farther] <= us[i])


def test_steiner_lines_run_along_first_axis():
    g = build_rectangle((3, 2), (3, 2))
    u = g.to_array(np.arange(6.0))
    us = g.to_array(steiner_symmetrize(g, u[g.mask]))
    # each column (fixed second index) is rearranged on its own
    for j in range(2):
        assert sorted(us[:, j]) == sorted(u[:, j])
        assert us[1, j] == u[:, j].max()


def test_hardy_littlewood_exhaustive():
    g = build_interval(-1, 1, 6)
    u = np.array([0.3, 1.0, 0.2, 0.9, 0.0, 0.5])
    v = np.array([2.0, 0.1, 0.4, 0.4, 1.0, 3.0])
    best = max(np.dot(u, p) for p in permutations(v))
    assert np.dot(steiner_symmetrize(g, u), steiner_symmetrize(g, v)) == pytest.approx(best)
