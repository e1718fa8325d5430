import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from accucore.core import (
    DimensionError,
    InputError,
    SegmentQuery,
    WeightError,
    WeightedSet,
    eval_lms,
    eval_max_distance,
    eval_monotonic_max,
    eval_quadratic_form,
    eval_segment_loss,
    eval_sq_dist_sum,
    eval_subspace_distance,
    eval_weighted_sum,
)
from accucore.coresets import weighted_one_center_counterexample


finite = st.floats(-100, 100, allow_nan=False, allow_infinity=False)


@st.composite
def weighted_sets(draw, max_n=12, max_d=4, nonnegative=False):
    n = draw(st.integers(1, max_n))
    d = draw(st.integers(1, max_d))
    pts = draw(arrays(float, (n, d), elements=finite))
    lo = 0.0 if nonnegative else -10.0
    w = draw(arrays(float, (n,), elements=st.floats(lo, 10.0)))
    return WeightedSet(pts, w, nonnegative=nonnegative)


class TestWeightedSet:
    def test_defaults_and_shape(self):
        P = WeightedSet([1.0, 5.0, 2.0])
        assert P.points.shape == (3, 1)
        assert np.array_equal(P.weights, np.ones(3))
        assert (P.n, P.d, len(P)) == (3, 1, 3)
        assert P.total_weight == 3.0

    def test_arrays_are_copied_and_frozen(self):
        pts = np.zeros((2, 2))
        P = WeightedSet(pts, [1, 2])
        pts[0, 0] = 7.0
        assert P.points[0, 0] == 0.0
        with pytest.raises(ValueError):
            P.points[0, 0] = 1.0
        with pytest.raises(ValueError):
            P.weights[0] = 1.0

    @pytest.mark.parametrize(
        "points, weights, err",
        [
            (np.zeros((0, 2)), None, DimensionError),
            (np.zeros((2, 0)), None, DimensionError),
            (np.zeros((2, 2, 2)), None, DimensionError),
            (np.zeros((3, 2)), [1, 2], DimensionError),
            ([[np.nan, 0.0]], None, InputError),
            ([[np.inf, 0.0]], None, InputError),
            ([[0.0, 0.0]], [np.nan], InputError),
        ],
    )
    def test_rejects_bad_input(self, points, weights, err):
        with pytest.raises(err):
            WeightedSet(points, weights)

    def test_nonnegative_flag(self):
        WeightedSet([[1.0], [2.0]], [-1.0, 2.0])
        with pytest.raises(WeightError):
            WeightedSet([[1.0], [2.0]], [-1.0, 2.0], nonnegative=True)
        P = WeightedSet([[1.0], [2.0]], [0.0, 2.0])
        assert P.require_nonnegative().nonnegative

    def test_subset(self):
        P = WeightedSet([[0.0], [1.0], [2.0]], [1.0, 2.0, 3.0])
        S = P.subset([2, 0])
        assert np.array_equal(S.points[:, 0], [2.0, 0.0])
        assert np.array_equal(S.weights, [3.0, 1.0])
        assert np.array_equal(P.subset([1], weights=[9.0]).weights, [9.0])


class TestSegmentQuery:
    def test_evaluation(self):
        g = SegmentQuery([1.0, 0.0], [2.0, -1.0])
        assert np.array_equal(g(3.0), [7.0, -3.0])
        assert np.array_equal(g(np.array([0.0, 1.0])), [[1.0, 0.0], [3.0, -1.0]])
        assert g.d == 2

    def test_invalid(self):
        with pytest.raises(DimensionError):
            SegmentQuery([1.0], [1.0, 2.0])
        with pytest.raises(InputError):
            SegmentQuery([np.nan], [1.0])


class TestMaxDistance:
    def test_examples(self):
        assert eval_max_distance(WeightedSet([1, 5, 2, 3]), [0]) == 5
        assert eval_max_distance(WeightedSet([[0, 0], [2, 2]]), [2, 2]) == pytest.approx(math.sqrt(8), rel=1e-15)

    def test_counterexample_value(self):
        P, _ = weighted_one_center_counterexample(3)
        # w_1 |p_1 - x_1| = 2 * |8 + 31|
        assert eval_max_distance(P, [-31.0]) == pytest.approx(78.0, rel=1e-12)

    def test_errors(self):
        P = WeightedSet([[0.0, 1.0]])
        with pytest.raises(DimensionError):
            eval_max_distance(P, [1.0])
        with pytest.raises(InputError):
            eval_max_distance(P, [np.nan, 0.0])

    @given(weighted_sets(), st.integers(0, 2**31))
    def test_translation_invariance(self, P, seed):
        r = np.random.default_rng(seed)
        P = WeightedSet(P.points)
        x = r.standard_normal(P.d)
        shift = r.standard_normal(P.d) * 10
        base = eval_max_distance(P, x)
        moved = eval_max_distance(WeightedSet(P.points + shift), x + shift)
        assert abs(base - moved) <= 1e-12 * max(base, 1.0) + 1e-12 * (np.abs(P.points).max() + 10 * np.abs(shift).max())


class TestMonotonicMax:
    def test_examples(self):
        assert eval_monotonic_max(WeightedSet([-2, 0, 3]), lambda y: y * y) == 9
        assert eval_monotonic_max(WeightedSet([1, 2, 4]), lambda y: -y) == -1
        assert eval_monotonic_max(WeightedSet([0, 1, 2, 5]), lambda y: min(1.0, (y - 1.5) ** 2)) == 1

    def test_requires_line(self):
        with pytest.raises(DimensionError):
            eval_monotonic_max(WeightedSet([[0.0, 1.0]]), lambda y: y)


class TestWeightedSum:
    def test_examples(self):
        P = WeightedSet([[1, 0], [0, 1], [2, 3]])
        assert np.array_equal(eval_weighted_sum(P, [0, 0]), [3, 4])
        assert np.array_equal(eval_weighted_sum(WeightedSet([[1, 1]], [2]), [0, 1]), [2, 0])

    def test_zero_at_weighted_mean(self, rng):
        P = WeightedSet(rng.standard_normal((9, 3)), rng.uniform(0.1, 2, 9))
        mean = P.weights @ P.points / P.total_weight
        assert np.linalg.norm(eval_weighted_sum(P, mean)) <= 1e-12 * np.abs(P.weights) @ np.abs(P.points).sum(axis=1)


class TestSqDistSum:
    def test_examples(self):
        assert eval_sq_dist_sum(WeightedSet([1, 2, 3]), [0]) == 14
        assert eval_sq_dist_sum(WeightedSet([1, 2, 3], [1 / 3] * 3), [2]) == pytest.approx(2 / 3, rel=1e-15)
        assert eval_sq_dist_sum(WeightedSet([[1.5, -2.0]], [7.0]), [1.5, -2.0]) == 0

    @given(st.integers(0, 2**31))
    def test_moment_expansion(self, seed):
        r = np.random.default_rng(seed)
        n, d = int(r.integers(1, 50)), int(r.integers(1, 7))
        P = WeightedSet(r.standard_normal((n, d)) * 3, r.uniform(0, 2, n))
        x = r.standard_normal(d)
        expanded = (
            P.weights @ np.sum(P.points**2, axis=1)
            + (x @ x) * P.total_weight
            - 2 * x @ (P.weights @ P.points)
        )
        direct = eval_sq_dist_sum(P, x)
        assert abs(direct - expanded) <= 1e-9 * max(abs(direct), 1e-12)


class TestSegmentLoss:
    def test_examples(self):
        perfect = SegmentQuery([0.0], [1.0])
        flat = SegmentQuery([0.0], [0.0])
        P = WeightedSet([[0, 0], [1, 1]])
        assert eval_segment_loss(P, perfect) == 0
        assert eval_segment_loss(P, flat) == 1
        assert eval_segment_loss(WeightedSet([[0, 1], [2, 1]], [1, 3]), perfect) == 4

    def test_errors(self):
        with pytest.raises(DimensionError):
            eval_segment_loss(WeightedSet([1.0, 2.0]), SegmentQuery([0.0], [0.0]))
        with pytest.raises(DimensionError):
            eval_segment_loss(WeightedSet([[0, 1, 2]]), SegmentQuery([0.0], [0.0]))


class TestQuadraticForm:
    def test_examples(self):
        assert eval_quadratic_form(WeightedSet(np.eye(2)), [3, 4]) == 25
        assert eval_quadratic_form(WeightedSet([[1, 2], [3, 4]]), [0, 0]) == 0
        assert eval_quadratic_form(WeightedSet([[1, 2]], [2]), [1, 1]) == 18

    def test_dimension(self):
        with pytest.raises(DimensionError):
            eval_quadratic_form(WeightedSet(np.eye(2)), [1, 2, 3])


class TestSubspaceDistance:
    def test_examples(self):
        assert eval_subspace_distance(WeightedSet(np.eye(3)), [[1], [0], [0]]) == pytest.approx(2, rel=1e-14)
        assert eval_subspace_distance(WeightedSet([[1, 1]]), [[1], [0]]) == pytest.approx(1, rel=1e-14)
        S = np.array([[1, 0], [0, 1], [0, 0]], dtype=float)
        inside = WeightedSet([[1, 2, 0], [-3, 4, 0]], [2, 5])
        assert abs(eval_subspace_distance(inside, S)) <= 1e-12

    def test_errors(self):
        P = WeightedSet(np.eye(3))
        with pytest.raises(InputError):
            eval_subspace_distance(P, [[2], [0], [0]])
        with pytest.raises(DimensionError):
            eval_subspace_distance(P, np.eye(3))
        with pytest.raises(DimensionError):
            eval_subspace_distance(P, [[1], [0]])

    @given(weighted_sets(max_d=5, nonnegative=True), st.integers(0, 2**31))
    def test_pythagoras(self, P, seed):
        if P.d < 2:
            return
        r = np.random.default_rng(seed)
        j = int(r.integers(1, P.d))
        S = np.linalg.qr(r.standard_normal((P.d, j)))[0]
        dist = eval_subspace_distance(P, S)
        inside = P.weights @ np.sum((P.points @ S) ** 2, axis=1)
        total = P.weights @ np.sum(P.points**2, axis=1)
        assert abs(dist + inside - total) <= 1e-9 * max(total, 1e-12)


class TestLms:
    def test_examples(self):
        assert eval_lms(WeightedSet([[1, 1], [2, 2]]), [1]) == 0
        assert eval_lms(WeightedSet([[1, 0]], [4]), [1]) == 4
        assert eval_lms(WeightedSet([[1, 1], [1, 3]]), [2]) == 2

    def test_errors(self):
        with pytest.raises(DimensionError):
            eval_lms(WeightedSet([1.0, 2.0]), [])
        with pytest.raises(DimensionError):
            eval_lms(WeightedSet([[1, 2, 3]]), [1.0])


@given(weighted_sets(nonnegative=True), st.integers(0, 2**31))
def test_evaluators_are_deterministic(P, seed):
    x = np.random.default_rng(seed).standard_normal(P.d)
    for f in (eval_max_distance, eval_sq_dist_sum, eval_quadratic_form):
        assert f(P, x) == f(P, x)
    assert np.array_equal(eval_weighted_sum(P, x), eval_weighted_sum(P, x))
