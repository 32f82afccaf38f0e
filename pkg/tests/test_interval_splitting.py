from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftlab.interval_splitting import (
    INITIAL,
    LEFT,
    RIGHT,
    LeftRightDependent,
    Plain,
    SplitState,
    run,
    run_and_discrepancy,
    split_step,
    star_discrepancy,
)

F = Fraction


def naive_run(variant, steps):
    state = SplitState.initial(variant)
    for _ in range(steps):
        state = split_step(state)
    return state


def brute_discrepancy(points):
    """sup over t of |#{x < t}/N - t|, checked just left and right of each point."""
    xs = sorted(points)
    N = len(xs)
    best = F(0)
    for i, x in enumerate(xs):
        below = sum(1 for y in xs if y < x)
        upto = sum(1 for y in xs if y <= x)
        best = max(best, abs(F(below, N) - x), abs(F(upto, N) - x))
    return best


class TestSplitStep:
    def test_first_half(self):
        assert split_step(SplitState.initial(F(1, 2))).points == [F(1, 2)]

    def test_two_steps_third(self):
        s1 = split_step(SplitState.initial(F(1, 3)))
        s2 = split_step(s1)
        assert s1.points == [F(1, 3)] and s2.points == [F(1, 3), F(5, 9)]

    def test_tags(self):
        s = split_step(SplitState.initial(F(1, 3)))
        assert s.intervals[0][2] == LEFT and s.intervals[1][2] == RIGHT
        assert SplitState.initial(F(1, 3)).intervals[0][2] == INITIAL

    def test_leftmost_tie(self):
        s = split_step(split_step(SplitState.initial(F(1, 2))))
        assert s.points == [F(1, 4), F(1, 2)]

    def test_pure(self):
        s = SplitState.initial(F(1, 3))
        split_step(s)
        assert s.points == []

    @pytest.mark.parametrize("bad", [0, 1, F(3, 2), -0.1])
    def test_bad_fraction(self, bad):
        with pytest.raises(ValueError):
            SplitState.initial(bad)

    def test_negative_steps(self):
        with pytest.raises(ValueError):
            run(F(1, 3), -1)


class TestRun:
    @pytest.mark.parametrize("alpha", [F(1, 3), F(2, 7), F(1, 2)])
    def test_heap_matches_naive(self, alpha):
        for steps in range(40):
            assert run(alpha, steps).intervals == naive_run(alpha, steps).intervals

    def test_lr_equal_parameters(self):
        for steps in range(30):
            a = run(LeftRightDependent(F(1, 2), F(1, 2)), steps).points
            assert a == run(Plain(F(1, 2)), steps).points

    def test_lr_matches_naive(self):
        v = LeftRightDependent(F(1, 3), F(3, 5))
        for steps in range(40):
            assert run(v, steps).intervals == naive_run(v, steps).intervals

    def test_lr_initial_counts_as_left(self):
        assert run(LeftRightDependent(F(1, 4), F(2, 3)), 1).points == [F(1, 4)]

    def test_lengths_sum_to_one(self):
        for v in (F(1, 3), LeftRightDependent(F(1, 3), F(2, 3))):
            assert sum(run(v, 500).lengths) == 1

    def test_distinct_lengths(self):
        for steps in (10, 100, 1000):
            assert len(set(run(F(1, 3), steps).lengths)) <= steps + 1

    def test_float_mode(self):
        # rounding can break exact ties the other way, which moves points but
        # not the multiset of lengths under the plain rule
        got = run(1 / 3, 200, exact=False)
        exact = run(F(1, 3), 200)
        assert all(isinstance(p, float) for p in got.points)
        pairs = zip(sorted(got.lengths), sorted(exact.lengths))
        assert max(abs(a - float(b)) for a, b in pairs) < 1e-12

    def test_float_dyadic_exact(self):
        assert run(0.5, 63, exact=False).points == [float(p) for p in run(F(1, 2), 63).points]

    def test_deterministic(self):
        assert run(F(2, 5), 300).points == run(F(2, 5), 300).points


class TestDiscrepancy:
    def test_single_point(self):
        assert star_discrepancy([F(1, 3)]) == F(2, 3)
        _, d = run_and_discrepancy(F(1, 3), 1)
        assert d == max(F(1, 3), 1 - F(1, 3))

    def test_empty(self):
        with pytest.raises(ValueError):
            star_discrepancy([])

    @pytest.mark.parametrize("k", range(1, 7))
    def test_dyadic(self, k):
        N = 2 ** k - 1
        state, d = run_and_discrepancy(F(1, 2), N)
        assert state.points == [F(j, 2 ** k) for j in range(1, 2 ** k)]
        assert d == F(1, 2 ** k)

    @given(st.lists(st.fractions(0, 1), min_size=1, max_size=25))
    @settings(max_examples=100, deadline=None)
    def test_matches_brute_force(self, pts):
        assert star_discrepancy(pts) == brute_discrepancy(pts)

    def test_float_points(self):
        assert star_discrepancy([0.25, 0.75]) == pytest.approx(0.25)

    def test_third_decreases(self):
        d = {N: run_and_discrepancy(F(1, 3), N)[1] for N in (100, 1000)}
        assert d[1000] < d[100]

    def test_steps_positive(self):
        with pytest.raises(ValueError):
            run_and_discrepancy(F(1, 3), 0)
