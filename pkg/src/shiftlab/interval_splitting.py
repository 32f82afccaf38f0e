"""Kakutani interval splitting of [0, 1].

At every step the longest interval (leftmost among ties) is cut at the
fraction ``alpha`` of its length. In the left/right variant the fraction
depends on whether the interval was born as the left or the right piece of
its parent.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

INITIAL, LEFT, RIGHT = "Initial", "Left", "Right"


@dataclass(frozen=True)
class Plain:
    alpha: object

    def fraction(self, tag: str):
        return self.alpha


@dataclass(frozen=True)
class LeftRightDependent:
    """Cut fraction ``alpha_left`` for left-born pieces, ``alpha_right`` for
    right-born ones. The initial interval counts as left-born."""

    alpha_left: object
    alpha_right: object

    def fraction(self, tag: str):
        return self.alpha_right if tag == RIGHT else self.alpha_left


def _number(v, exact: bool):
    if exact:
        return Fraction(repr(v)) if isinstance(v, float) else Fraction(v)
    return float(v)


def _variant(spec, exact: bool):
    if isinstance(spec, Plain):
        v = Plain(_number(spec.alpha, exact))
    elif isinstance(spec, LeftRightDependent):
        v = LeftRightDependent(_number(spec.alpha_left, exact), _number(spec.alpha_right, exact))
    else:
        v = Plain(_number(spec, exact))
    for a in (v.fraction(LEFT), v.fraction(RIGHT)):
        if not 0 < a < 1:
            raise ValueError("split fractions must lie strictly between 0 and 1")
    return v


@dataclass(frozen=True)
class SplitState:
    """Intervals ``(left, right, tag)`` in increasing order plus the rule."""

    intervals: tuple[tuple[object, object, str], ...]
    variant: Plain | LeftRightDependent

    @classmethod
    def initial(cls, variant, exact: bool = True) -> "SplitState":
        v = _variant(variant, exact)
        zero, one = (Fraction(0), Fraction(1)) if exact else (0.0, 1.0)
        return cls(((zero, one, INITIAL),), v)

    @property
    def points(self) -> list:
        """Division points inside ``(0, 1)`` in increasing order."""
        return [iv[0] for iv in self.intervals[1:]]

    @property
    def lengths(self) -> list:
        return [r - l for l, r, _ in self.intervals]


def _cut(left, right, tag, variant):
    a = variant.fraction(tag)
    mid = left + a * (right - left)
    return (left, mid, LEFT), (mid, right, RIGHT)


def split_step(state: SplitState) -> SplitState:
    """Split the longest interval (leftmost on ties); returns a new state."""
    best = max(range(len(state.intervals)),
               key=lambda k: (state.intervals[k][1] - state.intervals[k][0], -k))
    l, r, tag = state.intervals[best]
    a, b = _cut(l, r, tag, state.variant)
    ivs = state.intervals[:best] + (a, b) + state.intervals[best + 1:]
    return SplitState(ivs, state.variant)


def run(variant, steps: int, exact: bool = True) -> SplitState:
    """State after ``steps`` splits, starting from ``[0, 1]``.

    With ``exact=False`` lengths that are equal in exact arithmetic may round
    apart, so ties can be broken differently from the exact run.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    state = SplitState.initial(variant, exact)
    v = state.variant
    l0, r0, t0 = state.intervals[0]
    heap = [(-(r0 - l0), l0, r0, t0)]
    for _ in range(steps):
        _, l, r, tag = heapq.heappop(heap)
        for cl, cr, ct in _cut(l, r, tag, v):
            heapq.heappush(heap, (-(cr - cl), cl, cr, ct))
    ivs = tuple(sorted(((l, r, t) for _, l, r, t in heap), key=lambda iv: iv[0]))
    return SplitState(ivs, v)


def star_discrepancy(points: Sequence) -> object:
    """``max_i max(i/N - x_(i), x_(i) - (i-1)/N)`` over the sorted points.

    Exact when the points are Fractions.
    """
    xs = sorted(points)
    N = len(xs)
    if N == 0:
        raise ValueError("no points")
    exact = all(isinstance(x, (int, Fraction)) for x in xs)
    best = 0
    for i, x in enumerate(xs, 1):
        hi = Fraction(i, N) if exact else i / N
        lo = Fraction(i - 1, N) if exact else (i - 1) / N
        best = max(best, hi - x, x - lo)
    return best


def run_and_discrepancy(variant, steps: int, exact: bool = True) -> tuple[SplitState, object]:
    """Run ``steps`` splits; return the state and the star discrepancy of its
    ``steps`` division points."""
    if steps < 1:
        raise ValueError("steps must be at least 1")
    state = run(variant, steps, exact)
    return state, star_discrepancy(state.points)
