"""Adic transformations on one-sided shifts of finite type.

Points that agree from some coordinate on and whose differing prefixes have
the same symbol counts form one class of the symmetric relation. Inside a
class, points are ordered by comparing the symbol at the largest index
where they differ; the adic map sends a point to its successor in that
order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from .sft_core import (
    DEFAULT_MAX_STATES,
    EnumerationTooLarge,
    SequencePoint,
    TransitionMatrix,
    Word,
    count_words,
    is_allowed,
    iter_parikh_layers,
    layer_value,
    parikh,
)

DEFAULT_HORIZON = 64


class HorizonExceeded(RuntimeError):
    """No successor found within the horizon and maximality not certified."""


class _Maximal:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Maximal"

    def __bool__(self) -> bool:
        return False


Maximal = _Maximal()


# --------------------------------------------------------------------------
# weights
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightQuery:
    """Level ``m``, symbol counts of the length-``m`` prefix, and ``x_m``."""

    m: int
    parikh: tuple[int, ...]
    next_symbol: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "parikh", tuple(int(c) for c in self.parikh))
        if self.m < 0 or sum(self.parikh) != self.m or min(self.parikh, default=0) < 0:
            raise ValueError(f"counts {self.parikh} do not describe a word of length {self.m}")

    @classmethod
    def of(cls, x: SequencePoint, m: int, n: int) -> "WeightQuery":
        """The query attached to the first ``m`` coordinates of ``x``."""
        return cls(m, parikh(x.head(m), n), x[m])


def pascal_weight(counts: Sequence[int]) -> int:
    """Multinomial coefficient ``(sum counts)! / prod(c!)``."""
    total, out = 0, 1
    for c in counts:
        if c < 0:
            raise ValueError("counts must be nonnegative")
        total += c
        out *= math.comb(total, c)
    return out


def sft_weight(A: TransitionMatrix, q: WeightQuery, **kw) -> int:
    """Allowed words with counts ``q.parikh`` whose last symbol may precede
    ``q.next_symbol``."""
    return count_words(A, q.m, parikh=q.parikh, next_symbol=q.next_symbol, **kw)


def sft_weight_in_cylinder(A: TransitionMatrix, q: WeightQuery, C: Sequence[int], **kw) -> int:
    """As :func:`sft_weight`, restricted to words starting with ``C``."""
    C = tuple(C)
    if len(C) > q.m:
        raise ValueError("cylinder longer than the level")
    return count_words(A, q.m, parikh=q.parikh, next_symbol=q.next_symbol, prefix=C, **kw)


class WeightTable:
    """All weights up to a fixed level, for bulk queries.

    Stores the unconstrained layers and one continuation layer family per
    starting symbol, so ``w_m(y)`` and ``w_m(C, y)`` are table lookups.

    Parameters
    ----------
    A : TransitionMatrix
    t_max : int
        Largest level served.
    """

    def __init__(self, A: TransitionMatrix, t_max: int, max_states: int = DEFAULT_MAX_STATES):
        cells = (A.n + 1) * A.n * (t_max + 1) ** A.n
        if cells > max_states:
            raise EnumerationTooLarge(f"weight table needs about {cells} cells (cap {max_states})")
        self.A = A
        self.t_max = t_max
        self._free = {0: None}
        self._free.update({t: tabs for t, tabs in iter_parikh_layers(A.entries, t_max)})
        self._cont = [
            {t: tabs for t, tabs in iter_parikh_layers(A.entries, t_max, start=s)}
            for s in range(A.n)
        ]

    def weight(self, m: int, counts: Sequence[int], next_symbol: int | None = None) -> int:
        if m == 0:
            return int(all(c == 0 for c in counts))
        return layer_value(self._free[m], counts, next_symbol=next_symbol, A=self.A)

    def weight_in_cylinder(self, m: int, counts: Sequence[int], C: Sequence[int],
                           next_symbol: int | None = None) -> int:
        C = tuple(C)
        if not C:
            return self.weight(m, counts, next_symbol)
        if len(C) > m or not is_allowed(self.A, C):
            return 0
        rest = [a - b for a, b in zip(counts, parikh(C, self.A.n))]
        return layer_value(self._cont[C[-1]][m - len(C)], rest, next_symbol=next_symbol, A=self.A)

    def weights_in_cylinder(self, m: int, C: Sequence[int],
                            next_symbol: int | None = None) -> dict[tuple[int, ...], int]:
        """``{counts: w_m(C, counts)}`` over every count vector with nonzero
        weight, read from one layer."""
        C = tuple(C)
        if not C or len(C) > m or not is_allowed(self.A, C):
            raise ValueError("need an allowed cylinder no longer than the level")
        n, t = self.A.n, m - len(C)
        tables = self._cont[C[-1]][t]
        ends = [j for j in range(n) if next_symbol is None or self.A.entries[j][next_symbol]]
        base = parikh(C, n)
        out = {}
        for idx in itertools.product(range(t + 1), repeat=n - 1):
            s = sum(idx)
            if s > t:
                continue
            v = sum(int(tables[j][idx]) for j in ends)
            if v:
                out[tuple(b + c for b, c in zip(base, idx + (t - s,)))] = v
        return out


# --------------------------------------------------------------------------
# successor
# --------------------------------------------------------------------------


def _least_word(A: TransitionMatrix, counts: list[int], before: int) -> Word | None:
    """Reverse-lex least allowed word with ``counts`` that may precede ``before``.

    Fills positions from the highest down, taking the smallest symbol that
    leaves a feasible remainder.
    """
    m = sum(counts)
    if count_words(A, m, parikh=counts, next_symbol=before) == 0:
        return None
    out = [0] * m
    nxt = before
    for pos in range(m - 1, -1, -1):
        for c in range(A.n):
            if counts[c] == 0 or not A.entries[c][nxt]:
                continue
            counts[c] -= 1
            if count_words(A, pos, parikh=counts, next_symbol=c) > 0:
                out[pos] = c
                nxt = c
                break
            counts[c] += 1
        else:  # pragma: no cover - feasibility was checked above
            raise AssertionError("infeasible fill")
    return tuple(out)


def _path_ends(A: TransitionMatrix, alphabet: set[int], length: int) -> frozenset:
    ends = set(alphabet)
    for _ in range(length - 1):
        ends = {c for c in alphabet if any(A.entries[b][c] for b in ends)}
    return frozenset(ends)


def _certified_maximal(A: TransitionMatrix, x: SequencePoint) -> bool:
    # A successor changing index k needs a larger symbol c that already
    # occurs in x[0..k), may precede x[k+1] and ends some allowed word of
    # length k+1 over the symbols of x[0..k]. Once the body and one period
    # are behind, the alphabet is fixed, the end-set evolves
    # deterministically and (x_k, x_{k+1}) is periodic, so the scan stops
    # at the first repeated (end-set, phase) state.
    stable = len(x.body) + len(x.tail_period)
    period = len(x.tail_period)
    seen: set[int] = set()
    ends: frozenset = frozenset()
    states: set = set()
    k = 0
    while True:
        xk, nxt = x[k], x[k + 1]
        if k <= stable:
            seen.add(xk)
            ends = _path_ends(A, seen, k + 1)
        else:
            ends = frozenset(c for c in seen if any(A.entries[b][c] for b in ends))
            state = (ends, (k - stable) % period)
            if state in states:
                return True
            states.add(state)
        if any(c > xk and A.entries[c][nxt] for c in ends):
            return False
        k += 1


def successor(A: TransitionMatrix, x: SequencePoint, horizon: int = DEFAULT_HORIZON):
    """Successor of ``x`` in the reverse-lexicographic order on its class.

    Returns
    -------
    SequencePoint or Maximal

    Raises
    ------
    ValueError
        If ``x`` is not an allowed point.
    HorizonExceeded
        If no successor changes only coordinates below ``horizon`` and
        maximality could not be certified.
    """
    if not x.is_allowed(A):
        raise ValueError(f"{x} is not an allowed point")
    if _certified_maximal(A, x):
        return Maximal
    n = A.n
    counts = [0] * n
    for k in range(horizon):
        xk, nxt = x[k], x[k + 1]
        counts[xk] += 1
        for c in range(xk + 1, n):
            if counts[c] == 0 or not A.entries[c][nxt]:
                continue
            rem = list(counts)
            rem[c] -= 1
            low = _least_word(A, rem, c) if k else ()
            if low is not None:
                return x.with_head(low + (c,))
    raise HorizonExceeded(f"no successor of {x} below index {horizon}")


def orbit(A: TransitionMatrix, x: SequencePoint, steps: int, horizon: int = DEFAULT_HORIZON) -> list:
    """``[x, succ(x), succ(succ(x)), ...]`` with ``steps`` applications,
    stopping early at a maximal point."""
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    out = [x]
    for _ in range(steps):
        nxt = successor(A, out[-1], horizon)
        if nxt is Maximal:
            break
        out.append(nxt)
    return out


@dataclass(frozen=True)
class AdicState:
    """An allowed point together with its shift space."""

    A: TransitionMatrix
    point: SequencePoint

    def __post_init__(self):
        if not self.point.is_allowed(self.A):
            raise ValueError(f"{self.point} is not allowed")

    def step(self, horizon: int = DEFAULT_HORIZON):
        nxt = successor(self.A, self.point, horizon)
        return nxt if nxt is Maximal else AdicState(self.A, nxt)


def pascal_vertices(word: Sequence[int]) -> list[tuple[int, int]]:
    """Vertices ``(level, number of ones)`` visited by a binary path in
    Pascal's triangle."""
    out, ones = [(0, 0)], 0
    for m, s in enumerate(word, 1):
        if s not in (0, 1):
            raise ValueError("Pascal paths are binary words")
        ones += s
        out.append((m, ones))
    return out


# --------------------------------------------------------------------------
# golden-mean recoding
# --------------------------------------------------------------------------


class PsiRecoding(NamedTuple):
    symbols: str
    remainder: str  # "" or "1" when a final 1 awaits its forced 0


def psi_recode_golden(word: Sequence[int] | str) -> PsiRecoding:
    """Recode a golden-mean word over ``{a, b}``: ``10 -> b``, lone ``0 -> a``.

    Raises
    ------
    ValueError
        If ``word`` contains ``11`` or symbols other than 0 and 1.
    """
    w = [int(c) for c in word]
    out = []
    k = 0
    while k < len(w):
        s = w[k]
        if s == 0:
            out.append("a")
            k += 1
        elif s == 1:
            if k + 1 == len(w):
                return PsiRecoding("".join(out), "1")
            if w[k + 1] != 0:
                raise ValueError("'11' is not allowed in the golden mean shift")
            out.append("b")
            k += 2
        else:
            raise ValueError(f"symbol {s} outside the golden mean alphabet")
    return PsiRecoding("".join(out), "")


def psi_preimage(ab_word: str) -> Word:
    """Golden-mean word whose recoding is ``ab_word``."""
    out: list[int] = []
    for ch in ab_word:
        if ch == "a":
            out.append(0)
        elif ch == "b":
            out.extend((1, 0))
        else:
            raise ValueError(f"symbol {ch!r} outside {{a, b}}")
    return tuple(out)
