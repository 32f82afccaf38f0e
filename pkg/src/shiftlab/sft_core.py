"""Transition matrices, allowed words, eventually periodic points and exact
counting of constrained words.

Everything in this module is integer arithmetic; counts are Python ints and
never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

Word = tuple[int, ...]

DEFAULT_MAX_STATES = 10**8


class DegenerateAlphabet(ValueError):
    """A symbol has no allowed successor or no allowed predecessor."""


class EnumerationTooLarge(RuntimeError):
    """A dynamic program or an enumeration would exceed its state budget."""


class NotHomoclinic(ValueError):
    """Two points are not tail-equivalent (they differ infinitely often)."""


# --------------------------------------------------------------------------
# transition matrices
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TransitionMatrix:
    """0/1 adjacency matrix of a subshift of finite type.

    Build instances with :func:`validate_matrix`, which fills in ``period`` and
    ``irreducible``. Periodic or reducible matrices are accepted and flagged.
    """

    entries: tuple[tuple[int, ...], ...]
    period: int
    irreducible: bool

    @property
    def n(self) -> int:
        return len(self.entries)

    @property
    def aperiodic(self) -> bool:
        return self.period == 1

    @property
    def primitive(self) -> bool:
        return self.irreducible and self.period == 1

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.entries, dtype=np.int64)

    def allowed(self, i: int, j: int) -> bool:
        return self.entries[i][j] == 1

    def successors(self, i: int) -> tuple[int, ...]:
        return tuple(j for j in range(self.n) if self.entries[i][j])

    def predecessors(self, j: int) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if self.entries[i][j])

    def edges(self) -> Iterator[tuple[int, int]]:
        for i in range(self.n):
            for j in range(self.n):
                if self.entries[i][j]:
                    yield i, j

    @property
    def is_full_shift(self) -> bool:
        return all(all(row) for row in self.entries)

    @classmethod
    def full_shift(cls, n: int) -> "TransitionMatrix":
        return validate_matrix([[1] * n for _ in range(n)])

    @classmethod
    def golden_mean(cls) -> "TransitionMatrix":
        return validate_matrix([[1, 1], [1, 0]])

    def __repr__(self) -> str:
        rows = ",".join("".join(map(str, r)) for r in self.entries)
        return f"TransitionMatrix([{rows}], period={self.period}, irreducible={self.irreducible})"


def _reachability(entries: Sequence[Sequence[int]]) -> list[list[bool]]:
    n = len(entries)
    reach = [[bool(entries[i][j]) for j in range(n)] for i in range(n)]
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return reach


def _component_period(entries, members: list[int]) -> int:
    # BFS levels inside one strongly connected component; the period is the
    # gcd of level[u] + 1 - level[v] over internal edges.
    inside = set(members)
    root = members[0]
    level = {root: 0}
    queue = [root]
    for u in queue:
        for v in inside:
            if entries[u][v] and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    g = 0
    for u in inside:
        for v in inside:
            if entries[u][v]:
                g = math.gcd(g, abs(level[u] + 1 - level[v]))
    return g


def validate_matrix(entries) -> TransitionMatrix:
    """Check a square 0/1 grid and compute its period and irreducibility.

    Parameters
    ----------
    entries : array-like of shape (n, n)
        Entries must be 0 or 1.

    Returns
    -------
    TransitionMatrix

    Raises
    ------
    ValueError
        If the grid is empty, not square or has entries outside {0, 1}.
    DegenerateAlphabet
        If some row or column is identically zero; such a symbol never occurs
        in a bi-infinite allowed sequence.
    """
    rows = [list(r) for r in entries]
    n = len(rows)
    if n < 1:
        raise ValueError("transition matrix must have at least one symbol")
    if any(len(r) != n for r in rows):
        raise ValueError("transition matrix must be square")
    clean = []
    for r in rows:
        out = []
        for v in r:
            iv = int(v)
            if iv != v or iv not in (0, 1):
                raise ValueError(f"transition matrix entries must be 0 or 1, got {v!r}")
            out.append(iv)
        clean.append(tuple(out))
    for i in range(n):
        if not any(clean[i]):
            raise DegenerateAlphabet(f"symbol {i} has no allowed successor")
        if not any(clean[k][i] for k in range(n)):
            raise DegenerateAlphabet(f"symbol {i} has no allowed predecessor")

    reach = _reachability(clean)
    irreducible = all(reach[i][j] for i in range(n) for j in range(n))

    # strongly connected components that carry at least one cycle
    seen: set[int] = set()
    period = 0
    for i in range(n):
        if i in seen or not reach[i][i]:
            continue
        comp = [j for j in range(n) if reach[i][j] and reach[j][i]]
        seen.update(comp)
        period = math.gcd(period, _component_period(clean, comp))
    return TransitionMatrix(tuple(clean), period=period or 1, irreducible=irreducible)


# --------------------------------------------------------------------------
# words
# --------------------------------------------------------------------------


def parse_word(text, n: int | None = None) -> Word:
    """Turn ``"0100"`` or ``[0, 1, 0, 0]`` into a tuple of symbols."""
    if isinstance(text, str):
        word = tuple(int(ch) for ch in text)
    else:
        word = tuple(int(s) for s in text)
    if n is not None and any(s < 0 or s >= n for s in word):
        raise ValueError(f"word {text!r} uses symbols outside 0..{n - 1}")
    return word


def format_word(word: Sequence[int], n: int = 10):
    """Digit string for alphabets of size <= 10, otherwise a list of ints."""
    if n <= 10:
        return "".join(str(s) for s in word)
    return list(word)


def is_allowed(A: TransitionMatrix, word: Sequence[int]) -> bool:
    """True iff every adjacent pair of ``word`` is an allowed transition."""
    ent = A.entries
    n = len(ent)
    if word and (min(word) < 0 or max(word) >= n):
        bad = next(s for s in word if s < 0 or s >= n)
        raise ValueError(f"symbol {bad} outside alphabet 0..{n - 1}")
    return all(ent[a][b] for a, b in zip(word, word[1:]))


def parikh(word: Sequence[int], n: int) -> tuple[int, ...]:
    """Symbol counts of ``word`` over the alphabet 0..n-1."""
    counts = [0] * n
    for s in word:
        counts[s] += 1
    return tuple(counts)


_parikh = parikh


def reverse_lex_key(word: Sequence[int]) -> tuple[int, ...]:
    """Sort key for reverse-lexicographic order.

    Two words of equal length are compared at the largest index where they
    differ, using the natural order of symbols.
    """
    return tuple(reversed(word))


# --------------------------------------------------------------------------
# eventually periodic points
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SequencePoint:
    """One-sided sequence ``prefix + tail_preperiod + tail_period^∞``."""

    prefix: Word
    tail_preperiod: Word = ()
    tail_period: Word = (0,)

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(int(s) for s in self.prefix))
        object.__setattr__(self, "tail_preperiod", tuple(int(s) for s in self.tail_preperiod))
        object.__setattr__(self, "tail_period", tuple(int(s) for s in self.tail_period))
        if not self.tail_period:
            raise ValueError("tail_period must be non-empty")

    @classmethod
    def parse(cls, prefix: str, tail_period: str = "0", tail_preperiod: str = "") -> "SequencePoint":
        return cls(parse_word(prefix), parse_word(tail_preperiod), parse_word(tail_period))

    @property
    def body(self) -> Word:
        return self.prefix + self.tail_preperiod

    def __getitem__(self, k: int) -> int:
        if k < 0:
            raise IndexError("one-sided points have no negative coordinates")
        body = self.body
        if k < len(body):
            return body[k]
        per = self.tail_period
        return per[(k - len(body)) % len(per)]

    def head(self, length: int) -> Word:
        """The first ``length`` coordinates."""
        return tuple(self[k] for k in range(length))

    def drop(self, k: int) -> "SequencePoint":
        """The shifted point ``σ^k(x)``."""
        body = self.body
        if k <= len(body):
            return SequencePoint((), body[k:], self.tail_period)
        per = self.tail_period
        r = (k - len(body)) % len(per)
        return SequencePoint((), (), per[r:] + per[:r])

    def with_head(self, word: Sequence[int]) -> "SequencePoint":
        """Replace the first ``len(word)`` coordinates by ``word``."""
        rest = self.drop(len(word))
        return SequencePoint(tuple(word), rest.tail_preperiod, rest.tail_period)

    def is_allowed(self, A: TransitionMatrix) -> bool:
        # body, one full period and the wrap-around transition
        return is_allowed(A, self.head(len(self.body) + len(self.tail_period) + 1))

    def same_sequence(self, other: "SequencePoint") -> bool:
        try:
            return last_difference(self, other) == 0
        except NotHomoclinic:
            return False

    def __str__(self) -> str:
        pre = format_word(self.body)
        per = format_word(self.tail_period)
        return f"{pre}({per})^inf"


def last_difference(x: SequencePoint, y: SequencePoint) -> int:
    """Least ``K`` with ``x_k == y_k`` for every ``k >= K``.

    Raises
    ------
    NotHomoclinic
        If the two sequences differ at infinitely many coordinates.
    """
    start = max(len(x.body), len(y.body))
    span = math.lcm(len(x.tail_period), len(y.tail_period))
    for k in range(start, start + span):
        if x[k] != y[k]:
            raise NotHomoclinic(f"{x} and {y} are not tail-equivalent")
    for k in range(start - 1, -1, -1):
        if x[k] != y[k]:
            return k + 1
    return 0


def tail_equivalent(x: SequencePoint, y: SequencePoint) -> bool:
    try:
        last_difference(x, y)
    except NotHomoclinic:
        return False
    return True


# --------------------------------------------------------------------------
# counting and enumeration
# --------------------------------------------------------------------------


def _seed(prefix, start_symbol) -> Word:
    if prefix:
        return prefix
    if start_symbol is not None:
        return (start_symbol,)
    return ()


def count_words(
    A: TransitionMatrix,
    m: int,
    *,
    parikh: Sequence[int] | None = None,
    start_symbol: int | None = None,
    end_symbol: int | None = None,
    next_symbol: int | None = None,
    prefix: Sequence[int] | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> int:
    """Exact number of allowed words of length ``m`` meeting the constraints.

    Parameters
    ----------
    A : TransitionMatrix
    m : int
        Word length, ``m >= 0``.
    parikh : sequence of int, optional
        Required symbol counts (summing to ``m``).
    start_symbol, end_symbol : int, optional
        Required first / last symbol.
    next_symbol : int, optional
        The word must be followed by this symbol: ``A(w[m-1], next_symbol) = 1``.
    prefix : sequence of int, optional
        Required initial segment.
    max_states : int
        Refuse (``EnumerationTooLarge``) when the DP state space is larger.

    Inconsistent constraints give 0 rather than an error.
    """
    if m < 0:
        raise ValueError("m must be non-negative")
    n = A.n
    ent = A.entries
    prefix = tuple(prefix or ())
    if start_symbol is not None and prefix and prefix[0] != start_symbol:
        return 0
    seed = _seed(prefix, start_symbol)
    if len(seed) > m or (seed and not is_allowed(A, seed)):
        return 0
    target = None
    if parikh is not None:
        target = tuple(int(c) for c in parikh)
        if len(target) != n or min(target) < 0 or sum(target) != m:
            return 0
    if m == 0:
        # the empty word has no first or last symbol
        if start_symbol is not None or end_symbol is not None:
            return 0
        return 1

    if target is None:
        if seed:
            vec = [0] * n
            vec[seed[-1]] = 1
            length = len(seed)
        else:
            vec = [1] * n
            length = 1
        for _ in range(length, m):
            vec = [sum(vec[i] for i in range(n) if ent[i][j]) for j in range(n)]
        total = 0
        for j in range(n):
            if end_symbol is not None and j != end_symbol:
                continue
            if next_symbol is not None and not ent[j][next_symbol]:
                continue
            total += vec[j]
        return total

    n_states = n
    for c in target:
        n_states *= c + 1
    if n_states > max_states:
        raise EnumerationTooLarge(f"Parikh DP needs {n_states} states (cap {max_states})")

    if seed:
        counts = _parikh(seed, n)
        if any(c > t for c, t in zip(counts, target)):
            return 0
        states = {(seed[-1], counts): 1}
        length = len(seed)
    else:
        states = {}
        for j in range(n):
            if target[j] > 0:
                e = [0] * n
                e[j] = 1
                states[(j, tuple(e))] = 1
        length = 1
    for _ in range(length, m):
        nxt: dict = {}
        for (last, cnt), ways in states.items():
            for j in range(n):
                if ent[last][j] and cnt[j] < target[j]:
                    key = (j, cnt[:j] + (cnt[j] + 1,) + cnt[j + 1:])
                    nxt[key] = nxt.get(key, 0) + ways
        states = nxt
    total = 0
    for (last, cnt), ways in states.items():
        if cnt != target:
            continue
        if end_symbol is not None and last != end_symbol:
            continue
        if next_symbol is not None and not ent[last][next_symbol]:
            continue
        total += ways
    return total


def enumerate_words(
    A: TransitionMatrix,
    m: int,
    *,
    parikh: Sequence[int] | None = None,
    start_symbol: int | None = None,
    end_symbol: int | None = None,
    next_symbol: int | None = None,
    prefix: Sequence[int] | None = None,
    cap: int = 10**6,
) -> list[Word]:
    """All words counted by :func:`count_words`, ascending in reverse-lex order.

    Raises
    ------
    EnumerationTooLarge
        If more than ``cap`` words qualify.
    """
    constraints = dict(parikh=parikh, start_symbol=start_symbol, end_symbol=end_symbol,
                       next_symbol=next_symbol, prefix=prefix)
    total = count_words(A, m, **constraints)
    if total > cap:
        raise EnumerationTooLarge(f"{total} words exceed the enumeration cap {cap}")
    if total == 0:
        return []
    n = A.n
    ent = A.entries
    target = None if parikh is None else tuple(parikh)
    seed = _seed(tuple(prefix or ()), start_symbol)

    out: list[Word] = []
    word: list[int] = list(seed)
    counts = list(_parikh(seed, n))

    def accept() -> bool:
        if target is not None and tuple(counts) != target:
            return False
        if end_symbol is not None and word[-1] != end_symbol:
            return False
        if next_symbol is not None and not ent[word[-1]][next_symbol]:
            return False
        return True

    def extend():
        if len(word) == m:
            if accept():
                out.append(tuple(word))
            return
        for j in range(n):
            if word and not ent[word[-1]][j]:
                continue
            if target is not None and counts[j] >= target[j]:
                continue
            word.append(j)
            counts[j] += 1
            extend()
            counts[j] -= 1
            word.pop()

    if m == 0:
        return [()]
    extend()
    out.sort(key=reverse_lex_key)
    return out


# --------------------------------------------------------------------------
# layered Parikh transfer
# --------------------------------------------------------------------------


def iter_parikh_layers(
    weights,
    t_max: int,
    start: int | None = None,
    max_states: int = DEFAULT_MAX_STATES,
) -> Iterator[tuple[int, list[np.ndarray]]]:
    """Stream the weighted Parikh transfer tables layer by layer.

    ``tables[j][c_0, ..., c_{n-2}]`` at layer ``t`` is the total weight of the
    walks that append ``t`` symbols (after ``start``, or from scratch when
    ``start`` is None), end in symbol ``j`` and whose appended symbols have
    counts ``(c_0, ..., c_{n-2}, t - sum)``. A walk's weight is the product of
    ``weights[a][b]`` over its transitions; the first symbol of a walk with no
    start has weight 1. With the 0/1 matrix as weights the tables count words.

    Layers are yielded from ``t = 0`` when ``start`` is given and from
    ``t = 1`` otherwise. Entries are Python ints held in object arrays.
    """
    w = [[int(v) for v in row] for row in np.asarray(weights, dtype=object).tolist()]
    n = len(w)
    shape = (t_max + 1,) * (n - 1)
    size = n * (t_max + 1) ** (n - 1)
    if size > max_states:
        raise EnumerationTooLarge(f"layer tables need {size} cells (cap {max_states})")

    def zeros():
        return np.zeros(shape, dtype=object)

    def shift(arr, j):
        if j == n - 1:
            return arr
        out = zeros()
        lead = (slice(None),) * j
        out[lead + (slice(1, None),)] = arr[lead + (slice(0, -1),)]
        return out

    origin = (0,) * (n - 1)
    tables = [zeros() for _ in range(n)]
    if start is not None:
        tables[start][origin] = 1
        t = 0
    else:
        for j in range(n):
            idx = tuple(1 if k == j else 0 for k in range(n - 1))
            tables[j][idx] = 1
        t = 1
    if t > t_max:
        return
    yield t, tables
    while t < t_max:
        new = []
        for j in range(n):
            acc = None
            for i in range(n):
                wij = w[i][j]
                if not wij:
                    continue
                term = tables[i] if wij == 1 else tables[i] * wij
                acc = term if acc is None else acc + term
            new.append(zeros() if acc is None else shift(acc, j))
        tables = new
        t += 1
        yield t, tables


def layer_value(tables: list[np.ndarray], counts: Sequence[int], *, end=None, next_symbol=None, A=None) -> int:
    """Read a count from one layer of :func:`iter_parikh_layers`.

    ``counts`` is the full Parikh vector of the appended symbols. ``end``
    restricts the last symbol; ``next_symbol`` keeps only last symbols ``j``
    with ``A(j, next_symbol) = 1``.
    """
    n = len(tables)
    idx = tuple(int(c) for c in counts[: n - 1])
    shape = tables[0].shape
    if any(c < 0 for c in counts) or any(c >= s for c, s in zip(idx, shape)):
        return 0
    total = 0
    for j in range(n):
        if end is not None and j != end:
            continue
        if next_symbol is not None and not A.entries[j][next_symbol]:
            continue
        total += tables[j][idx]
    return int(total)


# --------------------------------------------------------------------------
# higher-block presentation
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class HigherBlockCode:
    """Presentation of an SFT on the alphabet of its allowed (l+1)-blocks."""

    matrix: TransitionMatrix
    blocks: tuple[Word, ...]
    l: int

    @cached_property
    def index(self) -> dict[Word, int]:
        return {b: i for i, b in enumerate(self.blocks)}

    def encode(self, word: Sequence[int]) -> Word:
        """Sliding (l+1)-block code; a word of length m maps to length m - l."""
        word = tuple(word)
        size = self.l + 1
        return tuple(self.index[word[k:k + size]] for k in range(len(word) - self.l))

    def decode(self, block_word: Sequence[int]) -> Word:
        if not block_word:
            return ()
        blocks = [self.blocks[b] for b in block_word]
        for u, v in zip(blocks, blocks[1:]):
            if u[1:] != v[:-1]:
                raise ValueError("consecutive blocks do not overlap")
        return blocks[0] + tuple(b[-1] for b in blocks[1:])


def higher_block_recode(A: TransitionMatrix, l: int) -> HigherBlockCode:
    """Recode ``A`` over its allowed words of length ``l + 1``.

    Block ``u`` may be followed by block ``v`` iff they overlap in ``l``
    symbols; the union word is then automatically allowed.
    """
    if l < 1:
        raise ValueError("block length l must be >= 1")
    blocks = sorted(enumerate_words(A, l + 1, cap=10**7))
    size = len(blocks)
    rows = [[1 if blocks[a][1:] == blocks[b][:-1] else 0 for b in range(size)] for a in range(size)]
    return HigherBlockCode(validate_matrix(rows), tuple(blocks), l)
