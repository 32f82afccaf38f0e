"""Window cocycles into integer vectors and permutations, and the
subrelations of the tail relation on which they are trivial.

A cocycle here is generated by a function ``psi`` of the first ``window``
coordinates. Along a word it accumulates as the ordered product
``psi(w[0:]) psi(w[1:]) ...`` over all complete windows.
"""

from __future__ import annotations

import itertools
import warnings
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import sympy

from .sft_core import (
    SequencePoint,
    TransitionMatrix,
    Word,
    is_allowed,
    last_difference,
)


# --------------------------------------------------------------------------
# group elements
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class IntVector:
    """Element of ``Z^k``; ``*`` is addition."""

    values: tuple[int, ...]
    abelian = True

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(int(v) for v in self.values))

    @classmethod
    def zeros(cls, k: int) -> "IntVector":
        return cls((0,) * k)

    @classmethod
    def unit(cls, k: int, i: int) -> "IntVector":
        return cls(tuple(1 if j == i else 0 for j in range(k)))

    def __mul__(self, other: "IntVector") -> "IntVector":
        if len(other.values) != len(self.values):
            raise ValueError("rank mismatch")
        return IntVector(tuple(a + b for a, b in zip(self.values, other.values)))

    def inverse(self) -> "IntVector":
        return IntVector(tuple(-a for a in self.values))

    def identity(self) -> "IntVector":
        return IntVector.zeros(len(self.values))

    def is_identity(self) -> bool:
        return not any(self.values)

    def norm(self) -> int:
        return max((abs(v) for v in self.values), default=0)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.values)) + ")"


@dataclass(frozen=True)
class Permutation:
    """Bijection of ``0..n-1``; ``(g * h)(i) = g(h(i))``."""

    images: tuple[int, ...]
    abelian = False

    def __post_init__(self):
        images = tuple(int(v) for v in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"{images} is not a permutation")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity_of(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        images = list(range(n))
        images[i], images[j] = images[j], images[i]
        return cls(tuple(images))

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(tuple(self.images[j] for j in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for i, v in enumerate(self.images):
            inv[v] = i
        return Permutation(tuple(inv))

    def identity(self) -> "Permutation":
        return Permutation.identity_of(len(self.images))

    def is_identity(self) -> bool:
        return all(i == v for i, v in enumerate(self.images))

    def cycles(self) -> list[tuple[int, ...]]:
        seen, out = set(), []
        for start in range(len(self.images)):
            if start in seen:
                continue
            cyc, k = [], start
            while k not in seen:
                seen.add(k)
                cyc.append(k)
                k = self.images[k]
            if len(cyc) > 1:
                out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        cyc = self.cycles()
        return "".join("(" + " ".join(map(str, c)) + ")" for c in cyc) or "id"


@dataclass(frozen=True)
class ProductElement:
    """Element of a direct product; operations act componentwise."""

    parts: tuple

    @property
    def abelian(self) -> bool:
        return all(p.abelian for p in self.parts)

    def __mul__(self, other: "ProductElement") -> "ProductElement":
        return ProductElement(tuple(a * b for a, b in zip(self.parts, other.parts)))

    def inverse(self) -> "ProductElement":
        return ProductElement(tuple(p.inverse() for p in self.parts))

    def identity(self) -> "ProductElement":
        return ProductElement(tuple(p.identity() for p in self.parts))

    def is_identity(self) -> bool:
        return all(p.is_identity() for p in self.parts)

    def __str__(self) -> str:
        return " x ".join(str(p) for p in self.parts)


GroupElement = IntVector | Permutation | ProductElement


# --------------------------------------------------------------------------
# cocycle definitions
# --------------------------------------------------------------------------


KINDS = ("symbol_count", "transition_count", "transposition", "table", "product")


@dataclass(frozen=True, eq=False)
class CocycleSpec:
    """A group-valued function of the first ``l + 1`` coordinates.

    Attributes
    ----------
    kind : str
        One of ``symbol_count`` (unit vector of ``x_0``),
        ``transition_count`` (unit vector of the block ``x_0..x_l``, blocks
        indexed in base ``n``), ``transposition`` (the swap of ``x_0`` and
        ``x_1``), ``table`` (user values) or ``product``.
    n : int
        Alphabet size.
    l : int
        ``psi`` reads ``l + 1`` coordinates.
    """

    kind: str
    n: int
    l: int = 0
    table: Mapping[Word, GroupElement] | None = None
    parts: tuple["CocycleSpec", ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown cocycle kind {self.kind!r}")
        if self.l < 0:
            raise ValueError("l must be nonnegative")
        if self.kind == "table":
            if not self.table:
                raise ValueError("table cocycle needs a non-empty table")
            table = {tuple(int(s) for s in k): v for k, v in self.table.items()}
            if {len(k) for k in table} != {self.l + 1}:
                raise ValueError(f"table blocks must all have length {self.l + 1}")
            object.__setattr__(self, "table", table)

    @classmethod
    def symbol_count(cls, n: int) -> "CocycleSpec":
        return cls("symbol_count", n, 0)

    @classmethod
    def transition_count(cls, n: int, l: int = 1) -> "CocycleSpec":
        return cls("transition_count", n, l)

    @classmethod
    def transposition(cls, n: int) -> "CocycleSpec":
        return cls("transposition", n, 1)

    @classmethod
    def from_table(cls, n: int, table: Mapping[Word, GroupElement]) -> "CocycleSpec":
        l = len(next(iter(table))) - 1
        return cls("table", n, l, table)

    @classmethod
    def product(cls, *specs: "CocycleSpec") -> "CocycleSpec":
        if not specs or len({s.n for s in specs}) != 1:
            raise ValueError("product needs cocycles over one alphabet")
        return cls("product", specs[0].n, max(s.l for s in specs), parts=tuple(specs))

    @property
    def window(self) -> int:
        return self.l + 1

    @property
    def abelian(self) -> bool:
        if self.kind == "transposition":
            return self.n <= 2
        if self.kind == "table":
            return all(v.abelian for v in self.table.values())
        if self.kind == "product":
            return all(p.abelian for p in self.parts)
        return True

    def value(self, block: Sequence[int]) -> GroupElement:
        """``psi`` on a point starting with ``block`` (extra symbols ignored)."""
        block = tuple(block)
        if len(block) < self.window:
            raise ValueError(f"psi reads {self.window} coordinates")
        if self.kind == "symbol_count":
            return IntVector.unit(self.n, block[0])
        if self.kind == "transition_count":
            idx = 0
            for s in block[: self.window]:
                idx = idx * self.n + s
            return IntVector.unit(self.n ** self.window, idx)
        if self.kind == "transposition":
            return Permutation.transposition(self.n, block[0], block[1])
        if self.kind == "table":
            try:
                return self.table[block[: self.window]]
            except KeyError:
                raise ValueError(f"table does not cover block {block[: self.window]}") from None
        return ProductElement(tuple(p.value(block) for p in self.parts))

    def identity(self) -> GroupElement:
        if self.kind == "symbol_count":
            return IntVector.zeros(self.n)
        if self.kind == "transition_count":
            return IntVector.zeros(self.n ** self.window)
        if self.kind == "transposition":
            return Permutation.identity_of(self.n)
        if self.kind == "table":
            return next(iter(self.table.values())).identity()
        return ProductElement(tuple(p.identity() for p in self.parts))

    def check(self, A: TransitionMatrix) -> None:
        """Raise ValueError if a table cocycle misses an allowed block."""
        if self.kind == "product":
            for p in self.parts:
                p.check(A)
        elif self.kind == "table":
            for block in itertools.product(range(A.n), repeat=self.window):
                if is_allowed(A, block) and block not in self.table:
                    raise ValueError(f"table does not cover allowed block {block}")


class ShortWordWarning(UserWarning):
    """A word shorter than the cocycle window was accumulated."""


def accumulate(psi: CocycleSpec, word: Sequence[int]) -> GroupElement:
    """Ordered product of ``psi`` over the complete windows of ``word``.

    A word shorter than the window accumulates to the identity and emits a
    :class:`ShortWordWarning`.
    """
    word = tuple(word)
    if 0 < len(word) < psi.window:
        warnings.warn(f"word of length {len(word)} has no complete window of length {psi.window}",
                      ShortWordWarning, stacklevel=2)
    return _acc(psi, word)


def _acc(psi: CocycleSpec, word: Word) -> GroupElement:
    b = psi.window
    out = psi.identity()
    for k in range(len(word) - b + 1):
        out = out * psi.value(word[k:k + b])
    return out


# --------------------------------------------------------------------------
# membership
# --------------------------------------------------------------------------


def cocycle_J_plus(psi: CocycleSpec, x: SequencePoint, x2: SequencePoint) -> GroupElement:
    """Forward cocycle: products along ``x`` and ``x2`` up to a common tail.

    Raises
    ------
    NotHomoclinic
        If the points are not tail-equivalent.
    """
    K = last_difference(x, x2)
    if K == 0:
        return psi.identity()
    L = K + psi.window - 1
    return _acc(psi, x.head(L)) * _acc(psi, x2.head(L)).inverse()


def in_subrelation(psi: CocycleSpec, x: SequencePoint, x2: SequencePoint) -> bool:
    """One-sided membership: the forward cocycle is trivial."""
    return cocycle_J_plus(psi, x, x2).is_identity()


def _check_embedding(psi: CocycleSpec, u: Word, u2: Word) -> None:
    if len(u) != len(u2):
        raise ValueError("two-sided windows must have equal length")
    e = psi.window - 1
    if e and (u[:e] != u2[:e] or u[len(u) - e:] != u2[len(u2) - e:]):
        raise ValueError(f"windows must agree on their first and last {e} symbols")


def two_sided_pair(psi: CocycleSpec, u: Sequence[int], u2: Sequence[int], origin: int):
    """Forward and backward cocycles of two two-sided points.

    The points carry the same (arbitrary) symbols outside ``u`` and ``u2``,
    and ``origin`` is the index inside the words that sits at coordinate 0.
    The words must agree on their first and last ``window - 1`` symbols so
    that windows reaching outside them cancel.

    Returns
    -------
    (GroupElement, GroupElement)
        ``(J_plus, J_minus)``.
    """
    u, u2 = tuple(u), tuple(u2)
    _check_embedding(psi, u, u2)
    if not 0 <= origin <= len(u):
        raise ValueError("origin outside the window")
    e = psi.window - 1
    right = _acc(psi, u[origin:]) * _acc(psi, u2[origin:]).inverse()
    cut = min(origin + e, len(u))
    left = _acc(psi, u[:cut]).inverse() * _acc(psi, u2[:cut])
    return right, left


def in_subrelation_two_sided(psi: CocycleSpec, u: Sequence[int], u2: Sequence[int],
                             origin: int = 0) -> bool:
    """Two-sided membership: forward and backward cocycles agree.

    For abelian targets this is the vanishing of the full two-sided sum. The
    answer does not depend on ``origin``.
    """
    plus, minus = two_sided_pair(psi, u, u2, origin)
    return plus == minus


# --------------------------------------------------------------------------
# symbol equivalence and transitivity
# --------------------------------------------------------------------------


class Status(str, Enum):
    PROVEN = "Proven"
    BOUND_REACHED = "BoundReached"


@dataclass(frozen=True)
class EquivalenceResult:
    """Partition of the alphabet into equivalent symbols.

    ``witnesses`` maps merged pairs to two equal-length words that start
    with the two symbols, end in the same block and have equal cocycle
    values. ``separated`` lists pairs proved inequivalent.
    """

    classes: tuple[tuple[int, ...], ...]
    status: Status
    witnesses: Mapping[tuple[int, int], tuple[Word, Word]]
    separated: frozenset

    @property
    def transitive(self) -> bool:
        return len(self.classes) == 1


def _start_words(A: TransitionMatrix, a: int, length: int) -> list[Word]:
    words = [(a,)]
    for _ in range(length - 1):
        words = [w + (c,) for w in words for c in A.successors(w[-1])]
    return words


def _coboundary_invariants(A: TransitionMatrix, psi: CocycleSpec) -> dict[int, set]:
    """Per symbol, the set of values of quantities conserved by the search.

    Looks for a linear functional ``f`` on the abelian target and a function
    ``H`` of ``(window-1)``-blocks with ``f(psi(w)) - H(w[1:]) + H(w[:-1])``
    constant over allowed windows ``w``. Then ``f(acc(U)) - H(tail U)``
    minus the same for ``V`` never changes while both words grow, and it
    must vanish at a match. Returns, for each start symbol, the vectors of
    these quantities over all start words.
    """
    b = psi.window
    e = max(b - 1, 1)
    dim = len(psi.identity().values)
    tails = sorted({w for a in range(A.n) for w in _start_words(A, a, e)})
    tindex = {t: i for i, t in enumerate(tails)}
    nvar = dim + len(tails) + 1
    rows = []
    for w in _start_words_all(A, max(b, 2)):
        if b == 1:
            prev, nxt, val = (w[0],), (w[1],), psi.value(w[1:]).values
        else:
            prev, nxt, val = w[:-1], w[1:], psi.value(w).values
        row = [0] * nvar
        for i, v in enumerate(val):
            row[i] += v
        row[dim + tindex[nxt]] -= 1
        row[dim + tindex[prev]] += 1
        row[-1] = -1
        rows.append(row)
    basis = sympy.Matrix(rows).nullspace() if rows else []
    out: dict[int, set] = {}
    for a in range(A.n):
        vals = set()
        for U in _start_words(A, a, e):
            acc = psi.value(U).values if b == 1 else psi.identity().values
            vec = []
            for vb in basis:
                f = vb[:dim]
                vec.append(sum(fi * ai for fi, ai in zip(f, acc)) - vb[dim + tindex[U[-e:]]])
            vals.add(tuple(vec))
        out[a] = vals
    return out


def _start_words_all(A: TransitionMatrix, length: int) -> list[Word]:
    return [w for a in range(A.n) for w in _start_words(A, a, length)]


def _match_search(A: TransitionMatrix, psi: CocycleSpec, a: int, b: int, bound: int,
                  max_states: int):
    """Breadth-first search for equal-length words from ``a`` and ``b`` that
    end in the same block with equal accumulated cocycle.

    Returns ``(witness or None, closed)`` where ``closed`` means the whole
    reachable state space was explored without pruning.
    """
    w = psi.window
    e = max(w - 1, 1)
    abelian = psi.abelian

    def key(U_tail, V_tail, accU, accV):
        if abelian:
            return (U_tail, V_tail, accU * accV.inverse())
        return (U_tail, V_tail, accU, accV)

    def norm(g) -> int:
        if isinstance(g, IntVector):
            return g.norm()
        if isinstance(g, ProductElement):
            return max(norm(p) for p in g.parts)
        return 0

    def matched(k) -> bool:
        if k[0] != k[1]:
            return False
        return k[2].is_identity() if abelian else k[2] == k[3]

    def acc0(U):
        # start words are one symbol short of a window unless w == 1
        return psi.value(U) if w == 1 else psi.identity()

    frontier = deque()
    parent: dict = {}
    pruned = False
    for U in _start_words(A, a, e):
        for V in _start_words(A, b, e):
            k = key(U[-e:], V[-e:], acc0(U), acc0(V))
            if k not in parent:
                parent[k] = (None, U, V)
                frontier.append((k, acc0(U), acc0(V)))
    while frontier:
        k, accU, accV = frontier.popleft()
        if matched(k):
            return _rebuild(parent, k), True
        if not abelian and (norm(accU) > bound or norm(accV) > bound):
            pruned = True
            continue
        tU, tV = k[0], k[1]
        for u in A.successors(tU[-1]):
            blockU = tU + (u,)
            nU = accU * psi.value(blockU[-w:])
            for v in A.successors(tV[-1]):
                blockV = tV + (v,)
                nV = accV * psi.value(blockV[-w:])
                nk = key(blockU[-e:], blockV[-e:], nU, nV)
                if nk in parent:
                    continue
                if abelian and norm(nk[2]) > bound:
                    pruned = True
                    continue
                if len(parent) >= max_states:
                    return None, False
                parent[nk] = (k, u, v)
                frontier.append((nk, nU, nV))
    return None, not pruned


def _rebuild(parent, k) -> tuple[Word, Word]:
    us, vs = [], []
    while True:
        prev, u, v = parent[k]
        if prev is None:
            return tuple(u) + tuple(reversed(us)), tuple(v) + tuple(reversed(vs))
        us.append(u)
        vs.append(v)
        k = prev


def symbol_equivalence_classes(A: TransitionMatrix, psi: CocycleSpec | None = None,
                               bound: int | None = None,
                               max_states: int = 2_000_000) -> EquivalenceResult:
    """Partition the alphabet by the match relation of two symbols.

    Two symbols ``a, b`` are equivalent when there are equal-length allowed
    words starting with ``a`` and with ``b``, ending in the same
    ``(window-1)``-block (the same symbol for symbol counts), with equal
    accumulated cocycle. With symbol counts this means ``a s i`` and
    ``b t i`` are permutations of each other.

    Parameters
    ----------
    A : TransitionMatrix
    psi : CocycleSpec, optional
        Defaults to symbol counts.
    bound : int, optional
        Max-norm cap on accumulated differences, default ``n**2``.

    Returns
    -------
    EquivalenceResult
        ``status`` is Proven when every pair was either matched, separated by
        a conserved quantity, or exhausted without hitting the bound.
    """
    n = A.n
    psi = psi or CocycleSpec.symbol_count(n)
    if psi.n != n:
        raise ValueError("cocycle alphabet differs from the matrix alphabet")
    psi.check(A)
    if psi.kind == "product" and not psi.abelian and any(p.abelian for p in psi.parts):
        raise NotImplementedError("mixed abelian/nonabelian products are not searched")
    bound = n * n if bound is None else bound

    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    invariants = _coboundary_invariants(A, psi) if psi.abelian else None
    witnesses, separated = {}, set()
    proven = True
    for a, b in itertools.combinations(range(n), 2):
        if find(a) == find(b):
            continue
        if invariants is not None and not (invariants[a] & invariants[b]):
            separated.add((a, b))
            continue
        wit, closed = _match_search(A, psi, a, b, bound, max_states)
        if wit is not None:
            witnesses[(a, b)] = wit
            parent[find(b)] = find(a)
        elif closed:
            separated.add((a, b))
        else:
            proven = False
    groups: dict[int, list[int]] = {}
    for s in range(n):
        groups.setdefault(find(s), []).append(s)
    classes = tuple(sorted(tuple(g) for g in groups.values()))
    # a pair in different classes is settled if some pair across them is
    if not proven:
        proven = all(
            any((min(p, q), max(p, q)) in separated for p in c1 for q in c2)
            for c1, c2 in itertools.combinations(classes, 2)
        )
    status = Status.PROVEN if proven else Status.BOUND_REACHED
    return EquivalenceResult(classes, status, witnesses, frozenset(separated))


def is_topologically_transitive(A: TransitionMatrix, psi: CocycleSpec | None = None,
                                bound: int | None = None) -> tuple[bool, Status]:
    """True iff all symbols are equivalent; the status of the search is
    passed through."""
    res = symbol_equivalence_classes(A, psi, bound)
    return res.transitive, res.status
