"""Markov and Gibbs measures on one-sided shifts of finite type.

Two arithmetic modes are kept apart. ``"exact"`` specs hold
:class:`fractions.Fraction` entries and produce exact cylinder measures;
``"float"`` specs hold Python floats and come out of eigenvalue problems.
Mixing requires an explicit :meth:`MarkovSpec.as_float`.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational
from typing import Callable, Mapping, Sequence

import numpy as np
import sympy

from .sft_core import (
    DegenerateAlphabet,
    SequencePoint,
    TransitionMatrix,
    Word,
    is_allowed,
    last_difference,
    validate_matrix,
)

KINDS = ("stationary", "initial", "one-sided-uniform")
FLOAT_TOL = 1e-9


class NotUnique(ValueError):
    """The stationary vector is not unique (reducible chain)."""


class NoConvergence(RuntimeError):
    """Power iteration did not reach its tolerance."""


def _is_exact(v) -> bool:
    return isinstance(v, (int, Rational)) and not isinstance(v, bool)


def _to_mode(v, exact: bool):
    if exact:
        if isinstance(v, float):
            raise TypeError("float entry in an exact spec; convert explicitly")
        return Fraction(v)
    return float(v)


# --------------------------------------------------------------------------
# stationary vectors
# --------------------------------------------------------------------------


def _support(P) -> TransitionMatrix:
    try:
        return validate_matrix([[1 if v > 0 else 0 for v in row] for row in P])
    except DegenerateAlphabet as exc:
        raise NotUnique(f"chain has an unreachable state: {exc}") from None


def _stationary_exact(P) -> tuple[Fraction, ...]:
    n = len(P)
    M = sympy.Matrix(n, n, lambda i, j: sympy.Rational(P[j][i].numerator, P[j][i].denominator))
    basis = (M - sympy.eye(n)).nullspace()
    if len(basis) != 1:
        raise NotUnique(f"fixed space has dimension {len(basis)}")
    v = basis[0]
    total = sum(v)
    return tuple(Fraction(int(c.p), int(c.q)) for c in (v / total))


def _stationary_float(P, tol: float = 1e-12, max_iter: int = 100_000) -> tuple[float, ...]:
    Pm = np.asarray(P, dtype=float)
    n = Pm.shape[0]
    lazy = 0.5 * (Pm + np.eye(n))  # aperiodic even when P is not
    p = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        q = p @ lazy
        q /= q.sum()
        done = np.max(np.abs(q - p)) < tol * 1e-2
        p = q
        if done:
            break
    # one refinement step: p solves ((I - P)^T + J) p = 1
    M = (np.eye(n) - Pm).T + np.ones((n, n))
    p = p + np.linalg.solve(M, np.ones(n) - M @ p)
    p = np.clip(p, 0.0, None)
    p /= p.sum()
    residual = float(np.max(np.abs(p @ Pm - p)))
    if residual >= tol:
        raise NoConvergence(f"stationary residual {residual:.3e} above {tol:.0e}")
    return tuple(float(v) for v in p)


def stationary_vector(P, *, exact: bool | None = None) -> tuple:
    """Unique probability vector ``p`` with ``p P = p``.

    Parameters
    ----------
    P : MarkovSpec or square stochastic matrix
        Exact entries (ints, Fractions) select the rational solver unless
        ``exact=False``.

    Raises
    ------
    NotUnique
        If the support of ``P`` is not irreducible.
    """
    if isinstance(P, MarkovSpec):
        P = P.P
    rows = [list(r) for r in P]
    support = _support(rows)
    if not support.irreducible:
        raise NotUnique("chain is reducible")
    if exact is None:
        exact = all(_is_exact(v) for r in rows for v in r)
    if exact:
        return _stationary_exact([[Fraction(v) for v in r] for r in rows])
    return _stationary_float(rows)


# --------------------------------------------------------------------------
# Markov specs and cylinders
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MarkovSpec:
    """Stochastic matrix compatible with ``A`` plus an initial distribution.

    Attributes
    ----------
    A : TransitionMatrix
    P : tuple of tuples
        Row-stochastic, positive exactly where ``A`` is 1.
    initial : tuple
        Distribution of ``x_0``.
    kind : {"stationary", "initial", "one-sided-uniform"}
        Stationary specs satisfy ``initial P = initial`` and have
        position-independent cylinder measures.
    mode : {"exact", "float"}
    """

    A: TransitionMatrix
    P: tuple
    initial: tuple
    kind: str = "stationary"
    mode: str = "exact"

    def __post_init__(self):
        n = self.A.n
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if self.mode not in ("exact", "float"):
            raise ValueError("mode must be 'exact' or 'float'")
        if len(self.P) != n or any(len(r) != n for r in self.P) or len(self.initial) != n:
            raise ValueError("P and initial must match the alphabet size")
        exact = self.mode == "exact"
        for i, row in enumerate(self.P):
            for j, v in enumerate(row):
                if (v > 0) != bool(self.A.entries[i][j]) or v < 0:
                    raise ValueError(f"P({i},{j}) = {v} incompatible with A({i},{j})")
            if not _close(sum(row), 1, exact):
                raise ValueError(f"row {i} of P sums to {sum(row)}")
        if any(v < 0 for v in self.initial) or not _close(sum(self.initial), 1, exact):
            raise ValueError("initial distribution must be a probability vector")
        if self.kind == "stationary":
            pP = [sum(self.initial[i] * self.P[i][j] for i in range(n)) for j in range(n)]
            if not all(_close(a, b, exact) for a, b in zip(pP, self.initial)):
                raise ValueError("initial vector is not stationary for P")

    @classmethod
    def build(cls, A: TransitionMatrix, P, initial=None, *, kind: str = "stationary",
              exact: bool | None = None) -> "MarkovSpec":
        """Build a spec, converting entries to the chosen mode.

        ``initial`` defaults to the stationary vector (``kind="stationary"``)
        or to the uniform vector (``kind="one-sided-uniform"``).
        """
        if exact is None:
            vals = [v for r in P for v in r] + list(initial or [])
            exact = all(_is_exact(v) for v in vals)
        Pm = tuple(tuple(_to_mode(v, exact) for v in r) for r in P)
        n = len(Pm)
        if initial is None:
            if kind == "stationary":
                initial = stationary_vector(Pm, exact=exact)
            elif kind == "one-sided-uniform":
                initial = [Fraction(1, n) if exact else 1.0 / n] * n
            else:
                raise ValueError("kind 'initial' needs an explicit initial vector")
        init = tuple(_to_mode(v, exact) for v in initial)
        return cls(A, Pm, init, kind, "exact" if exact else "float")

    @classmethod
    def bernoulli(cls, probs: Sequence, *, exact: bool | None = None) -> "MarkovSpec":
        """Product measure on the full shift with one-symbol law ``probs``."""
        probs = list(probs)
        n = len(probs)
        return cls.build(TransitionMatrix.full_shift(n), [probs] * n, probs, exact=exact)

    @classmethod
    def golden_alpha(cls, alpha) -> "MarkovSpec":
        """Golden-mean chain ``[[a, 1-a], [1, 0]]`` started from ``(a, 1-a)``.

        Not stationary unless ``a`` is the golden ratio conjugate.
        """
        exact = _is_exact(alpha)
        one = Fraction(1) if exact else 1.0
        a = Fraction(alpha) if exact else float(alpha)
        return cls.build(TransitionMatrix.golden_mean(), [[a, one - a], [one, 0 * one]],
                         [a, one - a], kind="initial", exact=exact)

    @property
    def n(self) -> int:
        return self.A.n

    def as_float(self) -> "MarkovSpec":
        P = tuple(tuple(float(v) for v in r) for r in self.P)
        return MarkovSpec(self.A, P, tuple(float(v) for v in self.initial), self.kind, "float")

    def with_kind(self, kind: str, initial=None) -> "MarkovSpec":
        return MarkovSpec.build(self.A, self.P, initial, kind=kind, exact=self.mode == "exact")

    def zero(self):
        return Fraction(0) if self.mode == "exact" else 0.0

    def one(self):
        return Fraction(1) if self.mode == "exact" else 1.0


def _close(a, b, exact: bool) -> bool:
    return a == b if exact else abs(float(a) - float(b)) < FLOAT_TOL


def cylinder_measure(spec: MarkovSpec, word: Sequence[int], position: int = 0):
    """Measure of the cylinder ``{x : x_{position+k} = word_k}``.

    Disallowed words get measure 0. Only stationary specs accept a nonzero
    position.
    """
    word = tuple(word)
    if position < 0:
        raise ValueError("position must be nonnegative")
    if position and spec.kind != "stationary":
        raise ValueError(f"a {spec.kind!r} spec only evaluates cylinders at position 0")
    if not word:
        return spec.one()
    if not is_allowed(spec.A, word):
        return spec.zero()
    value = spec.initial[word[0]]
    for a, b in zip(word, word[1:]):
        value = value * spec.P[a][b]
    return value


# --------------------------------------------------------------------------
# potentials
# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Potential:
    """Finite-range potential: ``phi(x)`` depends on ``x_0 .. x_{range-1}``.

    ``table`` maps allowed blocks (tuples) to values (floats or Fractions).
    """

    range: int
    table: Mapping[Word, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.range < 1:
            raise ValueError("range must be at least 1")
        table = {tuple(int(s) for s in k): v for k, v in self.table.items()}
        if any(len(k) != self.range for k in table):
            raise ValueError(f"every block must have length {self.range}")
        object.__setattr__(self, "table", table)

    @classmethod
    def from_function(cls, A: TransitionMatrix, r: int, f: Callable[[Word], object]) -> "Potential":
        return cls(r, {b: f(b) for b in allowed_blocks(A, r)})

    @classmethod
    def constant(cls, A: TransitionMatrix, c=0.0, r: int = 1) -> "Potential":
        return cls.from_function(A, r, lambda _b: c)

    @classmethod
    def log_transition(cls, spec: MarkovSpec) -> "Potential":
        """``phi(x) = log P(x_0, x_1)``."""
        return cls.from_function(spec.A, 2, lambda b: math.log(spec.P[b[0]][b[1]]))

    def __call__(self, block: Sequence[int]):
        return self.table[tuple(block[: self.range])]

    def check(self, A: TransitionMatrix) -> None:
        """Raise ValueError unless the table covers exactly the allowed blocks."""
        expected = set(allowed_blocks(A, self.range))
        if set(self.table) != expected:
            missing = sorted(expected - set(self.table))
            extra = sorted(set(self.table) - expected)
            raise ValueError(f"potential table mismatch: missing {missing}, extra {extra}")

    def lift(self, A: TransitionMatrix, r: int) -> "Potential":
        """Same function read on allowed ``r``-blocks, ``r >= range``."""
        if r < self.range:
            raise ValueError("cannot lower the range")
        return Potential.from_function(A, r, lambda b: self.table[b[: self.range]])


def allowed_blocks(A: TransitionMatrix, r: int) -> list[Word]:
    blocks: list[Word] = [(s,) for s in range(A.n)]
    for _ in range(r - 1):
        blocks = [b + (c,) for b in blocks for c in A.successors(b[-1])]
    return sorted(blocks)


def variation_sequence(phi: Potential) -> list:
    """``[omega_0, ..., omega_range]`` with ``omega_k`` the largest change of
    ``phi`` between blocks that agree on their first ``k`` coordinates."""
    out = []
    for k in range(phi.range + 1):
        groups: dict[Word, list] = {}
        for b, v in phi.table.items():
            groups.setdefault(b[:k], []).append(v)
        omega = max((max(vs) - min(vs) for vs in groups.values()), default=0)
        out.append(omega)
    return out


def radon_nikodym(phi: Potential, x: SequencePoint, x2: SequencePoint):
    """One-sided log Radon-Nikodym sum ``sum_{k>=0} phi(s^k x) - phi(s^k x2)``.

    Only windows starting before the last disagreement contribute. Windows
    are first reduced to net integer multiplicities per potential value, so
    the result is exactly 0 whenever the two multisets of values agree (for
    example under finite permutations with a one-coordinate potential).

    Raises
    ------
    NotHomoclinic
        If ``x`` and ``x2`` are not tail-equivalent.
    """
    K = last_difference(x, x2)
    r = phi.range
    hx, hy = x.head(K + r - 1), x2.head(K + r - 1)
    net: Counter = Counter()
    for k in range(K):
        net[phi(hx[k:k + r])] += 1
        net[phi(hy[k:k + r])] -= 1
    terms = [c * v for v, c in net.items() if c]
    if not terms:
        return 0
    if all(_is_exact(t) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(float(t) for t in terms)


# --------------------------------------------------------------------------
# Perron data and Gibbs construction
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class PerronData:
    eigenvalue: float
    right: np.ndarray
    left: np.ndarray
    residual: float
    iterations: int


def _power(B: np.ndarray, tol: float, max_iter: int) -> tuple[float, np.ndarray, float, int]:
    v = np.ones(B.shape[0])
    v /= v.sum()
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = B @ v
        lam = w.sum()  # v sums to 1
        if lam <= 0:
            raise NoConvergence("matrix annihilates the positive cone")
        w /= lam
        step = np.max(np.abs(w - v))
        v = w
        if step < tol * 1e-2:
            res = float(np.max(np.abs(B @ v - lam * v)))
            if res < tol * max(1.0, lam):
                return float(lam), v, res, it
    res = float(np.max(np.abs(B @ v - lam * v)))
    raise NoConvergence(f"no convergence after {max_iter} iterations (residual {res:.3e})")


def perron(B, *, tol: float = 1e-12, max_iter: int = 10**6) -> PerronData:
    """Perron eigenvalue and positive eigenvectors by power iteration.

    Starts from the all-ones vector. ``right`` sums to 1 and ``left`` is
    scaled so that ``left @ right == 1``.

    Raises
    ------
    NoConvergence
        If the residual stays above ``tol * max(1, eigenvalue)`` (periodic or
        reducible input typically).
    """
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("B must be square")
    if np.any(B < 0):
        raise ValueError("B must be nonnegative")
    lam, r, res, it = _power(B, tol, max_iter)
    lam_l, l, res_l, it_l = _power(B.T, tol, max_iter)
    l = l / (l @ r)
    return PerronData(lam, r, l, max(res, res_l), max(it, it_l))


def transfer_matrix(A: TransitionMatrix, phi: Potential) -> np.ndarray:
    """``B(i, j) = A(i, j) exp(phi(i, j))`` after lifting ``phi`` to range 2.

    The maximum of ``phi`` is subtracted first; this rescales ``B`` and
    leaves the resulting Markov chain unchanged.
    """
    if phi.range > 2:
        raise ValueError("only potentials of range 1 or 2 define a Markov chain here")
    phi2 = phi.lift(A, 2) if phi.range == 1 else phi
    phi2.check(A)
    top = max(float(v) for v in phi2.table.values())
    B = np.zeros((A.n, A.n))
    for (i, j), v in phi2.table.items():
        B[i, j] = math.exp(float(v) - top)
    return B


def gibbs_from_potential(A: TransitionMatrix, phi: Potential, **perron_kw) -> MarkovSpec:
    """Stationary Markov measure of a range-1 or range-2 potential.

    ``P(i, j) = B(i, j) r_j / (lambda r_i)`` and ``p(i) ~ l_i r_i`` where
    ``(lambda, r, l)`` is the Perron data of :func:`transfer_matrix`.
    """
    B = transfer_matrix(A, phi)
    pd = perron(B, **perron_kw)
    r, l = pd.right, pd.left
    P = B * r[None, :] / (pd.eigenvalue * r[:, None])
    P /= P.sum(axis=1, keepdims=True)
    p = l * r
    p /= p.sum()
    return MarkovSpec(A, tuple(tuple(float(v) for v in row) for row in P),
                      tuple(float(v) for v in p), "stationary", "float")
