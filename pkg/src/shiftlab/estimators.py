"""Estimator-style wrappers around the core constructions.

The classes follow scikit-learn conventions: constructor arguments are
plain parameters, ``fit`` returns ``self`` and learned attributes end with
an underscore.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .adic_engine import psi_recode_golden
from .ergodic_lab import sample_path
from .interval_splitting import LeftRightDependent, Plain, run_and_discrepancy
from .markov_gibbs import Potential, cylinder_measure, gibbs_from_potential, perron, transfer_matrix
from .sft_core import TransitionMatrix, Word, parse_word, validate_matrix


def check_transition_matrix(A) -> TransitionMatrix:
    """Return ``A`` as a :class:`TransitionMatrix`, validating raw grids."""
    if isinstance(A, TransitionMatrix):
        return A
    return validate_matrix(np.asarray(A).tolist())


def check_word(word, n: int | None = None, A: TransitionMatrix | None = None) -> Word:
    """Parse ``word``; check its symbols against ``n`` and its transitions
    against ``A`` when given."""
    if A is not None:
        n = A.n if n is None else n
    w = parse_word(word, n)
    if A is not None:
        for a, b in zip(w, w[1:]):
            if not A.entries[a][b]:
                raise ValueError(f"transition {a}->{b} is forbidden")
    return w


class ParikhVectorizer(TransformerMixin, BaseEstimator):
    """Map words to symbol counts, or to counts of length-``block_length``
    blocks in base-``n`` order.

    Parameters
    ----------
    n_symbols : int, optional
        Alphabet size; inferred from the data by ``fit`` when omitted.
    block_length : int
        1 for symbol counts, ``l + 1`` for counts of transitions of span ``l``.
    """

    def __init__(self, n_symbols: int | None = None, block_length: int = 1):
        self.n_symbols = n_symbols
        self.block_length = block_length

    def fit(self, X, y=None):
        words = [parse_word(x) for x in X]
        if self.block_length < 1:
            raise ValueError("block_length must be positive")
        n = self.n_symbols
        if n is None:
            n = 1 + max((max(w) for w in words if w), default=0)
        self.n_symbols_ = n
        self.n_features_out_ = n ** self.block_length
        return self

    def transform(self, X) -> np.ndarray:
        check_is_fitted(self, "n_symbols_")
        n, l = self.n_symbols_, self.block_length
        out = np.zeros((len(X), n ** l), dtype=np.int64)
        for row, x in enumerate(X):
            w = parse_word(x, n)
            for k in range(len(w) - l + 1):
                idx = 0
                for s in w[k:k + l]:
                    idx = idx * n + s
                out[row, idx] += 1
        return out


class PsiRecoder(TransformerMixin, BaseEstimator):
    """Recode golden-mean words over ``{a, b}`` (``10 -> b``, ``0 -> a``).

    A final ``1`` with no room for its forced ``0`` is dropped unless
    ``strict`` is set, in which case it raises.
    """

    def __init__(self, strict: bool = False):
        self.strict = strict

    def fit(self, X=None, y=None):
        return self

    def transform(self, X) -> list[str]:
        out = []
        for x in X:
            rec = psi_recode_golden(x)
            if rec.remainder and self.strict:
                raise ValueError(f"{x!r} ends inside a 10 block")
            out.append(rec.symbols)
        return out


class GibbsMeasure(BaseEstimator):
    """Stationary Markov measure of a potential on a shift of finite type.

    Parameters
    ----------
    matrix : array-like of shape (n, n)
        0/1 transition matrix.
    potential : dict, optional
        Block-to-value table of a range-1 or range-2 potential; the
        constant potential (Parry measure) when omitted.
    potential_range : int
        Number of coordinates the potential reads.

    Attributes
    ----------
    spec_ : MarkovSpec
    P_ : ndarray of shape (n, n)
    stationary_ : ndarray of shape (n,)
    eigenvalue_ : float
        Perron eigenvalue of the shifted transfer matrix.
    """

    def __init__(self, matrix=None, potential: dict | None = None, potential_range: int = 1):
        self.matrix = matrix
        self.potential = potential
        self.potential_range = potential_range

    def fit(self, X=None, y=None):
        A = check_transition_matrix(self.matrix)
        if self.potential is None:
            phi = Potential.constant(A, 0.0, self.potential_range)
        else:
            table = {tuple(parse_word(k, A.n)): float(v) for k, v in self.potential.items()}
            phi = Potential(self.potential_range, table)
            phi.check(A)
        self.A_ = A
        self.spec_ = gibbs_from_potential(A, phi)
        self.eigenvalue_ = perron(transfer_matrix(A, phi)).eigenvalue
        self.P_ = np.array([[float(v) for v in r] for r in self.spec_.P])
        self.stationary_ = np.array([float(v) for v in self.spec_.initial])
        return self

    def cylinder_probability(self, words: Sequence) -> np.ndarray:
        check_is_fitted(self, "spec_")
        return np.array([float(cylinder_measure(self.spec_, parse_word(w, self.A_.n))) for w in words])

    def score_samples(self, words: Sequence) -> np.ndarray:
        """Log cylinder probabilities (``-inf`` for forbidden words)."""
        with np.errstate(divide="ignore"):
            return np.log(self.cylinder_probability(words))

    def sample(self, length: int, random_state: int = 0) -> Word:
        check_is_fitted(self, "spec_")
        return sample_path(self.spec_, length, random_state)


class KakutaniSplitter(BaseEstimator):
    """Kakutani splitting of ``[0, 1]`` run for ``n_points`` cuts.

    Parameters
    ----------
    alpha : number
        Cut fraction; used for both sides unless ``alpha_right`` is given.
    alpha_right : number, optional
        Cut fraction for right-born intervals.
    n_points : int
    exact : bool
        Rational arithmetic when True.

    Attributes
    ----------
    points_ : list
    discrepancy_ : number
    """

    def __init__(self, alpha=0.5, alpha_right=None, n_points: int = 100, exact: bool = True):
        self.alpha = alpha
        self.alpha_right = alpha_right
        self.n_points = n_points
        self.exact = exact

    def fit(self, X=None, y=None):
        if self.alpha_right is None:
            variant = Plain(self.alpha)
        else:
            variant = LeftRightDependent(self.alpha, self.alpha_right)
        state, disc = run_and_discrepancy(variant, self.n_points, self.exact)
        self.points_ = state.points
        self.lengths_ = state.lengths
        self.discrepancy_ = disc
        return self


__all__ = [
    "GibbsMeasure",
    "KakutaniSplitter",
    "ParikhVectorizer",
    "PsiRecoder",
    "check_transition_matrix",
    "check_word",
]
