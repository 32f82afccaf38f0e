import itertools
import sys
from fractions import Fraction

import pytest

from shiftlab.sft_core import TransitionMatrix, validate_matrix

EXAMPLE_53 = [[1, 1, 0], [0, 0, 1], [1, 1, 0]]


@pytest.fixture
def golden():
    return TransitionMatrix.golden_mean()


@pytest.fixture
def full2():
    return TransitionMatrix.full_shift(2)


@pytest.fixture
def full3():
    return TransitionMatrix.full_shift(3)


@pytest.fixture
def example53():
    return validate_matrix(EXAMPLE_53)


def brute_words(A, m):
    """Every allowed word of length m, by raw enumeration of n**m strings."""
    out = []
    for w in itertools.product(range(A.n), repeat=m):
        if all(A.entries[a][b] for a, b in zip(w, w[1:])):
            out.append(w)
    return out


def brute_count(A, m, parikh=None, start=None, end=None, nxt=None, prefix=None):
    total = 0
    for w in brute_words(A, m):
        if parikh is not None and tuple(w.count(s) for s in range(A.n)) != tuple(parikh):
            continue
        if start is not None and (not w or w[0] != start):
            continue
        if end is not None and (not w or w[-1] != end):
            continue
        if nxt is not None and w and not A.entries[w[-1]][nxt]:
            continue
        if prefix is not None and w[: len(prefix)] != tuple(prefix):
            continue
        total += 1
    return total


def _tail_after(A, nxt):
    """A fixed allowed tail starting with ``nxt``: nxt, then a loop."""
    for c in range(A.n):
        if A.entries[nxt][c] and A.entries[c][c]:
            return (nxt,), (c,)
    raise ValueError("no simple tail")


def class_traversal_errors(A, m, successor):
    """Walk every level-``m`` class from its minimum with ``successor``.

    A class is the set of allowed words of length ``m`` with fixed symbol
    counts that may precede a fixed next symbol; points continue with a
    fixed tail. Returns a list of failure descriptions (empty when the
    walk visits the class members in reverse-lex order and then leaves the
    first ``m`` coordinates).
    """
    from shiftlab.sft_core import SequencePoint

    errors = []
    classes = {}
    for nxt in range(A.n):
        try:
            pre, per = _tail_after(A, nxt)
        except ValueError:
            continue
        for w in brute_words(A, m):
            if w and not A.entries[w[-1]][nxt]:
                continue
            key = (tuple(w.count(s) for s in range(A.n)), nxt)
            classes.setdefault(key, (pre, per, []))[2].append(w)
    for key, (pre, per, words) in classes.items():
        words.sort(key=lambda w: tuple(reversed(w)))
        x = SequencePoint(words[0], pre, per)
        for expected in words[1:]:
            y = successor(A, x)
            if not y or y.head(m) != expected or not y.drop(m).same_sequence(x.drop(m)):
                errors.append((key, x.head(m), expected, y))
                break
            x = y
        else:
            y = successor(A, x)
            if y and y.drop(m).same_sequence(x.drop(m)):
                errors.append((key, "max stayed in class", x.head(m), y))
    return errors


def random_stochastic(A, rng, exact=False):
    """Random stochastic matrix with support exactly A."""
    rows = []
    for i in range(A.n):
        if exact:
            w = [rng.randint(1, 9) if A.entries[i][j] else 0 for j in range(A.n)]
            rows.append([Fraction(v, sum(w)) for v in w])
        else:
            w = [rng.uniform(0.05, 1.0) if A.entries[i][j] else 0.0 for j in range(A.n)]
            rows.append([v / sum(w) for v in w])
    return rows


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    order = sorted(mod.RESULTS, key=lambda k: (not k.isdigit(), int(k) if k.isdigit() else 0))
    for key in order:
        terminalreporter.write_line(mod.RESULTS[key])
