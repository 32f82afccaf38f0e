"""Seed-pinned numerical experiments on weights, conditionals and ratios.

Experiments return an :class:`ExperimentReport`; none of them asserts
convergence. Random draws use numpy's ``PCG64`` bit generator seeded with
the given 64-bit integer, so a run is reproducible on any platform.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np
import sympy

from .adic_engine import psi_preimage, psi_recode_golden
from .cocycle_relations import CocycleSpec, _acc
from .markov_gibbs import MarkovSpec, cylinder_measure
from .sft_core import (
    DEFAULT_MAX_STATES,
    EnumerationTooLarge,
    TransitionMatrix,
    Word,
    count_words,
    enumerate_words,
    is_allowed,
    iter_parikh_layers,
    layer_value,
    parikh,
)


class PrecisionBudgetExceeded(RuntimeError):
    """The requested working precision is above the configured budget."""


# --------------------------------------------------------------------------
# reports and sampling
# --------------------------------------------------------------------------


@dataclass
class ExperimentReport:
    """Series of ``(n, value)`` pairs plus tail statistics.

    ``limit_estimate`` is the mean over the last quartile of the series and
    ``max_abs_error_tail`` the largest distance from ``target`` there (from
    ``limit_estimate`` when there is no target).
    """

    name: str
    series: list[tuple[int, object]]
    target: float | None = None
    rng_seed: int | None = None
    metadata: dict = field(default_factory=dict)
    flags: list[str] = field(default_factory=list)

    @property
    def values(self) -> list:
        return [v for _, v in self.series]

    def tail(self) -> list[float]:
        vals = [float(v) for v in self.values]
        if not vals:
            return []
        return vals[len(vals) - max(1, len(vals) // 4):]

    @property
    def limit_estimate(self) -> float:
        t = self.tail()
        return math.fsum(t) / len(t) if t else math.nan

    @property
    def max_abs_error_tail(self) -> float:
        t = self.tail()
        if not t:
            return math.nan
        ref = self.limit_estimate if self.target is None else self.target
        return max(abs(v - ref) for v in t)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "points": len(self.series),
            "limit_estimate": self.limit_estimate,
            "target": self.target,
            "max_abs_error_tail": self.max_abs_error_tail,
            "rng_seed": self.rng_seed,
            "flags": list(self.flags),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "value"])
        for n, v in self.series:
            w.writerow([n, repr(float(v))])
        return buf.getvalue()

    def to_json(self, config: dict | None = None) -> str:
        doc = dict(self.summary())
        doc["metadata"] = _jsonable(self.metadata)
        if config is not None:
            doc["config"] = _jsonable(config)
        doc["series"] = [[n, float(v)] for n, v in self.series]
        return json.dumps(doc, indent=2, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def sample_path(spec: MarkovSpec, length: int, seed: int) -> Word:
    """Draw ``x_0 .. x_{length-1}`` from a Markov spec by inverse CDF."""
    rng = make_rng(seed)
    u = rng.random(length)
    init = np.cumsum([float(v) for v in spec.initial])
    rows = np.cumsum(np.array([[float(v) for v in r] for r in spec.P]), axis=1)
    n = spec.n
    out = []
    cdf = init
    for k in range(length):
        s = min(int(np.searchsorted(cdf, u[k] * cdf[-1], side="right")), n - 1)
        out.append(s)
        cdf = rows[s]
    return tuple(out)


def _rational(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(repr(v))
    return Fraction(v)


def _integer_weights(spec: MarkovSpec) -> tuple[list[list[int]], int, list[Fraction]]:
    """``(D * P, D, initial)`` with ``D`` the common denominator of ``P``."""
    P = [[_rational(v) for v in row] for row in spec.P]
    D = math.lcm(*(v.denominator for row in P for v in row))
    W = [[int(v * D) for v in row] for row in P]
    return W, D, [_rational(v) for v in spec.initial]


def _max_level(n: int, max_states: int) -> int:
    """Largest level ``t`` with ``n * (t + 1) ** (n - 1) <= max_states``."""
    if n == 1:
        return max_states
    if n > max_states:
        return 0
    t = max(int((max_states / n) ** (1 / (n - 1))) - 1, 0)
    while n * (t + 2) ** (n - 1) <= max_states:
        t += 1
    while t > 0 and n * (t + 1) ** (n - 1) > max_states:
        t -= 1
    return t


# --------------------------------------------------------------------------
# ratio limits
# --------------------------------------------------------------------------


def pascal_ratio_closed_form(n: int, m: int, y_counts: Sequence[int], j_counts: Sequence[int]) -> Fraction:
    """``C(n-m, y_0-j_0) / C(n, y_0)`` for the full 2-shift.

    Returns 0 when ``j`` is not componentwise below ``y``.
    """
    y0, y1 = y_counts
    j0, j1 = j_counts
    if y0 + y1 != n or j0 + j1 != m or min(y0, y1, j0, j1) < 0:
        raise ValueError("counts must be nonnegative and sum to the lengths")
    if j0 > y0 or j1 > y1:
        return Fraction(0)
    return Fraction(math.comb(n - m, y0 - j0), math.comb(n, y0))


def ratio_limit_batch(A: TransitionMatrix, measure: MarkovSpec, C: Sequence[int],
                      seeds: Iterable[int], n_max: int,
                      max_states: int = DEFAULT_MAX_STATES) -> list[ExperimentReport]:
    """:func:`ratio_limit_experiment` for several seeds sharing one DP."""
    C = tuple(C)
    seeds = list(seeds)
    m = len(C)
    if m == 0:
        raise ValueError("the cylinder must be non-empty")
    if measure.A.entries != A.entries:
        raise ValueError("measure lives on a different shift")
    flags = []
    cap = _max_level(A.n, max_states)
    if n_max > cap:
        flags.append(f"truncated: n_max {n_max} -> {cap} by the state budget")
        n_max = cap
    target = float(cylinder_measure(measure, C))
    paths = {s: sample_path(measure, n_max + 1, s) for s in seeds}
    series = {s: [] for s in seeds}
    if m <= n_max and is_allowed(A, C):
        jC = parikh(C, A.n)
        free = iter_parikh_layers(A.entries, n_max, max_states=max_states)
        cont = iter_parikh_layers(A.entries, n_max - m, start=C[-1], max_states=max_states)
        running = {s: [0] * A.n for s in seeds}
        ctab = None
        for n, tabs in free:
            if n >= m:
                _, ctab = next(cont)
            for s in seeds:
                y = paths[s]
                running[s][y[n - 1]] += 1
                if n < m:
                    continue
                counts = running[s]
                den = layer_value(tabs, counts, next_symbol=y[n], A=A)
                rest = [a - b for a, b in zip(counts, jC)]
                num = layer_value(ctab, rest, next_symbol=y[n], A=A)
                series[s].append((n, Fraction(num, den)))
    elif m > n_max:
        flags.append("cylinder longer than n_max")
    meta = {"cylinder": list(C), "n_max": n_max, "measure_kind": measure.kind}
    return [ExperimentReport("ratio-limit", series[s], target, s, dict(meta), list(flags))
            for s in seeds]


def ratio_limit_experiment(A: TransitionMatrix, measure: MarkovSpec, C: Sequence[int],
                           sampler_seed: int, n_max: int,
                           max_states: int = DEFAULT_MAX_STATES) -> ExperimentReport:
    """Exact ratios ``w_n(C, y) / w_n(y)`` along a sampled point ``y``.

    ``y`` is drawn from ``measure``; the series runs over ``n = |C| ..
    n_max`` and the target is the cylinder measure of ``C``. Levels beyond
    the state budget are dropped and flagged.
    """
    return ratio_limit_batch(A, measure, C, [sampler_seed], n_max, max_states)[0]


# --------------------------------------------------------------------------
# conditional block laws
# --------------------------------------------------------------------------


def definetti_conditional_experiment(A: TransitionMatrix, measure: MarkovSpec, block_length: int,
                                     n: int, seed: int,
                                     max_states: int = DEFAULT_MAX_STATES) -> ExperimentReport:
    """Exact law of the initial block given symbol counts and the next symbol.

    For each level ``k = l .. n`` and each allowed block ``B`` of length
    ``l``, computes ``mu(B | counts of y[0..k), y_k)`` under ``measure``
    itself and compares it with ``mu(B)``. The series holds the largest
    absolute difference per level; the final conditional table is kept in
    ``metadata["conditionals"]``.
    """
    l = block_length
    if l < 1 or n < l:
        raise ValueError("need 1 <= block_length <= n")
    if A.n * (n + 1) ** (A.n - 1) * (A.n + 1) > max_states:
        raise EnumerationTooLarge("conditional tables exceed the state budget")
    W, D, init = _integer_weights(measure)
    blocks = enumerate_words(A, l)
    y = sample_path(measure, n + 1, seed)
    # stored continuation layers per start symbol
    cont = [dict(iter_parikh_layers(W, n - 1, start=s, max_states=max_states)) for s in range(A.n)]

    def tail_weight(start, t, counts, nxt):
        tabs = cont[start][t]
        idx = [c for c in counts]
        total = 0
        for j in range(A.n):
            if W[j][nxt]:
                total += layer_value(tabs, idx, end=j) * W[j][nxt]
        return total

    block_weight = {}
    for B in blocks:
        w = init[B[0]]
        for a, b in zip(B, B[1:]):
            w *= W[a][b]
        block_weight[B] = w  # scaled by D**(l-1)
    targets = {B: cylinder_measure(measure, B) for B in blocks}
    series, cond = [], {}
    for k in range(l, n + 1):
        counts = parikh(y[:k], A.n)
        nxt = y[k]
        num = {}
        for B in blocks:
            rest = [a - b for a, b in zip(counts, parikh(B, A.n))]
            if min(rest) < 0:
                num[B] = Fraction(0)
                continue
            num[B] = block_weight[B] * tail_weight(B[-1], k - l, rest, nxt)
        den = sum(num.values())
        if den == 0:
            continue
        cond = {B: Fraction(v) / den for B, v in num.items()}
        err = max(abs(float(cond[B]) - float(targets[B])) for B in blocks)
        series.append((k, err))
    meta = {
        "block_length": l,
        "conditionals": {"".join(map(str, B)): cond.get(B) for B in blocks},
        "targets": {"".join(map(str, B)): targets[B] for B in blocks},
    }
    return ExperimentReport("definetti", series, 0.0, seed, meta)


def psi_image_measure(spec: MarkovSpec, ab_word: str):
    """Measure of the points whose golden-mean recoding starts with ``ab_word``.

    That set is the cylinder of the substituted word ``a -> 0, b -> 10``.
    """
    return cylinder_measure(spec, psi_preimage(ab_word))


# --------------------------------------------------------------------------
# Q tables and amnesia
# --------------------------------------------------------------------------


@dataclass
class QTable:
    """All ``Q_{i,j}(s)`` at one level ``m`` (words of length ``m + 1``)."""

    spec: MarkovSpec
    m: int
    values: dict

    def total_probability(self) -> dict:
        """``sum_{j, s} Q_{i,j}(s)`` per start symbol (each should be 1)."""
        out = {}
        for (i, _j, _s), v in self.values.items():
            out[i] = out.get(i, Fraction(0)) + v
        return out

    def marginal(self) -> Fraction:
        """``sum_{i, j, s} p(i) Q_{i,j}(s)`` (should be 1)."""
        p = [_rational(v) for v in self.spec.initial]
        return sum((p[i] * v for (i, _j, _s), v in self.values.items()), Fraction(0))


def q_table(spec: MarkovSpec, m: int) -> QTable:
    """Every nonzero ``Q_{i,j}(s)`` with ``s`` summing to ``m + 1``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    W, D, _ = _integer_weights(spec)
    n = spec.n
    scale = D ** m
    values = {}
    for i in range(n):
        for t, tabs in iter_parikh_layers(W, m, start=i):
            if t != m:
                continue
            for rest in _compositions(m, n):
                s = tuple(r + (1 if k == i else 0) for k, r in enumerate(rest))
                for j in range(n):
                    v = layer_value(tabs, rest, end=j)
                    if v:
                        values[(i, j, s)] = Fraction(v, scale)
    return QTable(spec, m, values)


def _compositions(total: int, parts: int):
    for cut in itertools.combinations(range(total + parts - 1), parts - 1):
        prev, out = -1, []
        for c in cut:
            out.append(c - prev - 1)
            prev = c
        out.append(total + parts - 2 - prev)
        yield tuple(out)


def q_value(spec: MarkovSpec, i: int, j: int, s: Sequence[int]) -> Fraction:
    """``Q_{i,j}(s) = mu([i]_0 & counts(x_0..x_m) = s & [j]_m) / p(i)``.

    Sums ``prod P`` over allowed words from ``i`` to ``j`` with counts
    ``s``; ``m + 1 = sum(s)``. Returns 0 when no word qualifies.
    """
    s = tuple(int(c) for c in s)
    m = sum(s) - 1
    if m < 0 or min(s) < 0 or s[i] == 0 or (m == 0 and i != j):
        return Fraction(0)
    W, D, _ = _integer_weights(spec)
    rest = list(s)
    rest[i] -= 1
    for t, tabs in iter_parikh_layers(W, m, start=i):
        if t == m:
            return Fraction(layer_value(tabs, rest, end=j), D ** m)
    raise AssertionError("unreachable")


def _infer_last(s: Sequence[int], last: int | None) -> int:
    if last is not None:
        if s[last] <= 0:
            raise ValueError("last symbol must occur in the block counts")
        return last
    nz = [k for k, c in enumerate(s) if c]
    if len(nz) != 1:
        raise ValueError(f"counts {tuple(s)} do not fix the last symbol; pass it explicitly")
    return nz[0]


def amnesia_batch(spec: MarkovSpec, s_prime: Sequence[int], s_doubleprime: Sequence[int],
                  seeds: Iterable[int], m_max: int, last_prime: int | None = None,
                  last_doubleprime: int | None = None) -> list[ExperimentReport]:
    """:func:`amnesia_experiment` for several seeds sharing the DP passes."""
    seeds = list(seeds)
    s1, s2 = tuple(s_prime), tuple(s_doubleprime)
    i1, i2 = _infer_last(s1, last_prime), _infer_last(s2, last_doubleprime)
    n = spec.n
    L1, L2 = sum(s1), sum(s2)
    m0 = max(L1, L2)
    W, D, _ = _integer_weights(spec)
    paths = {sd: sample_path(spec, m_max + 1, sd) for sd in seeds}
    # counts of x_0..x_m for every seed and level
    prefix_counts = {}
    for sd, x in paths.items():
        run, rows = [0] * n, []
        for k in range(m_max + 1):
            run[x[k]] += 1
            rows.append(tuple(run))
        prefix_counts[sd] = rows
    # Q_{i,x_m}(s - s' + e_i) needs the walk of m + 1 - |s'| steps from i
    needs = {}
    for key, start, sp in (("num", i1, s1), ("den", i2, s2)):
        L = sum(sp)
        needs.setdefault(start, []).append((key, L, sp))
    raw = {sd: {"num": {}, "den": {}} for sd in seeds}
    for start, jobs in needs.items():
        t_max = m_max + 1 - min(L for _, L, _ in jobs)
        for t, tabs in iter_parikh_layers(W, t_max, start=start):
            for key, L, sp in jobs:
                m = t + L - 1
                if m < m0 or m > m_max:
                    continue
                for sd in seeds:
                    s = prefix_counts[sd][m]
                    rest = [a - b for a, b in zip(s, sp)]
                    raw[sd][key][m] = (layer_value(tabs, rest, end=paths[sd][m]), t)
    reports = []
    for sd in seeds:
        series, skipped = [], []
        for m in range(m0, m_max + 1):
            a, ta = raw[sd]["num"][m]
            b, tb = raw[sd]["den"][m]
            if b == 0 or a == 0:
                skipped.append(m)
                continue
            series.append((m, Fraction(a * D ** tb, b * D ** ta)))
        meta = {"s_prime": list(s1), "s_doubleprime": list(s2), "last_prime": i1,
                "last_doubleprime": i2, "m_max": m_max, "skipped": skipped}
        flags = [f"skipped {len(skipped)} levels with a zero Q"] if skipped else []
        reports.append(ExperimentReport("amnesia", series, 1.0, sd, meta, flags))
    return reports


def amnesia_experiment(spec: MarkovSpec, s_prime: Sequence[int], s_doubleprime: Sequence[int],
                       seed: int, m_max: int, last_prime: int | None = None,
                       last_doubleprime: int | None = None) -> ExperimentReport:
    """Ratio of two conditional ``Q`` values along a sampled point.

    With ``x`` drawn from ``spec`` and ``s = counts(x_0..x_m)``, the series
    is ``Q_{i',x_m}(s - s' + e_{i'}) / Q_{i'',x_m}(s - s'' + e_{i''})``: the
    probability of reaching counts ``s`` and symbol ``x_m`` at time ``m``
    after an initial block with counts ``s'`` ending in ``i'``, divided by
    the same after ``s''`` ending in ``i''``. The target is 1. Levels where
    a ``Q`` vanishes are skipped and listed in the metadata.
    """
    return amnesia_batch(spec, s_prime, s_doubleprime, [seed], m_max,
                         last_prime, last_doubleprime)[0]


# --------------------------------------------------------------------------
# Pascal's triangle modulo primes and the weak-mixing exploration
# --------------------------------------------------------------------------


def binomial_mod_prime(m: int, k: int, p: int) -> int:
    """``C(m, k) mod p`` by Lucas' theorem (digitwise in base ``p``)."""
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    if k < 0 or m < 0 or k > m:
        return 0
    out = 1
    while m or k:
        mi, ki = m % p, k % p
        if ki > mi:
            return 0
        out = out * math.comb(mi, ki) % p
        m //= p
        k //= p
    return out


def parse_real(theta) -> Fraction | sympy.Expr:
    """A rational (``"p/q"``, decimal, int, Fraction) or a sympy expression."""
    if isinstance(theta, (int, Fraction)):
        return Fraction(theta)
    if isinstance(theta, float):
        return Fraction(repr(theta))
    text = str(theta).strip()
    try:
        return Fraction(text)
    except ValueError:
        pass
    expr = sympy.sympify(text)
    if not expr.is_real:
        raise ValueError(f"{text!r} is not a real number")
    if expr.is_Rational:
        return Fraction(int(expr.p), int(expr.q))
    return expr


def _frac_distance(f: float) -> float:
    return min(f, 1.0 - f)


def weakmix_exploration(alpha, theta, m_max: int, seed: int,
                        max_digits: int = 100_000) -> ExperimentReport:
    """Fractional parts of ``theta * w_m(y)`` along a Bernoulli path.

    ``y`` is drawn from Bernoulli(``alpha``) on two symbols and
    ``w_m(y) = C(m, ones in y[0..m))``. Rational ``theta`` is handled
    exactly; otherwise ``theta`` is evaluated with ``digits(w) + 20``
    significant digits. Nothing is asserted; the metadata carries the
    tail's closest approach to 0, the star discrepancy of the emitted
    values and, for ``theta = 1/p`` with ``p`` prime, a Lucas cross-check.
    """
    from .interval_splitting import star_discrepancy

    a = parse_real(alpha)
    if isinstance(a, Fraction):
        spec = MarkovSpec.bernoulli([1 - a, a])
    else:
        af = float(a)
        spec = MarkovSpec.bernoulli([1 - af, af])
    th = parse_real(theta)
    # C(m, k) <= 2**m bounds the digits needed before any big integer is built
    bound = int(m_max * math.log10(2)) + 1 + 20
    if bound > max_digits:
        raise PrecisionBudgetExceeded(f"needs up to {bound} digits (budget {max_digits})")
    y = sample_path(spec, m_max, seed)
    weights, ones = [], 0
    for m in range(1, m_max + 1):
        ones += y[m - 1]
        weights.append((m, ones, math.comb(m, ones)))
    digits = max(len(str(w)) for _, _, w in weights) + 20
    if digits > max_digits:
        raise PrecisionBudgetExceeded(f"needs {digits} digits (budget {max_digits})")
    series = []
    meta: dict = {"alpha": str(alpha), "theta": str(theta), "digits": digits}
    if isinstance(th, Fraction):
        for m, _k, w in weights:
            series.append((m, Fraction(th.numerator * w % th.denominator, th.denominator)))
        q = th.denominator
        if th.numerator == 1 and q > 1 and sympy.isprime(q):
            meta["lucas_agrees"] = all(
                v == Fraction(binomial_mod_prime(m, k, q), q)
                for (m, k, _w), (_m, v) in zip(weights, series)
            )
        if th == Fraction(1, 2):
            meta["odd_fraction"] = sum(1 for _, v in series if v) / len(series)
    else:
        with mpmath.workdps(digits):
            tv = mpmath.mpf(str(th.evalf(digits)))
            for m, _k, w in weights:
                series.append((m, float(mpmath.frac(tv * w))))
    vals = [float(v) for _, v in series]
    tail = vals[len(vals) - max(1, len(vals) // 4):]
    meta["tail_min_distance_to_zero"] = min(_frac_distance(v) for v in tail)
    meta["star_discrepancy"] = star_discrepancy(vals)
    return ExperimentReport("weakmix", series, None, seed, meta)


# --------------------------------------------------------------------------
# ratios under a cocycle subrelation (brute force)
# --------------------------------------------------------------------------


def cocycle_ratio_experiment(A: TransitionMatrix, psi: CocycleSpec, measure: MarkovSpec,
                             C: Sequence[int], seed: int, n_max: int) -> ExperimentReport:
    """Share of the subrelation class of ``y`` at level ``n`` lying in ``C``.

    The class at level ``n`` holds the allowed words ``w`` of length ``n``
    that may precede ``y_n`` and whose forward cocycle against ``y`` is
    trivial. Enumerated by brute force, so ``n_max`` must stay small.
    """
    if n_max > 18:
        raise EnumerationTooLarge("brute-force class enumeration is limited to n <= 18")
    C = tuple(C)
    b = psi.window
    y = sample_path(measure, n_max + b, seed)
    series = []
    for n in range(max(len(C), 1), n_max + 1):
        head = y[: n + b - 1]
        ref = _acc(psi, head)
        inside = total = 0
        for w in itertools.product(range(A.n), repeat=n):
            word = w + head[n:]
            if not is_allowed(A, word):
                continue
            if _acc(psi, word) != ref:
                continue
            total += 1
            inside += w[: len(C)] == C
        series.append((n, Fraction(inside, total)))
    target = float(cylinder_measure(measure, C))
    return ExperimentReport("cocycle-ratio", series, target, seed, {"cylinder": list(C)})


def golden_words(length: int) -> list[Word]:
    """Every golden-mean word of the given length."""
    return enumerate_words(TransitionMatrix.golden_mean(), length)


def psi_image_by_enumeration(spec: MarkovSpec, ab_word: str) -> Fraction:
    """Oracle for :func:`psi_image_measure`: sum golden cylinders of length
    ``2 * len(ab_word)`` whose recoding starts with ``ab_word``."""
    L = 2 * len(ab_word)
    total = Fraction(0)
    for w in golden_words(L):
        if psi_recode_golden(w).symbols.startswith(ab_word):
            total += cylinder_measure(spec, w)
    return total


def count_ratio(A: TransitionMatrix, n: int, y_counts, C, next_symbol=None) -> Fraction:
    """``w_n(C, y) / w_n(y)`` straight from :func:`count_words`."""
    den = count_words(A, n, parikh=y_counts, next_symbol=next_symbol)
    num = count_words(A, n, parikh=y_counts, next_symbol=next_symbol, prefix=C)
    return Fraction(num, den) if den else Fraction(0)
