"""Confusion-matrix arithmetic, descriptive statistics and the Fisher exact test."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np


class StatsError(ValueError):
    pass


class EmptyMatrix(StatsError):
    pass


class DegenerateTable(StatsError):
    pass


class MismatchedTotals(StatsError):
    pass


class EmptyInput(StatsError):
    pass


@dataclass(frozen=True)
class ConfusionMatrix:
    """Predicted-vs-actual counts with Found as the positive class.

    ``fp`` is predicted Found but actually NotFound; ``fn`` is predicted
    NotFound but actually Found.
    """

    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            value = getattr(self, name)
            if int(value) != value or value < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def match(self) -> int:
        return self.tp + self.tn

    @property
    def mismatch(self) -> int:
        return self.fp + self.fn

    @property
    def accuracy(self) -> Fraction:
        if self.total == 0:
            raise EmptyMatrix("accuracy of an empty matrix")
        return Fraction(self.match, self.total)

    @property
    def predicted_not_found(self) -> int:
        return self.fn + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(self.tp + other.tp, self.fp + other.fp,
                               self.fn + other.fn, self.tn + other.tn)


def round_percent(fraction) -> int:
    """Integer percent, halves rounded away from zero."""
    scaled = Fraction(fraction) * 100
    magnitude = math.floor(abs(scaled) + Fraction(1, 2))
    return magnitude if scaled >= 0 else -magnitude


def truncate_percent(fraction) -> int:
    """Integer percent with the fractional part dropped (71.5% shows as 71)."""
    return math.trunc(Fraction(fraction) * 100)


@dataclass(frozen=True)
class MatrixStats:
    match: int
    mismatch: int
    match_fraction: Fraction
    mismatch_fraction: Fraction

    @property
    def percent_match(self) -> int:
        return round_percent(self.match_fraction)

    @property
    def percent_mismatch(self) -> int:
        return round_percent(self.mismatch_fraction)


def matrix_stats(m: ConfusionMatrix) -> MatrixStats:
    if m.total == 0:
        raise EmptyMatrix("matrix has no observations")
    return MatrixStats(m.match, m.mismatch, Fraction(m.match, m.total), Fraction(m.mismatch, m.total))


@lru_cache(maxsize=None)
def _log_factorials(n: int) -> np.ndarray:
    # lgamma(k + 1) for k = 0..n; built once per size and never mutated
    table = np.array([math.lgamma(k + 1) for k in range(n + 1)])
    table.setflags(write=False)
    return table


def _as_ints(table) -> tuple[int, int, int, int]:
    (a, b), (c, d) = table
    values = (a, b, c, d)
    for v in values:
        if int(v) != v or v < 0:
            raise ValueError(f"table entries must be non-negative integers, got {table!r}")
    return tuple(int(v) for v in values)


def _canonical(a: int, b: int, c: int, d: int) -> tuple[int, int, int, int]:
    # The p-value is invariant under transposition and row/column swaps;
    # evaluating one fixed representative makes that invariance bit-exact.
    variants = []
    for t in ((a, b, c, d), (a, c, b, d)):
        w, x, y, z = t
        variants += [(w, x, y, z), (y, z, w, x), (x, w, z, y), (z, y, x, w)]
    return min(variants)


def hypergeometric_log_pmf(table) -> np.ndarray:
    """Log probabilities of every table sharing the margins of ``table``.

    Indexed by the top-left cell, from its minimum to maximum feasible value.
    """
    a, b, c, d = _as_ints(table)
    r1, r2, c1 = a + b, c + d, a + c
    n = r1 + r2
    lf = _log_factorials(n)
    lo, hi = max(0, c1 - r2), min(r1, c1)
    x = np.arange(lo, hi + 1)
    const = lf[r1] + lf[r2] + lf[c1] + lf[n - c1] - lf[n]
    return const - (lf[x] + lf[r1 - x] + lf[c1 - x] + lf[r2 - c1 + x])


def fisher_exact_two_sided(table, rel_tol: float = 1e-7) -> float:
    """Two-sided Fisher exact p-value for a 2x2 table ``[[a, b], [c, d]]``.

    Sums the probabilities of all tables on the observed margins that are no
    more probable than the observed one. Works in log space so totals in the
    tens of thousands neither overflow nor underflow.
    """
    a, b, c, d = _as_ints(table)
    if a + b == 0 or c + d == 0 or a + c == 0 or b + d == 0:
        raise DegenerateTable(f"a row or column margin is zero: {[[a, b], [c, d]]}")
    a, b, c, d = _canonical(a, b, c, d)
    logp = hypergeometric_log_pmf([[a, b], [c, d]])
    lo = max(0, (a + c) - (c + d))
    observed = logp[a - lo]
    # relative tolerance on probabilities == additive tolerance on logs
    keep = logp <= observed + math.log1p(rel_tol)
    peak = logp.max()
    total = np.exp(logp - peak).sum()
    tail = np.exp(logp[keep] - peak).sum()
    return float(min(1.0, tail / total))


def fisher_exact_rational(table, rel_tol: Fraction = Fraction(1, 10**7)) -> Fraction:
    """Exact rational two-sided p-value by full enumeration (slow; a reference).

    Uses the same near-tie rule as :func:`fisher_exact_two_sided`, evaluated
    exactly.
    """
    a, b, c, d = _as_ints(table)
    r1, r2, c1 = a + b, c + d, a + c
    if r1 == 0 or r2 == 0 or c1 == 0 or b + d == 0:
        raise DegenerateTable(f"a row or column margin is zero: {[[a, b], [c, d]]}")
    n = r1 + r2
    denom = math.comb(n, c1)
    probs = {x: Fraction(math.comb(r1, x) * math.comb(r2, c1 - x), denom)
             for x in range(max(0, c1 - r2), min(r1, c1) + 1)}
    cutoff = probs[a] * (1 + rel_tol)
    return sum((p for p in probs.values() if p <= cutoff), Fraction(0))


def compare_to_baseline(test: ConfusionMatrix, baseline: ConfusionMatrix) -> float:
    """Fisher p-value of a classifier's match/mismatch split against the baseline's."""
    if test.total != baseline.total:
        raise MismatchedTotals(f"test total {test.total} != baseline total {baseline.total}")
    return fisher_exact_two_sided([[test.match, test.mismatch], [baseline.match, baseline.mismatch]])


@dataclass(frozen=True)
class DescriptiveStats:
    n: int
    mean: float
    std_dev: float
    min: float
    max: float


def descriptive(values: Iterable[float]) -> DescriptiveStats:
    """Mean, population standard deviation, min and max."""
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise EmptyInput("descriptive statistics need at least one value")
    mean = float(arr.mean())
    std = float(arr.std())
    # clamp float noise so min <= mean <= max holds exactly
    mean = min(max(mean, float(arr.min())), float(arr.max()))
    return DescriptiveStats(int(arr.size), mean, std, float(arr.min()), float(arr.max()))


def histogram(values: Sequence[float], bin_width: float = 1) -> list[tuple[float, int]]:
    """Counts per bin ``[start, start + width)``, labelled by bin start.

    Bins start at ``floor(min / width) * width``; empty interior bins are kept.
    With integer data and width 1 each bin label is the value itself.
    """
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    if len(values) == 0:
        return []
    idx = np.floor(np.asarray(values, dtype=float) / bin_width).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    out = []
    for k, count in enumerate(counts):
        start = (lo + k) * bin_width
        if float(start).is_integer():
            start = int(start)
        out.append((start, int(count)))
    return out
