"""Nonparametric group and condition tests for cohort summaries.

All p-values are two-sided. Rank tests use mid-ranks for ties; the exact
branches enumerate the permutation distribution conditional on those
mid-ranks, the large-sample branches use tie-corrected normal or chi-square
approximations. ``TestOutcome.method`` records which branch produced a value.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats as sps

from .errors import InsufficientDataError, ParameterError

RANK_SUM_EXACT_MAX = 10
SIGNED_RANK_EXACT_MAX = 15
MCNEMAR_EXACT_MAX = 25


@dataclass(frozen=True)
class GroupSample:
    group_label: str
    condition_label: str
    values: tuple

    def __post_init__(self):
        if not self.group_label or not self.condition_label:
            raise ParameterError("group and condition labels must be non-empty")
        values = tuple(float(v) for v in np.asarray(self.values, dtype=float).ravel())
        if not values:
            raise InsufficientDataError("a group sample needs at least one value")
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # keep pytest from collecting this as a test class

    statistic: float
    p_value: float
    test_name: str
    n: tuple
    method: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"] = list(self.n)
        return d


def _values(sample) -> np.ndarray:
    return np.asarray(getattr(sample, "values", sample), dtype=float)


def _clip(p: float) -> float:
    return float(min(1.0, max(0.0, p)))


def _tie_term(ranks_source: np.ndarray) -> float:
    """Sum of t^3 - t over tie groups."""
    _, counts = np.unique(ranks_source, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def kruskal_wallis(groups) -> TestOutcome:
    """Kruskal-Wallis H with tie correction, chi-square p-value."""
    samples = [_values(g) for g in groups]
    if len(samples) < 2:
        raise InsufficientDataError("Kruskal-Wallis needs at least 2 groups")
    if any(s.size < 2 for s in samples):
        raise InsufficientDataError("every group needs at least 2 values")
    sizes = tuple(int(s.size) for s in samples)
    pooled = np.concatenate(samples)
    n = pooled.size
    ties = _tie_term(pooled)
    correction = 1.0 - ties / (n**3 - n)
    if correction <= 0:
        return TestOutcome(0.0, 1.0, "kruskal_wallis", sizes, "degenerate")
    ranks = sps.rankdata(pooled)
    bounds = np.cumsum((0,) + sizes)
    rank_sums = [ranks[lo:hi].sum() for lo, hi in zip(bounds[:-1], bounds[1:])]
    h = 12.0 / (n * (n + 1)) * sum(r * r / k for r, k in zip(rank_sums, sizes)) - 3.0 * (n + 1)
    h = max(h / correction, 0.0)
    p = sps.chi2.sf(h, len(samples) - 1)
    return TestOutcome(float(h), _clip(p), "kruskal_wallis", sizes, "chi2")


def _subset_sum_counts(weights, size=None) -> np.ndarray:
    """Counts of subsets by integer weight sum (restricted to ``size`` elements if given)."""
    total = int(sum(weights))
    if size is None:
        counts = np.zeros(total + 1, dtype=np.int64)
        counts[0] = 1
        for w in weights:
            counts[w:] = counts[w:] + counts[: total + 1 - w].copy()
        return counts
    table = np.zeros((size + 1, total + 1), dtype=np.int64)
    table[0, 0] = 1
    for w in weights:
        for k in range(size, 0, -1):
            table[k, w:] = table[k, w:] + table[k - 1, : total + 1 - w]
    return table[size]


def _exact_two_sided(counts: np.ndarray, observed: int, center2: int) -> float:
    """P(|2S - center2| >= |2*observed - center2|) for the tabulated sums S."""
    sums = np.arange(counts.size)
    extreme = np.abs(2 * sums - center2) >= abs(2 * observed - center2)
    return float(counts[extreme].sum() / counts.sum())


def rank_sum(a, b) -> TestOutcome:
    """Wilcoxon rank-sum / Mann-Whitney U for sample ``a``.

    Exact permutation p-value when both samples have at most 10 values,
    otherwise tie-corrected normal approximation with continuity correction.
    """
    x, y = _values(a), _values(b)
    if x.size < 2 or y.size < 2:
        raise InsufficientDataError("rank_sum needs at least 2 values per sample")
    na, nb = x.size, y.size
    n = na + nb
    pooled = np.concatenate([x, y])
    ranks = sps.rankdata(pooled)
    u = float(ranks[:na].sum() - na * (na + 1) / 2.0)
    mean_u = na * nb / 2.0
    if na <= RANK_SUM_EXACT_MAX and nb <= RANK_SUM_EXACT_MAX:
        doubled = (2 * ranks).astype(int)
        counts = _subset_sum_counts(list(doubled), size=na)
        observed = int(doubled[:na].sum())
        # rank sum is centred on na*(n+1)/2, so the doubled sum on na*(n+1)
        p = _exact_two_sided(counts, observed, 2 * na * (n + 1))
        return TestOutcome(u, _clip(p), "rank_sum", (na, nb), "exact")
    var = na * nb / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1)))
    if var <= 0:
        return TestOutcome(u, 1.0, "rank_sum", (na, nb), "degenerate")
    z = max(abs(u - mean_u) - 0.5, 0.0) / np.sqrt(var)
    return TestOutcome(u, _clip(2.0 * sps.norm.sf(z)), "rank_sum", (na, nb), "normal")


def signed_rank(paired_a, paired_b) -> TestOutcome:
    """Paired Wilcoxon signed-rank test; statistic is W+ (sum of positive ranks).

    Zero differences are dropped. Exact p-value for at most 15 non-zero
    pairs, otherwise normal approximation with tie and continuity corrections.
    """
    a, b = _values(paired_a), _values(paired_b)
    if a.shape != b.shape:
        raise ParameterError("paired samples must have equal length")
    d = a - b
    d = d[d != 0]
    if d.size == 0:
        return TestOutcome(0.0, 1.0, "signed_rank", (int(a.size), 0), "degenerate")
    if d.size < 5:
        raise InsufficientDataError("signed_rank needs at least 5 non-zero differences")
    n = d.size
    ranks = sps.rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= SIGNED_RANK_EXACT_MAX:
        doubled = (2 * ranks).astype(int)
        counts = _subset_sum_counts(list(doubled))
        p = _exact_two_sided(counts, int(doubled[d > 0].sum()), int(doubled.sum()))
        return TestOutcome(w_plus, _clip(p), "signed_rank", (int(a.size), n), "exact")
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - _tie_term(np.abs(d)) / 48.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / np.sqrt(var)
    return TestOutcome(w_plus, _clip(2.0 * sps.norm.sf(z)), "signed_rank", (int(a.size), n), "normal")


def chi_square_proportions(k1: int, n1: int, k2: int, n2: int) -> TestOutcome:
    """Pearson chi-square on the 2x2 success/failure table, no Yates correction."""
    if n1 < 1 or n2 < 1 or not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise ParameterError("need n >= 1 and 0 <= k <= n for both groups")
    table = np.array([[k1, n1 - k1], [k2, n2 - k2]], dtype=float)
    expected = table.sum(axis=1, keepdims=True) * table.sum(axis=0, keepdims=True) / table.sum()
    if np.any(expected == 0):
        return TestOutcome(0.0, 1.0, "chi_square_proportions", (n1, n2), "degenerate")
    stat = float(np.sum((table - expected) ** 2 / expected))
    return TestOutcome(stat, _clip(sps.chi2.sf(stat, 1)), "chi_square_proportions", (n1, n2), "chi2")


def mcnemar(b: int, c: int) -> TestOutcome:
    """McNemar test on discordant pair counts ``b`` (first only) and ``c`` (second only).

    Exact binomial for ``b + c <= 25``, else chi-square with continuity correction.
    """
    if b < 0 or c < 0:
        raise ParameterError("discordant counts must be non-negative")
    n = b + c
    if n == 0:
        return TestOutcome(0.0, 1.0, "mcnemar", (b, c), "degenerate")
    if n <= MCNEMAR_EXACT_MAX:
        p = 2.0 * sps.binom.cdf(min(b, c), n, 0.5)
        return TestOutcome(float(min(b, c)), _clip(p), "mcnemar", (b, c), "exact")
    stat = (abs(b - c) - 1.0) ** 2 / n
    return TestOutcome(float(stat), _clip(sps.chi2.sf(stat, 1)), "mcnemar", (b, c), "chi2")


def pairs(labels):
    """All unordered label pairs in first-seen order."""
    return list(itertools.combinations(labels, 2))
