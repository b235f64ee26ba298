"""Kernel conditional-entropy estimators: Sample Entropy and local Sample Entropy.

Patterns are the (history, target) pairs produced by :func:`nlhrv.series.embed`.
Two patterns match when their distance is at most ``r`` (closed ball); a
reference never matches itself. The default distance is Euclidean; the
Chebyshev (maximum) norm of classical SampEn is available through ``norm``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterError, UndefinedEntropyError
from .series import AnalysisParams, embed, ensure_normalized

NORMS = ("euclidean", "chebyshev")
_BLOCK = 512


@dataclass(frozen=True)
class NeighborhoodCounts:
    history_matches: np.ndarray
    joint_matches: np.ndarray


def _check(x: np.ndarray, m: int, r: float, norm: str) -> None:
    if norm not in NORMS:
        raise ParameterError(f"norm must be one of {NORMS}, got {norm!r}")
    if not r > 0:
        raise ParameterError("r must be > 0")
    if x.size <= m + 1:
        raise InsufficientDataError(f"need more than m+1={m + 1} samples, got {x.size}")


def neighborhood_counts(series, m: int, r: float, norm: str = "euclidean") -> NeighborhoodCounts:
    """Per-reference match counts in the history space and the joint space."""
    x = np.asarray(series, dtype=float)
    _check(x, m, r, norm)
    pat = embed(x, m)
    h, t = pat.histories, pat.targets
    n = pat.count
    hist = np.empty(n, dtype=np.int64)
    joint = np.empty(n, dtype=np.int64)
    euclid = norm == "euclidean"
    tol = r * r if euclid else r
    # rows processed in blocks to bound memory for long series
    for lo in range(0, n, _BLOCK):
        hi = min(lo + _BLOCK, n)
        dh = np.zeros((hi - lo, n))
        for c in range(m):
            diff = h[lo:hi, c, None] - h[None, :, c]
            if euclid:
                dh += diff * diff
            else:
                np.maximum(dh, np.abs(diff), out=dh)
        dt = t[lo:hi, None] - t[None, :]
        dj = dh + dt * dt if euclid else np.maximum(dh, np.abs(dt))
        hm = dh <= tol
        jm = dj <= tol
        rows = np.arange(hi - lo)
        hm[rows, rows + lo] = False
        jm[rows, rows + lo] = False
        hist[lo:hi] = hm.sum(axis=1)
        joint[lo:hi] = jm.sum(axis=1)
    return NeighborhoodCounts(history_matches=hist, joint_matches=joint)


def sample_entropy(series, m: int = 2, r: float = 0.2, norm: str = "euclidean") -> float:
    """Global Sample Entropy in nats.

    ``-ln <p(history, target)> + ln <p(history)>``; both averages share the
    same number of reference pairs, so this reduces to the log ratio of the
    total match counts.
    """
    counts = neighborhood_counts(series, m, r, norm)
    a = int(counts.joint_matches.sum())
    b = int(counts.history_matches.sum())
    if a == 0 or b == 0:
        raise UndefinedEntropyError(
            f"no matching pattern pairs (joint={a}, history={b}); SampEn undefined"
        )
    return math.log(b) - math.log(a)


def conditional_probabilities(series, m: int = 2, r: float = 0.2,
                              norm: str = "euclidean") -> np.ndarray:
    """Per-reference ``p(target | history)`` with the singleton correction.

    A reference whose history has no neighbour besides itself gets
    ``1 / (N - m + 1)``.
    """
    x = np.asarray(series, dtype=float)
    counts = neighborhood_counts(x, m, r, norm)
    hist = counts.history_matches
    isolated = hist == 0
    p = np.empty(hist.size)
    p[~isolated] = counts.joint_matches[~isolated] / hist[~isolated]
    p[isolated] = 1.0 / (x.size - m + 1)
    return p


def local_sample_entropy(series, m: int = 2, r: float = 0.2, norm: str = "euclidean") -> float:
    """Local Sample Entropy ``-ln <p(target | history)>`` in nats."""
    p = conditional_probabilities(series, m, r, norm)
    mean = float(np.mean(p))
    if mean == 0.0:
        raise UndefinedEntropyError("every conditional probability is zero")
    return -math.log(mean)


def nci(series, params: AnalysisParams | None = None, norm: str = "euclidean") -> float:
    """Normalized Complexity Index: LSampEn of the unit-variance series."""
    params = params or AnalysisParams()
    x = ensure_normalized(series)
    return local_sample_entropy(x, params.m, params.r, norm)
