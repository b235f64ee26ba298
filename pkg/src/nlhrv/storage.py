"""Nearest-neighbour information storage.

The neighbour search runs only in the joint (target, history) space under the
maximum norm. For each reference the distance to its k-th neighbour is then
reused as an open range in the history and target projections, which keeps
the same length scale in all three entropy terms so their biases cancel.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special
from scipy.spatial import cKDTree

from .errors import InsufficientDataError, ParameterError
from .rng import JITTER_KEY, make_rng
from .series import embed, ensure_normalized

JITTER_SCALE = 1e-10
JITTER_SEED = 0


def digamma(x):
    """Digamma function; raises ``ValueError`` outside ``x > 0``."""
    arr = np.asarray(x, dtype=float)
    if np.any(~(arr > 0)):
        raise ParameterError("digamma is only defined here for x > 0")
    out = special.digamma(arr)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class KnnQueryResult:
    """Per-reference neighbour statistics.

    ``epsilon`` is twice the max-norm distance to the k-th neighbour in the
    joint space. ``n_history`` and ``n_target`` count points strictly closer
    than ``epsilon / 2`` in each projection; the reference itself (distance 0)
    is included in the counts.
    """

    epsilon: np.ndarray
    n_history: np.ndarray
    n_target: np.ndarray


def knn_query(histories: np.ndarray, targets: np.ndarray, k: int) -> KnnQueryResult:
    joint = np.column_stack([histories, targets])
    n = joint.shape[0]
    if n <= k:
        raise InsufficientDataError(f"k={k} neighbours need more than {k} embedded points")
    dist, _ = cKDTree(joint).query(joint, k=k + 1, p=np.inf)
    # the self match sits among the zero distances, so column k is the
    # k-th neighbour excluding the reference
    kth = dist[:, k]
    radius = np.nextafter(kth, 0.0)
    n_hist = cKDTree(histories).query_ball_point(histories, radius, p=np.inf, return_length=True)
    n_targ = cKDTree(targets[:, None]).query_ball_point(
        targets[:, None], radius, p=np.inf, return_length=True
    )
    return KnnQueryResult(
        epsilon=2.0 * kth,
        n_history=np.asarray(n_hist, dtype=np.int64),
        n_target=np.asarray(n_targ, dtype=np.int64),
    )


def _storage_from_counts(q: KnnQueryResult, k: int) -> float:
    n = q.epsilon.size
    # counts include the reference, so they are >= 1 unless epsilon is 0
    n_h = np.maximum(q.n_history, 1)
    n_t = np.maximum(q.n_target, 1)
    return float(
        special.digamma(n) + special.digamma(k)
        - np.mean(special.digamma(n_h)) - np.mean(special.digamma(n_t))
    )


def information_storage(series, m: int = 2, k: int = 10) -> float:
    """Information storage (nats) of a series given its ``m`` past samples.

    ``psi(N') + psi(k) - <psi(n_history)> - <psi(n_target)>`` with ``N' = N - m``
    embedded points. Exact duplicate joint patterns are broken once by a tiny
    deterministic jitter of the whole series.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    if k < 1:
        raise ParameterError("k must be >= 1")
    x = ensure_normalized(series)
    if x.size - m <= k:
        raise InsufficientDataError(f"need N - m > k, got N={x.size}, m={m}, k={k}")
    pat = embed(x, m)
    q = knn_query(pat.histories, pat.targets, k)
    if np.any(q.epsilon == 0):
        noise = make_rng(JITTER_SEED, *JITTER_KEY).uniform(-1.0, 1.0, x.size)
        x = x + JITTER_SCALE * x.std(ddof=1) * noise
        pat = embed(x, m)
        q = knn_query(pat.histories, pat.targets, k)
    return _storage_from_counts(q, k)
