"""Series containers, preprocessing and delay embedding.

A "normalized series" throughout the package is a 1-D float array with zero
sample mean and unit sample standard deviation (divisor N-1). Estimators take
such arrays directly; :func:`ensure_normalized` enforces the convention.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import signal

from .errors import (
    BoundsError,
    DegenerateInputError,
    InsufficientDataError,
    ParameterError,
)

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class RawSeries:
    """RR intervals (ms) as read from disk."""

    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise InsufficientDataError("a series needs at least one sample")
        if not np.all(np.isfinite(values)):
            raise ParameterError("series contains non-finite values")
        if np.any(values <= 0):
            raise ParameterError("RR intervals must be strictly positive")
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class AnalysisParams:
    m: int = 2
    r: float = 0.2
    k: int = 10
    l_max: int = 2
    n_s: int = 100
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError("m must be >= 1")
        if not self.r > 0:
            raise ParameterError("r must be > 0")
        if self.k < 1:
            raise ParameterError("k must be >= 1")
        if self.l_max < 1:
            raise ParameterError("l_max must be >= 1")
        if self.n_s < 20:
            raise ParameterError("n_s must be >= 20")
        if not 0 < self.alpha < 0.5:
            raise ParameterError("alpha must lie in (0, 0.5)")
        if not 0 <= int(self.seed) < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmbeddedPatterns:
    """Aligned (history, target) pairs.

    ``histories[i]`` is ``[s[n-1], ..., s[n-m]]`` (most recent first) and
    ``targets[i]`` is ``s[n]`` for ``n = m + i``.
    """

    histories: np.ndarray
    targets: np.ndarray
    count: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "count", int(self.targets.shape[0]))

    @property
    def joint(self) -> np.ndarray:
        """(m+1)-dimensional patterns ``history + [target]``."""
        return np.column_stack([self.histories, self.targets])


def normalize(series) -> np.ndarray:
    """Zero-mean, unit-variance copy of ``series`` (sample std, divisor N-1)."""
    x = np.asarray(getattr(series, "values", series), dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InsufficientDataError("normalize needs at least 2 samples")
    centered = x - x.mean()
    sd = centered.std(ddof=1)
    if not sd > 0:
        raise DegenerateInputError("constant series has zero variance")
    out = centered / sd
    # one refinement pass removes the residual mean left by rounding
    return (out - out.mean()) / out.std(ddof=1)


def is_normalized(x, tol: float = NORMALIZATION_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return x.size >= 2 and abs(x.mean()) <= tol and abs(x.std(ddof=1) - 1.0) <= tol


def ensure_normalized(series) -> np.ndarray:
    """Return ``series`` untouched if it is already normalized, else normalize it."""
    x = np.asarray(getattr(series, "values", series), dtype=float)
    if is_normalized(x):
        return x
    return normalize(x)


def detrend_highpass(series, cutoff_fraction: float = 0.03) -> np.ndarray:
    """Zero-phase first-order high-pass filter.

    A first-order Butterworth section with corner ``cutoff_fraction``
    (cycles per beat) is run forward and then backward over the series, so
    features are not shifted in time. The output mean is removed exactly.
    """
    x = np.asarray(series, dtype=float)
    if not 0 < cutoff_fraction < 0.5:
        raise ParameterError("cutoff_fraction must lie in (0, 0.5)")
    if x.ndim != 1 or x.size < 8:
        raise InsufficientDataError("detrend_highpass needs at least 8 samples")
    b, a = signal.butter(1, 2.0 * cutoff_fraction, btype="highpass")
    y = signal.filtfilt(b, a, x)
    return y - y.mean()


def window(series, start: int, length: int) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if start < 0 or length < 0 or start + length > x.size:
        raise BoundsError(
            f"window [{start}, {start + length}) outside series of length {x.size}"
        )
    return x[start : start + length].copy()


def embed(series, m: int) -> EmbeddedPatterns:
    x = np.asarray(series, dtype=float)
    if m < 1:
        raise ParameterError("m must be >= 1")
    if x.size <= m:
        raise InsufficientDataError(f"embedding order {m} needs more than {m} samples")
    lagged = np.lib.stride_tricks.sliding_window_view(x[:-1], m)[:, ::-1]
    return EmbeddedPatterns(histories=np.ascontiguousarray(lagged), targets=x[m:].copy())
