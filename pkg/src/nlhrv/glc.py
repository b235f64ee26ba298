"""Gaussian Linear Contrast (GLC).

GLC asks whether a series could be a static monotone distortion of a linear
Gaussian process. The correlation-transfer function ``C(C_G)`` for the series'
own marginal is tabulated from AR1 realizations remapped onto that marginal;
the index is the summed gap between the observed autocorrelations and the
ones the transfer function predicts from the gaussianized series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy import optimize, signal, special

from .errors import (
    CalibrationError,
    ExtrapolationError,
    InsufficientDataError,
    IntegrationError,
    ParameterError,
    ShapeError,
)
from .rng import CALIBRATION_KEY, make_rng
from .series import AnalysisParams, ensure_normalized

BIN_WIDTH = 0.01
# bins centred on k * 0.01 for k = -99..99
BIN_CENTERS = np.round(np.arange(-99, 100) * BIN_WIDTH, 2)
CALIBRATION_LAGS = 2
MIN_POPULATED_BINS = 10


@dataclass(frozen=True)
class AutocorrProfile:
    lags: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class CalibrationCurve:
    """Tabulated ``C(C_G)`` for one target marginal.

    ``c_values`` holds the (monotone-smoothed, gap-filled) curve and is NaN
    outside the populated range. ``raw_values`` keeps the plain per-bin means
    (NaN for empty bins) and ``support_counts`` the number of deposits.
    """

    bin_centers: np.ndarray
    c_values: np.ndarray
    raw_values: np.ndarray
    support_counts: np.ndarray
    n: int

    @property
    def supported(self) -> np.ndarray:
        return np.isfinite(self.c_values)

    @property
    def support_range(self) -> tuple[float, float]:
        """Gaussian-correlation interval covered by populated bins."""
        centers = self.bin_centers[self.supported]
        return float(centers[0] - BIN_WIDTH / 2), float(centers[-1] + BIN_WIDTH / 2)

    def __call__(self, c_g):
        """Evaluate the curve by linear interpolation between bin centres.

        Values inside the half-bin beyond the outermost populated centres take
        the end value; anything further out raises :class:`ExtrapolationError`.
        """
        c_g = np.asarray(c_g, dtype=float)
        lo, hi = self.support_range
        if np.any(~((c_g >= lo) & (c_g <= hi))):
            raise ExtrapolationError(
                f"Gaussian correlation {c_g} outside calibrated support [{lo:.3f}, {hi:.3f}]"
            )
        ok = self.supported
        out = np.interp(c_g, self.bin_centers[ok], self.c_values[ok])
        return float(out) if out.ndim == 0 else out

    def to_table(self) -> str:
        """Two-column text table of populated bins: ``bin_center c_value``."""
        lines = ["# bin_center c_value"]
        for center, value in zip(self.bin_centers, self.c_values):
            if np.isfinite(value):
                lines.append(f"{center:.2f} {float(value)!r}")
        return "\n".join(lines) + "\n"


def _acf_rows(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Autocorrelation ``(1/(N-l)) sum u_n u_{n+l}`` of each row, z-scored per row."""
    x = np.atleast_2d(x)
    u = x - x.mean(axis=1, keepdims=True)
    u = u / u.std(axis=1, ddof=1, keepdims=True)
    n = u.shape[1]
    out = np.empty((u.shape[0], max_lag))
    for lag in range(1, max_lag + 1):
        out[:, lag - 1] = np.einsum("ij,ij->i", u[:, :-lag], u[:, lag:]) / (n - lag)
    return out


def autocorrelation(series, l_max: int = 2) -> AutocorrProfile:
    x = ensure_normalized(series)
    if l_max >= x.size - 1:
        raise InsufficientDataError(f"l_max={l_max} needs more than {l_max + 1} samples")
    return AutocorrProfile(lags=np.arange(1, l_max + 1), values=_acf_rows(x, l_max)[0])


def gaussian_quantiles(n: int) -> np.ndarray:
    """Standard normal quantiles at ``(i - 0.5) / n`` for ``i = 1..n``."""
    return special.ndtri((np.arange(1, n + 1) - 0.5) / n)


def _ranks(x: np.ndarray) -> np.ndarray:
    """0-based ranks along the last axis; ties broken by position."""
    order = np.argsort(x, axis=-1, kind="stable")
    ranks = np.empty_like(order)
    np.put_along_axis(ranks, order, np.arange(x.shape[-1]), axis=-1)
    return ranks


def gaussianize(series) -> np.ndarray:
    """Replace the sample of rank i by the Gaussian quantile ``Phi^-1((i-0.5)/N)``."""
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InsufficientDataError("gaussianize needs at least 2 samples")
    return gaussian_quantiles(x.size)[_ranks(x)]


def remap_to_marginal(gaussian_series, target_values) -> np.ndarray:
    """Give ``gaussian_series`` the value multiset ``target_values``, keeping ranks."""
    g = np.asarray(gaussian_series, dtype=float)
    target = np.sort(np.asarray(target_values, dtype=float))
    if g.shape[-1] != target.size:
        raise ShapeError(f"length mismatch: {g.shape[-1]} vs {target.size}")
    return target[_ranks(g)]


def _ar1_block(phi: float, reps: int, n: int, rng: np.random.Generator) -> np.ndarray:
    eta = rng.standard_normal((reps, n))
    zi = (phi * eta[:, 0] / np.sqrt(1.0 - phi * phi))[:, None]
    out, _ = signal.lfilter([1.0], [1.0, -phi], eta[:, 1:], axis=1, zi=zi)
    first = eta[:, :1] / np.sqrt(1.0 - phi * phi)
    return np.hstack([first, out])


def calibrate(target_values, n_phi: int = 199, reps: int = 25, seed: int = 0,
              lags: int = CALIBRATION_LAGS) -> CalibrationCurve:
    """Monte-Carlo estimate of the correlation-transfer function for one marginal.

    AR1 realizations of the target's length are drawn for ``n_phi`` values of
    phi evenly spaced over [-0.99, 0.99]. Each realization contributes, per
    lag, the pair (autocorrelation of its rank-gaussianized version,
    autocorrelation after remapping onto the target marginal). Pairs are
    averaged in 0.01-wide bins of the Gaussian coordinate; the bin means are
    made monotone with a count-weighted isotonic fit and interior empty bins
    are filled linearly.
    """
    target = np.sort(np.asarray(target_values, dtype=float))
    n = target.size
    if n < 50:
        raise InsufficientDataError("calibration needs a marginal of at least 50 values")
    if n_phi < 50 or reps < 1:
        raise ParameterError("n_phi must be >= 50 and reps >= 1")
    lags = min(lags, n - 2)
    quantiles = gaussian_quantiles(n)
    sums = np.zeros(BIN_CENTERS.size)
    counts = np.zeros(BIN_CENTERS.size, dtype=np.int64)
    for i, phi in enumerate(np.linspace(-0.99, 0.99, n_phi)):
        z = _ar1_block(float(phi), reps, n, make_rng(seed, *CALIBRATION_KEY, i))
        ranks = _ranks(z)
        cg = _acf_rows(quantiles[ranks], lags).ravel()
        c = _acf_rows(target[ranks], lags).ravel()
        idx = np.rint(cg / BIN_WIDTH).astype(np.int64) + 99
        keep = (idx >= 0) & (idx < BIN_CENTERS.size)
        sums += np.bincount(idx[keep], weights=c[keep], minlength=BIN_CENTERS.size)
        counts += np.bincount(idx[keep], minlength=BIN_CENTERS.size)
    populated = counts > 0
    if populated.sum() < MIN_POPULATED_BINS:
        raise CalibrationError(f"only {populated.sum()} populated bins")
    raw = np.full(BIN_CENTERS.size, np.nan)
    raw[populated] = sums[populated] / counts[populated]
    smooth = optimize.isotonic_regression(raw[populated], weights=counts[populated]).x
    first, last = np.flatnonzero(populated)[[0, -1]]
    values = np.full(BIN_CENTERS.size, np.nan)
    span = slice(first, last + 1)
    values[span] = np.interp(BIN_CENTERS[span], BIN_CENTERS[populated], smooth)
    return CalibrationCurve(
        bin_centers=BIN_CENTERS.copy(),
        c_values=values,
        raw_values=raw,
        support_counts=counts,
        n=n,
    )


def c_of_cg_integral(target_quantile_fn, c_g: float, nodes: int = 80) -> float:
    """Correlation after mapping a bivariate Gaussian pair through ``F^-1(Phi(.))``.

    Evaluated by tensor Gauss-Hermite quadrature. Moments of the transformed
    variable come from the same rule, so the result is a correlation even if
    the quantile function is not standardized. Test oracle for :func:`calibrate`.
    """
    if not -1 < c_g < 1:
        raise ParameterError("c_g must lie in (-1, 1)")
    x, w = hermegauss(nodes)
    w = w / w.sum()
    # Phi(x) rounds to 1 beyond ~8.3; the clipped mass is below 1e-15
    g1 = np.asarray(target_quantile_fn(special.ndtr(np.clip(x, -8.0, 8.0))), dtype=float)
    y = c_g * x[:, None] + np.sqrt(1.0 - c_g * c_g) * x[None, :]
    g2 = np.asarray(target_quantile_fn(special.ndtr(np.clip(y, -8.0, 8.0))), dtype=float)
    if not (np.all(np.isfinite(g1)) and np.all(np.isfinite(g2))):
        raise IntegrationError("quantile function returned non-finite values")
    mean = w @ g1
    var = w @ (g1 * g1) - mean * mean
    if not var > 0:
        raise IntegrationError("transformed variable has zero variance")
    cross = w @ (g1[:, None] * g2) @ w
    return float((cross - mean * mean) / var)


def c_of_cg_empirical(target_values, c_g: float, nodes: int = 8) -> float:
    """Same transfer as :func:`c_of_cg_integral` for an empirical marginal.

    With the step quantile function ``q[floor(u * N)]`` the inner expectation
    over ``y`` is a finite sum of normal CDFs, so only the outer integral is
    numerical: Gauss-Legendre on each of the N probability cells.
    """
    if not -1 < c_g < 1:
        raise ParameterError("c_g must lie in (-1, 1)")
    q = np.sort(np.asarray(target_values, dtype=float))
    n = q.size
    s = np.sqrt(1.0 - c_g * c_g)
    edges = special.ndtri(np.arange(1, n) / n)
    steps = np.diff(q)
    t, w = np.polynomial.legendre.leggauss(nodes)
    u = ((np.arange(n)[:, None] + (t[None, :] + 1.0) / 2.0) / n).ravel()
    x = special.ndtri(u)
    inner = q[-1] - special.ndtr((edges[None, :] - c_g * x[:, None]) / s) @ steps
    cell = (inner.reshape(n, nodes) @ w) / (2.0 * n)
    mean = q.mean()
    var = np.mean(q * q) - mean * mean
    return float((q @ cell - mean * mean) / var)


def glc_index(series, params: AnalysisParams | None = None,
              curve: CalibrationCurve | None = None, *, seed: int | None = None) -> float:
    """Sum over lags 1..l_max of ``|C_obs(l) - C(C_G'(l))|``.

    ``curve`` must be calibrated on this series' value multiset; when omitted
    it is built here from ``seed`` (default ``params.seed``).
    """
    params = params or AnalysisParams()
    x = ensure_normalized(series)
    if curve is None:
        curve = calibrate(x, seed=params.seed if seed is None else seed)
    elif curve.n != x.size:
        raise ShapeError(f"curve calibrated for N={curve.n}, series has N={x.size}")
    c_obs = autocorrelation(x, params.l_max).values
    c_gauss = _acf_rows(gaussianize(x), params.l_max)[0]
    c_lin = np.atleast_1d(curve(c_gauss))
    return float(np.sum(np.abs(c_obs - c_lin)))
