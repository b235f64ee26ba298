"""Surrogate percentile test and nonlinearity strength (delta NI)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .entropy import nci
from .errors import InvalidNullTestError, NlhrvError, ParameterError, ShapeError
from .glc import CalibrationCurve, calibrate, glc_index
from .rng import CALIBRATION_KEY, derive_seed
from .series import AnalysisParams, ensure_normalized
from .storage import information_storage
from .surrogates import DEFAULT_MAX_ITER, SurrogateEnsemble, make_ensemble

MEASURES = ("NCI", "IS", "GLC")
MAX_FAILURE_FRACTION = 0.10


@dataclass(frozen=True)
class NonlinearityResult:
    measure: str
    ni_original: float
    surrogate_values: tuple
    threshold: float
    tail: str
    rejected: bool
    ni_median: float
    delta_ni: float
    alpha: float
    seed: int
    n_failed: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["surrogate_values"] = list(self.surrogate_values)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "NonlinearityResult":
        d = dict(d)
        d["surrogate_values"] = tuple(d["surrogate_values"])
        return cls(**d)


def tail_for(measure: str) -> str:
    if measure not in MEASURES:
        raise ParameterError(f"unknown measure {measure!r}; expected one of {MEASURES}")
    # complexity drops under nonlinearity, the other two indexes rise
    return "lower" if measure == "NCI" else "upper"


def percentile(values, p: float) -> float:
    """Nearest-rank percentile: the ceil(p*n/100)-th smallest value."""
    v = np.sort(np.asarray(values, dtype=float).ravel())
    if v.size == 0:
        raise ShapeError("percentile of an empty sample")
    if not 0 < p < 100:
        raise ParameterError("p must lie in (0, 100)")
    # rounding guards against p*n/100 landing a hair above an integer
    rank = max(1, math.ceil(round(p * v.size / 100.0, 9)))
    return float(v[rank - 1])


def decide(ni_original: float, surrogate_values, tail: str, alpha: float) -> tuple[float, bool]:
    """Threshold and rejection flag for one index; strict inequality on both tails."""
    if tail == "lower":
        threshold = percentile(surrogate_values, 100.0 * alpha)
        return threshold, ni_original < threshold
    if tail == "upper":
        threshold = percentile(surrogate_values, 100.0 * (1.0 - alpha))
        return threshold, ni_original > threshold
    raise ParameterError(f"tail must be 'lower' or 'upper', got {tail!r}")


def delta_ni(measure: str, ni_original: float, ni_median: float) -> float:
    if tail_for(measure) == "lower":
        return ni_median - ni_original
    return ni_original - ni_median


def calibration_seed(seed: int) -> int:
    return derive_seed(seed, *CALIBRATION_KEY)


def make_estimator(measure: str, params: AnalysisParams, curve: CalibrationCurve | None = None):
    """Single-argument callable evaluating ``measure`` on a normalized series."""
    tail_for(measure)
    if measure == "NCI":
        return lambda s: nci(s, params)
    if measure == "IS":
        return lambda s: information_storage(s, params.m, params.k)
    if curve is None:
        raise ParameterError("GLC needs a calibration curve")
    return lambda s: glc_index(s, params, curve)


def detect(series, measure: str, params: AnalysisParams | None = None, *,
           ensemble: SurrogateEnsemble | None = None,
           curve: CalibrationCurve | None = None,
           max_iter: int = DEFAULT_MAX_ITER,
           n_phi: int = 199, reps: int = 25) -> NonlinearityResult:
    """Compare ``measure`` on the series against its IAAFT surrogate distribution.

    Surrogates come from ``make_ensemble(series, params.n_s, max_iter,
    params.seed)`` unless a prebuilt ``ensemble`` is passed. For GLC one
    curve, calibrated on the series' own marginal, serves the original and
    every surrogate (they share the marginal).
    """
    params = params or AnalysisParams()
    tail = tail_for(measure)
    x = ensure_normalized(series)
    if measure == "GLC" and curve is None:
        curve = calibrate(x, n_phi=n_phi, reps=reps, seed=calibration_seed(params.seed),
                          lags=params.l_max)
    estimator = make_estimator(measure, params, curve)
    ni_o = estimator(x)
    if ensemble is None:
        ensemble = make_ensemble(x, params.n_s, max_iter, params.seed)
    values, failed = [], 0
    for surr in ensemble.surrogates:
        try:
            values.append(estimator(surr))
        except NlhrvError:
            failed += 1
    total = len(ensemble)
    if failed >= MAX_FAILURE_FRACTION * total:
        raise InvalidNullTestError(
            f"{measure}: estimator failed on {failed} of {total} surrogates",
            n_failed=failed, n_total=total,
        )
    threshold, rejected = decide(ni_o, values, tail, params.alpha)
    median = float(np.median(values))
    return NonlinearityResult(
        measure=measure,
        ni_original=float(ni_o),
        surrogate_values=tuple(float(v) for v in values),
        threshold=threshold,
        tail=tail,
        rejected=bool(rejected),
        ni_median=median,
        delta_ni=float(delta_ni(measure, ni_o, median)),
        alpha=params.alpha,
        seed=int(params.seed),
        n_failed=failed,
    )


def detect_all(series, params: AnalysisParams | None = None, measures=MEASURES, *,
               max_iter: int = DEFAULT_MAX_ITER, n_phi: int = 199,
               reps: int = 25) -> dict[str, NonlinearityResult]:
    """Run several measures against one shared surrogate ensemble.

    Each measure's test would draw the identical ensemble from ``params.seed``,
    so it is generated once.
    """
    params = params or AnalysisParams()
    x = ensure_normalized(series)
    ensemble = make_ensemble(x, params.n_s, max_iter, params.seed)
    return {
        m: detect(x, m, params, ensemble=ensemble, max_iter=max_iter, n_phi=n_phi, reps=reps)
        for m in measures
    }
