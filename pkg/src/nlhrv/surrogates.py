"""Fourier-transform and IAAFT surrogates.

IAAFT surrogates keep the original value multiset exactly and its power
spectrum approximately, which is what a "static distortion of a linear
Gaussian process" null hypothesis requires.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError, ParameterError
from .rng import derive_seed, generator_info, make_rng

MIN_LENGTH = 8
DEFAULT_MAX_ITER = 1000


@dataclass
class SurrogateEnsemble:
    surrogates: np.ndarray
    iterations_used: list[int]
    converged: list[bool]
    seed: int
    original_ref: str = ""
    max_iter: int = DEFAULT_MAX_ITER
    seeds: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.surrogates)

    def manifest(self) -> dict:
        return {
            "original_ref": self.original_ref,
            "seed": self.seed,
            "n_s": len(self),
            "length": int(self.surrogates.shape[1]) if len(self) else 0,
            "max_iter": self.max_iter,
            "surrogate_seeds": self.seeds,
            "iterations_used": self.iterations_used,
            "converged": self.converged,
            "generator": generator_info(),
        }

    def write(self, directory) -> Path:
        """One CSV per surrogate plus ``manifest.json``."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        width = max(3, len(str(len(self) - 1)))
        files = []
        for i, surr in enumerate(self.surrogates):
            name = f"surrogate_{i:0{width}d}.csv"
            with open(directory / name, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["value"])
                writer.writerows([repr(float(v))] for v in surr)
            files.append(name)
        manifest = self.manifest()
        manifest["files"] = files
        path = directory / "manifest.json"
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return path


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise InsufficientDataError(f"surrogates need at least {MIN_LENGTH} samples")
    return x


def ft_surrogate(series, seed: int) -> np.ndarray:
    """Phase-randomized surrogate with the exact periodogram of ``series``.

    The DC bin and, for even lengths, the Nyquist bin are left untouched so
    the output stays real and keeps the original mean.
    """
    x = _as_series(series)
    n = x.size
    spec = np.fft.rfft(x)
    phases = make_rng(seed).uniform(0.0, 2.0 * np.pi, spec.size)
    out = np.abs(spec) * np.exp(1j * phases)
    out[0] = spec[0]
    if n % 2 == 0:
        out[-1] = spec[-1]
    return np.fft.irfft(out, n)


def iaaft_surrogate(series, max_iter: int = DEFAULT_MAX_ITER, seed: int = 0):
    """Iteratively refined amplitude-adjusted Fourier transform surrogate.

    Starts from a random permutation and alternates spectrum matching with
    rank remapping onto the original values until the rank order stops
    changing or ``max_iter`` is hit. Returns ``(surrogate, iterations_used,
    converged)``; the surrogate is the amplitude-adjusted iterate.
    """
    x = _as_series(series)
    if max_iter < 1:
        raise ParameterError("max_iter must be >= 1")
    n = x.size
    sorted_values = np.sort(x)
    amplitudes = np.abs(np.fft.rfft(x))
    candidate = make_rng(seed).permutation(x)
    previous = None
    converged = False
    iterations = 0
    out = np.empty(n)
    for iterations in range(1, max_iter + 1):
        spec = np.fft.rfft(candidate)
        mag = np.abs(spec)
        scale = np.divide(amplitudes, mag, out=np.zeros_like(mag), where=mag > 0)
        # a vanished bin has no phase; give it the original's amplitude at phase 0
        spec = np.where(mag > 0, spec * scale, amplitudes)
        shaped = np.fft.irfft(spec, n)
        order = np.argsort(shaped, kind="stable")
        out[order] = sorted_values
        candidate = out.copy()
        if previous is not None and np.array_equal(order, previous):
            converged = True
            break
        previous = order
    return candidate, iterations, converged


def make_ensemble(series, n_s: int = 100, max_iter: int = DEFAULT_MAX_ITER,
                  master_seed: int = 0, original_ref: str = "") -> SurrogateEnsemble:
    """``n_s`` IAAFT surrogates; member i uses ``derive_seed(master_seed, i)``."""
    x = _as_series(series)
    if n_s < 1:
        raise ParameterError("n_s must be >= 1")
    seeds = [derive_seed(master_seed, i) for i in range(n_s)]
    surrogates = np.empty((n_s, x.size))
    iterations, flags = [], []
    for i, s in enumerate(seeds):
        surrogates[i], it, ok = iaaft_surrogate(x, max_iter, s)
        iterations.append(it)
        flags.append(ok)
    return SurrogateEnsemble(
        surrogates=surrogates,
        iterations_used=iterations,
        converged=flags,
        seed=int(master_seed),
        original_ref=original_ref,
        max_iter=max_iter,
        seeds=seeds,
    )


def periodogram(x) -> np.ndarray:
    return np.abs(np.fft.rfft(np.asarray(x, dtype=float))) ** 2


def spectral_mismatch(surrogate, original) -> float:
    """Relative periodogram mismatch ``sum|P_s - P_o| / sum P_o``."""
    p_s, p_o = periodogram(surrogate), periodogram(original)
    return float(np.sum(np.abs(p_s - p_o)) / np.sum(p_o))
