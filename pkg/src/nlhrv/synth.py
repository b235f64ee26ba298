"""Synthetic processes with known linear/nonlinear structure.

Used as ground truth for estimator validation, for acceptance runs, and for
building fixture files through the ``synth`` CLI subcommand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ParameterError
from .rng import make_rng
from .series import normalize

KINDS = ("white_gaussian", "ar1", "static_transform", "bilinear")
TRANSFORMS = {"square": np.square, "cube": lambda z: z**3, "exp": np.exp}
MONOTONE_TRANSFORMS = ("cube", "exp")
BILINEAR_BURN_IN = 200


@dataclass(frozen=True)
class ProcessSpec:
    kind: str
    n: int
    seed: int
    phi: float = 0.0
    transform: str = "cube"
    a: float = 0.4
    b: float = 0.4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 50:
            raise ParameterError("n must be >= 50")
        if self.kind in ("ar1", "static_transform") and not abs(self.phi) < 1:
            raise ParameterError("ar1 needs |phi| < 1")
        if self.kind == "static_transform" and self.transform not in TRANSFORMS:
            raise ParameterError(f"transform must be one of {tuple(TRANSFORMS)}")
        if self.kind == "bilinear":
            if not abs(self.a) < 1:
                raise ParameterError("bilinear needs |a| < 1")
            if not self.a**2 + self.b**2 < 1:
                raise ParameterError("bilinear needs a^2 + b^2 < 1 for finite variance")


def _ar1(phi: float, eta: np.ndarray) -> np.ndarray:
    x0 = eta[0] / np.sqrt(1.0 - phi * phi)
    if phi == 0.0:
        return np.concatenate([[x0], eta[1:]])
    rest, _ = signal.lfilter([1.0], [1.0, -phi], eta[1:], zi=[phi * x0])
    return np.concatenate([[x0], rest])


def generate(spec: ProcessSpec) -> np.ndarray:
    """Standardized realization of ``spec`` (zero mean, unit sample variance)."""
    rng = make_rng(spec.seed)
    if spec.kind == "bilinear":
        eta = rng.standard_normal(spec.n + BILINEAR_BURN_IN)
        x = np.zeros(eta.size)
        a, b = spec.a, spec.b
        for i in range(1, eta.size):
            x[i] = a * x[i - 1] + b * x[i - 1] * eta[i - 1] + eta[i]
        return normalize(x[BILINEAR_BURN_IN:])
    eta = rng.standard_normal(spec.n)
    if spec.kind == "white_gaussian":
        return normalize(eta)
    base = _ar1(spec.phi, eta)
    if spec.kind == "ar1":
        return normalize(base)
    return normalize(TRANSFORMS[spec.transform](normalize(base)))
