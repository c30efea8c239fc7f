"""Gamma function via the Lanczos series.

Every singular-kernel moment in this package needs Gamma(alpha) with alpha
in (0, 1] or a shifted argument in (0, 3].  The classic g = 7, nine-term
Lanczos coefficient set below keeps the relative error under 1e-13 on that
range (checked against math.gamma in the test suite).
"""

from __future__ import annotations

import math

import numpy as np

_G = 7.0
_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(x: float) -> float:
    """Gamma(x) for real x, poles excluded."""
    if x <= 0.0 and x == math.floor(x):
        raise ValueError(f"gamma has a pole at {x}")
    if x < 0.5:
        # reflection
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    z = x - 1.0
    acc = _COEFFS[0]
    for i in range(1, len(_COEFFS)):
        acc += _COEFFS[i] / (z + i)
    t = z + _G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * math.exp(-t) * acc


def gamma_array(x: np.ndarray) -> np.ndarray:
    """Elementwise gamma for positive arguments (vectorized Lanczos)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("gamma_array expects strictly positive arguments")
    out = np.empty_like(x)
    lo = x < 0.5
    out[~lo] = _series(x[~lo])
    if np.any(lo):
        xl = x[lo]
        # reflection; 1 - xl >= 0.5 so the series applies directly
        out[lo] = np.pi / (np.sin(np.pi * xl) * _series(1.0 - xl))
    return out


def _series(x: np.ndarray) -> np.ndarray:
    z = x - 1.0
    acc = np.full_like(z, _COEFFS[0])
    for i in range(1, len(_COEFFS)):
        acc += _COEFFS[i] / (z + i)
    t = z + _G + 0.5
    return np.sqrt(2.0 * np.pi) * t ** (z + 0.5) * np.exp(-t) * acc
