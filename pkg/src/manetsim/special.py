"""Gamma function and zero-order modified Bessel function."""

from __future__ import annotations

import math

import numpy as np

# Lanczos approximation, g = 7, nine coefficients (~15 significant digits).
_LANCZOS_G = 7.0
_LANCZOS = (
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
    """Gamma function for real ``x`` (not a non-positive integer)."""
    if x <= 0 and x == int(x):
        raise ValueError(f"gamma undefined at non-positive integer {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x > 171.6:
        raise OverflowError("gamma overflows double precision")
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    # split t**(x+0.5) so the intermediate does not overflow near x = 171
    half = t ** (0.5 * (x + 0.5))
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * acc


def lgamma(x: float) -> float:
    """log|Gamma(x)| for x > 0, stable for large arguments."""
    if x <= 0:
        raise ValueError("lgamma implemented for x > 0 only")
    if x < 0.5:
        return math.log(gamma(x))
    x -= 1.0
    acc = _LANCZOS[0]
    for i in range(1, 9):
        acc += _LANCZOS[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * math.log(t) - t + math.log(acc)


_SERIES_LIMIT = 15.0
_SERIES_TERMS = 80
_ASYM_TERMS = 30


def _i0_series(x):
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * k)
        total = total + term
    return total


def _i0e_asymptotic(x):
    # e^{-x} I0(x) ~ (2 pi x)^{-1/2} sum_k ((2k-1)!!)^2 / (k! (8x)^k)
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _ASYM_TERMS):
        term = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        total = total + term
    return total / np.sqrt(2.0 * np.pi * x)


def bessel_i0e(x):
    """Exponentially scaled I0: ``exp(-|x|) * I0(x)``. Accepts arrays."""
    arr = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(arr)
    small = arr <= _SERIES_LIMIT
    if np.any(small):
        xs = arr[small]
        out[small] = _i0_series(xs) * np.exp(-xs)
    if np.any(~small):
        out[~small] = _i0e_asymptotic(arr[~small])
    return float(out) if np.ndim(x) == 0 else out


def bessel_i0(x):
    """Zero-order modified Bessel function of the first kind.

    Equal to ``(1/2pi) * integral_0^{2pi} exp(-x cos t) dt``; the sign in
    the exponent is immaterial over a full period. Accepts arrays.
    """
    arr = np.abs(np.asarray(x, dtype=float))
    with np.errstate(over="ignore"):
        out = np.where(arr <= _SERIES_LIMIT, _i0_series(np.minimum(arr, _SERIES_LIMIT)),
                       bessel_i0e(arr) * np.exp(arr))
    return float(out) if np.ndim(x) == 0 else out
