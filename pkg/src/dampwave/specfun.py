"""Modified Bessel functions I_0, I_1, I_2 of real non-negative argument.

The power series is summed directly for z <= 30. Beyond that the
exponentially scaled value e^{-z} I_l(z) comes from the large-argument
expansion, optimally truncated.

The ratios I_1(w/2)/w and I_2(w/2)/w^2 appear in the light-cone kernels
and are finite at w = 0; below ``RATIO_SWITCH`` they are evaluated with
the singular power cancelled inside the series.
"""

import math

import numpy as np

SERIES_SWITCH = 30.0
RATIO_SWITCH = 1e-3

_ORDERS = (0, 1, 2)


def _check_order(ell):
    if ell not in _ORDERS:
        raise ValueError(f"Bessel order must be one of {_ORDERS}, got {ell!r}")


def _as_array(z):
    arr = np.asarray(z, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise ValueError("argument must be non-negative")
    return arr


def _wrap(result, like):
    if np.ndim(like) == 0:
        return float(result)
    return result


def _series(ell, z):
    """sum_k (z/2)^(2k+l) / (k! (k+l)!) for an array z (all <= SERIES_SWITCH)."""
    half = 0.5 * z
    q = half * half
    term = half**ell / math.factorial(ell)
    total = term.copy()
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + ell))
        total += term
        # all terms positive: the relative size of the new term bounds the tail
        with np.errstate(invalid="ignore", divide="ignore"):
            rel = np.where(total > 0, term / total, 0.0)
        if np.all(rel < 1e-17) or k > 200:
            return total


def _asymptotic_scaled(ell, z):
    """e^{-z} I_l(z) ~ (2 pi z)^{-1/2} sum_k (-1)^k a_k(l) z^{-k}, stopped at the smallest term."""
    mu = 4.0 * ell * ell
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    k = 0
    while np.any(active) and k < 200:
        k += 1
        new = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * z)
        # stop once terms stop shrinking or are negligible
        shrinking = np.abs(new) < np.abs(term)
        active &= shrinking & (np.abs(term) > 1e-18 * np.abs(total))
        total = np.where(active, total + new, total)
        term = np.where(active, new, term)
    return total / np.sqrt(2.0 * math.pi * z)


def bessel_i_scaled(ell, z):
    """e^{-z} I_l(z)."""
    _check_order(ell)
    arr = _as_array(z)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_SWITCH
    if np.any(small):
        zs = flat[small]
        out[small] = np.exp(-zs) * _series(ell, zs)
    if np.any(~small):
        out[~small] = _asymptotic_scaled(ell, flat[~small])
    return _wrap(out.reshape(arr.shape), z)


def bessel_i(ell, z):
    """I_l(z); overflows to inf for z beyond roughly 713."""
    _check_order(ell)
    arr = _as_array(z)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    small = flat <= SERIES_SWITCH
    if np.any(small):
        out[small] = _series(ell, flat[small])
    if np.any(~small):
        zl = flat[~small]
        with np.errstate(over="ignore"):
            out[~small] = np.exp(zl) * _asymptotic_scaled(ell, zl)
    return _wrap(out.reshape(arr.shape), z)


def _ratio(ell, w, scaled):
    """I_l(w/2) / w^l, optionally times e^{-w/2}."""
    arr = _as_array(w)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    tiny = flat < RATIO_SWITCH
    if np.any(tiny):
        wt = flat[tiny]
        # I_l(w/2)/w^l = 4^-l sum_k (w/4)^{2k} / (k! (k+l)!)
        q = (wt / 4.0) ** 2
        term = np.full_like(wt, 1.0 / math.factorial(ell))
        total = term.copy()
        for k in range(1, 4):
            term = term * q / (k * (k + ell))
            total += term
        val = total / 4.0**ell
        out[tiny] = val * np.exp(-0.5 * wt) if scaled else val
    if np.any(~tiny):
        wb = flat[~tiny]
        fn = bessel_i_scaled if scaled else bessel_i
        out[~tiny] = np.asarray(fn(ell, 0.5 * wb)) / wb**ell
    return _wrap(out.reshape(arr.shape), w)


def i1_over_z(w, scaled=False):
    """I_1(w/2) / w; equals 1/4 at w = 0. ``scaled`` multiplies by e^{-w/2}."""
    return _ratio(1, w, scaled)


def i2_over_z2(w, scaled=False):
    """I_2(w/2) / w^2; equals 1/32 at w = 0. ``scaled`` multiplies by e^{-w/2}."""
    return _ratio(2, w, scaled)
