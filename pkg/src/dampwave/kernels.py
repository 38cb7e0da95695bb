"""Light-cone kernels K_0 ... K_4 of the damped-wave semigroup and their convolutions.

With w = sqrt(t^2 - y^2), r1 = I_1(w/2)/w, r2 = I_2(w/2)/w^2 and
E = e^{-t/2}:

    K_0 = E I_0 / 2                      (S(t) itself)
    K_1 = -E y r1 / 4                    (d/dy K_0)
    K_2 = E (t r1 - I_0) / 4             (d/dt K_0)
    K_3 = E y (r1 - t r2) / 8            (d/dt K_1)
    K_4 = E (t^2 r2 / 8 + (1 - t) r1 / 4 + I_0 / 8)   (d/dt K_2)

K_3 and K_4 are the textbook expressions with the w^-2 and w^-3 terms
combined through I_0(z) - I_2(z) = (2/z) I_1(z), which leaves them finite
on the light cone. Every E * I_l(w/2) is evaluated as
e^{(w - t)/2} * (e^{-w/2} I_l(w/2)) so that large t cannot overflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .numerics import GridFunction, japanese, translate
from .specfun import bessel_i_scaled, i1_over_z, i2_over_z2

KERNEL_IDS = (0, 1, 2, 3, 4)


class TruncationWarning(UserWarning):
    """The data plus the light cone no longer fit inside the grid."""


def _check_id(j):
    if j not in KERNEL_IDS:
        raise ValueError(f"kernel id must be one of {KERNEL_IDS}, got {j!r}")


def _kernel_inside(j, t, y):
    ay = np.abs(y)
    w = np.sqrt(np.maximum((t - ay) * (t + ay), 0.0))
    e = np.exp(0.5 * (w - t))
    if j == 0:
        return 0.5 * e * bessel_i_scaled(0, 0.5 * w)
    if j == 1:
        return -0.25 * e * y * i1_over_z(w, scaled=True)
    if j == 2:
        return 0.25 * e * (t * i1_over_z(w, scaled=True) - bessel_i_scaled(0, 0.5 * w))
    if j == 3:
        return 0.125 * e * y * (i1_over_z(w, scaled=True) - t * i2_over_z2(w, scaled=True))
    return e * (
        t * t * i2_over_z2(w, scaled=True) / 8.0
        + (1.0 - t) * i1_over_z(w, scaled=True) / 4.0
        + bessel_i_scaled(0, 0.5 * w) / 8.0
    )


def kernel(j: int, t: float, y):
    """Truncated kernel K~_j(t, y): zero for |y| > t, the interior limit at |y| = t."""
    _check_id(j)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    y_arr = np.asarray(y, dtype=float)
    flat = np.atleast_1d(y_arr).ravel()
    out = np.zeros_like(flat)
    inside = np.abs(flat) <= t
    if np.any(inside):
        out[inside] = _kernel_inside(j, t, flat[inside])
    out = out.reshape(y_arr.shape)
    return float(out) if y_arr.ndim == 0 else out


@dataclass(frozen=True)
class EnvelopeFit:
    j: int
    fitted_C: float
    max_violation: float
    per_t: dict = field(default_factory=dict)


def envelope(j: int, t: float, y):
    """Gaussian envelope e^{-y^2/8t} <t>^{-(j+1)/2}."""
    return np.exp(-np.square(y) / (8.0 * t)) * float(japanese(t)) ** (-(j + 1) / 2.0)


def verify_envelope(j: int, t_samples, y_resolution: int = 401) -> EnvelopeFit:
    """Smallest constant C with |K_j(t, y)| <= C * envelope over the sampled (t, y)."""
    _check_id(j)
    per_t = {}
    for t in t_samples:
        t = float(t)
        if not t > 0:
            raise ValueError("t samples must be positive")
        y = np.linspace(-t, t, int(y_resolution))
        # |K| * e^{y^2/8t} <t>^{(j+1)/2}, computed in log space against overflow
        k = np.abs(kernel(j, t, y))
        with np.errstate(divide="ignore"):
            logr = np.log(k) + np.square(y) / (8.0 * t) + 0.5 * (j + 1) * math.log(float(japanese(t)))
        per_t[t] = float(np.exp(logr.max()))
    fitted = max(per_t.values(), default=0.0)
    violation = -math.inf
    for t in per_t:
        y = np.linspace(-t, t, int(y_resolution))
        violation = max(violation, float(np.max(np.abs(kernel(j, t, y)) - fitted * envelope(j, t, y))))
    return EnvelopeFit(j=j, fitted_C=fitted, max_violation=violation, per_t=per_t)


@dataclass(frozen=True)
class KernelStencil:
    """Quadrature for the y-integral over [-t, t] on a spacing-h lattice.

    ``weights`` hold weight * K_j(t, k h) for k = -m..m. The light-cone
    endpoints y = +-t are extra nodes with weight ``end_weight`` and kernel
    values ``k_plus = K_j(t, t)`` and ``k_minus = K_j(t, -t)``.
    """

    m: int
    weights: np.ndarray
    end_weight: float
    k_plus: float
    k_minus: float


def cubic_weights(z: np.ndarray) -> np.ndarray:
    """Weights integrating the piecewise cubic interpolant through nodes ``z``.

    Each cell [z_i, z_i+1] is integrated exactly with the cubic through the
    four nearest nodes, shifted inward at the ends. Fewer than four nodes fall
    back to the full interpolating polynomial.
    """
    z = np.asarray(z, dtype=float)
    n = len(z)
    if n < 2:
        return np.zeros(n)
    if n < 4:
        stencils = np.zeros((1, n), dtype=int) + np.arange(n)
        lo, hi = z[:1], z[-1:]
    else:
        cells = np.arange(n - 1)
        first = np.clip(cells - 1, 0, n - 4)
        stencils = first[:, None] + np.arange(4)
        lo, hi = z[:-1], z[1:]
    k = stencils.shape[1]
    nodes = z[stencils]
    c = 0.5 * (lo + hi)
    # moments of (z - c)^q over each cell, solved against the local Vandermonde
    vander = (nodes - c[:, None])[:, None, :] ** np.arange(k)[None, :, None]
    q = np.arange(k)
    moments = ((hi - c)[:, None] ** (q + 1) - (lo - c)[:, None] ** (q + 1)) / (q + 1)
    local = np.linalg.solve(vander, moments[:, :, None])[:, :, 0]
    w = np.zeros(n)
    np.add.at(w, stencils.ravel(), local.ravel())
    return w


def lattice_nodes(t: float, h: float):
    """Nodes -t, -m h, ..., m h, t and their quadrature weights.

    Lattice nodes closer than h/2 to the light cone are dropped so that no
    cell is shorter than h/2. Returns ``(y, w, w_end)``: lattice abscissae and
    weights for k = -m..m, and the common weight of the two endpoints.
    """
    m = max(0, int(math.floor((t - 0.5 * h) / h + 1e-12)))
    y = np.arange(-m, m + 1) * h
    if m == 0 and t <= 0.5 * h:
        z = np.array([-t, 0.0, t])
    else:
        z = np.concatenate(([-t], y, [t]))
    w = cubic_weights(z)
    return y, w[1:-1], float(w[0])


def stencil(j: int, t: float, h: float) -> KernelStencil:
    _check_id(j)
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    y, w, w_end = lattice_nodes(t, h)
    return KernelStencil(
        m=(len(y) - 1) // 2,
        weights=w * kernel(j, t, y),
        end_weight=w_end,
        k_plus=kernel(j, t, t),
        k_minus=kernel(j, t, -t),
    )


def box_integral(f: GridFunction, a: float) -> np.ndarray:
    """int_{x-a}^{x+a} f(y) dy at every node, same quadrature as the kernels."""
    if a <= 0:
        return np.zeros(f.grid.n_points)
    _, w, w_end = lattice_nodes(a, f.h)
    return lattice_convolve(f.values, w) + w_end * (translate(f, -a) + translate(f, a))


def check_domain(f: GridFunction, t: float, rel_tol: float = 1e-12) -> bool:
    """True when f is negligible within distance t of the grid ends."""
    a = np.abs(f.values)
    amax = a.max(initial=0.0)
    if amax == 0:
        return True
    x = f.x
    near_edge = np.abs(x) > f.grid.half_width - t
    return bool(np.all(a[near_edge] <= rel_tol * amax))


def lattice_convolve(values: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """out_i = sum_k weights[k + m] * values[i - k], zero outside the grid."""
    m = (len(weights) - 1) // 2
    n = len(values)
    if len(weights) < 64:
        full = np.convolve(values, weights)
    else:
        full = fftconvolve(values, weights)
    return full[m : m + n]


def kernel_convolve(j: int, t: float, f: GridFunction) -> GridFunction:
    """(K~_j(t) * f)(x) = int_{-t}^{t} K_j(t, y) f(x - y) dy.

    Emits :class:`TruncationWarning` when the result would spill past the grid.
    """
    if not check_domain(f, t):
        warnings.warn(
            f"data plus light cone of radius {t:g} exceed the grid half-width "
            f"{f.grid.half_width:g}; the convolution is truncated",
            TruncationWarning,
            stacklevel=2,
        )
    st = stencil(j, t, f.h)
    out = lattice_convolve(f.values, st.weights)
    out += st.end_weight * (st.k_plus * translate(f, -t) + st.k_minus * translate(f, t))
    return GridFunction(f.grid, out)


def lattice_kernel(j: int, t: float, h: float) -> np.ndarray:
    """Full lattice weights (k = -M..M, M = t/h) for a light cone on the lattice.

    Requires t to be a whole number of cells, so the endpoint nodes coincide
    with lattice points and the convolution is a plain discrete one.
    """
    M = t / h
    if abs(M - round(M)) > 1e-9 or round(M) < 1:
        raise ValueError("t must be a positive whole number of grid cells")
    M = int(round(M))
    st = stencil(j, t, h)
    vec = np.zeros(2 * M + 1)
    vec[1:-1] = st.weights
    vec[0] = st.end_weight * st.k_minus
    vec[-1] = st.end_weight * st.k_plus
    return vec
