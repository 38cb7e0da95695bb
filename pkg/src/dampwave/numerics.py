"""Uniform 1D grids, grid functions, quadrature and the norms used throughout.

Everything here is a pure function of its inputs. Grid functions are
immutable: arithmetic returns new objects and the value arrays are
flagged read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import CubicSpline


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [-L, L] with ``n_points`` nodes including both ends."""

    half_width: float
    n_points: int

    def __post_init__(self):
        if not self.half_width > 0 or not math.isfinite(self.half_width):
            raise ValueError(f"half_width must be positive and finite, got {self.half_width}")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError(f"n_points must be an integer >= 3, got {self.n_points}")

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        # index-based so that both endpoints are reproduced exactly
        i = np.arange(self.n_points)
        x = -self.half_width + i * self.h
        x[-1] = self.half_width
        return x

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n_points))

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> "GridFunction":
        return GridFunction(self, np.asarray(fn(self.x), dtype=float))


def make_grid(L: float, n_points: int) -> Grid:
    return Grid(float(L), int(n_points))


def grid_with_spacing(L: float, h: float) -> Grid:
    """Grid on [-L', L'] with spacing exactly ``h`` and L' >= L (L' a multiple of h)."""
    if not h > 0:
        raise ValueError("spacing must be positive")
    m = int(math.ceil(L / h - 1e-9))
    return Grid(m * h, 2 * m + 1)


class GridFunction:
    """Real samples on a :class:`Grid`.

    ``blown_up`` marks a snapshot that is allowed to hold non-finite values.
    """

    __slots__ = ("grid", "values", "blown_up")

    def __init__(self, grid: Grid, values, blown_up: bool = False):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n_points,):
            raise ValueError(
                f"values must have shape ({grid.n_points},), got {values.shape}"
            )
        if not blown_up and not np.all(np.isfinite(values)):
            raise ValueError("grid function holds non-finite values")
        values.flags.writeable = False
        self.grid = grid
        self.values = values
        self.blown_up = blown_up

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def h(self) -> float:
        return self.grid.h

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.grid, values)

    def _other(self, other):
        if isinstance(other, GridFunction):
            if other.grid != self.grid:
                raise ValueError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._other(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return GridFunction(self.grid, self.values / c)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __abs__(self):
        return GridFunction(self.grid, np.abs(self.values))

    def __repr__(self):
        return f"GridFunction(L={self.grid.half_width}, n={self.grid.n_points})"


@dataclass(frozen=True)
class NormReport:
    l1: float
    lp: float
    w11: float
    w1p: float
    linf: float
    p: float

    def __post_init__(self):
        for name in ("l1", "lp", "w11", "w1p", "linf"):
            if getattr(self, name) < 0:
                raise ValueError(f"norm {name} is negative")


def japanese(x):
    """The bracket <x> = sqrt(1 + x^2)."""
    return np.sqrt(1.0 + np.square(x))


def _check_finite(values: np.ndarray):
    if not np.all(np.isfinite(values)):
        raise ValueError("non-finite values cannot be integrated")


def integrate(f: GridFunction) -> float:
    """Composite trapezoid rule over [-L, L]."""
    _check_finite(f.values)
    return float(trapezoid(f.values, dx=f.h))


def derivative(f: GridFunction) -> GridFunction:
    """Second-order centred differences, one-sided second order at the ends."""
    _check_finite(f.values)
    return GridFunction(f.grid, np.gradient(f.values, f.h, edge_order=2))


def lq_norm(values: np.ndarray, h: float, q: float) -> float:
    a = np.abs(values)
    if math.isinf(q):
        return float(a.max(initial=0.0))
    if q == 1:
        return float(trapezoid(a, dx=h))
    return float(trapezoid(a**q, dx=h)) ** (1.0 / q)


def norms(f: GridFunction, p: float) -> NormReport:
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    _check_finite(f.values)
    df = np.gradient(f.values, f.h, edge_order=2)
    l1 = lq_norm(f.values, f.h, 1)
    lp = lq_norm(f.values, f.h, p)
    return NormReport(
        l1=l1,
        lp=lp,
        w11=l1 + lq_norm(df, f.h, 1),
        w1p=lp + lq_norm(df, f.h, p),
        linf=lq_norm(f.values, f.h, math.inf),
        p=float(p),
    )


def weighted_norm_sum(u: GridFunction, ut: GridFunction, s: float, p: float, shift: float) -> float:
    """Sum over (k, l) in {(0,0), (1,0), (0,1)} and q in {1, p} of
    <s>^(shift + l + k/2 + 1/(2q')) * ||d_t^l d_x^k u||_{L^q}.

    ``shift`` is 1 for the first-phase norm and 0 for the second-phase one.
    """
    ux = np.gradient(u.values, u.h, edge_order=2)
    w = float(japanese(s))
    total = 0.0
    for q in (1.0, p):
        half_dual = 0.5 * (1.0 - 1.0 / q)
        for vals, order in ((u.values, 0.0), (ux, 0.5), (ut.values, 1.0)):
            total += w ** (shift + order + half_dual) * lq_norm(vals, u.h, q)
    return total


def _states_in(traj, lo: float, hi: float) -> list:
    tol = 1e-12 * max(1.0, abs(hi))
    return [s for s in traj.states if lo - tol <= s.time <= hi + tol]


def x_norm(traj, t: float, p: float) -> float:
    """First-phase norm: supremum over stored times in [0, t]."""
    states = _states_in(traj, -math.inf, t)
    if not states:
        raise ValueError("no stored states at or before t")
    return max(weighted_norm_sum(s.u, s.ut, s.time, p, 1.0) for s in states)


def y_norm(traj, t: float, t1: float, p: float) -> float:
    """Second-phase norm: supremum over stored times in [t1, t], weights in tau - t1."""
    if t < t1:
        raise ValueError("t must not precede t1")
    states = _states_in(traj, t1, t)
    if not states:
        raise ValueError(f"no stored states in [{t1}, {t}]")
    return max(weighted_norm_sum(s.u, s.ut, s.time - t1, p, 0.0) for s in states)


@dataclass(frozen=True)
class GNReport:
    lhs: float
    rhs: float
    holds: bool


def gn_check(f: GridFunction, p: float) -> GNReport:
    """Check || |f|^p ||_{L^p} <= ||f||_{L^p} ||f'||_{L^1}^{p-1} on the grid."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    _check_finite(f.values)
    lhs = lq_norm(np.abs(f.values) ** p, f.h, p)
    df = np.gradient(f.values, f.h, edge_order=2)
    rhs = lq_norm(f.values, f.h, p) * lq_norm(df, f.h, 1) ** (p - 1)
    return GNReport(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs * (1 + 1e-8)))


def bump(x, radius: float = 1.0, height: float = 1.0):
    """Smooth compactly supported bump exp(-1/(1 - (x/r)^2)) on |x| < r."""
    x = np.asarray(x, dtype=float) / radius
    out = np.zeros_like(x)
    inside = np.abs(x) < 1
    out[inside] = np.exp(-1.0 / (1.0 - x[inside] ** 2))
    return height * out


def extend(f: GridFunction, L: float) -> GridFunction:
    """Zero-pad ``f`` to a grid of the same spacing covering at least [-L, L]."""
    h = f.h
    m_old = (f.grid.n_points - 1) // 2
    m_new = int(math.ceil(L / h - 1e-9))
    if m_new <= m_old:
        return f
    if f.grid.n_points % 2 == 0:
        raise ValueError("extend needs an odd number of points (node at x = 0)")
    pad = m_new - m_old
    return GridFunction(Grid(m_new * h, 2 * m_new + 1), np.pad(f.values, pad))


def domain_half_width(t_end: float, support_radius: float) -> float:
    """Half-width keeping the light cone plus the Gaussian kernel tail inside."""
    return t_end + support_radius + 6.0 * math.sqrt(2.0 * t_end)


def support_radius(f: GridFunction, rel_tol: float = 1e-14) -> float:
    a = np.abs(f.values)
    amax = a.max(initial=0.0)
    if amax == 0:
        return 0.0
    idx = np.nonzero(a > rel_tol * amax)[0]
    x = f.x
    return float(max(abs(x[idx[0]]), abs(x[idx[-1]])))


def translate(f: GridFunction, s: float) -> np.ndarray:
    """Samples of x -> f(x + s) on f's grid, zero outside [-L, L].

    Whole-cell shifts are exact index moves; otherwise a cubic spline through
    the samples is evaluated.
    """
    h = f.h
    n = f.grid.n_points
    k = s / h
    kr = round(k)
    out = np.zeros(n)
    if abs(k - kr) < 1e-9:
        kr = int(kr)
        if abs(kr) >= n:
            return out
        if kr >= 0:
            out[: n - kr] = f.values[kr:]
        else:
            out[-kr:] = f.values[: n + kr]
        return out
    x = f.x
    xs = x + s
    inside = (xs >= x[0]) & (xs <= x[-1])
    if np.any(inside):
        out[inside] = CubicSpline(x, f.values)(xs[inside])
    return out
