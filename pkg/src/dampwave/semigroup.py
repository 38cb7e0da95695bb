"""The linear damped-wave propagator S(t) and its derivatives.

S(t) maps a velocity datum h to the solution of
u_tt + u_t - u_xx = 0 with u(0) = 0, u_t(0) = h. The derivatives are
written as explicit light-cone translation terms plus a kernel
convolution:

    d_x S(t) f   = E (f(x+t) - f(x-t)) / 2 + K~_1 * f
    d_t S(t) f   = E (f(x+t) + f(x-t)) / 2 + K~_2 * f
    d_tx S(t) f  = E (f'(x+t) + f'(x-t)) / 2 + E (t/16 - 1/4) (f(x+t) - f(x-t)) + K~_3 * f
    d_tt S(t) f  = E (f'(x+t) - f'(x-t)) / 2 + E (t/16 - 1/2) (f(x+t) + f(x-t)) + K~_4 * f

with E = e^{-t/2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .kernels import box_integral, kernel_convolve
from .numerics import GridFunction, derivative, integrate, lq_norm, translate

DERIVATIVES = ("x", "t", "tx", "tt")


def apply_S(t: float, f: GridFunction) -> GridFunction:
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return f.grid.zeros()
    return kernel_convolve(0, t, f)


def apply_dS(which: str, t: float, f: GridFunction) -> GridFunction:
    """One of d_x S(t) f, d_t S(t) f, d_t d_x S(t) f, d_t^2 S(t) f."""
    if which not in DERIVATIVES:
        raise ValueError(f"derivative selector must be one of {DERIVATIVES}, got {which!r}")
    if t < 0:
        raise ValueError("t must be non-negative")
    e = math.exp(-0.5 * t)
    fp, fm = translate(f, t), translate(f, -t)
    if which in ("tx", "tt"):
        df = derivative(f)
        dfp, dfm = translate(df, t), translate(df, -t)
    if which == "x":
        edge = 0.5 * e * (fp - fm)
        j = 1
    elif which == "t":
        edge = 0.5 * e * (fp + fm)
        j = 2
    elif which == "tx":
        edge = 0.5 * e * (dfp + dfm) + e * (t / 16.0 - 0.25) * (fp - fm)
        j = 3
    else:
        edge = 0.5 * e * (dfp - dfm) + e * (t / 16.0 - 0.5) * (fp + fm)
        j = 4
    if t == 0:
        return GridFunction(f.grid, edge)
    return GridFunction(f.grid, edge + kernel_convolve(j, t, f).values)


@dataclass(frozen=True)
class FreeSolutionInputs:
    u0: GridFunction
    u1: GridFunction
    t: float

    def __post_init__(self):
        if self.u0.grid != self.u1.grid:
            raise ValueError("u0 and u1 must share one grid")
        if self.t < 0:
            raise ValueError("t must be non-negative")


def free_solution(inp: FreeSolutionInputs) -> tuple[GridFunction, GridFunction]:
    """Linear solution S(t)(u0 + u1) + d_t S(t) u0 and its time derivative."""
    s = inp.u0 + inp.u1
    value = apply_S(inp.t, s) + apply_dS("t", inp.t, inp.u0)
    rate = apply_dS("t", inp.t, s) + apply_dS("tt", inp.t, inp.u0)
    return value, rate


def strans_rhs(t: float, h: GridFunction, dtau: float) -> np.ndarray:
    """Right side of the backward light-cone representation of S(t) h.

    (1/8) int_0^t e^{(tau-t)/2} int_{x-t+tau}^{x+t-tau} S(tau) h dxi dtau
    + e^{-t/2} / 2 int_{x-t}^{x+t} h, by iterated trapezoid rules.
    """
    n = max(1, int(round(t / dtau)))
    taus = np.linspace(0.0, t, n + 1)
    inner = np.empty((n + 1, h.grid.n_points))
    for k, tau in enumerate(taus):
        if tau == 0 or k == n:
            # S(0) = 0 and the cone has zero width at tau = t
            inner[k] = 0.0
        else:
            inner[k] = math.exp(0.5 * (tau - t)) * box_integral(apply_S(tau, h), t - tau)
    double = trapezoid(inner, taus, axis=0)
    return double / 8.0 + 0.5 * math.exp(-0.5 * t) * box_integral(h, t)


def strans_residual(t: float, h: GridFunction, dtau: float | None = None) -> float:
    """max_x |S(t) h - backward light-cone representation|."""
    if t < 0:
        raise ValueError("t must be non-negative")
    if t == 0:
        return 0.0
    dtau = h.h if dtau is None else dtau
    lhs = apply_S(t, h).values
    return float(np.max(np.abs(lhs - strans_rhs(t, h, dtau))))


@dataclass(frozen=True)
class MassReport:
    lhs: float
    rhs: float
    initial: float
    t1: float


def mass_growth(traj, p: float, t1: float | None = None) -> MassReport:
    """Compare int (u_t + u)(t1) dx with int_0^t1 ||u||_p^p dtau.

    ``initial`` is int (u_1 + u_0) dx, zero for data with u_0 + u_1 = 0;
    the identity reads lhs = initial + rhs.
    """
    states = [s for s in traj.states if t1 is None or s.time <= t1 * (1 + 1e-12)]
    if len(states) < 2:
        raise ValueError("need at least two stored states")
    last = states[-1]
    lhs = integrate(last.u + last.ut)
    times = np.array([s.time for s in states])
    powers = np.array([lq_norm(s.u.values, s.u.h, p) ** p for s in states])
    first = states[0]
    return MassReport(
        lhs=lhs,
        rhs=float(trapezoid(powers, times)),
        initial=integrate(first.u + first.ut),
        t1=last.time,
    )
