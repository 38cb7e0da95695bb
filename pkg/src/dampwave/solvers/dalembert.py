"""Solver built on the wave equation for v = e^{t/2} u.

v satisfies v_tt - v_xx = v/4 + e^{t/2} |u|^p. With dt equal to the grid
spacing the characteristic lattice is exact, so the backward light-cone
integral of the source can be accumulated one diamond at a time:

    v^{n+1}_i + v^{n-1}_i = v^n_{i+1} + v^n_{i-1} + h^2 F^n_i.

The free part (data terms, no 1/4 coupling) is evaluated in closed form
from translations and running integrals of the data; the recurrence only
carries the Duhamel part w with source q = u/4 + |u|^p. No Bessel function
is evaluated anywhere.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

from ..kernels import TruncationWarning, check_domain
from .base import ProblemSpec, Status, Trajectory, crossed


def _running_integral(f: np.ndarray, h: float) -> np.ndarray:
    """G_i = int_{x_0}^{x_i} f by the trapezoid rule.

    Positive weights keep box integrals of one-signed data one-signed, which
    the non-positive regime depends on; higher-order cell rules overshoot at
    the edge of the support.
    """
    return np.concatenate(([0.0], np.cumsum(0.5 * h * (f[:-1] + f[1:]))))


def _free_part(u0: np.ndarray, u1: np.ndarray, n: int, h: float) -> np.ndarray:
    """e^{-t/2} (u0(x-t) + u0(x+t)) / 2 + e^{-t/2}/2 int_{x-t}^{x+t} (u1 + u0/2), t = n h."""
    N = len(u0)
    e = math.exp(-0.5 * n * h)
    idx = np.arange(N)
    lo, hi = idx - n, idx + n
    pad = np.concatenate((np.zeros(n), u0, np.zeros(n)))
    trans = pad[lo + n] + pad[hi + n]
    G = _running_integral(u1 + 0.5 * u0, h)
    box = G[np.clip(hi, 0, N - 1)] - G[np.clip(lo, 0, N - 1)]
    return 0.5 * e * (trans + box)


def solve_dalembert(spec: ProblemSpec) -> Trajectory:
    grid = spec.grid
    h = grid.h
    if abs(spec.dt - h) > 1e-9 * h:
        raise ValueError(f"the characteristic lattice needs dt equal to the grid spacing {h}")
    dt = h
    n_steps = int(math.ceil(spec.t_end / dt - 1e-9))
    traj = Trajectory(step=dt, solver="dalembert", problem=spec, meta={"dx": h, "L": grid.half_width})
    truncated = not (check_domain(spec.u0, spec.t_end) and check_domain(spec.u1, spec.t_end))
    if truncated:
        warnings.warn("grid too small for the light cone of t_end", TruncationWarning, stacklevel=2)

    u0 = np.asarray(spec.u0.values)
    u1 = np.asarray(spec.u1.values)
    decay = math.exp(-0.5 * h)
    stride = spec.store_stride(dt)

    def coupling(u):
        return 0.25 * u + spec.source(u)

    def neighbours(w):
        out = np.zeros_like(w)
        out[1:] += w[:-1]
        out[:-1] += w[1:]
        return out

    # levels n-1, n, n+1 of the Duhamel part; u^{n+1} is needed for the centred u_t
    u_prev = None
    u_cur = u0.copy()
    w_prev = np.zeros_like(u0)
    w_cur = np.zeros_like(u0)
    q_cur = coupling(u_cur)
    for n in range(n_steps + 1):
        t = n * h
        sup = float(np.max(np.abs(u_cur)))
        traj.record_sup(t, sup)
        if crossed(sup, spec.M):
            traj.status = Status.BLOWUP
            traj.t_blowup = t
            break
        if n == 0:
            w_next = 0.5 * h * h * decay * q_cur
        else:
            w_next = decay * (neighbours(w_cur) + h * h * q_cur) - decay * decay * w_prev
        u_next = _free_part(u0, u1, n + 1, h) + w_next
        if n % stride == 0 or n == n_steps:
            ut = u1.copy() if n == 0 else (u_next - u_prev) / (2.0 * h)
            if np.all(np.isfinite(ut)):
                traj.store(u_cur, ut, grid, t, spec.p)
        u_prev, u_cur = u_cur, u_next
        w_prev, w_cur = w_cur, w_next
        with np.errstate(over="ignore", invalid="ignore"):
            q_cur = coupling(u_cur)
    if traj.status is Status.COMPLETED and truncated:
        traj.status = Status.TRUNCATION
    return traj
