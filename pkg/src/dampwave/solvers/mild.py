"""Time marching of the Duhamel (mild-solution) equation

    u(t) = S(t)(u0 + u1) + d_t S(t) u0 + int_0^t S(t - tau) |u(tau)|^p dtau.

The tau-integral uses the trapezoid rule on the solver's time grid. Because
S(0) = 0 the newest node never enters u(t_n), so the predictor already is
the fixed point of the discrete map and no corrector sweep is needed. The
time derivative uses d_t S with d_t S(0) = identity, which does bring in the
newest source value.

The time step must be a whole number of grid cells; every lag kernel is then
a plain lattice convolution and its spectrum is computed once per lag.
"""

from __future__ import annotations

import math
import warnings

import numpy as np
from scipy import fft

from ..kernels import TruncationWarning, check_domain, lattice_kernel
from ..semigroup import FreeSolutionInputs, free_solution
from .base import ProblemSpec, Status, Trajectory, crossed


def _cells_per_step(dt: float, h: float) -> int:
    q = dt / h
    if abs(q - round(q)) > 1e-9 * max(1.0, q) or round(q) < 1:
        raise ValueError(f"dt = {dt} must be a whole multiple of the grid spacing {h}")
    return int(round(q))


def _spectrum(vec: np.ndarray, nfft: int) -> np.ndarray:
    M = (len(vec) - 1) // 2
    arr = np.zeros(nfft)
    arr[: M + 1] = vec[M:]
    arr[nfft - M :] = vec[:M]
    return fft.rfft(arr)


def solve_mild(spec: ProblemSpec) -> Trajectory:
    grid = spec.grid
    h = grid.h
    n_x = grid.n_points
    dt = spec.dt
    q = _cells_per_step(dt, h)
    n_steps = int(math.ceil(spec.t_end / dt - 1e-9))
    traj = Trajectory(step=dt, solver="mild", problem=spec, meta={"dx": h, "L": grid.half_width})

    truncated = not (check_domain(spec.u0, spec.t_end) and check_domain(spec.u1, spec.t_end))
    if truncated:
        warnings.warn("grid too small for the light cone of t_end", TruncationWarning, stacklevel=2)

    nfft = fft.next_fast_len(n_x + 2 * q * n_steps + 1, real=True)
    n_freq = nfft // 2 + 1
    khat_s = np.zeros((n_steps + 1, n_freq), dtype=complex)
    khat_t = np.zeros((n_steps + 1, n_freq), dtype=complex)
    for lag in range(1, n_steps + 1):
        s = lag * dt
        khat_s[lag] = _spectrum(lattice_kernel(0, s, h), nfft)
        vec = lattice_kernel(2, s, h)
        # translation part of d_t S: e^{-s/2} (f(x+s) + f(x-s)) / 2
        vec[0] += 0.5 * math.exp(-0.5 * s)
        vec[-1] += 0.5 * math.exp(-0.5 * s)
        khat_t[lag] = _spectrum(vec, nfft)

    # trapezoid-weighted source spectra, c_0 = 1/2
    ghat = np.zeros((n_steps + 1, n_freq), dtype=complex)
    stride = spec.store_stride(dt)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        for n in range(n_steps + 1):
            t = n * dt
            free, free_rate = free_solution(FreeSolutionInputs(spec.u0, spec.u1, t))
            u = free.values.copy()
            if n > 0:
                acc = np.einsum("ij,ij->j", khat_s[n:0:-1], ghat[:n])
                u += dt * fft.irfft(acc, nfft)[:n_x]
            sup = float(np.max(np.abs(u)))
            traj.record_sup(t, sup)
            if crossed(sup, spec.M):
                traj.status = Status.BLOWUP
                traj.t_blowup = t
                break
            g = spec.source(u)
            ghat[n] = fft.rfft(g, nfft) * (0.5 if n == 0 else 1.0)
            if n % stride == 0 or n == n_steps:
                ut = free_rate.values.copy()
                if n > 0:
                    acc = np.einsum("ij,ij->j", khat_t[n:0:-1], ghat[:n])
                    ut += dt * fft.irfft(acc, nfft)[:n_x] + 0.5 * dt * g
                traj.store(u, ut, grid, t, spec.p)
    if traj.status is Status.COMPLETED and truncated:
        traj.status = Status.TRUNCATION
    return traj
