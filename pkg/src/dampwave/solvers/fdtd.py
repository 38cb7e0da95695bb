"""Explicit finite differences for u_tt + u_t - u_xx = |u|^p.

Three-level scheme with the damping term centred in time:

    (1 + a) u^{n+1} = 2 u^n - (1 - a) u^{n-1} + dt^2 (D2 u^n + |u^n|^p),  a = dt/2.

The uniform mode keeps dt and dx fixed. The adaptive mode is meant for
lifespan sweeps whose blowup times run into the 10^5 range: it widens the
domain as the solution spreads, coarsens dx while the solution is small
and diffusive, and shrinks dt on the ODE time scale of the nonlinearity as
the amplitude grows.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.interpolate import CubicSpline

from ..numerics import GridFunction, grid_with_spacing, support_radius
from .base import Checkpoint, ProblemSpec, SolverState, Status, Trajectory, crossed

BOUNDARIES = ("dirichlet", "periodic")


@dataclass(frozen=True)
class AdaptiveConfig:
    """Step-size and grid controls of the adaptive mode.

    dt = min(cfl * dx, growth * T_ode) with the ODE time scale
    T_ode = 1 / min(A^{p-1}, A^{(p-1)/2}) at amplitude A. dx doubles while
    dx < sqrt(t + 1) / coarsen_k and the amplitude is below coarsen_below.
    """

    cfl: float = 0.5
    growth: float = 0.02
    coarsen_k: float = 40.0
    coarsen_below: float = 0.1
    checkpoint_level: float = 1.0

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError("cfl must lie in (0, 1]")
        if not self.growth > 0 or not self.coarsen_k > 0:
            raise ValueError("growth and coarsen_k must be positive")

    def refined(self) -> "AdaptiveConfig":
        return replace(self, growth=0.5 * self.growth, coarsen_k=2.0 * self.coarsen_k)


def _laplacian(u: np.ndarray, dx: float, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        return (np.roll(u, 1) - 2.0 * u + np.roll(u, -1)) / (dx * dx)
    out = np.zeros_like(u)
    out[1:-1] = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (dx * dx)
    return out


def _resample(f: GridFunction, dx: float) -> GridFunction:
    if abs(f.h - dx) <= 1e-12 * dx:
        return f
    grid = grid_with_spacing(f.grid.half_width, dx)
    x = np.clip(grid.x, f.x[0], f.x[-1])
    return GridFunction(grid, CubicSpline(f.x, f.values)(x))


def _source(spec: ProblemSpec, u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        return spec.source(u)


def solve_fdtd(
    spec: ProblemSpec,
    dx: float | None = None,
    boundary: str = "dirichlet",
    adaptive: bool = False,
    config: AdaptiveConfig | None = None,
) -> Trajectory:
    """March the PDE; ``dx`` defaults to the spacing of the data grid.

    In the uniform mode ``spec.dt`` is the step and must not exceed dx. In
    the adaptive mode ``spec.dt`` only caps the step.
    """
    if boundary not in BOUNDARIES:
        raise ValueError(f"boundary must be one of {BOUNDARIES}")
    dx = spec.grid.h if dx is None else float(dx)
    if not adaptive and spec.dt > dx * (1 + 1e-12):
        raise ValueError(f"dt = {spec.dt} exceeds dx = {dx}: the scheme would be unstable")
    u0 = _resample(spec.u0, dx)
    u1 = _resample(spec.u1, dx)
    if adaptive:
        if boundary != "dirichlet":
            raise ValueError("the adaptive mode grows the domain and needs dirichlet boundaries")
        config = config or AdaptiveConfig()
        traj = Trajectory(step=spec.dt, solver="fdtd", problem=spec)
        traj.meta.update(dx=dx, boundary=boundary, adaptive=True, config=asdict(config))
        margin = support_radius(spec.u0) + support_radius(spec.u1) + 2.0
        _march_adaptive(spec, u0.values, u1.values, 0.0, dx, config, margin, traj)
        return traj
    traj = Trajectory(step=spec.dt, solver="fdtd", problem=spec)
    traj.meta.update(dx=dx, L=u0.grid.half_width, boundary=boundary, adaptive=False)
    _march_uniform(spec, u0, u1, 0.0, spec.dt, boundary, traj, first=True)
    return traj


def _march_uniform(spec, u0: GridFunction, u1: GridFunction, t0, dt, boundary, traj, first):
    grid = u0.grid
    dx = grid.h
    a = 0.5 * dt
    n_steps = int(math.ceil((spec.t_end - t0) / dt - 1e-9))
    stride = spec.store_stride(dt)
    level = 1.0
    u_prev = u0.values.copy()
    u_cur = u_prev + dt * u1.values + 0.5 * dt * dt * (
        _laplacian(u_prev, dx, boundary) - u1.values + _source(spec, u_prev)
    )
    sup0 = float(np.max(np.abs(u_prev)))
    traj.record_sup(t0, sup0)
    if crossed(sup0, spec.M):
        traj.status, traj.t_blowup = Status.BLOWUP, t0
        return
    if first:
        traj.store(u_prev, u1.values, grid, t0, spec.p)
        if sup0 >= level and traj.checkpoint is None:
            traj.checkpoint = Checkpoint(SolverState(u0, u1, t0), dt)
    for n in range(1, n_steps + 1):
        t = t0 + n * dt
        sup = float(np.max(np.abs(u_cur)))
        traj.record_sup(t, sup)
        if crossed(sup, spec.M):
            traj.status, traj.t_blowup = Status.BLOWUP, t
            return
        acc = _laplacian(u_cur, dx, boundary) + _source(spec, u_cur)
        u_next = (2.0 * u_cur - (1.0 - a) * u_prev + dt * dt * acc) / (1.0 + a)
        if boundary == "dirichlet":
            u_next[0] = u_next[-1] = 0.0
        ut = (u_next - u_prev) / (2.0 * dt)
        if np.all(np.isfinite(ut)):
            if first and (n % stride == 0 or n == n_steps):
                traj.store(u_cur, ut, grid, t, spec.p)
            if first and sup >= level and traj.checkpoint is None:
                traj.checkpoint = Checkpoint(
                    SolverState(GridFunction(grid, u_cur), GridFunction(grid, ut), t), dt
                )
        u_prev, u_cur = u_cur, u_next


def _ode_step(config: AdaptiveConfig, dx: float, amax: float, p: float, cap: float) -> float:
    scale = min(amax ** (p - 1), amax ** (0.5 * (p - 1))) if amax > 0 else 0.0
    dt = config.cfl * dx
    if scale > 0:
        dt = min(dt, config.growth / scale)
    return min(dt, cap)


def _rate(u, u_prev, dt, acc):
    # velocity at the newest level consistent with the centred scheme
    return ((u - u_prev) / dt + 0.5 * dt * acc) / (1.0 + 0.5 * dt)


def _march_adaptive(spec, u, ut, t, dx, config, margin, traj, record=True):
    p = spec.p
    cap = spec.dt
    nonlinear = spec.nonlinear

    def acc_of(v, h):
        return _laplacian(v, h, "dirichlet") + (_source(spec, v) if nonlinear else 0.0)

    def pad_to(v, need, h):
        half = 0.5 * (len(v) - 1) * h
        if half >= need + 2 * h:
            return v, 0
        add = int(math.ceil((1.5 * need - half) / h))
        return np.pad(v, add), add

    def state(v, w, h, tt):
        grid = grid_with_spacing(0.5 * (len(v) - 1) * h, h)
        return SolverState(GridFunction(grid, v), GridFunction(grid, w), tt)

    u = np.asarray(u, dtype=float).copy()
    ut = np.asarray(ut, dtype=float).copy()
    amax = float(np.max(np.abs(u)))
    dt = _ode_step(config, dx, amax, p, cap)
    u_prev = u - dt * ut + 0.5 * dt * dt * (acc_of(u, dx) - ut)
    steps = 0
    next_store = t
    store_dt = spec.store_dt
    while True:
        amax = float(np.max(np.abs(u)))
        traj.record_sup(t, amax)
        if crossed(amax, spec.M):
            traj.status, traj.t_blowup = Status.BLOWUP, t
            break
        at_end = t >= spec.t_end * (1 - 1e-12)
        need_rate = (
            at_end
            or (record and store_dt is not None and t >= next_store)
            or (record and traj.checkpoint is None and amax >= config.checkpoint_level)
        )
        if need_rate:
            rate = ut if steps == 0 else _rate(u, u_prev, dt, acc_of(u, dx))
            snap = state(u, rate, dx, t)
            if record and traj.checkpoint is None and amax >= config.checkpoint_level:
                traj.checkpoint = Checkpoint(snap, dt)
                traj.meta["checkpoint_dx"] = dx
            if (at_end or (store_dt is not None and t >= next_store)) and record:
                if not traj.states or t > traj.states[-1].time:
                    traj.store(snap.u.values, snap.ut.values, snap.u.grid, t, p)
                if store_dt is not None:
                    while next_store <= t:
                        next_store += store_dt
        if at_end:
            break
        # widen the domain ahead of the light cone and the diffusive spread
        need = min(t + margin, margin + 14.0 * math.sqrt(2.0 * (t + 1.0)))
        u, add = pad_to(u, need, dx)
        if add:
            u_prev = np.pad(u_prev, add)
        dt_new = _ode_step(config, dx, amax, p, cap)
        if dx < math.sqrt(t + 1.0) / config.coarsen_k and amax < config.coarsen_below:
            if ((len(u) - 1) // 2) % 2:
                # keep a node at x = 0 on the coarse grid
                u, u_prev = np.pad(u, 1), np.pad(u_prev, 1)
            rate = _rate(u, u_prev, dt, acc_of(u, dx))
            u, rate = u[::2].copy(), rate[::2].copy()
            dx *= 2.0
            dt = _ode_step(config, dx, amax, p, cap)
            u_prev = u - dt * rate + 0.5 * dt * dt * (acc_of(u, dx) - rate)
            continue
        if abs(dt_new - dt) > 0.1 * dt and (dt_new < dt or dt_new > 1.5 * dt):
            acc = acc_of(u, dx)
            rate = _rate(u, u_prev, dt, acc)
            dt = dt_new
            u_prev = u - dt * rate + 0.5 * dt * dt * (acc - rate)
        # land exactly on t_end
        step = min(dt, spec.t_end - t)
        if step < dt:
            acc = acc_of(u, dx)
            rate = _rate(u, u_prev, dt, acc)
            dt = step
            u_prev = u - dt * rate + 0.5 * dt * dt * (acc - rate)
        a = 0.5 * dt
        u_next = (2.0 * u - (1.0 - a) * u_prev + dt * dt * acc_of(u, dx)) / (1.0 + a)
        u_next[0] = u_next[-1] = 0.0
        u_prev, u = u, u_next
        t += dt
        steps += 1
    traj.meta["steps"] = traj.meta.get("steps", 0) + steps
    traj.meta["final_dx"] = dx
    traj.meta["L"] = 0.5 * (len(u) - 1) * dx


def resume_refined(traj: Trajectory) -> Trajectory:
    """Rerun from the trajectory's checkpoint with dx and dt halved.

    The returned trajectory carries only the sup history after the
    checkpoint and the new blowup time.
    """
    if traj.solver != "fdtd" or traj.checkpoint is None:
        raise ValueError("refinement needs a finite-difference trajectory with a checkpoint")
    spec = traj.problem
    cp = traj.checkpoint
    st = cp.state
    dx = 0.5 * st.u.h
    u = _resample(st.u, dx)
    ut = _resample(st.ut, dx)
    out = Trajectory(step=0.5 * cp.dt, solver="fdtd", problem=spec)
    if traj.meta.get("adaptive"):
        config = AdaptiveConfig(**traj.meta["config"]).refined()
        margin = support_radius(spec.u0) + support_radius(spec.u1) + 2.0
        out.meta.update(dx=dx, adaptive=True, config=asdict(config))
        _march_adaptive(spec, u.values, ut.values, st.time, dx, config, margin, out, record=False)
    else:
        out.meta.update(dx=dx, adaptive=False)
        _march_uniform(spec, u, ut, st.time, 0.5 * cp.dt, traj.meta["boundary"], out, first=False)
    return out
