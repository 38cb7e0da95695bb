"""Threshold-crossing lifespan estimates."""

from __future__ import annotations

from dataclasses import dataclass, replace

from .base import Trajectory, crossed
from .fdtd import resume_refined


@dataclass(frozen=True)
class LifespanEstimate:
    """``t0`` is the crossing time, or the final time when ``censored``.

    ``coarse_t0`` keeps the unrefined crossing for comparison.
    """

    t0: float
    refined: bool
    censored: bool
    coarse_t0: float


def first_crossing(traj: Trajectory, M: float) -> float | None:
    for t, v in zip(traj.sup_times, traj.sup_values):
        if crossed(v, M):
            return t
    return None


def detect_blowup(traj: Trajectory, M: float | None = None, refine: bool = True) -> LifespanEstimate:
    """First time the sup norm reaches M, optionally refined once.

    Refinement reruns from the checkpoint a finite-difference trajectory
    keeps, with dx and dt halved; other solvers have no checkpoint and
    report ``refined=False``.
    """
    if M is None:
        M = traj.problem.M if traj.problem is not None else 1e6
    if not traj.sup_times:
        raise ValueError("trajectory has no sup-norm history")
    t0 = first_crossing(traj, M)
    if t0 is None:
        t_last = traj.sup_times[-1]
        return LifespanEstimate(t0=t_last, refined=False, censored=True, coarse_t0=t_last)
    if not refine or traj.checkpoint is None or traj.checkpoint.state.time >= t0:
        return LifespanEstimate(t0=t0, refined=False, censored=False, coarse_t0=t0)
    work = traj
    if traj.problem is not None and traj.problem.M != M:
        work = replace(traj, problem=replace(traj.problem, M=M))
    fine = resume_refined(work)
    t_fine = first_crossing(fine, M)
    if t_fine is None:
        return LifespanEstimate(t0=t0, refined=False, censored=False, coarse_t0=t0)
    return LifespanEstimate(t0=t_fine, refined=True, censored=False, coarse_t0=t0)
