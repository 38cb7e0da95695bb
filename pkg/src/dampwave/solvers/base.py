"""Problem description, solver states and trajectories shared by all solvers."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from ..numerics import GridFunction, norms


class Status(enum.Enum):
    COMPLETED = "completed"
    BLOWUP = "blowup_detected"
    TRUNCATION = "truncation_warning"


@dataclass(frozen=True)
class ProblemSpec:
    """u_tt + u_t - u_xx = |u|^p with u(0) = u0, u_t(0) = u1 on [0, t_end].

    ``nonlinear=False`` drops the power source (the linear validation switch).
    ``store_dt`` is the snapshot interval; ``None`` stores every step.
    """

    p: float
    u0: GridFunction
    u1: GridFunction
    t_end: float
    dt: float
    M: float = 1e6
    nonlinear: bool = True
    store_dt: float | None = None

    def __post_init__(self):
        if not self.p > 1:
            raise ValueError(f"p must exceed 1, got {self.p}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.M > 0:
            raise ValueError("blowup threshold M must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.u0.grid != self.u1.grid:
            raise ValueError("u0 and u1 must share one grid")

    @property
    def grid(self):
        return self.u0.grid

    def source(self, u: np.ndarray) -> np.ndarray:
        if not self.nonlinear:
            return np.zeros_like(u)
        return np.abs(u) ** self.p

    def store_stride(self, dt: float) -> int:
        if self.store_dt is None:
            return 1
        return max(1, int(round(self.store_dt / dt)))


@dataclass(frozen=True)
class SolverState:
    u: GridFunction
    ut: GridFunction
    time: float

    def __post_init__(self):
        if self.u.grid != self.ut.grid:
            raise ValueError("u and ut must share one grid")


@dataclass
class Checkpoint:
    """Restart data kept by the finite-difference solver for blowup refinement."""

    state: SolverState
    dt: float


@dataclass
class Trajectory:
    """Stored states plus the per-step sup-norm history.

    ``step`` is the base time step; adaptive runs vary it and record the
    actual stamps in ``sup_times``.
    """

    states: list = field(default_factory=list)
    step: float = 0.0
    norm_history: list = field(default_factory=list)
    status: Status = Status.COMPLETED
    t_blowup: float | None = None
    sup_times: list = field(default_factory=list)
    sup_values: list = field(default_factory=list)
    solver: str = ""
    problem: ProblemSpec | None = None
    checkpoint: Checkpoint | None = None
    meta: dict = field(default_factory=dict)

    def record_sup(self, t: float, value: float):
        self.sup_times.append(float(t))
        self.sup_values.append(float(value))

    def store(self, u: np.ndarray, ut: np.ndarray, grid, t: float, p: float):
        if self.states and t <= self.states[-1].time:
            raise ValueError("stored times must increase strictly")
        state = SolverState(GridFunction(grid, u), GridFunction(grid, ut), float(t))
        self.states.append(state)
        self.norm_history.append(norms(state.u, p))

    @property
    def final(self) -> SolverState:
        return self.states[-1]

    @property
    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.states])

    def state_at(self, t: float) -> SolverState:
        """Stored state whose time stamp is closest to ``t``."""
        times = self.times
        return self.states[int(np.argmin(np.abs(times - t)))]

    @property
    def blew_up(self) -> bool:
        return self.status is Status.BLOWUP


def crossed(value: float, M: float) -> bool:
    return not math.isfinite(value) or value >= M

