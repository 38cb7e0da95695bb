"""Lifespan model, epsilon sweeps in the two data classes and power-law fits.

Data class A is (eps f, eps f), whose sum has positive integral. Data
class B is (eps f, -eps f), whose sum vanishes identically; its lifespan
behaves like the class-A model evaluated at eps^p.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import linregress

from .numerics import (
    GridFunction,
    domain_half_width,
    extend,
    integrate,
    lq_norm,
    norms,
    support_radius,
)
from .semigroup import apply_dS
from .solvers import SOLVERS, AdaptiveConfig, ProblemSpec, detect_blowup, solve_fdtd

CLASS_TAGS = ("A", "B")


def _check_p(p: float):
    if not 1 < p <= 3:
        raise ValueError(f"p must lie in (1, 3], got {p}")


@dataclass(frozen=True)
class LogScaled:
    """A positive number stored through its natural logarithm."""

    log: float

    @property
    def value(self) -> float:
        return math.exp(self.log) if self.log < 709.0 else math.inf


def log_lifespan_model(p: float, eps: float) -> float:
    """log T(eps): -2(p-1)/(3-p) log eps below p = 3, eps^-2 at p = 3."""
    _check_p(p)
    if not eps > 0:
        raise ValueError("eps must be positive")
    if p == 3:
        return eps**-2.0
    return -2.0 * (p - 1.0) / (3.0 - p) * math.log(eps)


def lifespan_model(p: float, eps: float):
    """eps^{-2(p-1)/(3-p)} for p < 3; at p = 3 exp(eps^-2) as :class:`LogScaled`."""
    log_t = log_lifespan_model(p, eps)
    if p == 3:
        return LogScaled(log_t)
    return eps ** (-2.0 * (p - 1.0) / (3.0 - p))


@dataclass(frozen=True)
class ExponentReport:
    """Predicted lifespan exponents; at p = 3 they refer to log T."""

    classA: float
    classB: float
    R: float
    log_scale: bool


def predicted_exponents(p: float) -> ExponentReport:
    _check_p(p)
    if p == 3:
        return ExponentReport(classA=2.0, classB=2.0 * p, R=2.0 * (p - 1.0), log_scale=True)
    a = 2.0 * (p - 1.0) / (3.0 - p)
    return ExponentReport(classA=a, classB=p * a, R=(p - 1.0) * a, log_scale=False)


@dataclass(frozen=True)
class DataClass:
    """Initial data (u0, u1) tagged with their class.

    Class A needs int (f0 + f1) > 0; class B needs f0 + f1 = 0 on the grid.
    """

    tag: str
    f0: GridFunction
    f1: GridFunction

    def __post_init__(self):
        if self.tag not in CLASS_TAGS:
            raise ValueError(f"data class must be one of {CLASS_TAGS}, got {self.tag!r}")
        if self.f0.grid != self.f1.grid:
            raise ValueError("both data must share one grid")
        s = self.f0.values + self.f1.values
        if self.tag == "A":
            if not integrate(self.f0 + self.f1) > 0:
                raise ValueError("class A data need a positive integral of f0 + f1")
        else:
            if np.any(s != 0) or not np.any(self.f0.values != 0):
                raise ValueError("class B data need f0 + f1 = 0 and f0 not identically zero")

    @classmethod
    def build(cls, tag: str, eps: float, profile: GridFunction) -> "DataClass":
        """Class A: (eps f, eps f). Class B: (eps f, -eps f)."""
        u0 = eps * profile
        return cls(tag, u0, u0 if tag == "A" else -u0)


@dataclass(frozen=True)
class LifespanRecord:
    eps: float
    p: float
    data_class: str
    t0: float
    censored: bool
    solver: str = "fdtd"
    dx: float = math.nan
    dt: float = math.nan
    L: float = math.nan
    M: float = 1e6
    note: str = ""

    def __post_init__(self):
        if not self.t0 > 0:
            raise ValueError("t0 must be positive")
        if self.data_class not in CLASS_TAGS:
            raise ValueError(f"unknown data class {self.data_class!r}")


@dataclass(frozen=True)
class SweepConfig:
    """How each sweep entry is solved.

    ``t_end_factor`` multiplies the model lifespan at eps (class A) or
    eps^p (class B) to give the censoring time. ``dt`` defaults to dx on
    fixed grids; in the adaptive mode it is an optional extra cap on the step. The adaptive
    finite-difference solver is the default; other solvers run on a fixed
    grid sized by the domain rule and are practical only for short lifespans.
    """

    solver: str = "fdtd"
    adaptive: bool = True
    dx: float = 0.02
    dt: float | None = None
    M: float = 1e6
    t_end_factor: float = 1e4
    t_end: float | None = None
    refine: bool = True
    workers: int = 1
    adaptive_config: AdaptiveConfig = field(default_factory=AdaptiveConfig)

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {tuple(SOLVERS)}")
        if self.adaptive and self.solver != "fdtd":
            raise ValueError("only the finite-difference solver has an adaptive mode")
        if not self.t_end_factor > 0 or not self.M > 0 or not self.dx > 0:
            raise ValueError("t_end_factor, M and dx must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


def auto_t_end(p: float, tag: str, eps: float, factor: float) -> float:
    eff = eps if tag == "A" else eps**p
    log_t = log_lifespan_model(p, min(eff, 1.0))
    if p == 3:
        log_t = min(log_t, 50.0)
    return factor * math.exp(log_t)


def _run_one(job) -> LifespanRecord:
    p, tag, eps, profile, cfg = job
    t_end = cfg.t_end if cfg.t_end is not None else auto_t_end(p, tag, eps, cfg.t_end_factor)
    dt = cfg.dt if cfg.dt is not None else (math.inf if cfg.adaptive else cfg.dx)
    meta = dict(eps=eps, p=p, data_class=tag, solver=cfg.solver, dt=dt, M=cfg.M)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            if cfg.adaptive:
                data = DataClass.build(tag, eps, profile)
                spec = ProblemSpec(p, data.f0, data.f1, t_end, dt, M=cfg.M)
                traj = solve_fdtd(spec, dx=cfg.dx, adaptive=True, config=cfg.adaptive_config)
            else:
                L = domain_half_width(t_end, support_radius(profile))
                data = DataClass.build(tag, eps, extend(profile, L))
                spec = ProblemSpec(p, data.f0, data.f1, t_end, dt, M=cfg.M, store_dt=t_end)
                traj = SOLVERS[cfg.solver](spec)
            est = detect_blowup(traj, cfg.M, refine=cfg.refine)
        return LifespanRecord(
            t0=est.t0,
            censored=est.censored,
            dx=traj.meta.get("dx", math.nan),
            L=traj.meta.get("L", math.nan),
            note="refined" if est.refined else "",
            **meta,
        )
    except Exception as exc:  # a failed entry is censored, the sweep goes on
        return LifespanRecord(t0=t_end, censored=True, note=f"failed: {exc}", **meta)


def sweep(p: float, data_class: str, eps_list, profile: GridFunction, config: SweepConfig | None = None):
    """One lifespan record per eps, ordered by descending eps."""
    _check_p(p)
    if data_class not in CLASS_TAGS:
        raise ValueError(f"data class must be one of {CLASS_TAGS}")
    config = config or SweepConfig()
    eps_list = [float(e) for e in eps_list]
    if any(not e > 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    jobs = [(p, data_class, e, profile, config) for e in eps_list]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    return sorted(records, key=lambda r: (-r.eps, r.data_class))


@dataclass(frozen=True)
class FitReport:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    p: float
    n_used: int
    n_censored: int
    log_log: bool = False

    def __post_init__(self):
        if not 0.0 <= self.r_squared <= 1.0 + 1e-12:
            raise ValueError("r_squared must lie in [0, 1]")


def fit_power_law(records, min_points: int = 3, min_span: float = 4.0, drop_largest: bool = True) -> FitReport:
    """Least squares of log T0 (log log T0 at p = 3) against log eps.

    Censored records are excluded. With five or more usable points the
    largest eps is dropped as pre-asymptotic.
    """
    records = list(records)
    ps = {r.p for r in records}
    if len(ps) > 1:
        raise ValueError("records mix several values of p")
    usable = sorted((r for r in records if not r.censored), key=lambda r: r.eps)
    n_censored = len(records) - len(usable)
    if drop_largest and len(usable) >= 5:
        usable = usable[:-1]
    if len(usable) < min_points:
        raise ValueError(f"need at least {min_points} uncensored records, got {len(usable)}")
    eps = np.array([r.eps for r in usable])
    if eps.max() / eps.min() < min_span * (1 - 1e-12):
        raise ValueError(f"eps must span a factor of at least {min_span}")
    p = usable[0].p
    t0 = np.array([r.t0 for r in usable])
    log_log = p == 3
    y = np.log(np.log(t0)) if log_log else np.log(t0)
    fit = linregress(np.log(eps), y)
    r2 = float(fit.rvalue**2) if np.isfinite(fit.rvalue) else 1.0
    return FitReport(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        r_squared=min(r2, 1.0),
        window=(float(eps.min()), float(eps.max())),
        p=float(p),
        n_used=len(usable),
        n_censored=n_censored,
        log_log=log_log,
    )


def extension_exponent(fitA: FitReport, fitB: FitReport) -> float:
    """Measured R = |slope_B| - |slope_A|."""
    if fitA.p != fitB.p:
        raise ValueError(f"fits belong to different p ({fitA.p} and {fitB.p})")
    return abs(fitB.slope) - abs(fitA.slope)


@dataclass(frozen=True)
class ApproximationCurve:
    """Distance of u(t) from the linear part d_t S(t) eps f, up to T1 = eps^{1-p}.

    ``error`` is the L^1 plus L^p norm of the difference; ``end_norm`` is
    ||u||_{W^{1,1}} + ||u||_{W^{1,p}} + ||u_t||_{L^1} + ||u_t||_{L^p} at T1.
    """

    times: np.ndarray
    error: np.ndarray
    t1: float
    end_norm: float
    truncated: bool


def approximation_error_curve(
    p: float,
    eps: float,
    profile: GridFunction,
    n_samples: int = 21,
    dt: float | None = None,
    nonlinear: bool = True,
) -> ApproximationCurve:
    """Class-B run with the uniform finite-difference solver at dt = dx."""
    _check_p(p)
    t1 = eps ** (1.0 - p)
    L = domain_half_width(t1, support_radius(profile))
    f = extend(profile, L)
    h = f.h
    dt = h if dt is None else dt
    data = DataClass.build("B", eps, f)
    sample_t = np.linspace(0.0, t1, n_samples)
    store = sample_t[1] - sample_t[0] if n_samples > 1 else t1
    spec = ProblemSpec(p, data.f0, data.f1, t1, dt, nonlinear=nonlinear, store_dt=store)
    traj = solve_fdtd(spec)
    times, errors = [], []
    for t in sample_t:
        if traj.states[-1].time < t - 0.5 * dt:
            break
        st = traj.state_at(t)
        diff = st.u.values - apply_dS("t", st.time, data.f0).values
        times.append(st.time)
        errors.append(lq_norm(diff, h, 1) + lq_norm(diff, h, p))
    last = traj.final
    truncated = traj.blew_up or last.time < t1 - 0.5 * dt
    n_u = norms(last.u, p)
    end_norm = n_u.w11 + n_u.w1p + lq_norm(last.ut.values, h, 1) + lq_norm(last.ut.values, h, p)
    return ApproximationCurve(
        times=np.array(times), error=np.array(errors), t1=t1, end_norm=end_norm, truncated=truncated
    )
