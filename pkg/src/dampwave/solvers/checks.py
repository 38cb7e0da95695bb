"""Sign preservation and the two-sided a priori envelope for non-positive data.

For u0 <= 0 and u1 + u0/2 <= 0 the solution stays non-positive and obeys

    S(t)(u0 + u1) + d_t S(t) u0  <=  u(t)  <=  e^{-t/2} (u0(x-t) + u0(x+t)) / 2
                                              + e^{-t/2}/2 int_{x-t}^{x+t} (u1 + u0/2).

The lower bound is the linear solution; the upper bound drops the 1/4
coupling from the d'Alembert form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..kernels import box_integral
from ..numerics import lq_norm, norms, translate, weighted_norm_sum
from ..semigroup import FreeSolutionInputs, free_solution
from .base import Trajectory


@dataclass
class Violation:
    kind: str
    time: float
    x: float
    amount: float


@dataclass
class AprioriReport:
    hypotheses_ok: bool
    message: str = ""
    max_value: float = math.nan
    max_lower_gap: float = math.nan
    max_upper_gap: float = math.nan
    eps1: float = math.nan
    fitted_A: float = math.nan
    times: list = field(default_factory=list)
    y_values: list = field(default_factory=list)
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.hypotheses_ok and not self.violations


def upper_envelope(u0, u1, t: float) -> np.ndarray:
    e = math.exp(-0.5 * t)
    return 0.5 * e * (translate(u0, t) + translate(u0, -t)) + 0.5 * e * box_integral(u1 + 0.5 * u0, t)


def data_size(u0, u1, p: float) -> float:
    """||u0||_{W^{1,1} and W^{1,p}} + ||u1||_{L^1 and L^p}."""
    n0 = norms(u0, p)
    return n0.w11 + n0.w1p + lq_norm(u1.values, u1.h, 1) + lq_norm(u1.values, u1.h, p)


def check_hypotheses(u0, u1) -> tuple[bool, str]:
    """u0 <= 0 and u1 + u0/2 <= 0 at every node."""
    bad0 = np.nonzero(u0.values > 0)[0]
    bad1 = np.nonzero(u1.values + 0.5 * u0.values > 0)[0]
    if bad0.size:
        return False, f"hypothesis violated: u0 > 0 at x = {u0.x[bad0[0]]:.6g}"
    if bad1.size:
        return False, f"hypothesis violated: u1 + u0/2 > 0 at x = {u0.x[bad1[0]]:.6g}"
    return True, ""


def sign_and_apriori_check(
    traj: Trajectory,
    sign_tol: float = 1e-8,
    envelope_tol: float = 1e-3,
    t1: float = 0.0,
) -> AprioriReport:
    """Check non-positivity, the envelope and the second-phase norm at every stored time.

    ``envelope_tol`` is relative to max |u0| + max |u1|. ``fitted_A`` is the
    largest second-phase norm divided by the data size.
    """
    spec = traj.problem
    u0, u1 = spec.u0, spec.u1
    ok, message = check_hypotheses(u0, u1)
    if not ok:
        return AprioriReport(hypotheses_ok=False, message=message)
    scale = float(np.max(np.abs(u0.values)) + np.max(np.abs(u1.values)))
    tol = envelope_tol * scale
    report = AprioriReport(hypotheses_ok=True, eps1=data_size(u0, u1, spec.p))
    report.max_value = report.max_lower_gap = report.max_upper_gap = -math.inf
    running = 0.0
    for st in traj.states:
        u = st.u.values
        x = st.u.x
        i = int(np.argmax(u))
        report.max_value = max(report.max_value, float(u[i]))
        if u[i] > sign_tol:
            report.violations.append(Violation("sign", st.time, float(x[i]), float(u[i])))
        if st.time > 0:
            lower, _ = free_solution(FreeSolutionInputs(u0, u1, st.time))
            upper = upper_envelope(u0, u1, st.time)
            gap_lo = lower.values - u
            gap_hi = u - upper
            j, k = int(np.argmax(gap_lo)), int(np.argmax(gap_hi))
            report.max_lower_gap = max(report.max_lower_gap, float(gap_lo[j]))
            report.max_upper_gap = max(report.max_upper_gap, float(gap_hi[k]))
            if gap_lo[j] > tol:
                report.violations.append(Violation("lower", st.time, float(x[j]), float(gap_lo[j])))
            if gap_hi[k] > tol:
                report.violations.append(Violation("upper", st.time, float(x[k]), float(gap_hi[k])))
        if st.time >= t1:
            running = max(running, weighted_norm_sum(st.u, st.ut, st.time - t1, spec.p, 0.0))
            report.times.append(st.time)
            report.y_values.append(running)
    if report.y_values and report.eps1 > 0:
        report.fitted_A = report.y_values[-1] / report.eps1
    return report
