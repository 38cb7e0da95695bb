"""Nonlinear solvers, blowup detection and the non-positive regime checks."""

from .base import Checkpoint, ProblemSpec, SolverState, Status, Trajectory
from .blowup import LifespanEstimate, detect_blowup
from .checks import AprioriReport, check_hypotheses, sign_and_apriori_check, upper_envelope
from .dalembert import solve_dalembert
from .fdtd import AdaptiveConfig, resume_refined, solve_fdtd
from .mild import solve_mild

SOLVERS = {"mild": solve_mild, "dalembert": solve_dalembert, "fdtd": solve_fdtd}

__all__ = [
    "AdaptiveConfig",
    "AprioriReport",
    "Checkpoint",
    "LifespanEstimate",
    "ProblemSpec",
    "SOLVERS",
    "SolverState",
    "Status",
    "Trajectory",
    "check_hypotheses",
    "detect_blowup",
    "resume_refined",
    "sign_and_apriori_check",
    "solve_dalembert",
    "solve_fdtd",
    "solve_mild",
    "upper_envelope",
]
