"""Residual checks of the kernel calculus, shared by the command line and the tests."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import KERNEL_IDS, verify_envelope
from .numerics import bump, grid_with_spacing, integrate
from .semigroup import DERIVATIVES, apply_dS, apply_S, strans_residual


@dataclass(frozen=True)
class Residual:
    check: str
    parameter: float
    value: float
    tolerance: float

    @property
    def ok(self) -> bool:
        return math.isfinite(self.value) and self.value <= self.tolerance


def decomposition_errors(t_values=(0.5, 1.0, 5.0), h=0.0025, d=1e-3, radius=2.0, tol=1e-4):
    """Relative sup error between finite differences of S(t) f and the decompositions.

    Spatial shifts are applied to the sampled profile exactly, so the x
    differences do not interpolate.
    """
    L = max(t_values) + d + radius + 6.0 * math.sqrt(2.0 * max(t_values)) + 1.0
    g = grid_with_spacing(L, h)

    def S(t, shift=0.0):
        return apply_S(t, g.sample(lambda x: bump(x + shift, radius=radius))).values

    f = g.sample(lambda x: bump(x, radius=radius))
    out = []
    for t in t_values:
        s0, sp, sm = S(t), S(t + d), S(t - d)
        fd = {
            "x": (S(t, d) - S(t, -d)) / (2 * d),
            "t": (sp - sm) / (2 * d),
            "tx": (S(t + d, d) - S(t + d, -d) - S(t - d, d) + S(t - d, -d)) / (4 * d * d),
            "tt": (sp - 2 * s0 + sm) / (d * d),
        }
        for which in DERIVATIVES:
            ref = apply_dS(which, t, f).values
            err = float(np.max(np.abs(fd[which] - ref)) / np.max(np.abs(ref)))
            out.append(Residual(f"d{which} S", t, err, tol))
    return out


def mass_identity_errors(t_values=(0.1, 1.0, 5.0, 20.0), h=0.01, tol=1e-6, center=0.0, width=1.0):
    """|int S(t) h - (1 - e^{-t}) int h| / |int h| for a Gaussian h."""
    L = max(t_values) + abs(center) + 10.0 * width + 6.0 * math.sqrt(2.0 * max(t_values))
    g = grid_with_spacing(L, h)
    f = g.sample(lambda x: np.exp(-(((x - center) / width) ** 2)))
    mass = integrate(f)
    out = []
    for t in t_values:
        err = abs(integrate(apply_S(t, f)) - (1.0 - math.exp(-t)) * mass) / abs(mass)
        out.append(Residual("mass identity", t, err, tol))
    return out


def strans_errors(t=1.0, h=0.01, tol=1e-4, width=1.0):
    """Backward light-cone identity residual at h and h/2 plus the observed order."""
    L = t + 12.0 * width
    res = []
    for step in (h, 0.5 * h):
        g = grid_with_spacing(L, step)
        f = g.sample(lambda x: np.exp(-((x / width) ** 2)))
        res.append(strans_residual(t, f, step) / float(np.max(np.abs(f.values))))
    order = math.log2(res[0] / res[1]) if res[1] > 0 else math.inf
    return [
        Residual("backward cone identity", h, res[0], tol),
        Residual("backward cone order", h, -order, -1.8),
    ]


def envelope_residuals(t_samples=(0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0), c_max=10.0):
    """Fitted envelope constants; each must be finite and below ``c_max``."""
    out = []
    for j in KERNEL_IDS:
        fit = verify_envelope(j, t_samples)
        out.append(Residual(f"envelope K{j}", float(j), fit.fitted_C, c_max))
    return out


def verify_suite(h_kernel=0.0025, h_identity=0.01, seed=0):
    """All residuals; ``seed`` moves the Gaussian of the mass identity."""
    rng = np.random.default_rng(seed)
    center = float(rng.uniform(-1.0, 1.0))
    width = float(rng.uniform(0.5, 1.5))
    return (
        decomposition_errors(h=h_kernel)
        + mass_identity_errors(h=h_identity, center=center, width=width)
        + strans_errors(h=h_identity)
        + envelope_residuals()
    )
