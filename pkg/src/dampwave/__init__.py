"""Numerical laboratory for the 1D damped wave equation u_tt + u_t - u_xx = |u|^p.

Exact Bessel-kernel propagator, three independent nonlinear solvers and a
lifespan experiment harness.
"""

__version__ = "0.1.0"
