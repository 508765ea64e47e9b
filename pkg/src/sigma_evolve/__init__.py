"""Numerical laboratory for structurally damped sigma-evolution equations.

The linear model is  u_tt + (-Delta)^sigma u + mu (-Delta)^delta u_t = 0
with sigma >= 1 and delta in (sigma/2, sigma]; the semilinear variants carry
power nonlinearities |u|^p or |u_t|^p.  The package evaluates the exact
Fourier multipliers of the solution operator, measures kernel and solution
decay on periodic grids, checks admissible nonlinearity exponents with exact
rational arithmetic, and runs Duhamel time stepping for the semilinear models.
"""

from .model import ModelParams, NormSetup, Rational, Regime, kappa1, kappa2

__all__ = [
    "ModelParams",
    "NormSetup",
    "Rational",
    "Regime",
    "kappa1",
    "kappa2",
]

__version__ = "0.1.0"
