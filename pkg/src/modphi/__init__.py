"""Numerical laboratory for mod-Gaussian and mod-Poisson convergence.

Submodules
----------
special
    Log-Gamma, Barnes G, diagonal 2F1, adaptive Gauss-Kronrod quadrature.
limits
    Closed-form limiting functions (random-matrix, arithmetic, symplectic,
    gamma example, omega).
infdiv
    Generating triplets, Levy-Khintchine exponents and cumulants.
modconv
    Renormalization, parameter shifts, empirical cfs and convergence reports.
arrays
    Logarithmic means of triangular arrays and the gamma example.
rmt
    Haar unitary and USp(2g) sampling, Keating-Snaith moment estimates.
arith
    Omega sieve, Sathe-Selberg counts and the probabilistic models.
fields
    Hyperelliptic curves over finite fields and their L-polynomials.
cli
    Command-line entry point ``modphi``.
"""
from .limits import (
    LimitId,
    LimitingFunction,
    arithmetic_factor_A,
    phi1,
    phi2,
    phi_gamma_example,
    phi_omega,
    rmt_factor_M,
    sp_factor_MSp,
    sp_factor_ks_form,
)
from .modconv import (
    CharFnSequence,
    EvaluationGrid,
    ModParameters,
    Mode,
    Verdict,
    convergence_report,
    empirical_cf,
    renormalize,
    shift_parameters,
)
from .special import barnes_g, ln_gamma, log_barnes_g

__version__ = "0.1.0"

__all__ = [
    "LimitId",
    "LimitingFunction",
    "arithmetic_factor_A",
    "phi1",
    "phi2",
    "phi_gamma_example",
    "phi_omega",
    "rmt_factor_M",
    "sp_factor_MSp",
    "sp_factor_ks_form",
    "CharFnSequence",
    "EvaluationGrid",
    "ModParameters",
    "Mode",
    "Verdict",
    "convergence_report",
    "empirical_cf",
    "renormalize",
    "shift_parameters",
    "barnes_g",
    "ln_gamma",
    "log_barnes_g",
]
