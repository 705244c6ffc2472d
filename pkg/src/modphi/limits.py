"""Closed-form limiting functions.

Each evaluator takes real ``u`` (scalar or array) unless stated otherwise,
and returns complex values. Euler products are accumulated as sums of
principal logarithms of their local factors; a local factor equal to zero
makes the whole product zero.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .primes import primes_up_to
from .special import (
    EULER_GAMMA,
    QuadratureSpec,
    exp_remainder,
    hyp2f1_diag_many,
    integrate,
    ln_gamma,
    log_barnes_g,
    rgamma,
)

__all__ = [
    "DEFAULT_PRIME_CUTOFF",
    "GammaMethod",
    "LimitId",
    "LimitingFunction",
    "rmt_factor_M",
    "arithmetic_factor_A",
    "sp_factor_MSp",
    "sp_factor_ks_form",
    "phi_gamma_example",
    "phi_omega",
    "phi1",
    "phi2",
]

DEFAULT_PRIME_CUTOFF = 10 ** 6


def _as_complex(x):
    return np.asarray(x, dtype=complex)


def _unwrap(a):
    return a[()] if a.ndim == 0 else a


def _log_product(logs, zero_mask, axis=-1):
    """exp(sum(logs)) with any exact-zero factor forcing the product to 0."""
    logs = np.where(zero_mask, 0.0, logs)
    out = np.exp(np.sum(logs, axis=axis))
    return np.where(np.any(zero_mask, axis=axis), 0.0, out)


def rmt_factor_M(lam):
    """Random-matrix factor G(1+lam)^2 / G(1+2 lam)."""
    lam = _as_complex(lam)
    out = np.exp(2.0 * np.asarray(log_barnes_g(1.0 + lam)) - np.asarray(log_barnes_g(1.0 + 2.0 * lam)))
    return _unwrap(out)


def arithmetic_factor_A(lam, prime_cutoff=DEFAULT_PRIME_CUTOFF):
    """Partial Euler product of the arithmetic factor over ``p <= prime_cutoff``.

    The local factor is ``(1 - 1/p)^(lam^2) * 2F1(lam, lam; 1; 1/p)``.
    """
    if prime_cutoff < 2:
        raise ValueError("prime_cutoff must be >= 2")
    ps = primes_up_to(int(prime_cutoff)).astype(float)
    x = 1.0 / ps
    lam_arr = _as_complex(lam)
    out = np.empty(lam_arr.shape, dtype=complex)
    for idx, lv in np.ndenumerate(lam_arr):
        local = hyp2f1_diag_many(lv, x)
        zero = local == 0
        logs = lv * lv * np.log1p(-x) + np.log(np.where(zero, 1.0, local))
        out[idx] = _log_product(logs, zero)
    return _unwrap(out)


def sp_factor_MSp(lam):
    """Symplectic factor 2^(-lam^2/2) (pi/2)^(lam/2) G(3/2) / G(3/2+lam)."""
    lam = _as_complex(lam)
    log_val = (-0.5 * lam * lam * np.log(2.0) + 0.5 * lam * np.log(np.pi / 2.0)
               + log_barnes_g(1.5) - np.asarray(log_barnes_g(1.5 + lam)))
    return _unwrap(np.exp(log_val))


def sp_factor_ks_form(lam):
    """Symplectic moment limit written as 2^(lam^2/2) G(1+lam) sqrt(Gamma(1+lam))
    / sqrt(G(1+2lam) Gamma(1+2lam)).

    The square roots are taken as ``exp(log(.)/2)`` with the logarithms
    continued from ``lam = 0``, which is the branch on which this expression
    equals :func:`sp_factor_MSp`.
    """
    lam = _as_complex(lam)
    log_val = (0.5 * lam * lam * np.log(2.0) + np.asarray(log_barnes_g(1.0 + lam))
               + 0.5 * np.asarray(ln_gamma(1.0 + lam))
               - 0.5 * (np.asarray(log_barnes_g(1.0 + 2.0 * lam)) + np.asarray(ln_gamma(1.0 + 2.0 * lam))))
    return _unwrap(np.exp(log_val))


class GammaMethod(enum.Enum):
    LK_INTEGRAL = "lk"
    BARNES_CLOSED_FORM = "barnes"


def _gamma_lk_integrand(u):
    # (e^{iux} - 1 - iux + u^2 x^2 / 2) / (x (2 sinh(x/2))^2), written as
    # [remainder / x^3] / sinhc(x/2)^2 so the x -> 0 limit is exact.
    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        pos = x > 0
        xp = x[pos]
        half = 0.5 * xp
        with np.errstate(over="ignore"):
            sinhc = np.where(half < 1e-8, 1.0, np.sinh(half) / np.where(half == 0, 1.0, half))
        out[pos] = exp_remainder(1j * u * xp, 3) / xp ** 3 / sinhc ** 2
        return out
    return f


def _gamma_lk_exponent(u):
    """The integral term in the L-K type representation of the gamma limit."""
    if u == 0.0:
        return 0j
    f = _gamma_lk_integrand(u)
    head, _ = integrate(f, QuadratureSpec(0.0, 40.0, abs_tol=1e-14, rel_tol=1e-13, max_subdivisions=5000),
                        points=(0.5, 1.0, 2.0, 5.0, 10.0, 20.0))
    tail, _ = integrate(f, QuadratureSpec(40.0, np.inf, abs_tol=1e-16, rel_tol=1e-12))
    return head + tail


def phi_gamma_example(u, method=GammaMethod.LK_INTEGRAL, normalization="harmonic"):
    """Limiting function of ``sum_n gamma_n / n - N`` (gamma_n of index n).

    ``normalization`` picks the Gaussian parameters: ``"harmonic"`` for
    ``(0, H_N)`` and ``"log"`` for ``(0, log N)``. The two limits differ by
    the factor ``exp(-euler_gamma u^2 / 2)``.

    ``LK_INTEGRAL`` integrates the Levy-Khintchine type exponent against
    ``dx / (x (2 sinh(x/2))^2)``; ``BARNES_CLOSED_FORM`` evaluates
    ``1 / (A^z exp(z^2/2) G(1+z))`` at ``z = -iu`` with ``A = sqrt(e / 2pi)``.
    """
    method = GammaMethod(method)
    if normalization not in ("harmonic", "log"):
        raise ValueError("normalization must be 'harmonic' or 'log'")
    u_arr = np.asarray(u, dtype=float)
    out = np.empty(u_arr.shape, dtype=complex)
    for idx, uv in np.ndenumerate(u_arr):
        uv = float(uv)
        if method is GammaMethod.LK_INTEGRAL:
            # the bare integral is the (0, H_N) limit
            log_phi = _gamma_lk_exponent(uv)
            if normalization == "log":
                log_phi -= 0.5 * EULER_GAMMA * uv * uv
        else:
            z = -1j * uv
            log_a = 0.5 * (1.0 - np.log(2.0 * np.pi))
            log_phi = -(z * log_a + 0.5 * z * z + log_barnes_g(1.0 + z))
            if normalization == "harmonic":
                log_phi += 0.5 * EULER_GAMMA * uv * uv
        out[idx] = np.exp(log_phi)
    return _unwrap(out)


def phi1(u):
    """Permutation-cycle factor 1 / Gamma(e^{iu} + 1)."""
    return rgamma(np.exp(1j * np.asarray(u, dtype=float)) + 1.0)


def _prime_grid(u, prime_cutoff):
    if prime_cutoff < 2:
        raise ValueError("prime_cutoff must be >= 2")
    ps = primes_up_to(int(prime_cutoff)).astype(float)
    z = np.exp(1j * np.asarray(u, dtype=float))
    return z[..., None], ps


def phi2(u, prime_cutoff=DEFAULT_PRIME_CUTOFF):
    """Compensated prime-model product prod (1-1/p)^(e^{iu}-1) (1 - 1/p + e^{iu}/p)."""
    z, ps = _prime_grid(u, prime_cutoff)
    local = 1.0 - 1.0 / ps + z / ps
    zero = local == 0
    logs = (z - 1.0) * np.log1p(-1.0 / ps) + np.log(np.where(zero, 1.0, local))
    return _unwrap(np.asarray(_log_product(logs, zero)))


def phi_omega(u, prime_cutoff=DEFAULT_PRIME_CUTOFF, factored=True):
    """Mod-Poisson limiting function of omega(n) - 1.

    With ``factored`` the value is ``phi1(u) * phi2(u)``; otherwise the
    product ``1/Gamma(e^{iu}+1) prod (1-1/p)^{e^{iu}} (1 + e^{iu}/(p-1))`` is
    evaluated as written.
    """
    if factored:
        return phi1(u) * phi2(u, prime_cutoff)
    z, ps = _prime_grid(u, prime_cutoff)
    local = 1.0 + z / (ps - 1.0)
    zero = local == 0
    logs = z * np.log1p(-1.0 / ps) + np.log(np.where(zero, 1.0, local))
    euler = _log_product(logs, zero)
    return _unwrap(np.asarray(rgamma(z[..., 0] + 1.0) * euler))


class LimitId(enum.Enum):
    RMT_M = "M"
    ARITH_A = "A"
    SP_MSP = "MSp"
    GAMMA_EXAMPLE = "gamma"
    OMEGA_PHI = "omega"
    OMEGA_PHI1 = "omega1"
    OMEGA_PHI2 = "omega2"


@dataclass(frozen=True)
class LimitingFunction:
    """A limiting function u -> Phi(u) identified by name plus parameters.

    ``params`` may carry ``prime_cutoff`` (for A and the omega products) and
    ``normalization`` (for the gamma example).
    """

    id: LimitId
    params: dict = field(default_factory=dict)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        cutoff = int(self.params.get("prime_cutoff", DEFAULT_PRIME_CUTOFF))
        if self.id is LimitId.RMT_M:
            return rmt_factor_M(1j * u)
        if self.id is LimitId.ARITH_A:
            return arithmetic_factor_A(1j * u, cutoff)
        if self.id is LimitId.SP_MSP:
            return sp_factor_MSp(1j * u)
        if self.id is LimitId.GAMMA_EXAMPLE:
            return phi_gamma_example(u, self.params.get("method", GammaMethod.LK_INTEGRAL),
                                     self.params.get("normalization", "harmonic"))
        if self.id is LimitId.OMEGA_PHI:
            return phi_omega(u, cutoff)
        if self.id is LimitId.OMEGA_PHI1:
            return phi1(u)
        return phi2(u, cutoff)

