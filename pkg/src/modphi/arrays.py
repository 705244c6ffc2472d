"""Logarithmic means of triangular arrays and the gamma example.

Row ``n`` of the array holds ``n`` i.i.d. copies of a centered, unit-variance
variable with law ``mu_n``; the logarithmic mean is
``Z_N = sum_{n<=N} (X_1^n + ... + X_n^n) / n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .infdiv import DensityPart, Integrability, LevyMeasure, Truncation, kappa, limiting_psi
from .modconv import shift_parameters

__all__ = [
    "BranchError",
    "RowDistribution",
    "HarmonicLadder",
    "harmonic_number",
    "normal_row",
    "centered_gamma_row",
    "centered_poisson_row",
    "two_point_row",
    "ROW_FAMILIES",
    "log_mean_log_cf",
    "log_mean_cf_exact",
    "sample_log_mean",
    "gamma_example_log_cf",
    "gamma_example_cf",
    "renormalized_gamma_example",
    "aggregate_levy_limit",
    "gamma_limit_levy_measure",
    "aggregate_third_moment",
    "aggregate_limit_function",
    "regular_sampler",
]

_TRACK_STEPS = 32


class BranchError(ArithmeticError):
    """A characteristic-function factor came too close to 0 to take its log."""


@dataclass(frozen=True)
class RowDistribution:
    """Law of one triangular-array entry.

    ``cf`` is vectorized in ``u``; ``sampler(rng, size)`` draws entries and
    ``sum_sampler(rng, n, size)``, when given, draws row sums of ``n``
    entries directly. ``moments`` holds ``(E X, E X^2, E X^3)`` and
    ``abs_moments`` holds ``(E|X|^2, E|X|^3)``.
    """

    name: str
    cf: Callable
    sampler: Callable
    moments: tuple
    abs_moments: tuple
    sum_sampler: Optional[Callable] = None
    levy: Optional[LevyMeasure] = None
    sigma: float = 0.0

    @property
    def third_abs_moment(self):
        return self.abs_moments[1]

    def check_normalization(self, step=1e-4, tol=1e-6):
        """Mean 0 and variance 1, read off finite differences of the cf at 0."""
        c_plus, c_minus = self.cf(np.array(step)), self.cf(np.array(-step))
        mean = ((c_plus - c_minus) / (2j * step)).real
        var = -((c_plus - 2.0 + c_minus) / step ** 2).real
        return abs(mean) <= tol and abs(var - 1.0) <= tol

    def sample_sum(self, rng, n, size):
        if self.sum_sampler is not None:
            return self.sum_sampler(rng, n, size)
        return self.sampler(rng, (size, n)).sum(axis=1)


@dataclass(frozen=True)
class HarmonicLadder:
    N: int
    H_N: float

    @classmethod
    def of(cls, N):
        return cls(int(N), harmonic_number(N))


def harmonic_number(N):
    """``H_N = sum_{n<=N} 1/n`` by exactly rounded summation."""
    return math.fsum(1.0 / n for n in range(1, int(N) + 1))


def normal_row():
    return RowDistribution(
        "normal",
        cf=lambda u: np.exp(-0.5 * np.asarray(u, dtype=float) ** 2) + 0j,
        sampler=lambda rng, size: rng.standard_normal(size),
        moments=(0.0, 1.0, 0.0),
        abs_moments=(1.0, 2.0 * math.sqrt(2.0 / math.pi)),
        sum_sampler=lambda rng, n, size: math.sqrt(n) * rng.standard_normal(size),
        levy=LevyMeasure(),
        sigma=1.0,
    )


def _gamma_row_density(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x) / x


def centered_gamma_row():
    """``Y - 1`` with ``Y`` unit exponential."""
    def cf(u):
        u = np.asarray(u, dtype=float)
        return np.exp(-1j * u) / (1.0 - 1j * u)

    return RowDistribution(
        "gamma",
        cf=cf,
        sampler=lambda rng, size: rng.standard_exponential(size) - 1.0,
        moments=(0.0, 1.0, 2.0),
        abs_moments=(1.0, 12.0 / math.e - 2.0),
        sum_sampler=lambda rng, n, size: rng.standard_gamma(n, size) - n,
        levy=LevyMeasure(density=DensityPart(_gamma_row_density, 0.0, np.inf, Integrability.X2_MIN_1)),
    )


def centered_poisson_row():
    """``P - 1`` with ``P`` Poisson of mean 1."""
    ks = np.arange(0, 60)
    pk = stats.poisson.pmf(ks, 1.0)
    abs3 = float(np.sum(pk * np.abs(ks - 1.0) ** 3))

    def cf(u):
        u = np.asarray(u, dtype=float)
        return np.exp(np.expm1(1j * u) - 1j * u)

    return RowDistribution(
        "poisson",
        cf=cf,
        sampler=lambda rng, size: rng.poisson(1.0, size) - 1.0,
        moments=(0.0, 1.0, 1.0),
        abs_moments=(1.0, abs3),
        sum_sampler=lambda rng, n, size: rng.poisson(float(n), size) - float(n),
        levy=LevyMeasure(atoms=((1.0, 1.0),)),
    )


def two_point_row():
    """Symmetric ``+-1``."""
    return RowDistribution(
        "two_point",
        cf=lambda u: np.cos(np.asarray(u, dtype=float)) + 0j,
        sampler=lambda rng, size: 2.0 * rng.integers(0, 2, size) - 1.0,
        moments=(0.0, 1.0, 0.0),
        abs_moments=(1.0, 1.0),
        sum_sampler=lambda rng, n, size: 2.0 * rng.binomial(n, 0.5, size) - float(n),
    )


ROW_FAMILIES = {
    "normal": normal_row,
    "gamma": centered_gamma_row,
    "poisson": centered_poisson_row,
    "two_point": two_point_row,
}


def _row_for(rows, n):
    if isinstance(rows, RowDistribution):
        return rows
    if callable(rows):
        return rows(n)
    return rows[n - 1]


def _tracked_log(cf, t):
    """Continuous log of ``s -> cf(s t)`` on ``[0, 1]`` evaluated at ``s = 1``."""
    s = np.linspace(0.0, 1.0, _TRACK_STEPS + 1)
    vals = cf(np.multiply.outer(s, np.asarray(t, dtype=float)))
    if np.any(np.abs(vals) <= 1e-14):
        raise BranchError("characteristic function vanishes along the tracking path")
    steps = np.log(vals[1:] / vals[:-1])
    return np.sum(steps, axis=0)


def log_mean_log_cf(rows, N, u):
    """Logarithm of ``E[e^{iuZ_N}] = prod_{n<=N} phi_n(u/n)^n``.

    ``rows`` is one :class:`RowDistribution` shared by every row, a list
    indexed by ``n - 1`` or a callable ``n -> RowDistribution``. Factors with
    ``n >= 2|u|`` use the principal logarithm; the others are tracked
    continuously from ``u = 0``.
    """
    N = int(N)
    if N < 1:
        raise ValueError("N must be >= 1")
    u = np.asarray(u, dtype=float)
    flat = u.ravel()
    total = np.zeros(flat.shape, dtype=complex)
    if isinstance(rows, RowDistribution):
        groups = [(rows, np.arange(1, N + 1, dtype=float))]
    else:
        groups = [(_row_for(rows, n), np.array([float(n)])) for n in range(1, N + 1)]
    for row, ns in groups:
        args = np.divide.outer(flat, ns)
        vals = row.cf(args)
        if np.any(np.abs(vals) <= 1e-14):
            raise BranchError("characteristic-function factor too close to 0")
        logs = np.log(vals)
        near = ns[None, :] < 2.0 * np.abs(flat)[:, None]
        if np.any(near):
            logs[near] = _tracked_log(row.cf, args[near])
        total += np.sum(ns[None, :] * logs, axis=1)
    out = total.reshape(u.shape)
    return out[()] if out.ndim == 0 else out


def log_mean_cf_exact(rows, N, u):
    """``E[e^{iuZ_N}]`` as an exact product, accumulated in log space."""
    return np.exp(log_mean_log_cf(rows, N, u))


def sample_log_mean(rows, N, rng, size=None):
    """Draws of ``Z_N``; one float when ``size`` is None."""
    n_draw = 1 if size is None else int(size)
    z = np.zeros(n_draw)
    for n in range(1, int(N) + 1):
        z += _row_for(rows, n).sample_sum(rng, n, n_draw) / n
    return float(z[0]) if size is None else z


def gamma_example_log_cf(N, u):
    """``log E[exp(iu(sum_n gamma_n / n - N))] = -sum_n n (log(1 - iu/n) + iu/n)``."""
    u = np.asarray(u, dtype=float)
    ns = np.arange(1, int(N) + 1, dtype=float)
    a = np.divide.outer(-1j * u, ns)
    out = -np.sum(ns * (np.log1p(a) - a), axis=-1)
    return out[()] if np.ndim(out) == 0 else out


def gamma_example_cf(N, u):
    """Characteristic function of ``sum_{n<=N} gamma_n / n - N``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return np.exp(gamma_example_log_cf(N, u))


def renormalized_gamma_example(N, u, normalization="harmonic"):
    """``e^{u^2 gamma_N / 2} E[e^{iuZ_N}]`` with ``gamma_N = H_N`` or ``log N``."""
    u = np.asarray(u, dtype=float)
    g = harmonic_number(N) if normalization == "harmonic" else math.log(N)
    return np.exp(gamma_example_log_cf(N, u) + 0.5 * g * u * u)


def _rescaled_density(parts):
    """Density ``y -> sum_n n^2 f_n(n y)`` of ``sum_n n nu_n(n .)``."""
    def density(y):
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape)
        for n, part in parts:
            x = n * y
            inside = (x > part.a) & (x < part.b)
            if np.any(inside):
                out[inside] += n * n * part.density(x[inside])
        return out
    return density


def aggregate_levy_limit(nus):
    """Measure ``sum_{n<=N} n nu'_n`` with ``nu'_n(A) = nu_n({x : x/n in A})``.

    ``nus[n-1]`` is the Levy measure of row ``n``. Atoms ``(x, w)`` of row
    ``n`` become ``(x/n, n w)``.
    """
    atoms = []
    parts = []
    for n, nu in enumerate(nus, start=1):
        atoms.extend((x / n, n * w) for x, w in nu.atoms)
        if nu.density is not None:
            parts.append((n, nu.density))
    density = None
    if parts:
        lo = min(p.a / n for n, p in parts)
        hi = max(p.b / n for n, p in parts)
        if lo < 0.0 < hi:
            raise ValueError("two-sided densities are not supported in the aggregate")
        density = DensityPart(_rescaled_density(parts), lo, hi, Integrability.ABS_X3)
    return LevyMeasure(tuple(atoms), density)


def _gamma_limit_density(y):
    y = np.asarray(y, dtype=float)
    half = 0.5 * y
    with np.errstate(over="ignore"):
        return 1.0 / (4.0 * y * np.sinh(half) ** 2)


def gamma_limit_levy_measure():
    """``sum_{n>=1} n e^{-ny} / y dy = dy / (4 y sinh(y/2)^2)`` on ``(0, inf)``.

    The ``N -> inf`` limit of :func:`aggregate_levy_limit` for gamma rows.
    """
    return LevyMeasure(density=DensityPart(_gamma_limit_density, 0.0, np.inf, Integrability.ABS_X3))


def aggregate_third_moment(nus):
    """``sum_n n^-2 nu_n(|x|^3)``, which equals ``nu(|x|^3)`` for the aggregate."""
    return math.fsum(nu.real_integral(lambda x: np.abs(x) ** 3) / n ** 2
                     for n, nu in enumerate(nus, start=1))


def aggregate_limit_function(nu, u, h=Truncation.CANONICAL_TRAPEZOID):
    """Limit for parameters ``(0, nu(x^2))`` built from the kappa representation.

    ``limiting_psi`` gives the limit for the truncation-based parameters
    ``(nu(h - x), nu(h^2))``; the shift to ``(0, nu(x^2))`` is
    ``beta = nu(h - x)``, ``gamma = nu(h^2 - x^2)``.
    """
    h = Truncation(h)
    k = kappa(nu, h)
    beta = nu.real_integral(lambda x: h(x) - x)
    gamma = nu.real_integral(lambda x: h(x) ** 2 - x * x)
    u = np.asarray(u, dtype=float)
    psi = np.array([limiting_psi(k, nu, h, float(v)) for v in u.ravel()]).reshape(u.shape)
    out = shift_parameters(np.exp(psi), u, beta, gamma)
    return out[()] if np.ndim(out) == 0 else out


def regular_sampler(base_sampler, beta_N, gamma_N, rng, size=None):
    """Draws of ``X + G`` with ``G ~ N(beta_N, gamma_N)`` independent of ``X``."""
    if gamma_N < 0:
        raise ValueError("gamma_N must be >= 0")
    x = np.asarray(base_sampler(rng, size), dtype=float)
    out = x + beta_N + math.sqrt(gamma_N) * rng.standard_normal(x.shape)
    return float(out) if size is None else out
