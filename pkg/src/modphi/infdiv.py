"""Infinitely divisible laws through their generating triplets.

A :class:`LevyMeasure` is a finite list of atoms plus at most one density
part on an interval that avoids 0. Integrals against the density are split
at ``eps = 1e-6``, at the truncation kinks ``1`` and ``2`` and at ``T = 40``
(mirrored for negative supports), and the unbounded piece goes through the
``t / (1 - t)`` map of :func:`modphi.special.integrate`.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .special import IntegrationError, QuadratureSpec, exp_remainder, integrate

__all__ = [
    "IntegrabilityError",
    "Integrability",
    "Truncation",
    "DensityPart",
    "LevyMeasure",
    "GeneratingTriplet",
    "levy_kernel",
    "levy_exponent",
    "convert_truncation",
    "cumulants_from_triplet",
    "kappa",
    "renormalized_exponent",
    "limiting_psi",
    "gamma_levy_measure",
    "gamma_triplet",
]

EPS = 1e-6
T_SPLIT = 40.0


class IntegrabilityError(ValueError):
    """A measure does not integrate the function it is asked to."""


class Integrability(enum.Enum):
    """Which moment condition a density part is declared to satisfy."""

    X2_MIN_1 = "x^2 ^ 1"
    ABS_X3 = "|x|^3 ^ 1"
    X4_MIN_1 = "x^4 ^ 1"

    def weight(self, x):
        ax = np.abs(x)
        power = {"X2_MIN_1": 2, "ABS_X3": 3, "X4_MIN_1": 4}[self.name]
        return np.minimum(ax ** power, 1.0)


class Truncation(enum.Enum):
    """Truncation functions: bounded, compact support, equal to x near 0."""

    CANONICAL_TRAPEZOID = "trapezoid"
    INDICATOR = "indicator"

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        if self is Truncation.INDICATOR:
            return np.where(ax <= 1.0, x, 0.0)
        return np.where(ax <= 1.0, x, np.where(ax <= 2.0, np.sign(x) * (2.0 - ax), 0.0))


@dataclass(frozen=True)
class DensityPart:
    """Absolutely continuous part ``density(x) dx`` on ``(a, b)``, 0 not inside."""

    density: Callable[[np.ndarray], np.ndarray]
    a: float
    b: float
    integrability: Integrability = Integrability.X2_MIN_1

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("empty density support")
        if self.a < 0.0 < self.b:
            raise ValueError("density support must not contain 0")


def _breakpoints(a, b):
    cands = [EPS, 0.5, 1.0, 2.0, 5.0, T_SPLIT]
    pts = sorted({a, b, *[s * c for c in cands for s in (1.0, -1.0)]})
    return [p for p in pts if a <= p <= b]


def _integrate_density(part, g, abs_tol=1e-15, rel_tol=1e-13, budget=4000):
    """Integral of ``g(x) * density(x)`` over the support of ``part``."""
    def f(x):
        return g(x) * part.density(x)

    pts = _breakpoints(part.a, part.b)
    total = 0j
    for lo, hi in zip(pts[:-1], pts[1:]):
        val, _ = integrate(f, QuadratureSpec(lo, hi, abs_tol, rel_tol, budget))
        total += val
    return total


@dataclass(frozen=True)
class LevyMeasure:
    """Atoms ``(x, w)`` with ``x != 0``, ``w > 0``, plus an optional density.

    The declared integrability of the density part is checked numerically
    at construction.
    """

    atoms: tuple = ()
    density: Optional[DensityPart] = None

    def __post_init__(self):
        atoms = tuple((float(x), float(w)) for x, w in self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for x, w in atoms:
            if x == 0.0:
                raise ValueError("a Levy measure has no mass at 0")
            if not w > 0.0:
                raise ValueError("atom weights must be positive")
        if self.density is not None:
            tag = self.density.integrability
            try:
                val = _integrate_density(self.density, tag.weight, abs_tol=1e-10, rel_tol=1e-8, budget=400)
            except IntegrationError as exc:
                raise IntegrabilityError(f"density does not integrate {tag.value}") from exc
            if not np.isfinite(val):
                raise IntegrabilityError(f"density does not integrate {tag.value}")

    @property
    def is_empty(self):
        return not self.atoms and self.density is None

    def integrate(self, g, **kw):
        """Integral of the vectorized function ``g`` against the measure."""
        total = 0j
        if self.atoms:
            xs = np.array([x for x, _ in self.atoms])
            ws = np.array([w for _, w in self.atoms])
            total += np.sum(ws * np.asarray(g(xs), dtype=complex))
        if self.density is not None:
            total += _integrate_density(self.density, g, **kw)
        return total

    def real_integral(self, g, **kw):
        return float(np.real(self.integrate(g, **kw)))


@dataclass(frozen=True)
class GeneratingTriplet:
    """``(sigma, beta, nu)`` relative to the truncation ``h``."""

    sigma: float = 0.0
    beta: float = 0.0
    nu: LevyMeasure = field(default_factory=LevyMeasure)
    truncation: Truncation = Truncation.CANONICAL_TRAPEZOID

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def levy_kernel(u, x, h, order):
    """``e^{iux} - sum_{j<order} (iu h(x))^j / j!``.

    Where ``h(x) = x`` (``|x| <= 1`` for both truncations) the remainder is
    summed without cancellation.
    """
    x = np.asarray(x, dtype=float)
    hx = h(x)
    out = np.empty(x.shape, dtype=complex)
    inner = np.abs(x) <= 1.0
    out[inner] = exp_remainder(1j * u * x[inner], order)
    xo = x[~inner]
    z = 1j * u * hx[~inner]
    poly = np.zeros(xo.shape, dtype=complex)
    term = np.ones(xo.shape, dtype=complex)
    for j in range(order):
        poly += term
        term = term * z / (j + 1)
    out[~inner] = np.exp(1j * u * xo) - poly
    return out


def levy_exponent(t: GeneratingTriplet, u):
    """Log-characteristic function ``-sigma u^2/2 + i beta u + nu(e^{iux} - 1 - iu h)``."""
    u = float(u)
    if u == 0.0:
        return 0j
    h = t.truncation
    integral = t.nu.integrate(lambda x: levy_kernel(u, x, h, 2))
    return -0.5 * t.sigma * u * u + 1j * t.beta * u + integral


def convert_truncation(t: GeneratingTriplet, h_new: Truncation) -> GeneratingTriplet:
    """Same law, drift re-expressed relative to ``h_new``."""
    h_new = Truncation(h_new)
    if h_new is t.truncation:
        return t
    h_old = t.truncation
    shift = t.nu.real_integral(lambda x: h_new(x) - h_old(x))
    return replace(t, beta=t.beta + shift, truncation=h_new)


def _check_moment(nu: LevyMeasure, n):
    try:
        val = nu.real_integral(lambda x: np.where(np.abs(x) > 1.0, np.abs(x) ** n, 0.0),
                               abs_tol=1e-10, rel_tol=1e-8, budget=400)
    except IntegrationError as exc:
        raise IntegrabilityError(f"nu has no moment of order {n} away from 0") from exc
    if not np.isfinite(val):
        raise IntegrabilityError(f"nu has no moment of order {n} away from 0")


def cumulants_from_triplet(t: GeneratingTriplet, n):
    """Cumulants ``c_1..c_n`` of the law with triplet ``t``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_moment(t.nu, n)
    h = t.truncation
    out = [t.beta + t.nu.real_integral(lambda x: x - h(x))]
    if n >= 2:
        out.append(t.sigma + t.nu.real_integral(lambda x: x * x))
    for k in range(3, n + 1):
        out.append(t.nu.real_integral(lambda x, k=k: x ** k))
    return out


def kappa(nu: LevyMeasure, h: Truncation = Truncation.CANONICAL_TRAPEZOID):
    """``kappa = nu(h^3)``."""
    return nu.real_integral(lambda x: h(x) ** 3)


def renormalized_exponent(t: GeneratingTriplet, beta_N, gamma_N, u, form="in2"):
    """Exponent of ``e^{-iu beta_N + u^2 gamma_N / 2} E[e^{iuZ}]``.

    ``form="in1"`` integrates ``e^{iux} - 1 - iuh`` directly; ``form="in2"``
    splits off ``nu(h^2)`` and ``kappa`` and integrates the fourth-order
    kernel ``k_u``. Both give the same number.
    """
    u = float(u)
    h = t.truncation
    drift = 1j * u * (t.beta - beta_N)
    if form == "in1":
        integral = t.nu.integrate(lambda x: levy_kernel(u, x, h, 2))
        return drift - 0.5 * u * u * (t.sigma - gamma_N) + integral
    if form != "in2":
        raise ValueError("form must be 'in1' or 'in2'")
    nu_h2 = t.nu.real_integral(lambda x: h(x) ** 2)
    k = kappa(t.nu, h)
    k_u = t.nu.integrate(lambda x: levy_kernel(u, x, h, 4))
    return drift - 0.5 * u * u * (t.sigma + nu_h2 - gamma_N) - 1j * u ** 3 * k / 6.0 + k_u


def limiting_psi(kappa_value, nu: LevyMeasure, h: Truncation, u):
    """``-i u^3 kappa / 6 + nu(e^{iux} - 1 - iuh + u^2 h^2/2 + i u^3 h^3/6)``."""
    u = float(u)
    if nu.is_empty:
        return -1j * u ** 3 * kappa_value / 6.0
    return -1j * u ** 3 * kappa_value / 6.0 + nu.integrate(lambda x: levy_kernel(u, x, Truncation(h), 4))


def _gamma_density(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-x) / x


def gamma_levy_measure():
    """Levy measure ``e^{-x} / x dx`` on ``(0, inf)`` of the unit exponential law."""
    return LevyMeasure(density=DensityPart(_gamma_density, 0.0, np.inf, Integrability.X2_MIN_1))


def gamma_triplet(truncation=Truncation.INDICATOR, centered=False):
    """Triplet of the gamma(1) law (or of ``gamma(1) - 1`` when ``centered``)."""
    truncation = Truncation(truncation)
    nu = gamma_levy_measure()
    # mean of gamma(1) is 1 = beta + nu(x - h)
    beta = (0.0 if centered else 1.0) - nu.real_integral(lambda x: x - truncation(x))
    return GeneratingTriplet(0.0, beta, nu, truncation)
