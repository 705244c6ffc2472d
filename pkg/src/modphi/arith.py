"""Distinct prime factors, their mod-Poisson statistics and the probabilistic models.

The omega table stores one byte per integer; ``omega[n]`` is the number of
distinct primes dividing ``n`` and ``omega[0]`` is unused.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .primes import primes_up_to
from .special import EULER_GAMMA, hyp2f1_diag_many

__all__ = [
    "SieveBudgetError",
    "SieveFormatError",
    "SieveTable",
    "MAX_SIEVE",
    "omega_sieve",
    "omega_trial_division",
    "omega_renormalized_cf",
    "omega_histogram",
    "sathe_selberg_histogram",
    "bernoulli_prime_model_cf",
    "prime_model_lambda",
    "permutation_cycle_model_cf",
    "generic_bernoulli_mod_poisson",
    "circle_model_cf",
    "circle_model_gamma",
    "sample_permutation_cycles",
    "sample_circle_model",
    "erdos_kac_cf",
]

MAX_SIEVE = 10 ** 9
_MAGIC = b"MPHI"
_VERSION = 1
_HEADER = struct.Struct("<4sIQ")


class SieveBudgetError(MemoryError):
    """Requested sieve exceeds the supported size."""


class SieveFormatError(ValueError):
    """A cache file is not a valid omega table."""


@dataclass(frozen=True)
class SieveTable:
    """``omega[n]`` for ``0 <= n <= N`` as ``uint8`` (index 0 is padding)."""

    N: int
    omega: np.ndarray

    def __post_init__(self):
        if self.omega.shape != (self.N + 1,):
            raise ValueError("omega table must have N + 1 entries")

    def __getitem__(self, n):
        return self.omega[n]

    def save(self, path):
        """Write the ``MPHI`` cache format: header then ``omega(1..N)``."""
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(_MAGIC, _VERSION, self.N))
            fh.write(np.ascontiguousarray(self.omega[1:], dtype=np.uint8).tobytes())

    @classmethod
    def load(cls, path):
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise SieveFormatError("file too short for an MPHI header")
        magic, version, n = _HEADER.unpack_from(raw)
        if magic != _MAGIC:
            raise SieveFormatError("bad magic bytes")
        if version != _VERSION:
            raise SieveFormatError(f"unsupported version {version}")
        body = np.frombuffer(raw, dtype=np.uint8, offset=_HEADER.size)
        if body.size != n:
            raise SieveFormatError(f"expected {n} table bytes, found {body.size}")
        omega = np.zeros(n + 1, dtype=np.uint8)
        omega[1:] = body
        return cls(int(n), omega)


def omega_sieve(N):
    """Additive sieve: every prime ``p <= N`` adds 1 to its multiples."""
    N = int(N)
    if N < 2:
        raise ValueError("N must be >= 2")
    if N > MAX_SIEVE:
        raise SieveBudgetError(f"N = {N} exceeds the sieve budget of {MAX_SIEVE}")
    omega = np.zeros(N + 1, dtype=np.uint8)
    for p in primes_up_to(N):
        omega[p::p] += 1
    return SieveTable(N, omega)


def omega_trial_division(n):
    """Number of distinct prime factors of ``n`` by trial division."""
    count = 0
    d = 2
    while d * d <= n:
        if n % d == 0:
            count += 1
            while n % d == 0:
                n //= d
        d += 1
    return count + (1 if n > 1 else 0)


def omega_histogram(table: SieveTable):
    """Counts of ``omega(n) = k`` over ``2 <= n <= N``, indexed by ``k``."""
    return np.bincount(table.omega[2:]).astype(np.int64)


def omega_renormalized_cf(table: SieveTable, u):
    """``(log N)^{1 - e^{iu}} (1/N) sum_{2<=n<=N} e^{iu omega'(n)}``, ``omega' = omega - 1``."""
    if table.N < 100:
        raise ValueError("table limit must be >= 100")
    hist = omega_histogram(table).astype(float)
    u_arr = np.asarray(u, dtype=float)
    k = np.arange(hist.size) - 1.0
    sums = np.exp(1j * np.multiply.outer(u_arr, k)) @ hist / table.N
    lam = math.log(math.log(table.N))
    out = np.exp(lam * (1.0 - np.exp(1j * u_arr))) * sums
    return out[()] if out.ndim == 0 else out


def erdos_kac_cf(table: SieveTable, u, shifted=False):
    """cf of ``(w(n) - loglog N) / sqrt(loglog N)`` for ``n`` uniform on ``[1, N]``.

    ``w`` is ``omega`` or, with ``shifted``, ``omega' = omega - 1`` on ``n >= 2``.
    """
    hist = np.bincount(table.omega[1:]).astype(float)
    k = np.arange(hist.size, dtype=float)
    if shifted:
        hist = omega_histogram(table).astype(float)
        k = np.arange(hist.size) - 1.0
    lam = math.log(math.log(table.N))
    s = math.sqrt(lam)
    u_arr = np.asarray(u, dtype=float)
    out = np.exp(1j * np.multiply.outer(u_arr, (k - lam) / s)) @ hist / hist.sum()
    return out[()] if out.ndim == 0 else out


def sathe_selberg_histogram(table: SieveTable, k_max=10):
    """Counts of ``omega'(n) = k`` and their ratio to ``N e^{-L} L^k / k!``, ``L = loglog N``."""
    if not 0 <= k_max <= 15:
        raise ValueError("k_max must be in [0, 15]")
    hist = omega_histogram(table)
    counts = np.zeros(k_max + 1, dtype=np.int64)
    # omega'(n) = k  <=>  omega(n) = k + 1
    avail = hist[1:k_max + 2]
    counts[:avail.size] = avail
    lam = math.log(math.log(table.N))
    expected = table.N * stats.poisson.pmf(np.arange(k_max + 1), lam)
    return counts, counts / expected


def prime_model_lambda(y):
    """``lambda_y = sum_{p<=y} -log(1 - 1/p)``."""
    ps = primes_up_to(int(y)).astype(float)
    return float(math.fsum(-np.log1p(-1.0 / ps)))


def bernoulli_prime_model_cf(y, u, renormalized=False):
    """cf of ``sum_{p<=y} B_p`` with independent ``B_p ~ Bernoulli(1/p)``.

    With ``renormalized`` the value is multiplied by
    ``exp(lambda_y (1 - e^{iu}))``.
    """
    if y < 2:
        raise ValueError("y must be >= 2")
    ps = primes_up_to(int(y)).astype(float)
    z = np.exp(1j * np.asarray(u, dtype=float))
    log_cf = np.sum(np.log(1.0 - 1.0 / ps + z[..., None] / ps), axis=-1)
    if renormalized:
        log_cf = log_cf + prime_model_lambda(y) * (1.0 - z)
    out = np.exp(log_cf)
    return out[()] if out.ndim == 0 else out


def permutation_cycle_model_cf(N, u, renormalized=False):
    """``prod_{k<=N} (k + e^{iu}) / (k + 1)``, optionally times ``(N+1)^{1 - e^{iu}}``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    ks = np.arange(1, int(N) + 1, dtype=float)
    z = np.exp(1j * np.asarray(u, dtype=float))
    log_cf = np.sum(np.log1p((z[..., None] - 1.0) / (ks + 1.0)), axis=-1)
    if renormalized:
        log_cf = log_cf + math.log(N + 1.0) * (1.0 - z)
    out = np.exp(log_cf)
    return out[()] if out.ndim == 0 else out


def generic_bernoulli_mod_poisson(x_rule, N, u):
    """Sums of independent ``Bernoulli(x_n)``, ``n <= N``.

    Returns ``(cf, lambda_N, limit)`` where ``cf = prod (1 + x_n(e^{iu}-1))``,
    ``lambda_N = sum x_n`` and ``limit = prod (1 + x_n(e^{iu}-1)) e^{x_n(1-e^{iu})}``
    is the renormalized value at ``N``, which converges when ``sum x_n^2 < inf``.
    """
    xs = np.array([float(x_rule(n)) for n in range(1, int(N) + 1)])
    if np.any((xs <= 0) | (xs >= 1)):
        raise ValueError("x_n must lie in (0, 1)")
    z = np.exp(1j * np.asarray(u, dtype=float))
    w = z[..., None] - 1.0
    log_cf = np.sum(np.log1p(xs * w), axis=-1)
    lam = math.fsum(xs)
    cf = np.exp(log_cf)
    limit = np.exp(log_cf + lam * (1.0 - z))
    if cf.ndim == 0:
        return cf[()], lam, limit[()]
    return cf, lam, limit


def circle_model_gamma(prime_cutoff):
    """``gamma_N = 2 (euler_gamma + loglog N)``."""
    return 2.0 * (EULER_GAMMA + math.log(math.log(prime_cutoff)))


def circle_model_cf(prime_cutoff, u, renormalized=False):
    """cf of ``sum_{p<=N} log |1 - X_p / sqrt p|^{-2}``, ``X_p`` uniform on the circle.

    Each factor is ``2F1(iu, iu; 1; 1/p)``; with ``renormalized`` the product
    is multiplied by ``exp(u^2 gamma_N / 2)``.
    """
    if prime_cutoff < 3:
        raise ValueError("prime_cutoff must be >= 3")
    x = 1.0 / primes_up_to(int(prime_cutoff)).astype(float)
    u_arr = np.asarray(u, dtype=float)
    out = np.empty(u_arr.shape, dtype=complex)
    g = circle_model_gamma(prime_cutoff)
    for idx, uv in np.ndenumerate(u_arr):
        log_cf = np.sum(np.log(hyp2f1_diag_many(1j * uv, x)))
        if renormalized:
            log_cf += 0.5 * uv * uv * g
        out[idx] = np.exp(log_cf)
    return out[()] if out.ndim == 0 else out


def sample_permutation_cycles(n, rng, size):
    """Number of cycles of ``size`` uniform random permutations of ``n`` points."""
    counts = np.empty(size, dtype=np.int64)
    idx = np.arange(n)
    for s in range(size):
        perm = rng.permutation(n)
        seen = np.zeros(n, dtype=bool)
        c = 0
        for start in idx:
            if seen[start]:
                continue
            c += 1
            j = start
            while not seen[j]:
                seen[j] = True
                j = perm[j]
        counts[s] = c
    return counts


def sample_circle_model(prime_cutoff, rng, size):
    """Draws of ``sum_{p<=N} log |1 - e^{i T_p} / sqrt p|^{-2}`` with uniform ``T_p``."""
    ps = primes_up_to(int(prime_cutoff)).astype(float)
    theta = rng.uniform(0.0, 2.0 * math.pi, (size, ps.size))
    return -np.sum(np.log(np.abs(1.0 - np.exp(1j * theta) / np.sqrt(ps)) ** 2), axis=1)
