"""Haar unitary matrices, USp(2g) eigenangles and Keating-Snaith moment checks.

Random streams are split from one master seed with
``np.random.SeedSequence(seed).spawn(k)``; stream ``i`` always handles the
``i``-th fixed-size chunk of draws, so results do not depend on the number of
worker threads.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SamplerDiagnosticError",
    "MCMCConfig",
    "MCEstimate",
    "haar_unitary",
    "det_one_minus",
    "sin2_inverse_cdf",
    "symplectic_eigenangles",
    "unitary_log_abs_det_samples",
    "unitary_moment_mc",
    "symplectic_moment_mc",
    "CHUNK",
]

log = logging.getLogger(__name__)

# Draws per random stream; fixes the stream layout for a given sample count.
CHUNK = 2000
_MAX_RETRIES = 10


class SamplerDiagnosticError(RuntimeError):
    """Metropolis acceptance rate fell outside the accepted band."""

    def __init__(self, message, rate):
        super().__init__(message)
        self.rate = rate


@dataclass(frozen=True)
class MCMCConfig:
    burn_in: int = 1000
    thinning: int | None = None  # defaults to g
    chains: int = 512
    acceptance_band: tuple = (0.1, 0.9)


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo estimate with its standard error and bookkeeping."""

    value: complex
    se: float
    samples: int
    rejected: int = 0
    acceptance: float | None = None


def haar_unitary(N, rng, size=None):
    """Haar-distributed ``N x N`` unitary matrices.

    Complex Ginibre matrices are QR-factored and each column of ``Q`` is
    multiplied by the phase of the matching diagonal entry of ``R``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    shape = () if size is None else (int(size),)
    z = (rng.standard_normal(shape + (N, N)) + 1j * rng.standard_normal(shape + (N, N))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[..., None, :]


def det_one_minus(x, symplectic=None):
    """``det(I - X)``.

    ``x`` is a square matrix (or a stack of them), or an array of eigenangles
    whose last axis lists ``theta_1..theta_g`` of a USp(2g) class; for angles
    the value is ``prod |1 - e^{i theta_j}|^2 = prod (2 - 2 cos theta_j)``.
    ``symplectic`` forces the interpretation; by default 2-d square input is
    a matrix and anything else is angles.
    """
    x = np.asarray(x)
    if symplectic is None:
        symplectic = not (x.ndim >= 2 and x.shape[-1] == x.shape[-2])
    if symplectic:
        return np.prod(2.0 - 2.0 * np.cos(np.asarray(x, dtype=float)), axis=-1)
    eye = np.eye(x.shape[-1])
    return np.linalg.det(eye - x)


def sin2_inverse_cdf(v, iters=60):
    """Inverse of ``F(t) = t/pi - sin(2t)/(2pi)`` on ``[0, pi]``.

    Safeguarded Newton: steps leaving the current bracket are replaced by
    bisection.
    """
    v = np.asarray(v, dtype=float)
    lo = np.zeros(v.shape)
    hi = np.full(v.shape, math.pi)
    # F(t) ~ 2 t^3 / (3 pi) near 0 and is symmetric about pi/2
    t = np.where(v < 0.5, np.cbrt(1.5 * math.pi * v), math.pi - np.cbrt(1.5 * math.pi * (1.0 - v)))
    t = np.clip(t, 0.0, math.pi)
    for _ in range(iters):
        f = t / math.pi - np.sin(2.0 * t) / (2.0 * math.pi) - v
        lo = np.where(f < 0, t, lo)
        hi = np.where(f > 0, t, hi)
        fp = 2.0 * np.sin(t) ** 2 / math.pi
        with np.errstate(divide="ignore", invalid="ignore"):
            step = t - f / fp
        bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
        new = np.where(bad, 0.5 * (lo + hi), step)
        if np.all(np.abs(new - t) <= 1e-15):
            t = new
            break
        t = new
    return t


def _log_vandermonde_site(c_new, c_all, j):
    """``sum_{k != j} log (c_new - c_k)^2`` per chain."""
    diff = c_new[:, None] - c_all
    diff[:, j] = 1.0
    return np.sum(np.log(diff * diff), axis=1)


def symplectic_eigenangles(g, rng, samples=1, mcmc: MCMCConfig = MCMCConfig(), return_rate=False):
    """Draws of the ``g`` eigenangles in ``[0, pi]`` of a Haar element of USp(2g).

    Returns an array of shape ``(samples, g)``. For ``g = 1`` the draws are
    exact inversions of the ``(2/pi) sin^2`` law. For ``g >= 2`` parallel
    chains run independence-Metropolis single-site updates whose proposals
    follow the ``sin^2`` law, so only the squared Vandermonde in ``cos``
    enters the acceptance ratio. :class:`SamplerDiagnosticError` is raised
    when the acceptance rate leaves ``mcmc.acceptance_band``. With
    ``return_rate`` the acceptance rate (1 for ``g = 1``) is returned too.
    """
    if g < 1:
        raise ValueError("g must be >= 1")
    samples = int(samples)
    if g == 1:
        angles = sin2_inverse_cdf(rng.random(samples))[:, None]
        return (angles, 1.0) if return_rate else angles
    thin = mcmc.thinning or g
    chains = min(mcmc.chains, samples)
    per_chain = -(-samples // chains)
    theta = sin2_inverse_cdf(rng.random((chains, g)))
    c = np.cos(theta)
    accepted = 0
    proposed = 0
    out = np.empty((chains, per_chain, g))
    total_steps = mcmc.burn_in + per_chain * thin
    rows = np.arange(chains)
    for step in range(total_steps):
        j = step % g
        prop = sin2_inverse_cdf(rng.random(chains))
        cp = np.cos(prop)
        log_ratio = _log_vandermonde_site(cp, c, j) - _log_vandermonde_site(c[:, j], c, j)
        accept = np.log(rng.random(chains)) < log_ratio
        theta[accept, j] = prop[accept]
        c[accept, j] = cp[accept]
        accepted += int(accept.sum())
        proposed += chains
        k = step - mcmc.burn_in
        if k >= 0 and (k + 1) % thin == 0:
            out[rows, (k + 1) // thin - 1] = theta
    rate = accepted / proposed
    lo, hi = mcmc.acceptance_band
    if not lo <= rate <= hi:
        raise SamplerDiagnosticError(f"acceptance rate {rate:.3f} outside [{lo}, {hi}]", rate)
    angles = out.reshape(-1, g)[:samples]
    return (angles, rate) if return_rate else angles


def _streams(seed, samples):
    n_chunks = -(-samples // CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [CHUNK] * (n_chunks - 1) + [samples - CHUNK * (n_chunks - 1)]
    return list(zip(seqs, sizes))


def _run(fn, jobs, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _mean_se(values):
    values = np.asarray(values, dtype=complex)
    n = values.size
    mean = values.mean()
    if n < 2:
        return complex(mean), float("nan")
    var = (np.var(values.real, ddof=1) + np.var(values.imag, ddof=1)) / n
    return complex(mean), float(math.sqrt(var))


def _unitary_log_abs_det(N, rng, size):
    """``log |det(I - U)|^2`` for ``size`` Haar draws, retrying exact zeros."""
    out = np.empty(size)
    need = np.arange(size)
    rejected = 0
    for attempt in range(_MAX_RETRIES + 1):
        u = haar_unitary(N, rng, need.size)
        _, logdet = np.linalg.slogdet(np.eye(N) - u)
        ok = np.isfinite(logdet)
        out[need[ok]] = 2.0 * logdet[ok]
        rejected += int((~ok).sum())
        need = need[~ok]
        if need.size == 0:
            break
    if need.size:
        log.warning("dropped %d zero-determinant draws after %d retries", need.size, _MAX_RETRIES)
        out = np.delete(out, need)
    if rejected:
        log.info("rejected %d zero-determinant draws", rejected)
    return out, rejected


def _product_law_log_abs_det(N, rng, size):
    """``log |det(I - U)|^2`` from the product law of the characteristic polynomial.

    ``det(I - U)`` has the law of ``prod_{j<N} (1 + e^{i t_j} sqrt(B_j))``
    with independent uniform phases ``t_j`` and ``B_j ~ Beta(1, j)``
    (``B_0 = 1``), so one draw costs ``O(N)``.
    """
    out = np.zeros(size)
    for j in range(N):
        t = rng.uniform(0.0, 2.0 * math.pi, size)
        b = np.ones(size) if j == 0 else rng.beta(1.0, j, size)
        out += np.log(np.abs(1.0 + np.exp(1j * t) * np.sqrt(b)) ** 2)
    return out, 0


_UNITARY_METHODS = {"haar": _unitary_log_abs_det, "product": _product_law_log_abs_det}


def unitary_log_abs_det_samples(N, samples, seed, method="haar", threads=None):
    """Draws of ``log |det(I - X_N)|^2`` and the count of rejected zero draws."""
    if method not in _UNITARY_METHODS:
        raise ValueError(f"method must be one of {sorted(_UNITARY_METHODS)}")
    draw = _UNITARY_METHODS[method]

    def job(arg):
        ss, size = arg
        return draw(N, np.random.default_rng(ss), size)

    parts = _run(job, _streams(seed, int(samples)), threads)
    return np.concatenate([p[0] for p in parts]), sum(p[1] for p in parts)


def unitary_moment_mc(N, u, samples, seed, threads=None, method="haar"):
    """``e^{u^2 log N} E[e^{iu log|det(I - X_N)|^2}]`` by Monte Carlo over U(N).

    ``method="haar"`` draws full Haar matrices with :func:`haar_unitary`;
    ``method="product"`` draws the determinant from its product law. A
    sequence of ``u`` values shares one set of draws and yields a list.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    us = np.atleast_1d(np.asarray(u, dtype=float))
    logs, rejected = (None, 0)
    if np.any(us != 0.0):
        logs, rejected = unitary_log_abs_det_samples(N, samples, seed, method, threads)
    out = []
    for uv in us:
        if uv == 0.0:
            out.append(MCEstimate(1.0 + 0j, 0.0, int(samples)))
            continue
        mean, se = _mean_se(np.exp(1j * uv * logs))
        scale = math.exp(uv * uv * math.log(N))
        out.append(MCEstimate(mean * scale, se * scale, logs.size, rejected))
    return out[0] if np.ndim(u) == 0 else out


def symplectic_moment_mc(g, lam, samples, seed, mcmc: MCMCConfig = MCMCConfig(), threads=None):
    """``g^{-(lam^2 + lam)/2} E[det(I - H_g)^lam]`` over USp(2g).

    For ``g >= 2`` the standard error accounts for chain autocorrelation
    through batch means over the parallel chains.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if not lam > 0:
        raise ValueError("lam must be > 0")
    if g == 1:
        def job(arg):
            ss, size = arg
            return symplectic_eigenangles(1, np.random.default_rng(ss), size)
        angles = np.concatenate(_run(job, _streams(seed, int(samples)), threads))
        rate = 1.0
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        angles, rate = symplectic_eigenangles(g, rng, samples, mcmc, return_rate=True)
    d = det_one_minus(angles, symplectic=True)
    vals = d ** lam
    scale = g ** (-(lam * lam + lam) / 2.0)
    if g == 1:
        mean, se = _mean_se(vals)
    else:
        # batch means over complete chains; draws are stored chain by chain
        chains = min(mcmc.chains, int(samples))
        per_chain = -(-int(samples) // chains)
        full = vals.size // per_chain
        chain_means = vals[:full * per_chain].reshape(full, per_chain).mean(axis=1)
        mean = complex(vals.mean())
        se = float(np.std(chain_means, ddof=1) / math.sqrt(chains))
    return MCEstimate(complex(mean.real * scale, 0.0), se * scale, vals.size, 0, rate)
