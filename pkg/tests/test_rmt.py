import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.integrate import trapezoid

from modphi.limits import rmt_factor_M, sp_factor_MSp
from modphi.rmt import (
    MCMCConfig,
    SamplerDiagnosticError,
    det_one_minus,
    haar_unitary,
    sin2_inverse_cdf,
    symplectic_eigenangles,
    symplectic_moment_mc,
    unitary_log_abs_det_samples,
    unitary_moment_mc,
)


def sin2_cdf(t):
    return t / math.pi - np.sin(2 * t) / (2 * math.pi)


def test_haar_n1_is_uniform_phase():
    u = haar_unitary(1, np.random.default_rng(0), 10 ** 5)
    assert np.allclose(np.abs(u), 1, atol=1e-14)
    assert abs(u[:, 0, 0].mean()) < 3 / math.sqrt(10 ** 5)


@pytest.mark.parametrize("N", [1, 3, 20])
def test_haar_unitarity(N):
    u = haar_unitary(N, np.random.default_rng(N), 10)
    resid = np.einsum("sji,sjk->sik", u.conj(), u) - np.eye(N)
    assert np.max(np.abs(resid)) < 1e-12
    single = haar_unitary(N, np.random.default_rng(1))
    assert single.shape == (N, N)
    with pytest.raises(ValueError):
        haar_unitary(0, np.random.default_rng(0))


def test_haar_invariance_under_phases():
    rng = np.random.default_rng(12)
    N, n = 4, 10 ** 4
    d = np.exp(1j * np.array([0.3, 1.1, -2.0, 2.9]))
    a = haar_unitary(N, rng, n)
    b = haar_unitary(N, rng, n)
    tr = np.trace(a, axis1=1, axis2=2)
    tr_d = np.einsum("i,sii->s", d, b)
    for f in (np.real, np.imag, np.abs):
        res = stats.ks_2samp(f(tr), f(tr_d))
        assert res.pvalue > 0.01


def test_det_one_minus_examples():
    assert det_one_minus(np.eye(3)) == 0
    assert det_one_minus(np.array([math.pi])) == pytest.approx(4)
    u = haar_unitary(6, np.random.default_rng(3))
    ev = np.linalg.eigvals(u)
    assert abs(det_one_minus(u) - np.prod(1 - ev)) < 1e-10
    stack = haar_unitary(4, np.random.default_rng(4), 5)
    assert det_one_minus(stack).shape == (5,)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, math.pi), min_size=1, max_size=6))
def test_symplectic_det_nonnegative(angles):
    assert det_one_minus(np.array(angles), symplectic=True) >= 0


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1))
def test_sin2_inverse_cdf_roundtrip(v):
    t = sin2_inverse_cdf(v)
    assert 0 <= t <= math.pi
    assert abs(sin2_cdf(t) - v) < 1e-13


def test_g1_sampler_exact_law():
    angles = symplectic_eigenangles(1, np.random.default_rng(5), 10 ** 5)
    assert angles.shape == (10 ** 5, 1)
    ks = stats.kstest(angles[:, 0], sin2_cdf).statistic
    assert ks <= 0.01
    c = np.cos(angles[:, 0])
    assert abs(c.mean()) < 3 * c.std() / math.sqrt(c.size)
    assert det_one_minus(angles, symplectic=True).mean() == pytest.approx(2, rel=0.02)


def test_mcmc_angles_in_range_and_rate():
    angles, rate = symplectic_eigenangles(3, np.random.default_rng(6), 2000, MCMCConfig(chains=64),
                                          return_rate=True)
    assert angles.shape == (2000, 3)
    assert np.all((angles >= 0) & (angles <= math.pi))
    assert 0.1 <= rate <= 0.9


def test_mcmc_matches_weyl_density_g2():
    # E det(1 - x) against a quadrature of the g=2 Weyl density
    t = np.linspace(0, math.pi, 801)
    w = np.sin(t) ** 2
    c = np.cos(t)
    dens = np.outer(w, w) * (c[:, None] - c[None, :]) ** 2
    det = np.outer(2 - 2 * c, 2 - 2 * c)
    exact = trapezoid(trapezoid(dens * det, t), t) / trapezoid(trapezoid(dens, t), t)
    angles = symplectic_eigenangles(2, np.random.default_rng(7), 40000, MCMCConfig(chains=256))
    d = det_one_minus(angles, symplectic=True)
    assert d.mean() == pytest.approx(exact, rel=0.05)


def test_mcmc_diagnostic():
    with pytest.raises(SamplerDiagnosticError) as info:
        symplectic_eigenangles(4, np.random.default_rng(8), 500, MCMCConfig(chains=32, acceptance_band=(0.95, 1.0)))
    assert 0 < info.value.rate < 0.95


def test_unitary_moment_trivial():
    est = unitary_moment_mc(5, 0.0, 1000, seed=1)
    assert est.value == 1
    with pytest.raises(ValueError):
        unitary_moment_mc(5, 0.5, 10, seed=1)
    with pytest.raises(ValueError):
        unitary_log_abs_det_samples(5, 1000, 1, method="lu")


def test_unitary_n1_real_moment():
    logs, rejected = unitary_log_abs_det_samples(1, 10 ** 5, seed=2)
    m = np.exp(logs)
    assert m.mean() == pytest.approx(2, abs=4 * m.std() / math.sqrt(m.size))
    assert rejected == 0


def test_product_law_matches_haar_distribution():
    a, _ = unitary_log_abs_det_samples(12, 8000, seed=3, method="haar")
    b, _ = unitary_log_abs_det_samples(12, 8000, seed=4, method="product")
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_unitary_moment_product_law_n50():
    for u, est in zip((0.5, 1.0), unitary_moment_mc(50, [0.5, 1.0], 2 * 10 ** 5, seed=5, method="product")):
        assert abs(est.value - rmt_factor_M(1j * u)) <= max(3 * est.se, 0.05)


def test_unitary_moment_haar_small():
    est = unitary_moment_mc(50, 0.5, 4000, seed=6)
    assert abs(est.value - rmt_factor_M(0.5j)) <= max(3 * est.se, 0.05)


def test_unitary_moment_hermitian():
    plus, minus = unitary_moment_mc(10, [0.7, -0.7], 4000, seed=9, method="product")
    assert abs(plus.value - np.conj(minus.value)) < 1e-12


def test_seed_splitting_is_thread_independent():
    a, _ = unitary_log_abs_det_samples(8, 5000, seed=10, threads=1)
    b, _ = unitary_log_abs_det_samples(8, 5000, seed=10, threads=3)
    assert np.array_equal(a, b)


def test_symplectic_moment_g1():
    est = symplectic_moment_mc(1, 1.0, 10 ** 5, seed=11)
    assert est.value.real == pytest.approx(2, abs=3 * est.se)
    small = symplectic_moment_mc(1, 1e-9, 2000, seed=11)
    assert small.value.real == pytest.approx(1, abs=1e-7)
    with pytest.raises(ValueError):
        symplectic_moment_mc(1, -1.0, 2000, seed=1)


def test_symplectic_moment_g8():
    est = symplectic_moment_mc(8, 1.0, 10 ** 5, seed=12)
    target = sp_factor_MSp(1).real
    assert abs(est.value.real - target) <= 3 * est.se + 0.15 * target
    assert 0.1 <= est.acceptance <= 0.9
