import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modphi.arrays import centered_gamma_row, gamma_example_cf, harmonic_number, sample_log_mean
from modphi.limits import phi_gamma_example
from modphi.modconv import (
    CharFnSequence,
    EvaluationGrid,
    ModParameters,
    Mode,
    Verdict,
    clt_rescale_check,
    convergence_report,
    decide_verdict,
    empirical_cf,
    renormalize,
    shift_parameters,
)

U = np.linspace(-3, 3, 13)


def test_grid_parse():
    g = EvaluationGrid.parse("-1:1:5")
    assert g.u == (-1.0, -0.5, 0.0, 0.5, 1.0)
    assert len(EvaluationGrid.linspace()) == 61
    for bad in ("1:2", "a:b:c", "0:1:0"):
        with pytest.raises(ValueError):
            EvaluationGrid.parse(bad)


def test_parameter_validation():
    with pytest.raises(ValueError):
        ModParameters.gaussian(0.0, -1.0)
    with pytest.raises(ValueError):
        ModParameters.poisson(0.0)
    p = ModParameters.poisson(2.5)
    assert p.mode is Mode.POISSON and p.center == 2.5 and p.variance == 2.5


def test_renormalize_examples():
    cf = np.exp(0.3j * U) / (1 - 1j * U)
    assert np.allclose(renormalize(cf, ModParameters.gaussian(), U), cf, rtol=0, atol=1e-15)
    beta, gamma = 0.7, 2.3
    gauss = np.exp(1j * U * beta - 0.5 * U * U * gamma)
    assert np.allclose(renormalize(gauss, ModParameters.gaussian(beta, gamma), U), 1, atol=1e-12)
    lam = 4.0
    pois = np.exp(lam * (np.exp(1j * U) - 1))
    assert np.allclose(renormalize(pois, ModParameters.poisson(lam), U), 1, atol=1e-12)


def test_renormalize_no_spurious_overflow():
    # e^{u^2 gamma / 2} alone overflows; the product does not
    u = 40.0
    gamma = 1.0
    cf = np.exp(-0.5 * u * u * gamma - 200.0)
    assert renormalize(cf, ModParameters.gaussian(0.0, gamma), u) == pytest.approx(math.exp(-200.0))
    assert renormalize(0.0, ModParameters.gaussian(0.0, 1.0), 2.0) == 0


def test_shift_examples():
    phi = np.exp(-np.abs(U)) + 0.1j * U
    assert np.allclose(shift_parameters(phi, U, 0, 0), phi, atol=0)
    assert np.allclose(shift_parameters(np.ones_like(U), U, 0, 1), np.exp(-U * U / 2))
    back = shift_parameters(shift_parameters(phi, U, 0.8, 1.5), U, -0.8, -1.5)
    assert np.max(np.abs(back - phi)) < 1e-14


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(0, 2), st.floats(-2, 2), st.floats(0, 2))
def test_renormalize_composes_with_shift(b1, g1, b2, g2):
    cf = np.exp(-0.5 * U * U * (g1 + g2 + 0.5)) / (1 - 0.5j * U)
    lhs = shift_parameters(renormalize(cf, ModParameters.gaussian(b1, g1), U), U, -b2, -g2)
    rhs = renormalize(cf, ModParameters.gaussian(b1 + b2, g1 + g2), U)
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_empirical_cf_examples():
    e = empirical_cf(np.zeros(7), U)
    assert np.allclose(e.value, 1) and np.all(e.se == 0)
    e = empirical_cf([-1.0, 1.0], U)
    assert np.allclose(e.value, np.cos(U), atol=1e-15)
    with pytest.raises(ValueError):
        empirical_cf([], 1.0)
    z = np.random.default_rng(1).standard_exponential(10 ** 5)
    e = empirical_cf(z, 1.0)
    ref = 1 / (1 - 1j)
    assert abs(e.value.real - ref.real) < 3 * e.se_re
    assert abs(e.value.imag - ref.imag) < 3 * e.se_im


def test_empirical_cf_chunking_is_invisible():
    z = np.random.default_rng(2).normal(size=1000)
    a = empirical_cf(z, U)
    b = empirical_cf(z, U, chunk=7)
    assert np.allclose(a.value, b.value, atol=1e-14)
    assert np.allclose(a.se_re, b.se_re, atol=1e-14)


def test_verdict_rule():
    assert decide_verdict([0.3, 0.2, 0.1], 0.15) is Verdict.CONVERGING
    assert decide_verdict([0.3, 0.2, 0.1], 0.05) is Verdict.INCONCLUSIVE
    assert decide_verdict([0.1, 0.2, 0.3], 1.0) is Verdict.DIVERGING
    assert decide_verdict([0.0, 0.0, 0.0], 1e-3) is Verdict.CONVERGING
    assert decide_verdict([0.2, 0.1, 0.105], 1.0) is Verdict.INCONCLUSIVE
    assert decide_verdict([0.1, float("inf")], 1.0) is Verdict.DIVERGING
    assert decide_verdict([], 1.0) is Verdict.INCONCLUSIVE


def exact_gaussian_sequence():
    return CharFnSequence(lambda N, u: np.exp(-0.5 * u * u * math.log(N)))


def test_report_exact_gaussian():
    grid = EvaluationGrid.linspace(-3, 3, 61)
    rep = convergence_report(exact_gaussian_sequence(), lambda N: ModParameters.gaussian(0, math.log(N)),
                             grid, [10, 100, 1000], reference=lambda u: np.ones_like(u), threshold=1e-6)
    assert max(rep.sup_errors) < 1e-12
    assert rep.verdict is Verdict.CONVERGING
    d = rep.to_dict()
    assert d["mode"] == "gaussian" and d["ladder"] == [10, 100, 1000]
    assert len(d["per_N"][0]["values"]) == 61 and set(d["per_N"][0]["values"][0]) == {"u", "re", "im"}
    assert d["verdict"] == "CONVERGING"


def test_report_without_reference_uses_cauchy_distances():
    seq = CharFnSequence(lambda N, u: gamma_example_cf(N, u))
    rep = convergence_report(seq, lambda N: ModParameters.gaussian(0, harmonic_number(N)),
                             EvaluationGrid.linspace(-2, 2, 21), [10, 100, 1000, 10000], threshold=0.1)
    assert math.isnan(rep.sup_errors[0])
    assert rep.sup_errors[1] > rep.sup_errors[2] > rep.sup_errors[3]
    assert rep.verdict is Verdict.CONVERGING


def test_report_rejects_unsorted_ladder():
    with pytest.raises(ValueError):
        convergence_report(exact_gaussian_sequence(), lambda N: ModParameters.gaussian(0, 1),
                           EvaluationGrid.linspace(), [100, 10])


def test_report_gamma_example_shrinks():
    seq = CharFnSequence(lambda N, u: gamma_example_cf(N, u))
    grid = EvaluationGrid.linspace(-3, 3, 31)
    rep = convergence_report(seq, lambda N: ModParameters.gaussian(0, harmonic_number(N)), grid,
                             [100, 1000, 10000], reference=phi_gamma_example(grid.array), threshold=0.5)
    d = rep.sup_errors
    assert d[0] > d[1] > d[2]
    assert rep.verdict is Verdict.CONVERGING


def test_report_threads_match_serial():
    seq = CharFnSequence(lambda N, u: gamma_example_cf(N, u))
    grid = EvaluationGrid.linspace(-2, 2, 9)
    kw = dict(params_per_N=lambda N: ModParameters.gaussian(0, harmonic_number(N)), grid=grid,
              N_ladder=[10, 20, 40], reference=phi_gamma_example(grid.array))
    a = convergence_report(seq, threads=1, **kw)
    b = convergence_report(seq, threads=3, **kw)
    assert a.to_dict() == b.to_dict()


def poisson_sequence():
    return CharFnSequence(lambda N, u: np.exp(math.log(N) * np.expm1(1j * u)), integer_valued=True)


def test_poisson_in_gaussian_mode_diverges():
    ladder = [10, 100, 1000, 10000]
    params = lambda N: ModParameters.gaussian(math.log(N), math.log(N))  # noqa: E731
    rep = convergence_report(poisson_sequence(), params, EvaluationGrid.linspace(-3, 3, 31), ladder)
    assert rep.verdict is Verdict.DIVERGING
    mods = rep.notes["modulus_at_2pi"]
    for N, m in zip(ladder, mods):
        # cf(2 pi) = 1 for integer-valued Z_N
        assert m == pytest.approx(math.exp(2 * math.pi ** 2 * math.log(N)), rel=1e-9)


def test_poisson_mode_converges():
    rep = convergence_report(poisson_sequence(), lambda N: ModParameters.poisson(math.log(N)),
                             EvaluationGrid.linspace(-3, 3, 31), [10, 100, 1000],
                             reference=lambda u: np.ones_like(u, dtype=complex), threshold=1e-6)
    assert rep.verdict is Verdict.CONVERGING
    assert max(rep.sup_errors) < 1e-12


def test_clt_exact_gaussian():
    rep = clt_rescale_check(exact_gaussian_sequence(), lambda N: ModParameters.gaussian(0, math.log(N)),
                            EvaluationGrid.linspace(-2, 2, 21), [10, 100])
    assert max(rep.sup_errors) < 1e-14


def test_clt_gamma_example():
    seq = CharFnSequence(lambda N, u: gamma_example_cf(N, u))
    rep = clt_rescale_check(seq, lambda N: ModParameters.gaussian(0, harmonic_number(N)),
                            EvaluationGrid.linspace(-2, 2, 41), [100, 1000, 10000])
    assert rep.sup_errors[-1] < 0.05
    assert rep.sup_errors[0] > rep.sup_errors[-1]


def test_clt_poisson_mode():
    rep = clt_rescale_check(poisson_sequence(), lambda N: ModParameters.poisson(math.log(N)),
                            EvaluationGrid.linspace(-2, 2, 21), [10 ** 2, 10 ** 4, 10 ** 8])
    assert rep.mode is Mode.POISSON
    d = rep.sup_errors
    assert d[0] > d[1] > d[2]


def test_regularized_law_recovery():
    # X + N(beta, gamma) renormalized by (beta, gamma) recovers the law of X
    rng = np.random.default_rng(7)
    n = 10 ** 5
    x = rng.standard_exponential(n) - 1.0
    beta, gamma = 1.5, 2.0
    z = x + beta + math.sqrt(gamma) * rng.standard_normal(n)
    u = np.linspace(-1.5, 1.5, 7)
    seq = CharFnSequence(lambda N, uu: (lambda e: (e.value, e.se))(empirical_cf(z, uu)), kind="empirical",
                         sample_count=n, seed=7)
    rep = convergence_report(seq, lambda N: ModParameters.gaussian(beta, gamma), EvaluationGrid(tuple(u)), [1],
                             reference=lambda uu: np.exp(-1j * uu) / (1 - 1j * uu))
    e = rep.per_N[0]
    ref = np.exp(-1j * u) / (1 - 1j * u)
    assert np.all(np.abs(e.values - ref) <= 3 * e.se + 1e-12)
    assert rep.to_dict()["per_N"][0]["values"][0]["se"] > 0


def test_sum_of_independent_sequences():
    # renormalized cf of a sum is the product of the renormalized cfs
    rng = np.random.default_rng(11)
    N, n = 100, 10 ** 5
    H = harmonic_number(N)
    gamma_rows = centered_gamma_row()
    z = sample_log_mean(gamma_rows, N, rng, n) + math.sqrt(H) * rng.standard_normal(n)
    u = np.linspace(-1, 1, 5)
    e = empirical_cf(z, u)
    got = renormalize(e.value, ModParameters.gaussian(0, 2 * H), u)
    se = e.se * np.exp(u * u * H)
    expected = renormalize(gamma_example_cf(N, u), ModParameters.gaussian(0, H), u) * 1.0
    assert np.all(np.abs(got - expected) <= 3 * se)
