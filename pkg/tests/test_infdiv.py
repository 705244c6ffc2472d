import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modphi.arrays import aggregate_limit_function, gamma_limit_levy_measure
from modphi.infdiv import (
    DensityPart,
    GeneratingTriplet,
    Integrability,
    IntegrabilityError,
    LevyMeasure,
    Truncation,
    convert_truncation,
    cumulants_from_triplet,
    gamma_levy_measure,
    gamma_triplet,
    kappa,
    levy_exponent,
    limiting_psi,
    renormalized_exponent,
)
from modphi.limits import phi_gamma_example

TRAP = Truncation.CANONICAL_TRAPEZOID
IND = Truncation.INDICATOR


def atom_triplet(x, w, h=TRAP):
    # beta = w h(x) cancels the compensator of the single atom
    return GeneratingTriplet(0.0, float(w * h(x)), LevyMeasure(atoms=((x, w),)), h)


def test_truncation_shapes():
    x = np.array([-3.0, -1.5, -0.5, 0.0, 0.7, 1.0, 1.5, 2.0, 2.5])
    assert np.allclose(TRAP(x), [0, -0.5, -0.5, 0, 0.7, 1, 0.5, 0, 0])
    assert np.allclose(IND(x), [0, 0, -0.5, 0, 0.7, 1, 0, 0, 0])


@pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
def test_levy_measure_validation():
    with pytest.raises(ValueError):
        LevyMeasure(atoms=((0.0, 1.0),))
    with pytest.raises(ValueError):
        LevyMeasure(atoms=((1.0, -1.0),))
    with pytest.raises(ValueError):
        DensityPart(lambda x: x, -1.0, 1.0)
    with pytest.raises(IntegrabilityError):
        # 1/x^4 near 0 is not x^2-integrable
        LevyMeasure(density=DensityPart(lambda x: np.asarray(x, dtype=float) ** -4, 0.0, 1.0))
    with pytest.raises(ValueError):
        GeneratingTriplet(sigma=-1.0)


def test_levy_exponent_examples():
    assert levy_exponent(GeneratingTriplet(1.0, 0.0), 2.0) == pytest.approx(-2.0)
    lam = 0.7
    for u in (0.3, 1.0, 2.5):
        got = levy_exponent(atom_triplet(2.0, lam), u)
        assert abs(got - lam * (np.exp(2j * u) - 1)) < 1e-14


@pytest.mark.parametrize("u", [0.5, 1.0, 3.0])
def test_gamma_exponent(u):
    got = levy_exponent(gamma_triplet(), u)
    assert abs(got - (-np.log(1 - 1j * u))) < 1e-10
    centered = levy_exponent(gamma_triplet(centered=True), u)
    assert abs(centered - (-np.log(1 - 1j * u) - 1j * u)) < 1e-10


TRIPLETS = [
    GeneratingTriplet(1.3, 0.4),
    atom_triplet(2.0, 0.7),
    GeneratingTriplet(0.2, -0.3, LevyMeasure(atoms=((1.5, 1.0), (-0.4, 2.0)))),
    gamma_triplet(TRAP),
]


@pytest.mark.parametrize("t", TRIPLETS)
def test_exponent_at_zero_and_symmetry(t):
    assert levy_exponent(t, 0.0) == 0
    for u in (0.4, 1.7, 4.0):
        assert abs(levy_exponent(t, -u) - np.conj(levy_exponent(t, u))) < 1e-12


def test_convert_truncation_examples():
    t = GeneratingTriplet(0.0, 0.2, LevyMeasure(atoms=((1.5, 1.0),)), IND)
    assert convert_truncation(t, IND) is t
    t2 = convert_truncation(t, TRAP)
    assert t2.beta - t.beta == pytest.approx(0.5, abs=1e-15)
    for u in (1.0, 2.0, 3.0):
        assert abs(levy_exponent(t, u) - levy_exponent(t2, u)) < 1e-12


@pytest.mark.parametrize("t", [gamma_triplet(IND), GeneratingTriplet(
    0.5, 0.1, LevyMeasure(atoms=((1.5, 1.0), (-3.0, 0.25))), IND)])
def test_convert_truncation_preserves_exponent(t):
    t2 = convert_truncation(t, TRAP)
    back = convert_truncation(t2, IND)
    assert back.beta == pytest.approx(t.beta, abs=1e-13)
    for u in np.linspace(-5, 5, 11):
        assert abs(levy_exponent(t, u) - levy_exponent(t2, u)) < 1e-12


def test_cumulant_examples():
    c = cumulants_from_triplet(GeneratingTriplet(2.0, 0.3), 3)
    assert c == pytest.approx([0.3, 2.0, 0.0])
    lam = 0.7
    c = cumulants_from_triplet(atom_triplet(2.0, lam), 4)
    assert c[2] == pytest.approx(8 * lam) and c[3] == pytest.approx(16 * lam)
    c = cumulants_from_triplet(gamma_triplet(), 6)
    assert c == pytest.approx([math.factorial(k - 1) for k in range(1, 7)], rel=1e-9)
    with pytest.raises(ValueError):
        cumulants_from_triplet(gamma_triplet(), 0)


def test_cumulant_moment_divergence():
    heavy = LevyMeasure(density=DensityPart(lambda x: np.asarray(x, dtype=float) ** -2.5, 1.0, np.inf))
    with pytest.raises(IntegrabilityError):
        cumulants_from_triplet(GeneratingTriplet(0.0, 0.0, heavy), 2)


@pytest.mark.parametrize("t", [atom_triplet(2.0, 0.7), gamma_triplet(TRAP)])
def test_cumulants_match_finite_differences(t):
    h = 1e-3
    psi = {k: levy_exponent(t, k * h) for k in (-2, -1, 1, 2)}
    psi[0] = 0j
    # derivatives of psi(u) at 0 are i^k c_k
    d1 = (psi[1] - psi[-1]) / (2 * h)
    d2 = (psi[1] - 2 * psi[0] + psi[-1]) / h ** 2
    d3 = (psi[2] - 2 * psi[1] + 2 * psi[-1] - psi[-2]) / (2 * h ** 3)
    c = cumulants_from_triplet(t, 3)
    assert (d1 / 1j).real == pytest.approx(c[0], rel=1e-4)
    assert (-d2).real == pytest.approx(c[1], rel=1e-4)
    assert (d3 / -1j).real == pytest.approx(c[2], rel=1e-4)


def test_kappa_examples():
    assert kappa(LevyMeasure(atoms=((0.5, 4.0),)), TRAP) == pytest.approx(0.5)
    nu = LevyMeasure(atoms=((0.3, 2.0), (-0.8, 1.0)),
                     density=DensityPart(lambda x: np.ones_like(np.asarray(x, dtype=float)), 0.1, 0.9,
                                         Integrability.ABS_X3))
    x3 = nu.real_integral(lambda x: x ** 3)
    assert kappa(nu, TRAP) == pytest.approx(x3, rel=1e-12)


def test_renormalized_exponent_examples():
    t = GeneratingTriplet(1.7, 0.4)
    for u in (0.5, 2.0, 7.0):
        assert abs(renormalized_exponent(t, 0.4, 1.7, u)) < 1e-14
        assert abs(renormalized_exponent(t, 0.4, 1.7, u, form="in1")) < 1e-14
    g = gamma_triplet(TRAP)
    for u in (1.0, 2.0):
        a = renormalized_exponent(g, 0.3, 1.1, u, form="in1")
        b = renormalized_exponent(g, 0.3, 1.1, u, form="in2")
        assert abs(a - b) < 1e-12
    with pytest.raises(ValueError):
        renormalized_exponent(g, 0.0, 0.0, 1.0, form="in3")


def test_limiting_psi_examples():
    assert limiting_psi(0.0, LevyMeasure(), TRAP, 1.3) == 0
    for u in (0.5, 1.0, 2.0):
        assert limiting_psi(6.0, LevyMeasure(), TRAP, u) == pytest.approx(-1j * u ** 3)
    got = aggregate_limit_function(gamma_limit_levy_measure(), 1.0)
    assert abs(got - phi_gamma_example(1.0)) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.1, 1.9), st.floats(0.05, 2.0))
def test_atom_exponent_closed_form(x, w, u):
    t = GeneratingTriplet(0.0, 0.0, LevyMeasure(atoms=((x, w),)), TRAP)
    expected = w * (np.exp(1j * u * x) - 1 - 1j * u * TRAP(x))
    assert abs(levy_exponent(t, u) - expected) < 1e-12


def test_gamma_measure_integrability():
    nu = gamma_levy_measure()
    # nu(x^2) = 1 for e^{-x}/x
    assert nu.real_integral(lambda x: x * x) == pytest.approx(1.0, rel=1e-10)
