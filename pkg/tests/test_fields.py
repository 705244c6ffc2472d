import csv
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modphi.fields import (
    BudgetError,
    CurvePoly,
    FiniteFieldSpec,
    LPolynomial,
    NotSquarefreeError,
    PairingError,
    angle_ks_distance,
    arithmetic_factor_Ah,
    count_affine_points,
    count_affine_points_many,
    count_irreducibles,
    count_irreducibles_bruteforce,
    counts_from_l,
    enumerate_hyperelliptic,
    ensemble_moment,
    ensemble_moment_exact,
    frobenius_angles,
    half_value_surd,
    l_polynomial,
    scan_ensemble,
    squarefree_mask,
    verify_weil,
    write_records_csv,
)
from modphi.rmt import det_one_minus

F3 = FiniteFieldSpec(3)
F9 = FiniteFieldSpec(3, 2)
# x^3 - x with -1 encoded as 2
X3_MINUS_X = (0, 2, 0, 1)


def legendre(a, p):
    a %= p
    return 0 if a == 0 else (1 if pow(a, (p - 1) // 2, p) == 1 else -1)


def brute_count_prime_field(coeffs, p):
    total = 0
    for x in range(p):
        fx = sum(c * x ** i for i, c in enumerate(coeffs)) % p
        total += 1 + legendre(fx, p)
    return total


def f9_elements():
    # F_9 = F_3[i] with i^2 = -1, elements a + b i with code a + 3b
    return [(a, b) for b in range(3) for a in range(3)]


def f9_mul(x, y):
    return ((x[0] * y[0] - x[1] * y[1]) % 3, (x[0] * y[1] + x[1] * y[0]) % 3)


def test_field_spec_validation():
    for bad in ((2, 1), (9, 1), (3, 0)):
        with pytest.raises(ValueError):
            FiniteFieldSpec(*bad)
    assert F9.q == 9 and F9.modulus == (1, 0, 1)
    assert FiniteFieldSpec(7).modulus == (0, 1)


@pytest.mark.parametrize("p,k", [(3, 2), (3, 3), (5, 2), (3, 4), (7, 2)])
def test_modulus_irreducible_bruteforce(p, k):
    assert FiniteFieldSpec(p, k).modulus_verified_bruteforce()


def test_f9_matches_gaussian_integers_mod_3():
    field = F9.field
    elems = f9_elements()
    for x, y in itertools.product(range(9), repeat=2):
        prod = f9_mul(elems[x], elems[y])
        assert field.mul(x, y) == prod[0] + 3 * prod[1]
        s = ((elems[x][0] + elems[y][0]) % 3, (elems[x][1] + elems[y][1]) % 3)
        assert field.add(x, y) == s[0] + 3 * s[1]


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([(3, 2), (5, 2), (3, 3), (7, 1)]), st.data())
def test_field_axioms(pk, data):
    field = FiniteFieldSpec(*pk).field
    q = field.q
    a, b, c = (data.draw(st.integers(0, q - 1)) for _ in range(3))
    assert field.mul(a, field.add(b, c)) == field.add(field.mul(a, b), field.mul(a, c))
    assert field.mul(field.mul(a, b), c) == field.mul(a, field.mul(b, c))
    assert field.add(a, field.neg(a)) == 0
    assert field.sub(field.add(a, b), b) == a
    if a:
        assert field.mul(a, field.inv(a)) == 1
        # squares are exactly the elements with chi = 1
        assert field.chi(field.mul(a, a)) == 1


def test_quadratic_character_counts():
    field = FiniteFieldSpec(5, 2).field
    chi = field.chi(np.arange(25))
    assert chi[0] == 0 and np.sum(chi == 1) == 12 and np.sum(chi == -1) == 12


def test_curve_poly_validation():
    with pytest.raises(NotSquarefreeError):
        CurvePoly((0, 0, 0, 1), F3)
    with pytest.raises(ValueError):
        CurvePoly((0, 2, 0, 2), F3)
    with pytest.raises(ValueError):
        CurvePoly((0, 1, 1), F3)
    with pytest.raises(ValueError):
        CurvePoly((0, 5, 0, 1), F3)
    assert CurvePoly(X3_MINUS_X, F3).genus == 1


def test_squarefree_mask_matches_bruteforce_f5():
    ff = FiniteFieldSpec(5)
    rows = np.array([(a, b, c, 1) for a in range(5) for b in range(5) for c in range(5)])
    mask = squarefree_mask(ff, rows)
    for row, ok in zip(rows, mask):
        roots = [x for x in range(5) if sum(int(c) * x ** i for i, c in enumerate(row)) % 5 == 0]
        # a monic cubic over F_p has a repeated root iff some root also kills f'
        der = [(i * int(row[i])) % 5 for i in range(1, 4)]
        repeated = any(sum(c * x ** i for i, c in enumerate(der)) % 5 == 0 for x in roots)
        assert ok == (not repeated)


@pytest.mark.parametrize("p,k,g,expected", [(3, 1, 1, 18), (5, 1, 1, 100), (3, 2, 1, 648), (3, 1, 2, 162)])
def test_enumeration_sizes(p, k, g, expected):
    ff = FiniteFieldSpec(p, k)
    curves = list(enumerate_hyperelliptic(ff, g))
    assert len(curves) == expected == ff.q ** (2 * g) * (ff.q - 1)
    assert len({c.coeffs for c in curves}) == expected
    assert (0, 0, 0, 1) not in {c.coeffs for c in curves}


def test_enumeration_budget():
    with pytest.raises(BudgetError):
        next(iter(enumerate_hyperelliptic(FiniteFieldSpec(101), 3)))
    with pytest.raises(ValueError):
        next(iter(enumerate_hyperelliptic(F3, 0)))


def test_point_count_examples():
    f = CurvePoly(X3_MINUS_X, F3)
    assert count_affine_points(f) == 3
    assert count_affine_points(f, n=2) == 15
    assert count_affine_points(CurvePoly(X3_MINUS_X, F9)) == 15


def test_point_count_f9_bruteforce():
    elems = f9_elements()
    squares = {f9_mul(e, e) for e in elems}
    for coeffs in [(0, 2, 0, 1), (1, 0, 0, 1), (5, 7, 2, 1), (4, 0, 3, 1)]:
        total = 0
        for x in elems:
            acc, power = (0, 0), (1, 0)
            for c in coeffs:
                term = f9_mul(elems[c], power)
                acc = ((acc[0] + term[0]) % 3, (acc[1] + term[1]) % 3)
                power = f9_mul(power, x)
            total += 1 if acc == (0, 0) else (2 if acc in squares else 0)
        assert count_affine_points_many(F9, [coeffs])[0] == total


@pytest.mark.parametrize("p", [3, 5, 7])
def test_point_counts_prime_field_bruteforce(p):
    ff = FiniteFieldSpec(p)
    for f in list(enumerate_hyperelliptic(ff, 1))[:60]:
        assert count_affine_points(f) == brute_count_prime_field(f.coeffs, p)
        assert count_affine_points(f, n=2) <= 2 * p ** 2


def test_count_budget():
    with pytest.raises(BudgetError):
        count_affine_points(CurvePoly(X3_MINUS_X, F3), n=15)


def test_l_polynomial_examples():
    L = l_polynomial(CurvePoly(X3_MINUS_X, F3))
    assert L.coeffs == (1, 0, 3) and L(0) == 1
    L9 = l_polynomial(CurvePoly(X3_MINUS_X, F9))
    assert L9.coeffs == (1, 6, 9)
    with pytest.raises(ValueError):
        LPolynomial((2, 0, 3), 3)
    with pytest.raises(ValueError):
        LPolynomial((1, 0), 3)


def test_verify_weil_examples():
    rep = verify_weil(LPolynomial((1, 0, 3), 3))
    assert rep.max_residual < 1e-12 and rep.functional_equation
    assert np.allclose(sorted(rep.inverse_roots, key=lambda z: z.imag), [-1j * math.sqrt(3), 1j * math.sqrt(3)])
    rep = verify_weil(LPolynomial((1, 6, 9), 9))
    assert rep.max_residual < 1e-12 and np.allclose(rep.inverse_roots, -3)
    assert not LPolynomial((1, 1, 2), 3).functional_equation_holds()


def test_frobenius_angle_examples():
    assert frobenius_angles(LPolynomial((1, 0, 3), 3)) == pytest.approx([math.pi / 2])
    assert frobenius_angles(LPolynomial((1, 6, 9), 9)) == pytest.approx([math.pi])
    with pytest.raises(PairingError):
        frobenius_angles(LPolynomial((1, 10, 3), 3))


def test_det_matches_l_at_half():
    for f in enumerate_hyperelliptic(FiniteFieldSpec(5), 2):
        L = l_polynomial(f, check=False)
        ang = frobenius_angles(L)
        assert abs(det_one_minus(ang, symplectic=True) - L(5 ** -0.5)) < 1e-9
        if f.coeffs[0] > 1:
            break


def test_half_value_surd():
    A, B = half_value_surd(LPolynomial((1, 6, 9), 9))
    # 9 P(1/3) = 9 + 6*3 ... written as A + B sqrt(9)
    assert A + 3 * B == 9 * 4
    A, B = half_value_surd(LPolynomial((1, 2, 3), 3))
    assert A == 6 and B == 2


@pytest.mark.parametrize("p,k,g", [(3, 1, 1), (5, 1, 1), (3, 2, 1), (3, 1, 2), (5, 1, 2)])
def test_scan_invariants(p, k, g):
    ff = FiniteFieldSpec(p, k)
    scan = scan_ensemble(ff, g)
    assert scan.size == ff.q ** (2 * g) * (ff.q - 1)
    assert scan.roundtrip_checked
    assert scan.max_weil_residual <= 1e-9
    assert np.all(scan.lcoeffs[:, 0] == 1)
    q = ff.q
    for row in scan.lcoeffs:
        assert all(row[2 * g - i] == q ** (g - i) * row[i] for i in range(g + 1))
    assert np.all((scan.angles >= 0) & (scan.angles <= math.pi))
    assert np.all(scan.det >= 0)


def test_roundtrip_counts_single_curve():
    f = CurvePoly((1, 2, 0, 4, 0, 1), FiniteFieldSpec(5))
    L = l_polynomial(f)
    assert counts_from_l(L, 4) == [count_affine_points(f, n=n) for n in range(1, 5)]


@settings(max_examples=15, deadline=None)
@given(st.lists(st.integers(0, 6), min_size=5, max_size=5))
def test_random_genus2_curves_satisfy_weil(low):
    ff = FiniteFieldSpec(7)
    coeffs = tuple(low) + (1,)
    if not squarefree_mask(ff, np.array([coeffs]))[0]:
        return
    L = l_polynomial(CurvePoly(coeffs, ff))
    rep = verify_weil(L)
    assert rep.functional_equation and rep.max_residual <= 1e-9


def test_ensemble_moment_examples():
    assert ensemble_moment(F3, 1, lam=0).value == 1
    exact = ensemble_moment_exact(F3, 1, 1)
    # brute force: det = P(3^{-1/2}) = 2 + a_1 / sqrt 3 with a_1 = N_1 - 3
    a1 = [brute_count_prime_field(f.coeffs, 3) - 3 for f in enumerate_hyperelliptic(F3, 1)]
    assert exact == (Fraction(2), Fraction(sum(a1), 3 * len(a1)))
    assert exact == (Fraction(2), Fraction(0))
    assert ensemble_moment(F3, 1, lam=1).value == pytest.approx(2, abs=1e-12)
    m13 = ensemble_moment(FiniteFieldSpec(13), 1, lam=1)
    assert abs(m13.value - 2) <= 0.5 and m13.size == 13 ** 2 * 12
    with pytest.raises(ValueError):
        ensemble_moment(F3, 1)
    with pytest.raises(ValueError):
        ensemble_moment(F3, 1, lam=-1)


def test_vanishing_curves_over_f9():
    scan = scan_ensemble(F9, 1, angles=False)
    assert scan.vanishing.sum() == 6
    for row in scan.lcoeffs[scan.vanishing]:
        # L(1/2) = 0 over q = 9 means P(T) = (1 - 3T)^2
        assert tuple(row) == (1, -6, 9)
    with pytest.raises(ValueError):
        ensemble_moment(F9, 1, u=1.0, scan=scan)
    m = ensemble_moment(F9, 1, u=1.0, restrict_nonvanishing=True, scan=scan)
    assert m.size == 642 and m.excluded == 6
    x, y = ensemble_moment_exact(F9, 1, 2, restrict_nonvanishing=True, scan=scan)
    assert y == 0
    assert float(x) == pytest.approx(ensemble_moment(F9, 1, lam=2, restrict_nonvanishing=True, scan=scan).value.real)


def test_ks_trend_along_q():
    dists = [angle_ks_distance(scan_ensemble(FiniteFieldSpec(q), 1).angles) for q in (5, 13, 41)]
    assert dists[0] > dists[1] > dists[2]


def test_irreducible_counts():
    assert [count_irreducibles(3, d) for d in (1, 2, 3)] == [3, 3, 8]
    for q, dmax in ((3, 4), (5, 3), (9, 2)):
        ff = FiniteFieldSpec(*{3: (3, 1), 5: (5, 1), 9: (3, 2)}[q])
        for d in range(1, dmax + 1):
            assert count_irreducibles_bruteforce(ff, d) == count_irreducibles(q, d)
    with pytest.raises(ValueError):
        count_irreducibles(3, 0)
    with pytest.raises(BudgetError):
        count_irreducibles_bruteforce(F3, 5)


def test_arithmetic_factor_ah():
    assert arithmetic_factor_Ah(1e-12, 3) == pytest.approx(1, abs=1e-10)
    assert abs(arithmetic_factor_Ah(2, 3, 20) - arithmetic_factor_Ah(2, 3, 12)) < 1e-6
    assert arithmetic_factor_Ah(2, F3, 20) == arithmetic_factor_Ah(2, 3, 20)
    with pytest.raises(ValueError):
        arithmetic_factor_Ah(1, 3, 31)


def test_records_csv(tmp_path):
    scan = scan_ensemble(F3, 1)
    path = tmp_path / "curves.csv"
    write_records_csv(scan, path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["q", "g", "f0", "f1", "f2", "f3", "a1", "vanishing", "theta1"]
    assert len(rows) == 19
    first = rows[1]
    assert first[:2] == ["3", "1"] and first[5] == "1"
