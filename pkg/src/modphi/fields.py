"""Hyperelliptic curves over finite fields and their L-polynomials.

Field elements of ``F_q``, ``q = p^k``, are ints in ``[0, q)`` whose base-``p``
digits are the coefficients of ``1, T, ..., T^{k-1}`` in ``F_p[T]/(m)``.
Polynomials over ``F_q`` are coefficient arrays ordered ``a_0`` first.
Multiplication goes through log/exp tables built from a primitive element;
addition is digit-wise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, Optional

import numpy as np
from scipy import stats

__all__ = [
    "BudgetError",
    "InconsistencyError",
    "PairingError",
    "NotSquarefreeError",
    "FiniteFieldSpec",
    "GaloisField",
    "CurvePoly",
    "LPolynomial",
    "WeilReport",
    "EnsembleScan",
    "EnsembleMoment",
    "ENUMERATION_BUDGET",
    "COUNT_BUDGET",
    "enumerate_hyperelliptic",
    "enumerate_hyperelliptic_arrays",
    "squarefree_mask",
    "count_affine_points",
    "count_affine_points_many",
    "l_polynomial",
    "l_polynomial_from_counts",
    "counts_from_l",
    "verify_weil",
    "frobenius_angles",
    "half_value_surd",
    "scan_ensemble",
    "ensemble_moment",
    "ensemble_moment_exact",
    "angle_ks_distance",
    "count_irreducibles",
    "count_irreducibles_bruteforce",
    "arithmetic_factor_Ah",
    "write_records_csv",
]

ENUMERATION_BUDGET = 10 ** 8
COUNT_BUDGET = 10 ** 7
# extension fields up to this size get a full addition table
_ADD_TABLE_MAX = 2048


class BudgetError(ValueError):
    """Requested enumeration or point count exceeds the supported size."""


class InconsistencyError(ArithmeticError):
    """Point counts disagree with the L-polynomial they determine."""


class PairingError(ArithmeticError):
    """Inverse roots are not closed under conjugation within tolerance."""


class NotSquarefreeError(ValueError):
    """The curve polynomial has a repeated root."""


# ---------------------------------------------------------------- F_p[T] helpers

def _trim(a):
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return a


def _pmod(a, m, p):
    a = list(a)
    dm = len(m) - 1
    inv_lead = pow(m[-1], -1, p)
    while len(a) - 1 >= dm and any(a):
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        a.pop()
    return _trim(a or [0])


def _pmul(a, b, p):
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _trim(out)


def _pgcd(a, b, p):
    a, b = _trim(list(a)), _trim(list(b))
    while any(b):
        a, b = b, _pmod(a, b, p)
    return a


def _ppowmod(base, e, m, p):
    result = [1]
    base = _pmod(base, m, p)
    while e:
        if e & 1:
            result = _pmod(_pmul(result, base, p), m, p)
        base = _pmod(_pmul(base, base, p), m, p)
        e >>= 1
    return result


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


def _is_prime(n):
    return n >= 2 and _prime_factors(n) == [n]


def _is_irreducible_rabin(m, p):
    """Rabin's test for a monic ``m`` (low-first) over ``F_p``."""
    k = len(m) - 1
    x = [0, 1]

    def frob_power(j):
        r = x
        for _ in range(j):
            r = _ppowmod(r, p, m, p)
        return r

    full = frob_power(k)
    if _trim([(a - b) % p for a, b in zip(full + [0] * 2, x + [0] * len(full))]) != [0]:
        return False
    for r in _prime_factors(k):
        h = frob_power(k // r)
        diff = [0] * max(len(h), 2)
        for i, c in enumerate(h):
            diff[i] = c
        diff[1] = (diff[1] - 1) % p
        if len(_pgcd(m, _trim(diff), p)) != 1:
            return False
    return True


@lru_cache(maxsize=None)
def _least_irreducible(p, k):
    """Monic irreducible of degree ``k`` with the smallest code ``sum c_i p^i``."""
    if k == 1:
        return (0, 1)
    for code in range(p ** k):
        coeffs = [(code // p ** i) % p for i in range(k)] + [1]
        if coeffs[0] == 0:
            continue
        if _is_irreducible_rabin(coeffs, p):
            return tuple(coeffs)
    raise ArithmeticError("no irreducible polynomial found")


# ---------------------------------------------------------------- field tables

class GaloisField:
    """Arithmetic tables for ``F_p[T]/(m)``."""

    def __init__(self, p, k, modulus):
        self.p, self.k, self.q = p, k, p ** k
        self.modulus = tuple(modulus)
        q = self.q
        self.pw = p ** np.arange(k, dtype=np.int64)
        codes = np.arange(q, dtype=np.int64)
        self.digits = ((codes[:, None] // self.pw[None, :]) % p).astype(np.int64)
        self.exp, self.log = self._build_tables()
        self._chi = np.where(self.log % 2 == 0, 1, -1).astype(np.int64)
        self._chi[0] = 0
        self._add_table = None
        if 1 < k and q <= _ADD_TABLE_MAX:
            d = self.digits
            self._add_table = ((d[:, None, :] + d[None, :, :]) % p) @ self.pw

    # multiplication by a fixed element as a k x k matrix over F_p
    def _mul_matrix(self, x_digits):
        p, k = self.p, self.k
        m = np.array(self.modulus[:-1], dtype=np.int64)
        cols = []
        cur = np.array(x_digits, dtype=np.int64)
        for _ in range(k):
            cols.append(cur.copy())
            top = cur[-1]
            cur = np.concatenate([[0], cur[:-1]])
            cur = (cur - top * m) % p
        return np.stack(cols, axis=1)

    def _vec_mul(self, x, y):
        return self._mul_matrix(x) @ y % self.p

    def _vec_pow(self, x, e):
        result = np.zeros(self.k, dtype=np.int64)
        result[0] = 1
        base = np.array(x, dtype=np.int64)
        while e:
            if e & 1:
                result = self._vec_mul(result, base)
            base = self._vec_mul(base, base)
            e >>= 1
        return result

    def _primitive_element(self):
        order = self.q - 1
        one = np.zeros(self.k, dtype=np.int64)
        one[0] = 1
        factors = _prime_factors(order)
        for code in range(2, self.q):
            x = self.digits[code]
            if all(not np.array_equal(self._vec_pow(x, order // r), one) for r in factors):
                return x
        return self.digits[1]  # q = 2 is excluded; F_3 hits code 2 above

    def _build_tables(self):
        q, k, p = self.q, self.k, self.p
        n = q - 1
        gen = self._primitive_element()
        block = max(1, math.isqrt(n))
        base = np.empty((block, k), dtype=np.int64)
        cur = np.zeros(k, dtype=np.int64)
        cur[0] = 1
        step = self._mul_matrix(gen)
        for i in range(block):
            base[i] = cur
            cur = step @ cur % p
        # cur is now gen^block
        jump = self._mul_matrix(cur)
        shift = np.eye(k, dtype=np.int64)
        exp_digits = np.empty((-(-n // block) * block, k), dtype=np.int64)
        for j in range(-(-n // block)):
            exp_digits[j * block:(j + 1) * block] = base @ shift.T % p
            shift = jump @ shift % p
        exp = (exp_digits[:n] @ self.pw).astype(np.int64)
        log = np.full(q, -1, dtype=np.int64)
        log[exp] = np.arange(n, dtype=np.int64)
        if np.any(log[1:] < 0):
            raise ArithmeticError("generator does not span the multiplicative group")
        return exp, log

    # vectorized operations on element codes
    def add(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        if self.k == 1:
            return (a + b) % self.p
        if self._add_table is not None:
            return self._add_table[a, b]
        return ((self.digits[a] + self.digits[b]) % self.p) @ self.pw

    def neg(self, a):
        a = np.asarray(a, dtype=np.int64)
        if self.k == 1:
            return (-a) % self.p
        return ((-self.digits[a]) % self.p) @ self.pw

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        a, b = np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)
        zero = (a == 0) | (b == 0)
        out = self.exp[(self.log[a] + self.log[b]) % (self.q - 1)]
        return np.where(zero, 0, out)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("0 has no inverse")
        return self.exp[(-self.log[a]) % (self.q - 1)]

    def from_int(self, n):
        """Image of the integer ``n`` in the prime subfield."""
        return int(n) % self.p

    def chi(self, a):
        """Quadratic character; a primitive element is a non-square."""
        return self._chi[np.asarray(a, dtype=np.int64)]

    def poly_eval(self, coeffs, x):
        """Values of polynomials at points: ``coeffs`` is ``(d+1,)`` or ``(B, d+1)``
        (``a_0`` first), ``x`` is 1-d; the result has shape ``x.shape`` or ``(B, len(x))``.
        """
        coeffs = np.asarray(coeffs, dtype=np.int64)
        x = np.asarray(x, dtype=np.int64)
        single = coeffs.ndim == 1
        c = np.atleast_2d(coeffs)
        val = np.broadcast_to(c[:, -1:], (c.shape[0], x.size)).copy()
        for i in range(c.shape[1] - 2, -1, -1):
            val = self.add(self.mul(val, x[None, :]), c[:, i:i + 1])
        return val[0] if single else val


@lru_cache(maxsize=8)
def _galois_field(p, k):
    return GaloisField(p, k, _least_irreducible(p, k))


@dataclass(frozen=True)
class FiniteFieldSpec:
    """``F_q`` with ``q = p^k``, ``p`` odd, modulus the least monic irreducible."""

    p: int
    k: int = 1

    def __post_init__(self):
        if not (_is_prime(self.p) and self.p % 2 == 1):
            raise ValueError("p must be an odd prime")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.p ** self.k > COUNT_BUDGET:
            raise BudgetError(f"q = {self.p}^{self.k} exceeds the table budget")

    @property
    def q(self):
        return self.p ** self.k

    @property
    def modulus(self):
        return _least_irreducible(self.p, self.k)

    @property
    def field(self) -> GaloisField:
        return _galois_field(self.p, self.k)

    def extension(self, n):
        return FiniteFieldSpec(self.p, self.k * n)

    def embedding(self, n):
        """Codes in ``F_{q^n}`` of the elements of ``F_q``, indexed by their code."""
        return _embedding(self.p, self.k, n)

    def modulus_verified_bruteforce(self):
        """Irreducibility of the modulus by exhaustive factor search (``k <= 4``)."""
        if self.k > 4:
            raise BudgetError("brute-force irreducibility check limited to k <= 4")
        if self.k == 1:
            return True
        prime = FiniteFieldSpec(self.p, 1)
        return not _reducible_set(prime, self.k).__contains__(self.modulus[:-1])


@lru_cache(maxsize=16)
def _embedding(p, k, n):
    big = _galois_field(p, k * n)
    if n == 1:
        return np.arange(p ** k, dtype=np.int64)
    m = _least_irreducible(p, k)
    elems = np.arange(big.q, dtype=np.int64)
    vals = big.poly_eval(np.array(m, dtype=np.int64), elems)
    roots = np.nonzero(vals == 0)[0]
    if roots.size == 0:
        raise ArithmeticError("modulus has no root in the extension")
    r = int(roots[0])
    # powers r^0..r^{k-1} in the big field
    powers = [1]
    for _ in range(k - 1):
        powers.append(int(big.mul(powers[-1], r)))
    small = _galois_field(p, k)
    out = np.zeros(p ** k, dtype=np.int64)
    for i in range(k):
        term = big.mul(small.digits[:, i], powers[i])
        out = big.add(out, term)
    return out


# ---------------------------------------------------------------- curves

def _batched_det(field: GaloisField, mats):
    """Determinants of a stack of square matrices over the field."""
    a = np.array(mats, dtype=np.int64, copy=True)
    b, n, _ = a.shape
    det = np.ones(b, dtype=np.int64)
    idx = np.arange(b)
    for c in range(n):
        nz = a[:, c:, c] != 0
        has = nz.any(axis=1)
        piv = c + np.argmax(nz, axis=1)
        det = np.where(has, det, 0)
        rows_c = a[idx, c].copy()
        rows_p = a[idx, piv].copy()
        swap = piv != c
        a[idx, c] = rows_p
        a[idx, piv] = rows_c
        det = np.where(swap & has, field.neg(det), det)
        pivot = np.where(has, a[:, c, c], 1)
        det = field.mul(det, np.where(has, pivot, 0))
        inv_p = field.inv(pivot)
        for r in range(c + 1, n):
            factor = field.mul(a[:, r, c], inv_p)
            a[:, r, :] = field.sub(a[:, r, :], field.mul(factor[:, None], a[:, c, :]))
    return det


def _derivative(field: GaloisField, coeffs):
    coeffs = np.asarray(coeffs, dtype=np.int64)
    d = coeffs.shape[-1] - 1
    out = np.empty(coeffs.shape[:-1] + (d,), dtype=np.int64)
    for i in range(1, d + 1):
        out[..., i - 1] = field.mul(coeffs[..., i], field.from_int(i))
    return out


def squarefree_mask(ff: FiniteFieldSpec, coeffs):
    """``gcd(f, f') = 1`` for each row of monic ``coeffs``, via the resultant.

    The Sylvester matrix uses the formal degree ``d - 1`` for ``f'``; with
    ``f`` monic this only changes the resultant by a unit, and ``f' = 0``
    gives a zero resultant as it should.
    """
    field = ff.field
    f = np.atleast_2d(np.asarray(coeffs, dtype=np.int64))
    b, d1 = f.shape
    d = d1 - 1
    if d == 1:
        return np.ones(b, dtype=bool)
    fp = _derivative(field, f)
    n = 2 * d - 1
    syl = np.zeros((b, n, n), dtype=np.int64)
    # rows hold coefficients highest degree first
    for r in range(d - 1):
        syl[:, r, r:r + d + 1] = f[:, ::-1]
    for r in range(d):
        syl[:, d - 1 + r, r:r + d] = fp[:, ::-1]
    return _batched_det(field, syl) != 0


def _all_monic(ff: FiniteFieldSpec, degree, start, stop):
    """Monic polynomials with codes ``start..stop-1``; code digit ``i`` is ``a_i``."""
    q = ff.q
    codes = np.arange(start, stop, dtype=np.int64)
    out = np.empty((codes.size, degree + 1), dtype=np.int64)
    for i in range(degree):
        out[:, i] = (codes // q ** i) % q
    out[:, degree] = 1
    return out


def enumerate_hyperelliptic_arrays(ff: FiniteFieldSpec, g, chunk=1 << 15) -> Iterator[np.ndarray]:
    """Squarefree monic degree-``2g+1`` polynomials, in blocks of coefficient rows."""
    if g < 1:
        raise ValueError("g must be >= 1")
    d = 2 * g + 1
    total = ff.q ** d
    if total > ENUMERATION_BUDGET:
        raise BudgetError(f"q^(2g+1) = {total} exceeds the enumeration budget")
    for start in range(0, total, chunk):
        block = _all_monic(ff, d, start, min(total, start + chunk))
        yield block[squarefree_mask(ff, block)]


def enumerate_hyperelliptic(ff: FiniteFieldSpec, g) -> Iterator["CurvePoly"]:
    """Each squarefree monic ``f`` of degree ``2g+1`` exactly once."""
    for block in enumerate_hyperelliptic_arrays(ff, g):
        for row in block:
            yield CurvePoly(tuple(int(c) for c in row), ff, checked=True)


@dataclass(frozen=True)
class CurvePoly:
    """Monic squarefree ``f`` of odd degree ``2g+1``, coefficients ``a_0`` first."""

    coeffs: tuple
    ff: FiniteFieldSpec
    checked: bool = False

    def __post_init__(self):
        c = tuple(int(x) for x in self.coeffs)
        object.__setattr__(self, "coeffs", c)
        if len(c) < 2 or len(c) % 2 == 1:
            raise ValueError("degree must be odd, 2g+1 with g >= 1")
        if c[-1] != 1:
            raise ValueError("f must be monic")
        if any(not 0 <= x < self.ff.q for x in c):
            raise ValueError("coefficients must be field element codes in [0, q)")
        if not self.checked and not squarefree_mask(self.ff, np.array([c]))[0]:
            raise NotSquarefreeError("f has a repeated root")
        object.__setattr__(self, "checked", True)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def genus(self):
        return (self.degree - 1) // 2


def count_affine_points_many(ff: FiniteFieldSpec, coeffs, n=1, max_cells=1 << 22):
    """Affine points of ``y^2 = f(x)`` over ``F_{q^n}`` for each row of ``coeffs``."""
    Q = ff.q ** n
    if Q > COUNT_BUDGET:
        raise BudgetError(f"q^n = {Q} exceeds the counting budget")
    big = ff.extension(n).field
    emb = ff.embedding(n)
    f = emb[np.atleast_2d(np.asarray(coeffs, dtype=np.int64))]
    xs = np.arange(Q, dtype=np.int64)
    out = np.empty(f.shape[0], dtype=np.int64)
    rows = max(1, max_cells // Q)
    for s in range(0, f.shape[0], rows):
        block = f[s:s + rows]
        # chunk over x as well when a single row is large
        total = np.zeros(block.shape[0], dtype=np.int64)
        step = max(1, max_cells // max(1, block.shape[0]))
        for t in range(0, Q, step):
            vals = big.poly_eval(block, xs[t:t + step])
            total += np.sum(big.chi(vals), axis=1)
        out[s:s + rows] = Q + total
    return out


def count_affine_points(f: CurvePoly, ff: Optional[FiniteFieldSpec] = None, n=1):
    """``|{(x, y) in F_{q^n}^2 : y^2 = f(x)}|``."""
    ff = ff or f.ff
    return int(count_affine_points_many(ff, np.array([f.coeffs]), n)[0])


@dataclass(frozen=True)
class LPolynomial:
    """Integer coefficients ``a_0..a_{2g}`` of ``P(T)``, with ``a_0 = 1``."""

    coeffs: tuple
    q: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if self.coeffs[0] != 1:
            raise ValueError("P(0) must be 1")
        if len(self.coeffs) % 2 == 0:
            raise ValueError("degree must be even")

    @property
    def genus(self):
        return (len(self.coeffs) - 1) // 2

    def functional_equation_holds(self):
        g, a, q = self.genus, self.coeffs, self.q
        return all(a[2 * g - i] == q ** (g - i) * a[i] for i in range(g + 1))

    def __call__(self, t):
        return sum(c * t ** i for i, c in enumerate(self.coeffs))


def l_polynomial_from_counts(affine_counts, q, g):
    """Newton identities from ``s_n = q^n - N_n`` (``N_n`` affine counts, ``n <= g``)."""
    s = [None] + [q ** n - int(affine_counts[n - 1]) for n in range(1, g + 1)]
    e = [1]
    for k in range(1, g + 1):
        acc = sum((-1) ** (i - 1) * e[k - i] * s[i] for i in range(1, k + 1))
        if acc % k:
            raise InconsistencyError("Newton identity gave a non-integer coefficient")
        e.append(acc // k)
    a = [(-1) ** k * e[k] for k in range(g + 1)]
    a += [q ** (g - i) * a[i] for i in range(g - 1, -1, -1)]
    return LPolynomial(tuple(a), q)


def counts_from_l(L: LPolynomial, n_max):
    """Affine counts ``N_n = q^n - s_n`` with ``s_n = sum alpha_j^n``."""
    a = L.coeffs
    deg = len(a) - 1
    e = [(-1) ** i * a[i] for i in range(deg + 1)]
    s = [None]
    for n in range(1, n_max + 1):
        acc = sum((-1) ** (i - 1) * e[i] * s[n - i] for i in range(1, min(n - 1, deg) + 1))
        if n <= deg:
            acc += (-1) ** (n - 1) * n * e[n]
        s.append(acc)
    return [L.q ** n - s[n] for n in range(1, n_max + 1)]


def l_polynomial(f: CurvePoly, ff: Optional[FiniteFieldSpec] = None, check=True):
    """L-polynomial of the smooth projective model of ``y^2 = f(x)``.

    With ``check`` the counts for ``n = g+1..2g`` predicted by the result are
    compared with direct counts while ``q^n`` stays within the budget.
    """
    ff = ff or f.ff
    g = f.genus
    counts = [count_affine_points(f, ff, n) for n in range(1, g + 1)]
    L = l_polynomial_from_counts(counts, ff.q, g)
    if check:
        predicted = counts_from_l(L, 2 * g)
        for n in range(g + 1, 2 * g + 1):
            if ff.q ** n > COUNT_BUDGET:
                break
            if count_affine_points(f, ff, n) != predicted[n - 1]:
                raise InconsistencyError(f"count over F_(q^{n}) disagrees with the L-polynomial")
    return L


def _trace_poly(L: LPolynomial):
    """Integer ``R`` with ``P(T) T^{-g} = R(T^{-1} + qT)``; roots are ``2 sqrt(q) cos theta``.

    Uses ``T^{-m} + q^m T^m = D_m(s)``, ``D_0 = 2``, ``D_1 = s``,
    ``D_{m+1} = s D_m - q D_{m-1}``. Returned highest degree first.
    """
    g, a, q = L.genus, L.coeffs, L.q
    d_prev, d_cur = [2], [0, 1]  # low-first
    r = [0] * (g + 1)
    r[0] = a[g]
    for m in range(1, g + 1):
        for i, c in enumerate(d_cur):
            r[i] += a[g - m] * c
        nxt = [0] + d_cur
        for i, c in enumerate(d_prev):
            nxt[i] -= q * c
        d_prev, d_cur = d_cur, nxt
    return r[::-1]


def _q_trim(a):
    i = 0
    while i < len(a) - 1 and a[i] == 0:
        i += 1
    return a[i:]


def _q_divmod(a, b):
    """Quotient and remainder of rational polynomials, highest degree first."""
    a = list(a)
    quot = []
    while len(a) >= len(b):
        c = a[0] / b[0]
        quot.append(c)
        for i, bv in enumerate(b):
            a[i] -= c * bv
        a.pop(0)
    return quot or [Fraction(0)], _q_trim(a or [Fraction(0)])


def _q_monic_gcd(a, b):
    while any(b):
        a, b = b, _q_divmod(a, b)[1]
    return [c / a[0] for c in a]


def _q_derivative(a):
    n = len(a) - 1
    return [c * (n - i) for i, c in enumerate(a[:-1])] or [Fraction(0)]


def _squarefree_factors(r):
    """Yun's decomposition ``r = c prod_i f_i^i`` over Q, as ``[(f_i, i)]``."""
    f = [Fraction(c) for c in r]
    c = _q_monic_gcd(f, _q_derivative(f))
    w = _q_divmod(f, c)[0]
    out = []
    i = 1
    while len(w) > 1:
        y = _q_monic_gcd(w, c)
        z = _q_divmod(w, y)[0]
        if len(z) > 1:
            out.append((z, i))
        i += 1
        w = y
        c = _q_divmod(c, y)[0]
    return out


def _traces(L: LPolynomial):
    """Roots of the trace polynomial with multiplicity.

    Repeated roots are split off exactly over Q first, since floating root
    finders only resolve a double root to about ``sqrt(eps)``.
    """
    r = _trace_poly(L)
    if L.genus == 1:
        return np.array([complex(-r[1] / r[0])])
    roots = []
    for factor, mult in _squarefree_factors(r):
        if len(factor) == 2:
            vals = np.array([complex(-factor[1] / factor[0])])
        else:
            vals = np.roots(np.array([float(c) for c in factor])).astype(complex)
        roots.extend(list(vals) * mult)
    return np.array(roots)


@dataclass(frozen=True)
class WeilReport:
    max_residual: float
    functional_equation: bool
    inverse_roots: np.ndarray


def verify_weil(L: LPolynomial, q: Optional[int] = None):
    """``max | |alpha_j| - sqrt(q) |`` and the exact functional-equation check."""
    q = q or L.q
    out = []
    root_q = math.sqrt(q)
    for x in _traces(L):
        if abs(x.imag) <= 1e-12 * root_q and abs(x.real) <= 2.0 * root_q * (1.0 + 1e-12):
            # polar form: t^2 - 4q loses all digits when |t| sits at 2 sqrt(q)
            z = root_q * np.exp(1j * math.acos(max(-1.0, min(1.0, x.real / (2.0 * root_q)))))
            out.extend([z, z.conjugate()])
            continue
        disc = np.sqrt(complex(x * x - 4.0 * q))
        out.extend([(x + disc) / 2.0, (x - disc) / 2.0])
    alphas = np.array(out)
    res = float(np.max(np.abs(np.abs(alphas) - math.sqrt(q))))
    return WeilReport(res, L.functional_equation_holds(), alphas)


def frobenius_angles(L: LPolynomial, q: Optional[int] = None, tol=1e-6, weil_residual=None):
    """Angles ``theta_j in [0, pi]`` of the unitarized Frobenius, one per conjugate pair."""
    q = q or L.q
    traces = _traces(L)
    scale = 2.0 * math.sqrt(q)
    if np.any(np.abs(traces.imag) > tol * scale):
        raise PairingError("inverse roots are not conjugate pairs on the Weil circle")
    if weil_residual is None:
        weil_residual = verify_weil(L, q).max_residual
    if weil_residual >= tol:
        raise PairingError("Weil residual too large to define angles")
    return np.sort(np.arccos(np.clip(traces.real / scale, -1.0, 1.0)))


def half_value_surd(L: LPolynomial):
    """Integers ``(A, B)`` with ``q^g P(q^{-1/2}) = A + B sqrt(q)``."""
    g, q = L.genus, L.q
    A = B = 0
    for i, c in enumerate(L.coeffs):
        if i % 2 == 0:
            A += c * q ** (g - i // 2)
        else:
            B += c * q ** (g - (i + 1) // 2)
    return A, B


def _surd_is_zero(A, B, q):
    r = math.isqrt(q)
    if r * r == q:
        return A + B * r == 0
    return A == 0 and B == 0


@dataclass
class EnsembleScan:
    """Per-curve data of ``H_{g,q}`` in enumeration order."""

    ff: FiniteFieldSpec
    g: int
    coeffs: np.ndarray
    lcoeffs: np.ndarray
    det: np.ndarray
    vanishing: np.ndarray
    angles: np.ndarray
    max_weil_residual: float
    roundtrip_checked: bool

    @property
    def size(self):
        return self.coeffs.shape[0]


def scan_ensemble(ff: FiniteFieldSpec, g, roundtrip=None, angles=True):
    """L-polynomials, ``det(1 - F_f) = P_f(q^{-1/2})`` and angles over ``H_{g,q}``.

    ``roundtrip`` compares direct counts for ``n = g+1..2g`` with those
    predicted by the L-polynomial; by default it runs when ``q^{2g} <= 1e5``.
    """
    q = ff.q
    if roundtrip is None:
        roundtrip = q ** (2 * g) <= 10 ** 5
    blocks = list(enumerate_hyperelliptic_arrays(ff, g))
    coeffs = np.concatenate(blocks) if blocks else np.zeros((0, 2 * g + 2), dtype=np.int64)
    n_max = 2 * g if roundtrip else g
    counts = np.stack([count_affine_points_many(ff, coeffs, n) for n in range(1, n_max + 1)], axis=1)
    lco = np.empty((coeffs.shape[0], 2 * g + 1), dtype=np.int64)
    det = np.empty(coeffs.shape[0])
    van = np.zeros(coeffs.shape[0], dtype=bool)
    ang = np.full((coeffs.shape[0], g), np.nan)
    worst = 0.0
    for i in range(coeffs.shape[0]):
        L = l_polynomial_from_counts(counts[i, :g], q, g)
        if roundtrip and counts_from_l(L, n_max) != [int(c) for c in counts[i]]:
            raise InconsistencyError(f"count roundtrip failed for f = {coeffs[i].tolist()}")
        lco[i] = L.coeffs
        A, B = half_value_surd(L)
        van[i] = _surd_is_zero(A, B, q)
        det[i] = 0.0 if van[i] else (A + B * math.sqrt(q)) / q ** g
        rep = verify_weil(L)
        if not rep.functional_equation:
            raise InconsistencyError("functional equation fails")
        worst = max(worst, rep.max_residual)
        if angles:
            ang[i] = frobenius_angles(L, weil_residual=rep.max_residual)
    return EnsembleScan(ff, g, coeffs, lco, det, van, ang, worst, bool(roundtrip))


@dataclass(frozen=True)
class EnsembleMoment:
    value: complex
    size: int
    excluded: int


def ensemble_moment(ff: FiniteFieldSpec, g, lam=None, u=None, restrict_nonvanishing=False,
                    scan: Optional[EnsembleScan] = None):
    """Average of ``det(1 - F_f)^lam`` or of ``exp(iu log det(1 - F_f))``.

    Exactly one of ``lam >= 0`` and ``u`` is given. The ``u`` form needs
    ``restrict_nonvanishing`` when the ensemble contains curves with
    ``L(f, 1/2) = 0``. The renormalization ``g^{-iu/2 + u^2/2}`` is left to
    the caller.
    """
    if (lam is None) == (u is None):
        raise ValueError("give exactly one of lam and u")
    if lam is not None and lam < 0:
        raise ValueError("lam must be >= 0")
    scan = scan or scan_ensemble(ff, g, angles=False)
    keep = ~scan.vanishing if restrict_nonvanishing else np.ones(scan.size, dtype=bool)
    d = scan.det[keep]
    excluded = int(scan.size - keep.sum())
    if lam is not None:
        vals = np.where(d == 0, 1.0 if lam == 0 else 0.0, np.abs(d) ** lam)
        return EnsembleMoment(complex(vals.mean()), int(d.size), excluded)
    if np.any(d == 0):
        raise ValueError("vanishing curves present; pass restrict_nonvanishing=True")
    return EnsembleMoment(complex(np.mean(np.exp(1j * float(u) * np.log(d)))), int(d.size), excluded)


def ensemble_moment_exact(ff: FiniteFieldSpec, g, lam: int, restrict_nonvanishing=False,
                          scan: Optional[EnsembleScan] = None):
    """Exact average of ``det(1 - F_f)^lam`` as rationals ``(x, y)`` meaning ``x + y sqrt(q)``."""
    if lam < 0 or int(lam) != lam:
        raise ValueError("lam must be a non-negative integer")
    scan = scan or scan_ensemble(ff, g, angles=False)
    q = ff.q
    sx, sy, count = Fraction(0), Fraction(0), 0
    for i in range(scan.size):
        if restrict_nonvanishing and scan.vanishing[i]:
            continue
        A, B = half_value_surd(LPolynomial(tuple(scan.lcoeffs[i]), q))
        x, y = Fraction(A, q ** g), Fraction(B, q ** g)
        px, py = Fraction(1), Fraction(0)
        for _ in range(int(lam)):
            px, py = px * x + py * y * q, px * y + py * x
        sx += px
        sy += py
        count += 1
    if count == 0:
        raise ValueError("empty ensemble")
    r = math.isqrt(q)
    if r * r == q:
        return sx / count + sy * r / count, Fraction(0)
    return sx / count, sy / count


def angle_ks_distance(angles):
    """KS distance of angles to the law with density ``(2/pi) sin^2``."""
    a = np.asarray(angles, dtype=float).ravel()
    return float(stats.kstest(a, lambda t: t / np.pi - np.sin(2.0 * t) / (2.0 * np.pi)).statistic)


# ---------------------------------------------------------------- irreducibles and A_h

def _mobius(n):
    fs = _prime_factors(n)
    m = n
    for f in fs:
        m //= f
        if m % f == 0:
            return 0
    return -1 if len(fs) % 2 else 1


def count_irreducibles(q, d):
    """Monic irreducibles of degree ``d`` over ``F_q``: ``(1/d) sum_{e|d} mu(e) q^{d/e}``."""
    if d < 1:
        raise ValueError("d must be >= 1")
    total = sum(_mobius(e) * q ** (d // e) for e in range(1, d + 1) if d % e == 0)
    return total // d


def _poly_mul_many(field: GaloisField, a, b):
    """Products of rows of ``a`` with rows of ``b`` (all pairs), ``a_0`` first."""
    na, da = a.shape
    nb, db = b.shape
    out = np.zeros((na, nb, da + db - 1), dtype=np.int64)
    for i in range(da):
        for j in range(db):
            out[:, :, i + j] = field.add(out[:, :, i + j], field.mul(a[:, i, None], b[None, :, j]))
    return out.reshape(na * nb, -1)


def _reducible_set(ff: FiniteFieldSpec, d):
    field = ff.field
    seen = set()
    for i in range(1, d // 2 + 1):
        a = _all_monic(ff, i, 0, ff.q ** i)
        b = _all_monic(ff, d - i, 0, ff.q ** (d - i))
        prods = _poly_mul_many(field, a, b)
        seen.update(map(tuple, prods[:, :-1].tolist()))
    return seen


def count_irreducibles_bruteforce(ff: FiniteFieldSpec, d):
    """Monic irreducibles of degree ``d`` by marking all products of lower degrees."""
    if d > 4:
        raise BudgetError("brute-force count limited to d <= 4")
    if d == 1:
        return ff.q
    return ff.q ** d - len(_reducible_set(ff, d))


def arithmetic_factor_Ah(lam, q, degree_cutoff=20):
    """Product of the conjectural local factors over monic irreducibles of degree ``<= D``.

    The local factor at ``pi`` with ``x = |pi|^{-1/2}`` is
    ``(1 - x^2)^{lam(lam+1)/2} (1 + {(1-x)^{-lam} + (1+x)^{-lam} - 2} / (2(1 + x^2)))``.
    """
    if not 1 <= degree_cutoff <= 30:
        raise ValueError("degree_cutoff must be in [1, 30]")
    q = q.q if isinstance(q, FiniteFieldSpec) else int(q)
    lam = float(lam)
    terms = []
    for d in range(1, degree_cutoff + 1):
        x2 = float(q) ** (-d)
        x = math.sqrt(x2)
        bracket = (1.0 - x) ** (-lam) + (1.0 + x) ** (-lam) - 2.0
        log_local = 0.5 * lam * (lam + 1.0) * math.log1p(-x2) + math.log1p(bracket / (2.0 * (1.0 + x2)))
        terms.append(count_irreducibles(q, d) * log_local)
    return math.exp(math.fsum(terms))


def write_records_csv(scan: EnsembleScan, path):
    """One row per curve: q, g, f coefficients, a_1..a_g, vanishing flag, angles."""
    g = scan.g
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["q", "g"] + [f"f{i}" for i in range(2 * g + 2)]
                   + [f"a{i}" for i in range(1, g + 1)] + ["vanishing"]
                   + [f"theta{j}" for j in range(1, g + 1)])
        for i in range(scan.size):
            w.writerow([scan.ff.q, g] + scan.coeffs[i].tolist() + scan.lcoeffs[i, 1:g + 1].tolist()
                       + [int(scan.vanishing[i])] + [f"{t:.15g}" for t in scan.angles[i]])
