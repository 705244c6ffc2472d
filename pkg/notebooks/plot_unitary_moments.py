"""
Characteristic polynomials of random unitary matrices
=====================================================

The log-modulus of ``det(I - U)`` for Haar ``U`` in U(N) grows like a
Gaussian with variance ``log(N)/2``. After dividing out that Gaussian, the
characteristic function settles to a Barnes G ratio.
"""
import numpy as np

from modphi.limits import rmt_factor_M
from modphi.rmt import unitary_moment_mc

# exact limiting factor at a few imaginary arguments
us = [0.25, 0.5, 1.0]
for u in us:
    print(f"M(i*{u}) = {complex(rmt_factor_M(1j * u)):.6f}")

# Monte Carlo at moderate N; the product law is exact and fast
for N in (10, 50):
    est = unitary_moment_mc(N, us, 20000, seed=1, method="product")
    for u, e in zip(us, est):
        print(f"N={N:3d} u={u}: {e.value:.4f} +- {e.se:.4f}")

# real moments E|det|^{2k} grow like N^{k^2} M(k)
print("M(1) =", float(np.real(rmt_factor_M(1.0))))
