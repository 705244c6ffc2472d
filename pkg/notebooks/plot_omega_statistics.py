"""
Counting distinct prime factors
===============================

``omega(n)`` for ``n <= N`` is close to a Poisson variable with parameter
``log log N``. Dividing out that Poisson characteristic function leaves a
product of an arithmetic factor and a Gamma factor.
"""
import numpy as np

from modphi.arith import erdos_kac_cf, omega_renormalized_cf, omega_sieve
from modphi.limits import phi_omega

u = np.linspace(-3, 3, 61)
ref = phi_omega(u, 10 ** 6)
for N in (10 ** 4, 10 ** 6):
    counts = omega_sieve(N)
    err = np.max(np.abs(omega_renormalized_cf(counts, u) - ref))
    print(f"N={N:8d}  sup |renormalized cf - limit| = {err:.3f}")

# the Gaussian rescaling converges, but only at rate 1/sqrt(log log N)
v = np.linspace(-2, 2, 41)
counts = omega_sieve(10 ** 6)
print("Erdos-Kac distance:", np.max(np.abs(erdos_kac_cf(counts, v) - np.exp(-v * v / 2))))
