"""
A triangular array of gamma variables
=====================================

Row ``n`` holds a gamma(1) variable minus its mean, weighted by ``1/n``.
The row sums are mod-Gaussian, and the limiting function can be computed
two ways: from its Levy measure or from Barnes G.
"""
import numpy as np

from modphi.arrays import renormalized_gamma_example
from modphi.limits import GammaMethod, phi_gamma_example

u = np.linspace(-3, 3, 7)
lk = phi_gamma_example(u)
closed = phi_gamma_example(u, GammaMethod.BARNES_CLOSED_FORM)
print("methods agree to", np.max(np.abs(lk - closed)))

# the finite-N product approaches the limit, with an error of size |u|^3/(3N)
for N in (100, 1000, 10000):
    err = np.abs(renormalized_gamma_example(N, u) - lk)
    print(f"N={N:6d}  abs sup {err.max():.3g}  rel sup {(err / np.abs(lk)).max():.2e}")
