"""
Elliptic curves over a finite field
===================================

Each monic squarefree cubic over F_p gives a curve whose L-polynomial is
``1 - a T + p T^2``. The normalized Frobenius angles equidistribute for the
symplectic measure ``(2/pi) sin^2`` as ``p`` grows.
"""
from modphi.fields import FiniteFieldSpec, angle_ks_distance, ensemble_moment, scan_ensemble

for p in (5, 13, 41):
    scan = scan_ensemble(FiniteFieldSpec(p), 1)
    print(f"p={p:3d}  curves {scan.size:6d}  KS to Sato-Tate {angle_ks_distance(scan.angles):.4f}")

# average of L(1/2) over the family is close to 2
print("E det at p=13:", ensemble_moment(FiniteFieldSpec(13), 1, lam=1).value.real)
