"""Compare the exact cc-model slope with its large-lambda closed form on the 3x3 torus."""

import math

from toric_dlocc.cc_model import large_lambda_derivative, renyi_derivative_cc
from toric_dlocc.lattice import TorusLattice, plaquette_plus_two_subsystem, plaquette_subsystem, two_star_subsystem

lat = TorusLattice(3)
bips = {
    "plaquette": plaquette_subsystem(lat, 0),
    "twostar": two_star_subsystem(lat, lat.vertex(1, 1)),
    "plaqplus2": plaquette_plus_two_subsystem(lat, 4),
}
print("bipartition,lam,alpha,exact,approx,rel_err,err_over_exp6lam")
for name, bip in bips.items():
    for lam in (2.0, 3.0, 4.0):
        for alpha in (0.5, 2.0, 5.0):
            ex = renyi_derivative_cc(lat, bip, lam, alpha)
            ap = large_lambda_derivative(lat, bip, lam, alpha)
            print(f"{name},{lam},{alpha},{ex:.6e},{ap:.6e},{abs(ex - ap) / abs(ex):.3e},"
                  f"{abs(ex - ap) / math.exp(-6 * lam):.3e}")
