"""
Choi matrices relative to a cyclic vector
=========================================

Build both Choi matrices of a map for a non-trivial cyclic vector, check
that they see complete positivity the same way, and rebuild the map.
"""

import numpy as np

from choi_cones import CyclicVector, QuantumMap, choi_C, choi_D, is_cp, map_from_C, map_from_D, pair
from choi_cones.core import ad, compose, max_unit_gap, std_choi, vec
from choi_cones.generators import depolarizing_map, transpose_map

rng = np.random.default_rng(0)

# a skewed cyclic vector: any invertible 3x3 matrix qualifies
x0 = CyclicVector.random(rng, 3, cond=50)
print("condition number of x0:", round(x0.cond, 3))

# with x0 = I/sqrt(n) the C-matrix is the usual Choi matrix up to 1/n
mes = CyclicVector.mes(3)
phi = depolarizing_map(0.4, 3)
print("C at the maximally entangled vector vs std Choi / n:",
      np.abs(choi_C(phi, mes) - std_choi(phi) / 3).max())

# CP is read off from either matrix, for any x0
for name, m in [("depolarizing", phi), ("transpose", transpose_map(3))]:
    lam_c = np.linalg.eigvalsh(choi_C(m, x0))[0]
    lam_d = np.linalg.eigvalsh(choi_D(m, x0))[0]
    print(f"{name:12s} min eig C = {lam_c:+.4f}   min eig D = {lam_d:+.4f}   cp = {is_cp(m, x0).ok}")

# both correspondences are injective: round trips recover the map
kraus = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(2)]
psi = QuantumMap.from_kraus(kraus)
print("round trip through C:", max_unit_gap(map_from_C(choi_C(psi, x0), x0), psi))
print("round trip through D:", max_unit_gap(map_from_D(choi_D(psi, x0), x0), psi))

# the pairing of a conjugated C with D collapses to a single quadratic form
v = rng.standard_normal((3, 3))
lhs = pair(choi_C(compose(psi, ad(v)), x0), choi_D(phi, x0))
j = vec(v.conj().T @ x0.matrix)
rhs = np.vdot(j, choi_D(compose(phi, psi), x0) @ j)
print("pairing identity gap:", abs(lhs - rhs))
