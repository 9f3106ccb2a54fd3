"""
Schmidt numbers, superpositivity and entanglement breaking
==========================================================

Bracket the Schmidt number of isotropic states, then decide whether maps
are k-superpositive and read off Kraus operators of rank at most k.
"""

import numpy as np

from choi_cones import CyclicVector, SeeSawConfig, QuantumMap
from choi_cones.core import max_unit_gap
from choi_cones.generators import depolarizing_map, identity_map
from choi_cones.schmidt import isotropic_state, ppt_check, schmidt_number_bounds
from choi_cones.superpos import is_entanglement_breaking, is_k_superpositive

cfg = SeeSawConfig(restarts=8)

# isotropic states on 3x3: the Schmidt number steps up at F = 1/3 and 2/3
for f in (0.2, 0.4, 0.6, 0.7, 0.9):
    b = schmidt_number_bounds(isotropic_state(f, 3), cfg)
    print(f"F = {f:.1f}: {b.lower} <= SN <= {b.upper}")

# depolarizing on M_2 is entanglement breaking up to lambda = 1/3
for lam in (0.2, 1 / 3, 0.4):
    phi = depolarizing_map(lam, 2)
    v = is_entanglement_breaking(phi, None, cfg)
    print(f"lambda = {lam:.3f}: EB {v.answer.value}, PPT screen {v.samples_ppt}/{v.samples}")

# a sum of conjugations by rank-2 matrices, under a random cyclic vector
rng = np.random.default_rng(3)
vs = [rng.standard_normal((3, 2)) @ rng.standard_normal((2, 3)) for _ in range(3)]
phi = QuantumMap.from_kraus(vs)
verdict = is_k_superpositive(phi, 2, CyclicVector.random(rng, 3), cfg)
print("2-superpositive:", verdict.answer.value)
print("Kraus ranks:", [int(np.linalg.matrix_rank(k, tol=1e-8)) for k in verdict.kraus])
print("reconstruction gap:", max_unit_gap(QuantumMap.from_kraus(verdict.kraus), phi))

# the identity is not entanglement breaking; the certificate is a positive map
no = is_k_superpositive(identity_map(2), 1, None, cfg)
print("identity:", no.answer.value, "pairing", round(no.pairing, 6))
