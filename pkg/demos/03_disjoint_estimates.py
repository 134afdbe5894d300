# # Disjoint families: upper q-estimates and Cesaro decay
#
# For disjointly supported xi_1, ..., xi_n an upper q-estimate says
# ||sum xi_k|| <= C (sum ||xi_k||^q)^(1/q). Pure powers satisfy it with
# C = 1 at q = q_Phi. For disjoint members the running Cesaro means obey an
# exact identity: sup_n |mean_n| = sum_k |xi_k| / k atom by atom.

import numpy as np

from orlicz_lab import young
from orlicz_lab.estimates import DisjointFamily, cesaro_disjoint_bounds, verify_upper_q_estimate
from orlicz_lab.norms import dual_orlicz_norm
from orlicz_lab.space import DyadicSpace, RandomVariable, dyadic_block

space = DyadicSpace(12)
spikes = DisjointFamily([RandomVariable(space, np.where(dyadic_block(space, n), 2.0 ** (n / 2), 0.0)) for n in range(1, 13)])

# ## Pythagoras in L2: the ratio is exactly 1

rep = verify_upper_q_estimate(spikes, young.power(2.0), 2.0, declared_C=1.0)
print(f"lhs={rep.lhs:.12f} rhs={rep.rhs_sum:.12f} ratio={rep.empirical_C:.12f}")

# ## Cesaro means decay like n^(1/q - 1)
#
# Indicators of the blocks, each scaled to unit dual norm for the power p,
# give the rate exactly.

for p in (2.0, 1.5, 3.0):
    phi = young.power(p)
    members = []
    for n in range(1, 13):
        x = RandomVariable(space, np.where(dyadic_block(space, n), 1.0, 0.0))
        members.append(x / dual_orlicz_norm(x, phi).value)
    rep = cesaro_disjoint_bounds(DisjointFamily(members), phi, p / (p - 1.0))
    print(f"p={p}: fitted exponent {rep.fitted_exponent:+.4f}, expected {rep.expected_exponent:+.4f}, sup identity exact: {rep.sup_identity_exact}")
