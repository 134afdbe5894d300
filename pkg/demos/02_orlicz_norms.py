# # Luxemburg and dual Orlicz norms
#
# On a finite dyadic space a random variable is a vector of atom values.
# The Luxemburg norm is the smallest lam with E[Phi(xi / lam)] <= 1. The dual
# norm sup{E[eta xi] : E[Phi(eta)] <= 1} is computed twice: once directly
# through the stationarity conditions and once through the Amemiya formula
# inf_k (1 + E[Phi*(k xi)]) / k. The two routes must agree.

import numpy as np

from orlicz_lab import young
from orlicz_lab.norms import dual_orlicz_norm, holder_check, luxemburg_norm
from orlicz_lab.space import DyadicSpace, RandomVariable

rng = np.random.default_rng(0)
space = DyadicSpace(4)
xi = RandomVariable(space, rng.normal(size=space.size))

# ## L2 as a sanity check: both norms equal the root mean square

phi = young.power(2.0)
print("Luxemburg:", luxemburg_norm(xi, phi).value, " RMS:", np.sqrt(xi.expect(np.square)))

# ## Two solvers and the norm sandwich ||xi||_Phi* <= ||xi||_(Phi*) <= 2 ||xi||_Phi*

for phi in (young.power(3.0), young.xlogx(), young.entropic(), young.exp_minus_one()):
    star = young.conjugate(phi)
    res = dual_orlicz_norm(xi, phi, phistar=star)
    lux = luxemburg_norm(xi, star).value
    print(f"{phi.kind:>14}: dual={res.value:.10f} residual={res.residual:.1e} sandwich {lux:.4f} <= {res.value:.4f} <= {2 * lux:.4f}")

# ## Hoelder's inequality, tight at the dual-norm witness

phi = young.power(2.0)
w = dual_orlicz_norm(xi, phi).witness
rep = holder_check(w, xi, phi)
print(f"E[eta xi] = {rep.lhs:.10f}  bound = {rep.rhs:.10f}")
