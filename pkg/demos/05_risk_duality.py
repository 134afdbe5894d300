# # Monetary utilities: penalties, duality and continuity
#
# A monetary utility u is concave and cash invariant, and u(0) = 0. Its
# penalty c(Q) = sup_xi (u(xi) - E_Q[xi]) recovers u through
# u(xi) = inf_Q (E_Q[xi] + c(Q)). For the entropic utility the penalty is
# the relative entropy.

import math

import numpy as np

from orlicz_lab import risk
from orlicz_lab.space import DyadicSpace, RandomVariable

u = risk.entropic()
space = DyadicSpace(1)
xi = RandomVariable(space, [1.0, 0.0])

# ## Dual representation on two atoms

rep = risk.dual_representation_check(u, xi)
print(f"u(xi)={rep.value:.12f}  closed form={-math.log((math.exp(-1) + 1) / 2):.12f}  dual gap={rep.gap:.1e}")
print("optimal density:", rep.optimizer_density.values)

# ## The penalty by numeric ascent equals the relative entropy

d = RandomVariable(space, [1.5, 0.5])
pen = risk.penalty(u, d)
print(f"numeric penalty={pen.value:.12f}  relative entropy={pen.closed_form:.12f}")
print("expectation utility, same density:", risk.penalty(risk.expectation(), d).value)

# ## Continuity along monotone chains

rng = np.random.default_rng(1)
x = RandomVariable(DyadicSpace(3), rng.normal(size=8))
v = RandomVariable(x.space, rng.uniform(size=8))
above = risk.continuity_from_above(u, [x + v * 2.0**-n for n in range(45)], limit=x)
below = risk.continuity_from_below(u, [x - v * 2.0**-n for n in range(45)], limit=x)
print(f"from above: passed={above.passed} final error={above.errors[-1]:.1e}")
print(f"from below: passed={below.passed} min sandwich slack={below.sandwich_slack.min():.1e}")

# ## Closure certificates

for name, (C, seq, phistar, expected) in risk.closure_examples().items():
    rep = risk.closure_certificate(C, seq, phistar)
    print(f"{name:>10}: verdict={rep.verdict:<14} expected={expected}")
