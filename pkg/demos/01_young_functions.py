# # Young functions, conjugates and the doubling index
#
# A Young function is an even convex Phi with Phi(0) = 0 that grows faster
# than linearly. Its conjugate is the Legendre transform
# Phi*(y) = sup_x (x y - Phi(x)). We compare the numeric transform against
# the closed forms, then classify growth with the elasticity index.

import numpy as np

from orlicz_lab import young

# ## Numeric vs closed-form conjugates

ys = np.linspace(0.0, 20.0, 201)
for phi in (young.power(3.0), young.quadratic(), young.entropic(), young.exp_minus_one()):
    closed = young.conjugate(phi, method="closed")
    numeric = young.conjugate(phi, method="numeric")
    err = np.max(np.abs(numeric(ys) - closed(ys)))
    print(f"{phi.kind:>14}: conjugate is {closed.kind:<20} sup error on [0, 20] = {err:.2e}")

# ## Young's inequality, with equality at y = Phi'(x)

phi = young.entropic()
star = young.conjugate(phi)
xs = np.linspace(0.0, 4.0, 9)
gap = phi(xs) + star(phi.derivative(xs)) - xs * phi.derivative(xs)
print("equality-case gap:", np.max(np.abs(gap)))

# ## The doubling (Delta2) index
#
# p_Phi(x) = sup_{y > x} y Phi'(y) / Phi(y). Powers have a constant index;
# exponential growth makes the index track the scan cutoff, which is the
# divergence evidence.

for phi in (young.power(1.5), young.power(3.0), young.xlogx(), young.exp_minus_one()):
    rep = young.delta2_index(phi)
    trace = [round(p, 3) for _, p in rep.cutoff_trace]
    print(f"{phi.kind:>14}: delta2={rep.is_delta2!s:<5} p_phi={rep.p_phi:<8.4g} cutoff trace={trace}")

# ## The truncated Psi
#
# Psi agrees with Phi beyond x0 and is linear below it. It satisfies the
# growth bound Psi(lam x) <= lam^p Psi(x) for every lam >= 1.

psi = young.make_truncated_psi(young.power(2.0), 1.0)
print("Psi exponent p =", psi.p, " growth slack on a grid:", psi.growth_slack(np.linspace(0.01, 10, 200), [1, 2, 4]))
