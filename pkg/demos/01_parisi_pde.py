"""Narrative demo 1: the variational PDE machinery.

Solves the backward PDE for a few constant order parameters, checks the
closed forms, then fits a small step-function order parameter and prints
the achieved functional value.
"""

import numpy as np

from cutmp import parisi

print("== closed-form checks ==")
sol0 = parisi.solve_pde(parisi.GammaStep.constant(0.0))
print(f"gamma=0: phi(0,0) = {sol0.value_at_origin():.8f}"
      f"  (closed form sqrt(2/pi) = {np.sqrt(2/np.pi):.8f})")

sol1 = parisi.solve_pde(parisi.GammaStep.constant(1.0))
print(f"gamma=1: P = {parisi.parisi_value(sol1):.6f}  (closed form 0.770359)")

print("\n== fitting a 4-step order parameter (small budget) ==")
gamma, p = parisi.optimize_gamma(4, budget=1500, seed=0)
print(f"breakpoints: {np.round(gamma.breakpoints, 3)}")
print(f"values:      {np.round(gamma.values, 4)}")
print(f"P(fit) = {p:.6f}  (8-step fits reach ~0.7634; the infimum is lower)")

print("\n== identities along the controlled diffusion ==")
sol = parisi.solve_pde(gamma)
paths = parisi.simulate_sde(sol, 20_000, seed=1)
rep = parisi.check_identities(sol, paths)
for tv in (0.2, 0.5, 0.8):
    m2, se = rep.at_time(tv)
    print(f"t={tv}: E[phi_xx(t,X_t)^2] = {m2:.4f} +/- {se:.4f}"
          "  (equals 1 at the exact optimum)")
print(f"integral of E[phi_xx] = {rep.time_integral:.4f} vs P = "
      f"{rep.parisi_value:.4f}")
