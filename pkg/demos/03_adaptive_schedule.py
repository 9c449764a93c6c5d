"""Narrative demo 3: the adaptive schedule end to end.

Fits a small step-function order parameter, builds the state-dependent
message-passing schedule from the PDE solution, runs it on a random
regular graph for min-bisection and max-cut, and compares the rounded
values to the spectral wave baseline on the same instance.
"""

import numpy as np

from cutmp import engine, graph, iamp, parisi, rounding, wave

print("== fit the order parameter (4 steps, small budget) ==")
gamma, p = parisi.optimize_gamma(4, budget=1500, seed=0)
sol = parisi.solve_pde(gamma)
print(f"P(fit) = {p:.6f}")

n, k, delta, eta = 20_000, 100, 0.05, 0.1
g = graph.generate_random_regular(n, k, seed=1)
print(f"\nrandom {k}-regular graph, n = {n}, delta = {delta}, eta = {eta}")

for mode in ("minbis", "maxcut"):
    sched = iamp.build_schedule(sol, delta, eta, mc_reps=50_000, seed=2,
                                maxcut=(mode == "maxcut"))
    res = engine.run(g, sched, seed=3)
    sigma = rounding.randomized_round(rounding.clip(res.z), seed=4)
    if mode == "minbis":
        sigma = rounding.balance_repair(sigma, rounding.clip(res.z))
    cut = rounding.evaluate(g, sigma)
    val = cut.normalized if mode == "minbis" else -cut.normalized
    print(f"\n[{mode}] adaptive schedule, L = {sched.L} rounds")
    print(f"  rounded normalized value: {val:.4f}"
          f"  (imbalance {int(sigma.sum())})")

    wcfg = wave.WaveConfig.make(20, 20 if mode == "maxcut" else 1)
    wres = engine.run(g, wave.make_wave_schedule(wcfg), seed=3)
    wcut = rounding.evaluate(g, rounding.sign_round(wres.z))
    wval = wcut.normalized if mode == "minbis" else -wcut.normalized
    print(f"  wave baseline (L = 20):   {wval:.4f}")

print("\nthe rounded value climbs toward the variational prediction as the")
print("step delta shrinks; the pre-round output already carries the target")
print("edge correlation, and clipping costs O(sqrt(delta)).")
