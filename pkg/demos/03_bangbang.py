#!/usr/bin/env python3
"""L1-regularized, norm-capped training ends in a bang-bang profile.

With the running training error as the tracking term, node norms capped at
M, and an L1 penalty, the trained control saturates the cap early, then
switches off for good: after the switching time the states sit still in
the fitted regime, so extra depth is free but useless.
"""

import numpy as np

import odelearn as ol
from odelearn.data import augment_zeros, gen_concentric_spheres

bound = 5.0
inputs, labels = gen_concentric_spheres(dim=2, n=128, seed=0)
x0 = augment_zeros(inputs, 3)
rng = np.random.default_rng(1)
proj = ol.Projector("linear", 0.5 * rng.standard_normal((1, 3)), np.zeros(1), trainable=True)
spec = ol.FunctionalSpec("mse", proj, alpha=0.2, l1_mode=True, l1_bound=bound,
                         include_final_cost=False)

u0 = ol.random_control(3, 40, 10.0, seed=0, scale=5.0)
u, report = ol.adam_train(u0, x0, labels[:, None], spec, ol.SIGMA_INSIDE, ol.TANH,
                          lr=3e-3, iters=6000, seed=0)

fractions, t_prime = ol.bangbang_profile(u, bound, tol_rel=0.05)
print(f"final training error  {report.final_training_error:.4f}")
print(f"at the cap            {fractions['at_bound']:.1%} of nodes")
print(f"switched off          {fractions['at_zero']:.1%} of nodes")
print(f"in between            {fractions['intermediate']:.1%} of nodes")
print(f"switching time        {t_prime}")

print("\nnode norm profile (cap = 5):")
for k, norm in enumerate(u.node_norms()):
    print(f"  t={u.t[k]:5.2f}  {norm:6.3f}  {'#' * int(8 * norm / bound)}")
