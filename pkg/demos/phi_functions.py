"""phi-functions: scalar values and their action on a 1D Laplacian.

phi_0(z) = e^z and phi_{k+1}(z) = (phi_k(z) - 1/k!) / z. The scalar routine
switches to a Taylor series near zero, so small arguments keep full accuracy.
The action phi_k(-tau A) v is available three ways; they agree closely.
"""

import numpy as np

from expmid import DirichletLaplacian1D, PhiEvaluator, norm_h, phi_scalar

# scalar values across the small/large split
for z in (-1e-9, -0.5, -1.0, -30.0):
    print(f"z = {z:>8g}   phi_1 = {phi_scalar(1, z):.16f}   phi_2 = {phi_scalar(2, z):.16f}")
print()

A = DirichletLaplacian1D(100)          # M = 100 cells on [0, 1]
tau = 0.1                              # one time step
v = np.random.default_rng(0).standard_normal(A.dim)

ref = PhiEvaluator(A, method="spectral").phi_action(1, tau, v)
for method in ("dense", "krylov"):
    w = PhiEvaluator(A, method=method).phi_action(1, tau, v)
    print(f"{method:>8s} vs spectral: relative difference {norm_h(A, w - ref) / norm_h(A, ref):.2e}")

# e^{-tau A} v = v - tau phi_1(-tau A) A v
ev = PhiEvaluator(A)
lhs = ev.exp_action(tau, v)
rhs = v - tau * ev.phi_action(1, tau, A.apply(v))
print(f"exp/phi_1 identity defect: {norm_h(A, lhs - rhs) / norm_h(A, v):.2e}")
