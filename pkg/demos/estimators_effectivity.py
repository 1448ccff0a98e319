"""A posteriori estimators and effectivity indices for a single run.

The nodal values are lifted to a piecewise quadratic reconstruction Uhat.
Three computable quantities follow from it:

  E_U    size of Uhat - U, from a closed form per step
  E_f    data residual after the phi_1 smoothing
  zeta_U interpolant residual left over by phi_1 - I

They combine into lower and upper estimators. Each effectivity index divides
an estimator by the matching measured error.
"""

from expmid import (
    PhiEvaluator, TimeGrid, accumulate_estimators, bounds_and_effectivity,
    error_metrics, example1, run,
)
from expmid.estimators import epsilon_U_quadrature

problem = example1(100)
phi = PhiEvaluator(problem.operator)
traj = run(problem, TimeGrid.uniform(40), phi)

err = error_metrics(traj, problem)
est = accumulate_estimators(traj, problem, phi)
eff = bounds_and_effectivity(err.E_T, err.E_1, est.estU, est.estFB, est.zetaU, "linear")

print(f"E_T = {err.E_T:.4e}   E_1 = {err.E_1:.4e}")
print(f"E_U = {est.estU:.4e}   E_f = {est.estFB:.4e}   zeta_U = {est.zetaU:.4e}")
print(f"lower = {eff.lower:.4e}   upper = {eff.upper:.4e}")
print(f"ei_L = {eff.ei_L:.4f}   ei_U = {eff.ei_U:.4f}")

# the closed form for E_U^2 equals a Gauss-3 integral of ||Uhat - U||^2
print(f"E_U^2 closed form {est.estU**2:.12e}")
print(f"E_U^2 quadrature  {epsilon_U_quadrature(traj, problem):.12e}")
