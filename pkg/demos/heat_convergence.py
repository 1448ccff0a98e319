"""Second-order convergence of the exponential midpoint rule on a heat problem.

  u_t = u_xx + f   on (0, 1) x (0, 1],  u = 0 on the boundary
  u(x, t) = x (1 - x) e^t

Central differences in space (M = 100) give a stiff linear system that is
stepped with uniform k = 1/N. The final-time error should fall by about
four each time N doubles.
"""

from expmid import TimeGrid, error_metrics, example1, run
from expmid.cli import convergence_order

problem = example1(100)
steps = [10, 20, 40, 80, 160]
errors = []
for N in steps:
    traj = run(problem, TimeGrid.uniform(N))
    errors.append(error_metrics(traj, problem).E_T)

orders = [None] + convergence_order(errors, steps)
print(f"{'N':>5s}  {'E_T':>10s}  order")
for N, e, o in zip(steps, errors, orders):
    print(f"{N:5d}  {e:10.4e}  {'' if o is None else f'{o:.4f}'}")
