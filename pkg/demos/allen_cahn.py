"""Allen-Cahn with diffusion eps on [-1, 1] and boundary values -1 and 1.

  u_t = eps u_xx + u - u^3,   u(x, 0) = 0.53 x + 0.47 sin(-1.5 pi x)

There is no closed-form solution. Errors are measured against a run with
N = 10000 and the same phi evaluation. Each semilinear step solves its
midpoint stage by fixed-point iteration, and the iteration counts are printed.
"""

from expmid import PhiEvaluator, TimeGrid, build_report, example4, run
from expmid.cli import convergence_order

problem = example4(80, epsilon=0.01)
phi = PhiEvaluator(problem.operator)
reference = run(problem, TimeGrid.uniform(10000), phi)

steps = [10, 20, 40, 80]
reports = []
for N in steps:
    traj = run(problem, TimeGrid.uniform(N), phi)
    reports.append(build_report(traj, problem, phi, exact=reference))

print(f"{'N':>4s}  {'E_T':>10s}  {'E_U':>10s}  {'E_b':>10s}  {'zeta_U':>10s}  fp iters")
for r in reports:
    print(f"{r.N:4d}  {r.E_T:10.4e}  {r.estU:10.4e}  {r.estFB:10.4e}  {r.zetaU:10.4e}  {r.max_fp_iterations:8d}")

for name in ("E_T", "estU", "estFB", "zetaU"):
    o = convergence_order([getattr(r, name) for r in reports], steps)
    print(f"order {name:>6s}: " + "  ".join(f"{x:.3f}" for x in o))
