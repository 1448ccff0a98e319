"""A posteriori quantities for the exponential midpoint method.

On step ``n`` (interval ``I_n = (t^{n-1}, t^n]``, length ``k``) with the
per-step vectors cached on the :class:`~expmid.integrators.Trajectory`:

* ``U(t)``: linear interpolant of the nodal values.
* ``Uhat(t) = U^{n-1} - (t - t^{n-1}) phi_1 A U^{n-1} + Psi(t)``: the
  piecewise quadratic reconstruction, with
  ``Psi(t) = (t - t^{n-1}) phi_1 F_mid - (t - t^{n-1})(t^n - t)/k phi_1 [F_mid - F_start]``.
* ``R(t) = U'(t) + A U(t) - F(t, U(t))``: residual of the interpolant.
* ``R_F(t) = F(t, U(t)) - P_1 F(t)``: data residual against the linear
  interpolant of ``F`` through ``t^{n-1}`` and ``t^{n-1/2}``.

``F`` stands for ``f`` (linear problems) or ``B`` (semilinear problems).
Step indices ``n`` are 1-based throughout.
"""

from dataclasses import dataclass, asdict
from typing import NamedTuple

import numpy as np

from .exceptions import ConfigurationError, RangeError
from .integrators import SemilinearConfig
from .operators import norm_h, norm_v, norm_vstar
from .phifun import PhiEvaluator

__all__ = [
    "Quadrature3",
    "GAUSS3",
    "EstimatorReport",
    "interpolant",
    "reconstruction",
    "recon_minus_interp",
    "residual_R",
    "residual_R_direct",
    "residual_R_hat",
    "residual_Rf",
    "residual_Rb",
    "accumulate_estimators",
    "epsilon_U_quadrature",
    "error_metrics",
    "bounds_and_effectivity",
    "suboptimal_bounds",
    "linear_optimal_bound",
    "semilinear_bound",
    "build_report",
]


class Quadrature3:
    """Three-point Gauss-Legendre rule, mapped affinely to ``[a, b]``."""

    ref_nodes = np.array([-np.sqrt(3.0 / 5.0), 0.0, np.sqrt(3.0 / 5.0)])
    ref_weights = np.array([5.0, 8.0, 5.0]) / 9.0

    def points(self, a, b):
        half = 0.5 * (b - a)
        return a + half * (1.0 + self.ref_nodes), half * self.ref_weights

    def integrate(self, func, a, b):
        nodes, weights = self.points(a, b)
        return sum(w * func(s) for s, w in zip(nodes, weights))


GAUSS3 = Quadrature3()


def _check_time(traj, n, t):
    t0, t1, k = traj.step_data(n)
    slack = 1e-13 * max(1.0, abs(t1))
    if not t0 - slack <= t <= t1 + slack:
        raise RangeError(f"t={t} outside step {n} = [{t0}, {t1}]")
    return t0, t1, k


def interpolant(traj, n, t):
    """Linear interpolant ``U(t)`` on step ``n``."""
    t0, _, k = _check_time(traj, n, t)
    return traj.U[n - 1] + (t - t0) / k * (traj.U[n] - traj.U[n - 1])


def reconstruction(traj, n, t):
    """Quadratic reconstruction ``Uhat(t)`` on step ``n``."""
    t0, t1, k = _check_time(traj, n, t)
    i = n - 1
    return (traj.U[i] + (t - t0) * (traj.phiF_mid[i] - traj.phiAU[i])
            - (t - t0) * (t1 - t) / k * traj.phi_dF(n))


def recon_minus_interp(traj, n, t):
    """Closed form of ``Uhat(t) - U(t)``."""
    t0, t1, k = _check_time(traj, n, t)
    return -(t - t0) * (t1 - t) / k * traj.phi_dF(n)


def residual_R(traj, problem, n, t):
    """Residual of the interpolant in its rewritten form.

    ``(phi_1 - I)(F_mid - A U^{n-1}) + F_mid - F(t, U(t)) + (t - t^{n-1}) A dU``
    where ``dU = (U^n - U^{n-1})/k``.
    """
    t0, _, k = _check_time(traj, n, t)
    A = problem.operator
    i = n - 1
    Ut = interpolant(traj, n, t)
    dU = (traj.U[n] - traj.U[i]) / k
    phi_part = traj.phiF_mid[i] - traj.phiAU[i]
    plain_part = traj.F_mid[i] - A.apply(traj.U[i])
    return (phi_part - plain_part + traj.F_mid[i] - problem.rhs(t, Ut)
            + (t - t0) * A.apply(dU))


def residual_R_direct(traj, problem, n, t):
    """``U'(t) + A U(t) - F(t, U(t))`` straight from the interpolant."""
    _, _, k = _check_time(traj, n, t)
    Ut = interpolant(traj, n, t)
    return (traj.U[n] - traj.U[n - 1]) / k + problem.operator.apply(Ut) - problem.rhs(t, Ut)


def residual_R_hat(traj, problem, n, t):
    """Residual ``Uhat' + A Uhat - F(t, Uhat)`` of the reconstruction (diagnostic only)."""
    t0, t1, k = _check_time(traj, n, t)
    i = n - 1
    Uh = reconstruction(traj, n, t)
    dUh = (traj.phiF_mid[i] - traj.phiAU[i]) - (t0 + t1 - 2.0 * t) / k * traj.phi_dF(n)
    return dUh + problem.operator.apply(Uh) - problem.rhs(t, Uh)


def residual_Rf(traj, problem, n, t):
    """Data residual ``F(t, U(t)) - {F_mid + 2/k (t - t^{n-1/2}) (F_mid - F_start)}``.

    For linear problems this is ``R_f``; for semilinear problems it is
    ``R_b`` (also exported under that name).
    """
    t0, _, k = _check_time(traj, n, t)
    i = n - 1
    tm = t0 + 0.5 * k
    p1 = traj.F_mid[i] + 2.0 / k * (t - tm) * (traj.F_mid[i] - traj.F_start[i])
    return problem.rhs(t, interpolant(traj, n, t)) - p1


residual_Rb = residual_Rf


class Estimators(NamedTuple):
    estU: float
    estFB: float
    zetaU: float


def _evaluator_for(traj, problem, phi):
    if phi is None:
        return PhiEvaluator(problem.operator, method=traj.phi_method or None)
    return phi


def accumulate_estimators(traj, problem, phi=None):
    """Return ``(E_U, E_f or E_b, zeta_U)``.

    ``E_U`` uses the exact closed form
    ``eps_U = 1/30 sum_n k_n^5 ||phi_1 [F_mid - F_start] / k_n||^2``; the two
    others are three-point Gauss sums of ``||phi_1 R_F(s)||_*^2`` and
    ``||(phi_1 - I) R(s)||_*^2`` with a fresh phi-action at every node.
    """
    phi = _evaluator_for(traj, problem, phi)
    A = problem.operator
    epsU = fb = zeta = 0.0
    for n in range(1, traj.N + 1):
        t0, t1, k = traj.step_data(n)
        epsU += k**5 / 30.0 * norm_v(A, traj.phi_dF(n) / k) ** 2
        nodes, weights = GAUSS3.points(t0, t1)
        for s, w in zip(nodes, weights):
            Rf = residual_Rf(traj, problem, n, s)
            fb += w * norm_vstar(A, phi.phi_action(1, k, Rf)) ** 2
            R = residual_R(traj, problem, n, s)
            zeta += w * norm_vstar(A, phi.phi_action(1, k, R) - R) ** 2
    return Estimators(np.sqrt(epsU), np.sqrt(fb), np.sqrt(zeta))


def epsilon_U_quadrature(traj, problem):
    """``int_0^T ||Uhat - U||^2`` by three-point Gauss (exact for this integrand)."""
    A = problem.operator
    total = 0.0
    for n in range(1, traj.N + 1):
        t0, t1, _ = traj.step_data(n)
        total += GAUSS3.integrate(
            lambda s: norm_v(A, recon_minus_interp(traj, n, s)) ** 2, t0, t1)
    return total


class ErrorMetrics(NamedTuple):
    E_T: float
    E_inf: float
    E_1: float


def _exact_or_fail(problem, exact):
    exact = exact if exact is not None else problem.exact
    if exact is None:
        raise ConfigurationError(
            f"{problem.label or 'problem'} has no exact solution; pass a reference")
    return exact


def error_metrics(traj, problem, exact=None):
    """``(E_T, E_inf, E_1)`` against ``exact`` (defaults to ``problem.exact``).

    ``E_inf`` is the maximum of ``|e(t^n)|`` over ``n = 1..N``, ``E_T`` the
    value at ``t^N``, and ``E_1 = (int_0^T ||u - U||^2)^{1/2}`` by
    three-point Gauss on every step. A :class:`Trajectory` may be passed
    as ``exact``; it is evaluated through its linear interpolant.
    """
    exact = _exact_or_fail(problem, exact)
    A = problem.operator
    nodal = [norm_h(A, exact(traj.grid.nodes[n]) - traj.U[n]) for n in range(1, traj.N + 1)]
    e1 = 0.0
    for n in range(1, traj.N + 1):
        t0, t1, _ = traj.step_data(n)
        e1 += GAUSS3.integrate(
            lambda s: norm_v(A, exact(s) - interpolant(traj, n, s)) ** 2, t0, t1)
    return ErrorMetrics(nodal[-1], max(nodal), np.sqrt(e1))


class Effectivity(NamedTuple):
    lower: float
    upper: float
    ei_L: float
    ei_U: float


def _ratio(a, b):
    if np.isnan(a) or np.isnan(b):
        return np.nan
    return a / b if b > 0 else np.inf


def bounds_and_effectivity(E_T, E_1, estU, estFB, zetaU, kind):
    """Lower/upper estimators and effectivity indices.

    ``kind="linear"``: lower ``2 E_U / 5``, upper ``E_U + 6 E_f + 6 zeta_U``,
    ``ei_L = lower / (5/3 E_1)``, ``ei_U = upper / (E_T + 5/3 E_1)``.

    ``kind="semilinear"`` (constants theta = lam = 1/6): lower ``E_U / 12``,
    upper ``2 E_U + 6 E_b + 6 zeta_U``, ``ei_L = lower / (E_1/3)``,
    ``ei_U = upper / (E_T + E_1/3)``.
    """
    if kind == "linear":
        lower = 0.4 * estU
        upper = estU + 6.0 * estFB + 6.0 * zetaU
        ei_L = _ratio(lower, 5.0 / 3.0 * E_1)
        ei_U = _ratio(upper, E_T + 5.0 / 3.0 * E_1)
    elif kind == "semilinear":
        lower = estU / 12.0
        upper = 2.0 * estU + 6.0 * estFB + 6.0 * zetaU
        ei_L = _ratio(lower, E_1 / 3.0)
        ei_U = _ratio(upper, E_T + E_1 / 3.0)
    else:
        raise ConfigurationError(f"kind must be 'linear' or 'semilinear', got {kind!r}")
    assert lower <= upper
    return Effectivity(lower, upper, ei_L, ei_U)


class SuboptimalBounds(NamedTuple):
    maxnorm_bound: float
    l2v_bound: float


def suboptimal_bounds(traj, problem):
    """Right-hand sides of the interpolant-based bounds.

    * ``max |e|^2 <= max |R|^2 / lambda_1^2``, sampled at the Gauss nodes and
      both ends of every step.
    * ``|e(T)|^2 + int ||e||^2 <= int ||R||_*^2`` by three-point Gauss.
    """
    A = problem.operator
    rmax = 0.0
    l2 = 0.0
    for n in range(1, traj.N + 1):
        t0, t1, _ = traj.step_data(n)
        nodes, weights = GAUSS3.points(t0, t1)
        for s in (t0, t1):
            rmax = max(rmax, norm_h(A, residual_R(traj, problem, n, s)) ** 2)
        for s, w in zip(nodes, weights):
            R = residual_R(traj, problem, n, s)
            rmax = max(rmax, norm_h(A, R) ** 2)
            l2 += w * norm_vstar(A, R) ** 2
    return SuboptimalBounds(rmax / A.lambda1**2, l2)


class Bound(NamedTuple):
    lower: float
    upper: float
    measured: float
    measured_lower: float


def _recon_error_integrals(traj, problem, exact):
    """``int ||e||^2`` and ``int ||ehat||^2`` by three-point Gauss."""
    A = problem.operator
    ie = ieh = 0.0
    for n in range(1, traj.N + 1):
        t0, t1, _ = traj.step_data(n)
        nodes, weights = GAUSS3.points(t0, t1)
        for s, w in zip(nodes, weights):
            u = exact(s)
            ie += w * norm_v(A, u - interpolant(traj, n, s)) ** 2
            ieh += w * norm_v(A, u - reconstruction(traj, n, s)) ** 2
    return ie, ieh


def linear_optimal_bound(traj, problem, phi=None, exact=None):
    """Reconstruction-based bounds for linear problems at ``t = T``.

    ``2/5 eps_U <= |ehat(T)|^2 + int (||e||^2 + 2/3 ||ehat||^2)
    <= eps_U + 6 (E_f^2 + zeta_U^2)``.

    ``measured`` is the middle quantity and ``measured_lower`` its integral
    part. Without an exact solution only ``lower``/``upper`` are filled.

    The upper inequality rests on an error equation for ``Uhat`` that drops
    the term ``(I - phi_1 - (t - t^{n-1}) phi_1 A) U'``. That term is not
    zero for the reconstruction computed here, so ``measured <= upper`` can
    fail by a few percent. The lower inequality is unaffected.
    """
    est = accumulate_estimators(traj, problem, phi)
    epsU = epsilon_U_quadrature(traj, problem)
    upper = epsU + 6.0 * (est.estFB**2 + est.zetaU**2)
    lower = 0.4 * epsU
    exact = exact if exact is not None else problem.exact
    if exact is None:
        return Bound(lower, upper, np.nan, np.nan)
    ie, ieh = _recon_error_integrals(traj, problem, exact)
    eT = norm_h(problem.operator, exact(traj.grid.T) - traj.U[-1]) ** 2
    integral = ie + 2.0 / 3.0 * ieh
    return Bound(lower, upper, eT + integral, integral)


def semilinear_bound(traj, problem, cfg=None, phi=None, exact=None):
    """Reconstruction-based bounds for semilinear problems (``mu = 0``) at ``t = T``.

    ``upper = (1 + L^2/(4 theta)) int ||Uhat - U||^2 + (E_b^2 + zeta_U^2)/theta``
    bounds ``|ehat(T)|^2 + (1 - lam - 4 theta) int (||e||^2 + ||ehat||^2)``,
    and ``lower = (1 - lam - 4 theta)/2 int ||Uhat - U||^2`` is below its
    integral part.
    """
    cfg = cfg or problem.config or SemilinearConfig()
    cfg.check_bound_constants()
    est = accumulate_estimators(traj, problem, phi)
    epsU = epsilon_U_quadrature(traj, problem)
    c = 1.0 - cfg.lam - 4.0 * cfg.theta
    upper = (1.0 + cfg.L**2 / (4.0 * cfg.theta)) * epsU + (est.estFB**2 + est.zetaU**2) / cfg.theta
    lower = 0.5 * c * epsU
    exact = exact if exact is not None else problem.exact
    if exact is None:
        return Bound(lower, upper, np.nan, np.nan)
    ie, ieh = _recon_error_integrals(traj, problem, exact)
    eT = norm_h(problem.operator, exact(traj.grid.T) - traj.U[-1]) ** 2
    return Bound(lower, upper, eT + c * (ie + ieh), c * (ie + ieh))


@dataclass(frozen=True)
class EstimatorReport:
    """Everything reported for one run."""

    example: str
    M: int
    N: int
    phi_method: str
    E_T: float
    E_inf: float
    E_1: float
    estU: float
    estFB: float
    zetaU: float
    lower: float
    upper: float
    ei_L: float
    ei_U: float
    max_fp_iterations: int = 0

    def as_dict(self):
        return asdict(self)


def build_report(traj, problem, phi=None, exact=None, M=None):
    """Compute metrics, estimators and effectivity indices for one trajectory."""
    phi = _evaluator_for(traj, problem, phi)
    exact = exact if exact is not None else problem.exact
    if exact is not None:
        E_T, E_inf, E_1 = error_metrics(traj, problem, exact)
    else:
        E_T = E_inf = E_1 = np.nan
    est = accumulate_estimators(traj, problem, phi)
    eff = bounds_and_effectivity(E_T, E_1, est.estU, est.estFB, est.zetaU, problem.kind)
    return EstimatorReport(
        example=problem.label,
        M=M if M is not None else problem.operator.dim + 1,
        N=traj.N,
        phi_method=phi.method,
        E_T=E_T, E_inf=E_inf, E_1=E_1,
        estU=est.estU, estFB=est.estFB, zetaU=est.zetaU,
        lower=eff.lower, upper=eff.upper, ei_L=eff.ei_L, ei_U=eff.ei_U,
        max_fp_iterations=int(traj.fp_iterations.max()) if traj.fp_iterations is not None else 0,
    )
