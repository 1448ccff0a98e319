"""Exponential midpoint time stepping for ``u' + A u = f(t)`` and ``u' + A u = B(t, u)``.

The linear update is the exponential midpoint rule::

    U^n = U^{n-1} + k phi_1(-k A) (f(t^{n-1/2}) - A U^{n-1})

and the semilinear method first solves the stage equation::

    S = exp(-k/2 A) U^{n-1} + k/2 phi_1(-k/2 A) B(t^{n-1/2}, S)

by fixed-point iteration, then applies the same update with ``B(t^{n-1/2}, S)``.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import ConfigurationError, ConvergenceError, DimensionError, RangeError
from .operators import SpdOperator, norm_h
from .phifun import PhiEvaluator

__all__ = [
    "TimeGrid",
    "Trajectory",
    "SemilinearConfig",
    "OrderCheck",
    "step_linear",
    "step_semilinear",
    "step_quadrature",
    "exp_quadrature_weights",
    "check_update_order",
    "run",
]


def _evaluator(phi):
    if isinstance(phi, PhiEvaluator):
        return phi
    if isinstance(phi, SpdOperator):
        return PhiEvaluator(phi)
    raise TypeError(f"expected a PhiEvaluator or SpdOperator, got {type(phi).__name__}")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TimeGrid:
    """Partition ``0 = t^0 < t^1 < ... < t^N = T``."""

    nodes: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.nodes, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ConfigurationError("a time grid needs at least two nodes")
        if t[0] != 0.0:
            raise ConfigurationError(f"first node must be 0, got {t[0]}")
        if np.any(np.diff(t) <= 0):
            raise ConfigurationError("time nodes must be strictly increasing")
        object.__setattr__(self, "nodes", _frozen(t))

    @classmethod
    def uniform(cls, N, T=1.0):
        if int(N) != N or N < 1:
            raise ConfigurationError(f"N must be a positive integer, got {N}")
        return cls(np.linspace(0.0, T, int(N) + 1))

    @property
    def N(self):
        return self.nodes.size - 1

    @property
    def T(self):
        return float(self.nodes[-1])

    @property
    def steps(self):
        return np.diff(self.nodes)

    @property
    def midpoints(self):
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def interval(self, n):
        """Return ``(t^{n-1}, t^n)`` for the 1-based step index ``n``."""
        if not 1 <= n <= self.N:
            raise RangeError(f"step index {n} outside 1..{self.N}")
        return float(self.nodes[n - 1]), float(self.nodes[n])


@dataclass(frozen=True)
class SemilinearConfig:
    """Stage-solver settings and the constants entering the semilinear bounds.

    ``L`` is the Lipschitz constant of ``B`` (V to V*), ``lam`` and ``mu``
    the one-sided Lipschitz constants, and ``theta`` the splitting parameter
    with ``0 < theta < (1 - lam) / 4``.
    """

    fp_tol: float = 1e-10
    fp_max_iter: int = 100
    L: float = 0.0
    lam: float = 0.0
    mu: float = 0.0
    theta: float = 1.0 / 6.0

    def __post_init__(self):
        if self.fp_tol <= 0:
            raise ConfigurationError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iter < 1:
            raise ConfigurationError("fp_max_iter must be >= 1")

    def check_bound_constants(self):
        if not 0.0 < self.theta < (1.0 - self.lam) / 4.0:
            raise ConfigurationError(
                f"theta={self.theta} must lie in (0, (1 - lam)/4) = (0, {(1 - self.lam) / 4})")
        if self.mu != 0.0:
            raise ConfigurationError("only the mu = 0 bound is implemented")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Nodal values of a run together with the per-step phi-actions.

    Row ``n - 1`` of each per-step array belongs to step ``n`` (interval
    ``(t^{n-1}, t^n]``):

    * ``F_start``, ``F_mid``: right-hand side at ``(t^{n-1}, U^{n-1})`` and
      at ``(t^{n-1/2}, U^{n-1/2})`` (``f`` values for linear problems).
    * ``phiF_start``, ``phiF_mid``: ``phi_1(-k_n A)`` applied to those.
    * ``phiAU``: ``phi_1(-k_n A) A U^{n-1}``.
    """

    grid: TimeGrid
    U: np.ndarray
    F_start: np.ndarray
    F_mid: np.ndarray
    phiF_start: np.ndarray
    phiF_mid: np.ndarray
    phiAU: np.ndarray
    stages: np.ndarray | None = None
    fp_iterations: np.ndarray | None = None
    phi_method: str = ""
    label: str = ""

    def __post_init__(self):
        for name in ("U", "F_start", "F_mid", "phiF_start", "phiF_mid", "phiAU", "stages"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, _frozen(val))
        if self.fp_iterations is not None:
            it = np.array(self.fp_iterations, dtype=int)
            it.flags.writeable = False
            object.__setattr__(self, "fp_iterations", it)

    @property
    def N(self):
        return self.grid.N

    def step_data(self, n):
        """``(t0, t1, k)`` for step ``n``."""
        t0, t1 = self.grid.interval(n)
        return t0, t1, t1 - t0

    def phi_dF(self, n):
        """``phi_1(-k_n A)[F(t^{n-1/2}) - F(t^{n-1})]``."""
        return self.phiF_mid[n - 1] - self.phiF_start[n - 1]

    def __call__(self, t):
        """Piecewise linear interpolant of the nodal values at any ``t`` in ``[0, T]``."""
        nodes = self.grid.nodes
        if not nodes[0] <= t <= nodes[-1]:
            raise RangeError(f"t={t} outside [0, {nodes[-1]}]")
        n = int(np.clip(np.searchsorted(nodes, t), 1, self.N))
        t0, t1 = nodes[n - 1], nodes[n]
        theta = (t - t0) / (t1 - t0)
        return self.U[n - 1] + theta * (self.U[n] - self.U[n - 1])


def step_linear(phi, f, U_prev, t_prev, k):
    """One step of the exponential midpoint rule.

    Parameters
    ----------
    phi : PhiEvaluator or SpdOperator
    f : callable
        ``f(t) -> vector``.
    U_prev : ndarray
    t_prev, k : float

    Returns
    -------
    ndarray
        ``U_prev + k phi_1(-k A)(f(t_prev + k/2) - A U_prev)``.
    """
    phi = _evaluator(phi)
    if k <= 0:
        raise ConfigurationError(f"step size must be positive, got {k}")
    A = phi.operator
    U_prev = np.asarray(U_prev, dtype=float)
    return U_prev + k * phi.phi_action(1, k, f(t_prev + 0.5 * k) - A.apply(U_prev))


def _solve_stage(phi, B, U_prev, t_prev, k, cfg):
    half = 0.5 * k
    t_mid = t_prev + half
    A = phi.operator
    base = phi.exp_action(half, U_prev)
    S = U_prev
    inc = np.inf
    for it in range(1, cfg.fp_max_iter + 1):
        S_new = base + half * phi.phi_action(1, half, B(t_mid, S))
        inc = norm_h(A, S_new - S)
        S = S_new
        if inc < cfg.fp_tol:
            return S, it
    raise ConvergenceError(
        f"stage iteration did not converge in {cfg.fp_max_iter} iterations "
        f"(last increment {inc:.3e})",
        residual=inc,
        iterations=cfg.fp_max_iter,
    )


def step_semilinear(phi, B, U_prev, t_prev, k, cfg=None):
    """One step of the exponential midpoint method for ``u' + A u = B(t, u)``.

    Returns
    -------
    stage, U_next : ndarray
    """
    phi = _evaluator(phi)
    cfg = cfg or SemilinearConfig()
    if k <= 0:
        raise ConfigurationError(f"step size must be positive, got {k}")
    U_prev = np.asarray(U_prev, dtype=float)
    stage, _ = _solve_stage(phi, B, U_prev, t_prev, k, cfg)
    U_next = U_prev + k * phi.phi_action(
        1, k, B(t_prev + 0.5 * k, stage) - phi.operator.apply(U_prev))
    return stage, U_next


def _lagrange_coefficients(c):
    c = [float(ci) for ci in c]
    s = len(c)
    if not 1 <= s <= 3:
        raise ConfigurationError(f"between 1 and 3 nodes supported, got {s}")
    if len(set(c)) != s:
        raise ConfigurationError(f"collocation nodes must be distinct, got {c}")
    if any(not 0.0 <= ci <= 1.0 for ci in c):
        raise ConfigurationError(f"collocation nodes must lie in [0, 1], got {c}")
    coeffs = []
    for i, ci in enumerate(c):
        others = [cm for m, cm in enumerate(c) if m != i]
        denom = np.prod([ci - cm for cm in others]) if others else 1.0
        coeffs.append(P.polyfromroots(others) / denom if others else np.array([1.0]))
    return coeffs


def exp_quadrature_weights(c, k, phi):
    """Weight actions ``v -> b_i(-k A) v`` of the exponential quadrature rule.

    With ``L_i(tau) = sum_j a_ij tau^j`` the Lagrange polynomials of the
    nodes ``c``, ``b_i(-k A) = sum_j a_ij j! phi_{j+1}(-k A)``.

    Returns
    -------
    list of callables
    """
    phi = _evaluator(phi)
    if k <= 0:
        raise ConfigurationError(f"step size must be positive, got {k}")
    weights = []
    for a in _lagrange_coefficients(c):
        def b(v, a=a):
            v = np.asarray(v, dtype=float)
            out = np.zeros_like(v)
            for j, aj in enumerate(a):
                if aj != 0.0:
                    out += aj * factorial(j) * phi.phi_action(j + 1, k, v)
            return out
        weights.append(b)
    return weights


def step_quadrature(phi, f, U_prev, t_prev, k, c):
    """One step of the exponential quadrature rule with nodes ``c``."""
    phi = _evaluator(phi)
    weights = exp_quadrature_weights(c, k, phi)
    U_next = phi.exp_action(k, np.asarray(U_prev, dtype=float))
    for ci, b in zip(c, weights):
        U_next = U_next + k * b(f(t_prev + float(ci) * k))
    return U_next


class OrderCheck(NamedTuple):
    order: int
    additional: bool
    weights: tuple


def _as_fraction(ci):
    if isinstance(ci, Fraction):
        return ci, True
    fr = Fraction(ci).limit_denominator(10**6)
    return fr, float(fr) == float(ci)


def check_update_order(c):
    """Order conditions of the underlying quadrature (``A -> 0``).

    Returns the largest ``q`` with
    ``sum_i b_i(0) c_i^{j-1}/(j-1)! = 1/j!`` for all ``j <= q``, whether
    ``sum_i b_i(0) c_i^s = 1/(s+1)`` holds, and the weights ``b_i(0)``.
    Nodes that are small-denominator rationals are checked exactly; any
    other node switches the comparisons to a 1e-12 tolerance.
    """
    pairs = [_as_fraction(ci) for ci in c]
    cf = [fr for fr, _ in pairs]
    tol = 0 if all(ok for _, ok in pairs) else Fraction(1, 10**12)
    s = len(cf)
    if s == 0 or len(set(cf)) != s:
        raise ConfigurationError(f"collocation nodes must be distinct, got {c}")
    b = []
    for i, ci in enumerate(cf):
        # integrate L_i over [0, 1] exactly: expand the product in Fractions
        poly = [Fraction(1)]
        for m, cm in enumerate(cf):
            if m == i:
                continue
            d = ci - cm
            new = [Fraction(0)] * (len(poly) + 1)
            for p, coef in enumerate(poly):
                new[p + 1] += coef / d
                new[p] -= coef * cm / d
            poly = new
        b.append(sum(coef / (p + 1) for p, coef in enumerate(poly)))

    q = 0
    for j in range(1, 2 * s + 2):
        lhs = sum(bi * ci ** (j - 1) for bi, ci in zip(b, cf)) / factorial(j - 1)
        if abs(lhs - Fraction(1, factorial(j))) > tol:
            break
        q = j
    additional = abs(sum(bi * ci**s for bi, ci in zip(b, cf)) - Fraction(1, s + 1)) <= tol
    return OrderCheck(q, bool(additional), tuple(float(bi) for bi in b))


def run(problem, grid, phi=None, cfg=None):
    """Advance ``problem`` over ``grid`` and return the full :class:`Trajectory`.

    Parameters
    ----------
    problem : ProblemSpec
    grid : TimeGrid
    phi : PhiEvaluator, optional
        Defaults to ``PhiEvaluator(problem.operator)``.
    cfg : SemilinearConfig, optional
        Fixed-point settings for semilinear problems.
    """
    A = problem.operator
    phi = PhiEvaluator(A) if phi is None else _evaluator(phi)
    if phi.operator is not A:
        raise ConfigurationError("evaluator and problem use different operators")
    cfg = cfg or problem.config or SemilinearConfig()
    U0 = np.asarray(problem.u0, dtype=float)
    if U0.shape != (A.dim,):
        raise DimensionError(f"u0 has shape {U0.shape}, operator dim is {A.dim}")

    N, d = grid.N, A.dim
    U = np.empty((N + 1, d))
    U[0] = U0
    F_start = np.empty((N, d))
    F_mid = np.empty((N, d))
    phiF_start = np.empty((N, d))
    phiF_mid = np.empty((N, d))
    phiAU = np.empty((N, d))
    stages = None if problem.is_linear else np.empty((N, d))
    iters = None if problem.is_linear else np.zeros(N, dtype=int)

    for n in range(1, N + 1):
        t0, t1 = grid.interval(n)
        k = t1 - t0
        tm = t0 + 0.5 * k
        Up = U[n - 1]
        try:
            if problem.is_linear:
                F_mid[n - 1] = problem.f(tm)
                F_start[n - 1] = problem.f(t0)
            else:
                stage, it = _solve_stage(phi, problem.B, Up, t0, k, cfg)
                stages[n - 1] = stage
                iters[n - 1] = it
                F_mid[n - 1] = problem.B(tm, stage)
                F_start[n - 1] = problem.B(t0, Up)
            phiF_mid[n - 1] = phi.phi_action(1, k, F_mid[n - 1])
            phiF_start[n - 1] = phi.phi_action(1, k, F_start[n - 1])
            phiAU[n - 1] = phi.phi_action(1, k, A.apply(Up))
        except ConvergenceError as exc:
            raise ConvergenceError(f"step {n}: {exc}", residual=exc.residual,
                                   iterations=exc.iterations) from exc
        U[n] = Up + k * (phiF_mid[n - 1] - phiAU[n - 1])

    return Trajectory(
        grid=grid, U=U, F_start=F_start, F_mid=F_mid, phiF_start=phiF_start,
        phiF_mid=phiF_mid, phiAU=phiAU, stages=stages, fp_iterations=iters,
        phi_method=phi.method, label=getattr(problem, "label", ""),
    )
