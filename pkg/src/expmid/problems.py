"""Benchmark problems in method-of-lines form."""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import ConfigurationError, DimensionError
from .integrators import SemilinearConfig
from .operators import DirichletLaplacian1D, SpdOperator

__all__ = ["ProblemSpec", "example1", "example2", "example3", "example4", "EXAMPLES"]


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """``u' + A u = f(t)`` (set ``f``) or ``u' + A u = B(t, u)`` (set ``B``).

    ``exact`` is optional; ``config`` carries the constants of the
    semilinear bounds.
    """

    operator: SpdOperator
    u0: np.ndarray
    f: Callable | None = None
    B: Callable | None = None
    exact: Callable | None = None
    config: SemilinearConfig | None = None
    label: str = ""
    x: np.ndarray | None = None

    def __post_init__(self):
        if (self.f is None) == (self.B is None):
            raise ConfigurationError("exactly one of f (linear) or B (semilinear) must be given")
        u0 = np.array(self.u0, dtype=float)
        if u0.shape != (self.operator.dim,):
            raise DimensionError(f"u0 has shape {u0.shape}, operator dim is {self.operator.dim}")
        u0.flags.writeable = False
        object.__setattr__(self, "u0", u0)

    @property
    def is_linear(self):
        return self.f is not None

    @property
    def kind(self):
        return "linear" if self.is_linear else "semilinear"

    def rhs(self, t, u):
        """``f(t)`` or ``B(t, u)``."""
        return self.f(t) if self.is_linear else self.B(t, u)


def _interior(M, a, b):
    if int(M) != M or M < 4:
        raise ConfigurationError(f"M must be an integer >= 4, got {M}")
    return a + (b - a) * np.arange(1, M) / M


def example1(M=100):
    """``u_t = u_xx + f`` on ``[0, 1]`` with exact solution ``x(1-x) e^t``."""
    x = _interior(M, 0.0, 1.0)
    p = x * (1.0 - x)
    return ProblemSpec(
        operator=DirichletLaplacian1D(M),
        u0=p,
        f=lambda t: (p + 2.0) * np.exp(t),
        exact=lambda t: p * np.exp(t),
        label="example1",
        x=x,
    )


def example2(M=100):
    """``u_t = u_xx + 2e^{-t} - x(1-x)e^{-t}`` with exact solution ``x(1-x) e^{-t}``."""
    x = _interior(M, 0.0, 1.0)
    p = x * (1.0 - x)
    return ProblemSpec(
        operator=DirichletLaplacian1D(M),
        u0=p,
        f=lambda t: (2.0 - p) * np.exp(-t),
        exact=lambda t: p * np.exp(-t),
        label="example2",
        x=x,
    )


# theta = lam = 1/6 and 1 + L^2/(4 theta) = 2
_EX3_CONSTANTS = dict(theta=1.0 / 6.0, lam=1.0 / 6.0, L=np.sqrt(4.0 / 6.0), mu=0.0)


def example3(M=100, fp_tol=1e-10, fp_max_iter=100):
    """``u_t - u_xx = 1/(1+u^2) + phi`` with exact solution ``x(1-x) e^t``."""
    x = _interior(M, 0.0, 1.0)
    p = x * (1.0 - x)

    def source(t):
        ue = p * np.exp(t)
        return ue + 2.0 * np.exp(t) - 1.0 / (1.0 + ue**2)

    return ProblemSpec(
        operator=DirichletLaplacian1D(M),
        u0=p,
        B=lambda t, u: 1.0 / (1.0 + u**2) + source(t),
        exact=lambda t: p * np.exp(t),
        config=SemilinearConfig(fp_tol=fp_tol, fp_max_iter=fp_max_iter, **_EX3_CONSTANTS),
        label="example3",
        x=x,
    )


def example4(M=80, epsilon=0.01, fp_tol=1e-10, fp_max_iter=100):
    """Allen-Cahn ``u_t = eps u_xx + u - u^3`` on ``[-1, 1]``, ``u(-1) = -1``, ``u(1) = 1``.

    The Dirichlet data enter ``B`` as a constant lifting vector. There is
    no exact solution; errors are measured against a fine reference run.
    The bound constants are those of :func:`example3` and are not verified
    for this nonlinearity.
    """
    if epsilon <= 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    x = _interior(M, -1.0, 1.0)
    op = DirichletLaplacian1D(M, length=2.0, diffusion=epsilon)
    lift = np.zeros(M - 1)
    lift[0] = -epsilon / op.dx**2
    lift[-1] = epsilon / op.dx**2

    return ProblemSpec(
        operator=op,
        u0=0.53 * x + 0.47 * np.sin(-1.5 * np.pi * x),
        B=lambda t, u: u - u**3 + lift,
        config=SemilinearConfig(fp_tol=fp_tol, fp_max_iter=fp_max_iter, **_EX3_CONSTANTS),
        label="example4",
        x=x,
    )


EXAMPLES = {1: example1, 2: example2, 3: example3, 4: example4}
