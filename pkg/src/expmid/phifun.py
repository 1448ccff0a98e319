"""phi-functions: scalar evaluation and the action of phi_k(-tau A) on vectors.

The functions are ``phi_0(z) = exp(z)`` and
``phi_{k+1}(z) = (phi_k(z) - 1/k!) / z``, equivalently
``phi_k(z) = sum_j z^j / (j + k)!``.
"""

from collections import OrderedDict
from math import factorial

import numpy as np

from .exceptions import ConfigurationError, ConvergenceError, DimensionError
from .operators import DirichletLaplacian1D

__all__ = ["phi_scalar", "PhiEvaluator", "lanczos_phi", "METHODS"]

METHODS = ("spectral", "dense", "krylov")

# |z| below this uses the Taylor series; above it the recurrence is stable
SERIES_RADIUS = 1.0
SERIES_TERMS = 30


def phi_scalar(k, z):
    """Evaluate ``phi_k(z)`` for a scalar or an array of real ``z``.

    Parameters
    ----------
    k : int
        Nonnegative index.
    z : float or array_like

    Returns
    -------
    float or ndarray
        Same shape as ``z``.
    """
    if int(k) != k or k < 0:
        raise ConfigurationError(f"phi index must be a nonnegative integer, got {k}")
    k = int(k)
    zz = np.asarray(z, dtype=float)
    scalar = zz.ndim == 0
    zz = np.atleast_1d(zz)

    if k == 0:
        out = np.exp(zz)
    else:
        out = np.empty_like(zz)
        small = np.abs(zz) < SERIES_RADIUS
        if np.any(small):
            zs = zz[small]
            # Horner on sum_j z^j / (j+k)!
            acc = np.full_like(zs, 1.0 / factorial(SERIES_TERMS - 1 + k))
            for j in range(SERIES_TERMS - 2, -1, -1):
                acc = acc * zs + 1.0 / factorial(j + k)
            out[small] = acc
        big = ~small
        if np.any(big):
            zb = zz[big]
            p = np.expm1(zb) / zb
            for j in range(1, k):
                p = (p - 1.0 / factorial(j)) / zb
            out[big] = p
    return float(out[0]) if scalar else out


def lanczos_phi(matvec, v, k, tau, max_dim=100, tol=1e-12):
    """Approximate ``phi_k(-tau A) v`` for symmetric ``A`` by Lanczos.

    Uses the three-term recurrence with full reorthogonalization. The
    stopping test is the generalized residual
    ``beta * h_{m+1,m} * tau * |e_m^T phi_{k+1}(-tau T_m) e_1|``
    relative to ``beta = ||v||_2``.

    Returns
    -------
    w : ndarray
    info : dict
        ``{"dim": m, "residual": estimate}``.

    Raises
    ------
    ConvergenceError
        If ``max_dim`` steps do not reach ``tol``.
    """
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    beta = np.linalg.norm(v)
    if beta == 0.0:
        return np.zeros_like(v), {"dim": 0, "residual": 0.0}

    m_cap = min(int(max_dim), n)
    V = np.zeros((m_cap + 1, n))
    alpha = np.zeros(m_cap)
    off = np.zeros(m_cap)
    V[0] = v / beta
    err = np.inf
    scale = 0.0
    for j in range(m_cap):
        w = matvec(V[j])
        alpha[j] = w @ V[j]
        w = w - alpha[j] * V[j]
        if j > 0:
            w -= off[j - 1] * V[j - 1]
        for _ in range(2):
            w -= V[: j + 1].T @ (V[: j + 1] @ w)
        h = np.linalg.norm(w)
        scale = max(scale, abs(alpha[j]) + h)

        m = j + 1
        theta, S = np.linalg.eigh(
            np.diag(alpha[:m]) + np.diag(off[: m - 1], 1) + np.diag(off[: m - 1], -1)
        )
        y = S @ (phi_scalar(k, -tau * theta) * S[0])
        invariant = h <= 1e-14 * scale or m == n
        err = 0.0 if invariant else beta * h * tau * abs(
            S[-1] @ (phi_scalar(k + 1, -tau * theta) * S[0])
        )
        if invariant or err <= tol * beta:
            return beta * (V[:m].T @ y), {"dim": m, "residual": err}
        off[j] = h
        V[j + 1] = w / h

    raise ConvergenceError(
        f"Lanczos did not converge in {m_cap} steps (residual {err:.3e})",
        residual=err,
        iterations=m_cap,
    )


class PhiEvaluator:
    """Action of ``phi_k(-tau A)`` on vectors for a fixed operator.

    Parameters
    ----------
    operator : SpdOperator
    method : {"spectral", "dense", "krylov"}, optional
        Defaults to ``"spectral"`` for :class:`DirichletLaplacian1D` and
        ``"krylov"`` otherwise.
    krylov_max_dim : int
    krylov_tol : float
    """

    def __init__(self, operator, method=None, krylov_max_dim=100, krylov_tol=1e-12):
        if method is None:
            method = "spectral" if isinstance(operator, DirichletLaplacian1D) else "krylov"
        if method not in METHODS:
            raise ConfigurationError(f"unknown phi method {method!r}; choose from {METHODS}")
        if krylov_max_dim < 1 or krylov_tol <= 0:
            raise ConfigurationError("krylov_max_dim must be >= 1 and krylov_tol > 0")
        self.operator = operator
        self.method = method
        self.krylov_max_dim = int(krylov_max_dim)
        self.krylov_tol = float(krylov_tol)
        self._dense_cache = OrderedDict()
        self._dense_eigh = None

    def __repr__(self):
        return f"PhiEvaluator({self.operator!r}, method={self.method!r})"

    def phi_action(self, k, tau, v):
        """Return ``phi_k(-tau A) v``."""
        if tau <= 0:
            raise ConfigurationError(f"tau must be positive, got {tau}")
        v = np.asarray(v, dtype=float)
        if v.shape != (self.operator.dim,):
            raise DimensionError(
                f"expected a vector of length {self.operator.dim}, got shape {v.shape}")
        if self.method == "spectral":
            op = self.operator
            c = op.to_eigenbasis(v)
            return op.from_eigenbasis(phi_scalar(k, -tau * op.eigenvalues) * c)
        if self.method == "dense":
            return self._dense_matrix(k, tau) @ v
        w, _ = lanczos_phi(self.operator.apply, v, k, tau,
                           max_dim=self.krylov_max_dim, tol=self.krylov_tol)
        return w

    def exp_action(self, tau, v):
        """Return ``exp(-tau A) v``."""
        return self.phi_action(0, tau, v)

    def _dense_matrix(self, k, tau):
        key = (k, float(tau))
        P = self._dense_cache.get(key)
        if P is None:
            if self._dense_eigh is None:
                self._dense_eigh = np.linalg.eigh(self.operator.matrix())
            lam, Q = self._dense_eigh
            P = (Q * phi_scalar(k, -tau * lam)) @ Q.T
            self._dense_cache[key] = P
            if len(self._dense_cache) > 16:
                self._dense_cache.popitem(last=False)
        return P
