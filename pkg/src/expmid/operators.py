"""Symmetric positive definite operators and the discrete H, V, V* norms.

Every inner product carries the mesh weight ``dx``::

    (u, v)_h = dx * sum_i u_i v_i

so that ``|v| = (v, v)_h^{1/2}``, ``||v|| = (Av, v)_h^{1/2}`` and
``||v||_* = (v, A^{-1} v)_h^{1/2}`` are the H, V and V* norms used by all
estimators.
"""

from abc import ABC, abstractmethod
from functools import cached_property

import numpy as np
import scipy.fft
import scipy.linalg

from .exceptions import DimensionError, OperatorError

__all__ = [
    "SpdOperator",
    "DenseSpdOperator",
    "DirichletLaplacian1D",
    "inner_h",
    "norm_h",
    "norm_v",
    "norm_vstar",
]


def _as_vector(v, dim):
    v = np.asarray(v, dtype=float)
    if v.shape != (dim,):
        raise DimensionError(f"expected a vector of length {dim}, got shape {v.shape}")
    return v


class SpdOperator(ABC):
    """Contract for a symmetric positive definite operator ``A``.

    Subclasses provide :meth:`apply` and :meth:`solve` together with the
    dimension, the smallest eigenvalue and the weight of the discrete inner
    product. The default spectral machinery diagonalizes :meth:`matrix`
    once; subclasses with known eigenpairs override it.
    """

    @property
    @abstractmethod
    def dim(self) -> int: ...

    @property
    @abstractmethod
    def lambda1(self) -> float: ...

    @property
    @abstractmethod
    def mesh_weight(self) -> float: ...

    @abstractmethod
    def apply(self, v: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def solve(self, v: np.ndarray) -> np.ndarray: ...

    def matrix(self) -> np.ndarray:
        """Dense matrix of the operator (built column by column)."""
        return np.column_stack([self.apply(e) for e in np.eye(self.dim)])

    @cached_property
    def _eigh(self):
        lam, Q = np.linalg.eigh(self.matrix())
        if lam[0] <= 0:
            raise OperatorError(f"operator is not positive definite (min eigenvalue {lam[0]:.3e})")
        return lam, Q

    @property
    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues in ascending order."""
        return self._eigh[0]

    def to_eigenbasis(self, v: np.ndarray) -> np.ndarray:
        """Coefficients of ``v`` in the orthonormal eigenbasis."""
        return self._eigh[1].T @ v

    def from_eigenbasis(self, c: np.ndarray) -> np.ndarray:
        return self._eigh[1] @ c


class DenseSpdOperator(SpdOperator):
    """SPD operator given by an explicit symmetric matrix.

    ``lambda1`` must be supplied; no eigenvalue estimation is attempted.
    """

    def __init__(self, matrix, lambda1, mesh_weight=1.0):
        A = np.atleast_2d(np.asarray(matrix, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise DimensionError(f"matrix must be square, got shape {A.shape}")
        if not np.allclose(A, A.T, rtol=1e-12, atol=0.0):
            raise OperatorError("matrix is not symmetric")
        if lambda1 <= 0 or mesh_weight <= 0:
            raise OperatorError("lambda1 and mesh_weight must be positive")
        self._A = A
        self._lambda1 = float(lambda1)
        self._dx = float(mesh_weight)

    @property
    def dim(self):
        return self._A.shape[0]

    @property
    def lambda1(self):
        return self._lambda1

    @property
    def mesh_weight(self):
        return self._dx

    def matrix(self):
        return self._A.copy()

    @cached_property
    def _chol(self):
        try:
            return scipy.linalg.cho_factor(self._A)
        except np.linalg.LinAlgError as exc:
            raise OperatorError(f"Cholesky factorization failed: {exc}") from exc

    def apply(self, v):
        return self._A @ _as_vector(v, self.dim)

    def solve(self, v):
        return scipy.linalg.cho_solve(self._chol, _as_vector(v, self.dim))


class DirichletLaplacian1D(SpdOperator):
    """Central-difference ``-diffusion * d^2/dx^2`` with homogeneous Dirichlet ends.

    The interval ``[0, length]`` is split into ``M`` cells; the unknowns are
    the ``M - 1`` interior nodal values. Eigenpairs are analytic, so the
    spectral transform is a type-I discrete sine transform.
    """

    def __init__(self, M, length=1.0, diffusion=1.0):
        if int(M) != M or M < 2:
            raise DimensionError(f"M must be an integer >= 2, got {M}")
        if length <= 0 or diffusion <= 0:
            raise OperatorError("length and diffusion must be positive")
        self.M = int(M)
        self.length = float(length)
        self.diffusion = float(diffusion)
        self.dx = self.length / self.M
        self._scale = self.diffusion / self.dx**2

    @property
    def dim(self):
        return self.M - 1

    @property
    def mesh_weight(self):
        return self.dx

    @property
    def lambda1(self):
        return float(self.eigenvalues[0])

    @cached_property
    def eigenvalues(self):
        j = np.arange(1, self.M)
        return 4.0 * self._scale * np.sin(j * np.pi / (2 * self.M)) ** 2

    def to_eigenbasis(self, v):
        return scipy.fft.dst(v, type=1, norm="ortho", axis=0)

    # DST-I with orthonormal scaling is an involution
    from_eigenbasis = to_eigenbasis

    def apply(self, v):
        v = _as_vector(v, self.dim)
        out = 2.0 * v
        out[1:] -= v[:-1]
        out[:-1] -= v[1:]
        return self._scale * out

    @cached_property
    def _banded_cholesky(self):
        n = self.dim
        ab = np.empty((2, n))
        ab[0, :] = -self._scale
        ab[1, :] = 2.0 * self._scale
        return scipy.linalg.cholesky_banded(ab, lower=False)

    def solve(self, v):
        v = _as_vector(v, self.dim)
        return scipy.linalg.cho_solve_banded((self._banded_cholesky, False), v)

    def matrix(self):
        n = self.dim
        return self._scale * (
            2.0 * np.eye(n) - np.eye(n, k=1) - np.eye(n, k=-1)
        )

    def __repr__(self):
        return (f"DirichletLaplacian1D(M={self.M}, length={self.length}, "
                f"diffusion={self.diffusion})")


def inner_h(v, w, dx):
    """Weighted inner product ``dx * sum(v * w)``."""
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    if v.shape != w.shape:
        raise DimensionError(f"length mismatch: {v.shape} vs {w.shape}")
    return float(dx * np.dot(v.ravel(), w.ravel()))


def norm_h(A, v):
    """H norm ``|v|`` with the mesh weight of ``A``."""
    return np.sqrt(inner_h(v, v, A.mesh_weight))


def norm_v(A, v):
    """Energy norm ``||v|| = (Av, v)_h^{1/2}``."""
    return np.sqrt(max(inner_h(A.apply(v), v, A.mesh_weight), 0.0))


def norm_vstar(A, v):
    """Dual norm ``||v||_* = (v, A^{-1} v)_h^{1/2}``."""
    try:
        w = A.solve(v)
    except (np.linalg.LinAlgError, ValueError) as exc:
        if isinstance(exc, DimensionError):
            raise
        raise OperatorError(f"solve failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise OperatorError("solve produced non-finite values")
    return np.sqrt(max(inner_h(v, w, A.mesh_weight), 0.0))
