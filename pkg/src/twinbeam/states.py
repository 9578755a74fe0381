"""Quadrature conventions and two-mode Gaussian state types.

Conventions used throughout the package:

* quadratures ``x = (a + a^dag)/2`` and ``y = (a - a^dag)/(2i)``, so the vacuum
  variance of every quadrature is 1/4;
* phase-space ordering ``(x1, y1, x2, y2)``;
* the covariance matrix holds symmetrized second moments
  ``V_pk = <{d xi_p, d xi_k}>/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, StructuralError

#: Variance of a single vacuum quadrature.
VACUUM_VARIANCE = 0.25

#: Default absolute tolerance on eigenvalue tests.
DEFAULT_TOL = 1e-10

#: Single-mode symplectic block.
J = np.array([[0.0, 1.0], [-1.0, 0.0]])

#: Standard two-mode symplectic form blockdiag(J, J).
OMEGA_SYM = np.block([[J, np.zeros((2, 2))], [np.zeros((2, 2)), J]])

#: Partially transposed form blockdiag(J, -J) used by the PPT test.
OMEGA_PT = np.block([[J, np.zeros((2, 2))], [np.zeros((2, 2)), -J]])


def _frozen(arr, shape) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    if out.shape != shape:
        raise StructuralError(f"expected shape {shape}, got {out.shape}")
    if not np.all(np.isfinite(out)):
        raise StructuralError("non-finite entries")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TwinBeamParams:
    """Squeezing of a twin-beam state; ``xi = tanh(lambda)``."""

    lam: float
    xi: float = field(init=False)

    def __post_init__(self):
        if not math.isfinite(self.lam) or self.lam < 0:
            raise DomainError(f"twin-beam squeezing must be >= 0, got {self.lam}")
        object.__setattr__(self, "xi", math.tanh(self.lam))


@dataclass(frozen=True, eq=False)
class TwoModeGaussianState:
    """First and second moments of a two-mode Gaussian state.

    Attributes:
        mean: quadrature means, shape (4,).
        cov: symmetric covariance matrix, shape (4, 4).
    """

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, (4,)))
        cov = _frozen(self.cov, (4, 4))
        if np.max(np.abs(cov - cov.T)) > DEFAULT_TOL:
            raise StructuralError("covariance matrix is not symmetric")
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_cov(cls, cov) -> "TwoModeGaussianState":
        return cls(np.zeros(4), cov)

    @property
    def blocks(self):
        """Return the mode blocks ``(A, B, C)`` with ``cov = [[A, C], [C.T, B]]``."""
        v = self.cov
        return v[:2, :2], v[2:, 2:], v[:2, 2:]

    def swapped(self) -> "TwoModeGaussianState":
        """Exchange the roles of mode 1 and mode 2."""
        perm = [2, 3, 0, 1]
        return TwoModeGaussianState(self.mean[perm], self.cov[np.ix_(perm, perm)])

    def allclose(self, other: "TwoModeGaussianState", atol: float = 1e-12) -> bool:
        return bool(
            np.allclose(self.mean, other.mean, rtol=0, atol=atol)
            and np.allclose(self.cov, other.cov, rtol=0, atol=atol)
        )


def vacuum_state() -> TwoModeGaussianState:
    return TwoModeGaussianState.from_cov(VACUUM_VARIANCE * np.eye(4))


def twb_state(params: TwinBeamParams | float) -> TwoModeGaussianState:
    """Twin-beam (two-mode squeezed vacuum) state.

    The mode blocks are ``cosh(2 lambda)/4 * I`` and the cross block is
    ``sinh(2 lambda)/4 * diag(1, -1)``, i.e. ``x1 + x2`` and ``y1 - y2`` are
    anti-squeezed while ``x1 - x2`` and ``y1 + y2`` are squeezed.

    Args:
        params: a :class:`TwinBeamParams` or the bare squeezing ``lambda``.

    Raises:
        DomainError: if ``lambda < 0``.
    """
    if not isinstance(params, TwinBeamParams):
        params = TwinBeamParams(float(params))
    lam = params.lam
    c = math.cosh(2 * lam) / 4
    s = math.sinh(2 * lam) / 4
    cross = s * np.diag([1.0, -1.0])
    cov = np.block([[c * np.eye(2), cross], [cross, c * np.eye(2)]])
    return TwoModeGaussianState.from_cov(cov)


def check_symmetric(cov, tolerance: float = DEFAULT_TOL) -> np.ndarray:
    cov = np.asarray(cov, dtype=float)
    if cov.shape != (4, 4):
        raise StructuralError(f"covariance must be 4x4, got {cov.shape}")
    if np.max(np.abs(cov - cov.T)) > tolerance:
        raise StructuralError("covariance matrix is not symmetric")
    return cov


def uncertainty_min_eigenvalue(state: TwoModeGaussianState | np.ndarray) -> float:
    """Smallest eigenvalue of ``cov + (i/4) Omega_sym``."""
    cov = state.cov if isinstance(state, TwoModeGaussianState) else np.asarray(state)
    return float(np.linalg.eigvalsh(cov + 0.25j * OMEGA_SYM)[0])


def physicality_check(state: TwoModeGaussianState | np.ndarray, tolerance: float = DEFAULT_TOL) -> bool:
    """Return True if the covariance satisfies the uncertainty principle.

    Raises:
        StructuralError: if the covariance is not symmetric within ``tolerance``.
    """
    cov = state.cov if isinstance(state, TwoModeGaussianState) else state
    cov = check_symmetric(cov, tolerance)
    return uncertainty_min_eigenvalue(cov) >= -tolerance
