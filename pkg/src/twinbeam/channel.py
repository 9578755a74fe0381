"""Squeezed-thermal Gaussian channel acting independently on both modes.

Each mode is damped at rate ``Gamma`` into a reservoir with effective photon
number ``N`` and squeezing ``M = |M| exp(i theta)``.  The reservoir is fully
specified by its thermal and squeezing photon numbers::

    N   = n_th + n_s (1 + 2 n_th)
    |M| = (1 + 2 n_th) sqrt(n_s (1 + n_s))

In phase space the drift is linear and isotropic and the diffusion does not
depend on the state, so the covariance relaxes exponentially towards the
stationary covariance of the reservoir::

    mean(t) = exp(-Gamma t / 2) mean(0)
    cov(t)  = exp(-Gamma t) cov(0) + (1 - exp(-Gamma t)) cov_inf

Both channels share the same ``(N, M)``.  The reservoir squeezes each mode
individually; there are no cross-mode noise correlations.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UnsupportedPathError
from .states import TwoModeGaussianState


@dataclass(frozen=True)
class BathSpec:
    """Physical reservoir parameters.

    Attributes:
        n_th: thermal photon number.
        n_s: squeezing photon number, ``sinh(|zeta|)**2``.
        theta: squeezing phase in radians.
        Gamma: damping rate (inverse time).
    """

    n_th: float = 0.0
    n_s: float = 0.0
    theta: float = 0.0
    Gamma: float = 1.0

    def __post_init__(self):
        for name in ("n_th", "n_s", "theta", "Gamma"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.n_th < 0:
            raise DomainError(f"n_th must be >= 0, got {self.n_th}")
        if self.n_s < 0:
            raise DomainError(f"n_s must be >= 0, got {self.n_s}")
        if self.Gamma <= 0:
            raise DomainError(f"Gamma must be > 0, got {self.Gamma}")


@dataclass(frozen=True)
class DerivedBath:
    """Channel parameters entering the master equation.

    ``gamma = 1/(2N + 1)`` rescales time in the phase-space picture
    (``tau = Gamma t / gamma``); the public API always works with ``t``.
    """

    N: float
    M: complex
    gamma: float
    Gamma: float = 1.0
    n_th: float | None = None
    n_s: float | None = None

    @property
    def theta(self) -> float:
        return cmath.phase(self.M) % (2 * math.pi) if self.M != 0 else 0.0

    @property
    def is_real(self) -> bool:
        return self.M.imag == 0.0


def derive_bath(spec: BathSpec | None = None, **kwargs) -> DerivedBath:
    """Map ``(n_th, n_s, theta, Gamma)`` to ``(N, M, gamma)``.

    Accepts either a :class:`BathSpec` or its fields as keyword arguments.
    """
    if spec is None:
        spec = BathSpec(**kwargs)
    elif kwargs:
        raise TypeError("pass either a BathSpec or keyword fields, not both")
    n_th, n_s = spec.n_th, spec.n_s
    N = n_th + n_s * (1 + 2 * n_th)
    mod_m = (1 + 2 * n_th) * math.sqrt(n_s * (1 + n_s))
    # keep M exactly real for theta = 0 so the real-M fast paths stay available
    M = complex(mod_m, 0.0) if spec.theta == 0 else mod_m * cmath.exp(1j * spec.theta)
    # holds identically: N(N+1) - |M|^2 = n_th (1 + n_th)
    if mod_m**2 > N * (N + 1) + 1e-12 * max(1.0, N * (N + 1)):
        raise ArithmeticError(f"|M|^2 = {mod_m**2} exceeds N(N+1) = {N * (N + 1)}")
    return DerivedBath(N=N, M=M, gamma=1 / (2 * N + 1), Gamma=spec.Gamma, n_th=n_th, n_s=n_s)


def bath_from_nm(N: float, M: complex, Gamma: float = 1.0) -> DerivedBath:
    """Build a channel directly from ``(N, M)``, checking ``|M|^2 <= N(N+1)``."""
    if not (math.isfinite(N) and N >= 0):
        raise DomainError(f"N must be >= 0, got {N}")
    if Gamma <= 0:
        raise DomainError(f"Gamma must be > 0, got {Gamma}")
    M = complex(M)
    if abs(M) ** 2 > N * (N + 1) * (1 + 1e-12):
        raise DomainError(f"|M|^2 = {abs(M) ** 2} violates |M|^2 <= N(N+1) = {N * (N + 1)}")
    return DerivedBath(N=float(N), M=M, gamma=1 / (2 * N + 1), Gamma=Gamma)


def _mode_block(bath: DerivedBath, scale: float, shift: float) -> np.ndarray:
    re, im = bath.M.real, bath.M.imag
    return np.array([[shift + scale * re, scale * im], [scale * im, shift - scale * re]])


def diffusion_matrix(bath: DerivedBath) -> np.ndarray:
    """Diffusion matrix of the phase-space equation in ``tau`` units."""
    g = bath.gamma
    block = 0.5 * _mode_block(bath, g, 0.5)
    return np.kron(np.eye(2), block)


def drift_matrix(bath: DerivedBath) -> np.ndarray:
    """Linear drift ``A`` with ``a(x) = A x`` in ``tau`` units."""
    return -0.5 * bath.gamma * np.eye(4)


def stationary_covariance(bath: DerivedBath) -> TwoModeGaussianState:
    """Fixed point of the channel: each mode in the reservoir's squeezed-thermal state."""
    block = _mode_block(bath, 0.5, (2 * bath.N + 1) / 4)
    return TwoModeGaussianState.from_cov(np.kron(np.eye(2), block))


def _check_time(t: float) -> float:
    t = float(t)
    if not math.isfinite(t) or t < 0:
        raise DomainError(f"time must be finite and >= 0, got {t}")
    return t


def evolve(state: TwoModeGaussianState, bath: DerivedBath, t: float) -> TwoModeGaussianState:
    """Propagate a Gaussian state through the channel for time ``t``.

    Args:
        state: initial state.
        bath: channel parameters; ``bath.Gamma`` sets the time unit.
        t: elapsed time, in the same units as ``1/Gamma``.

    Raises:
        DomainError: if ``t < 0``.
    """
    t = _check_time(t)
    decay = math.exp(-bath.Gamma * t)
    return evolve_decay(state, bath, decay)


def evolve_decay(state: TwoModeGaussianState, bath: DerivedBath, decay: float) -> TwoModeGaussianState:
    """Same as :func:`evolve` but parametrized by ``exp(-Gamma t)`` in (0, 1]."""
    if not 0 <= decay <= 1:
        raise DomainError(f"exp(-Gamma t) must lie in [0, 1], got {decay}")
    if decay == 1.0:
        return state
    cov_inf = stationary_covariance(bath).cov
    cov = decay * state.cov + (1 - decay) * cov_inf
    # exact symmetrization; the affine combination keeps symmetry up to rounding
    cov = 0.5 * (cov + cov.T)
    return TwoModeGaussianState(math.sqrt(decay) * state.mean, cov)


def covariance_rhs(cov: np.ndarray, bath: DerivedBath) -> np.ndarray:
    """``d cov / dt`` from drift and diffusion (used to cross-check the closed form)."""
    A = drift_matrix(bath)
    D = diffusion_matrix(bath)
    # d/dtau -> d/dt carries the factor Gamma / gamma
    return (bath.Gamma / bath.gamma) * (A @ cov + cov @ A.T + D)


#: Rotation onto ((x1+x2), (y1+y2), (x1-x2), (y1-y2)) / sqrt(2).
PLUS_MINUS = np.array(
    [
        [1.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
        [1.0, 0.0, -1.0, 0.0],
        [0.0, 1.0, 0.0, -1.0],
    ]
) / math.sqrt(2)


def rotated_variances(state: TwoModeGaussianState) -> np.ndarray:
    """Variances of ``(x1+x2, y1+y2, x1-x2, y1-y2)/sqrt(2)``.

    For a twin beam in a real-M channel these equal ``Sigma_j^2`` in the
    order ``(1, 2, 3, 4)``.
    """
    rotated = PLUS_MINUS @ state.cov @ PLUS_MINUS.T
    return np.diag(rotated).copy()


def sigma_squared(lam: float, bath: DerivedBath, t: float) -> tuple[float, float, float, float]:
    """The four principal variances of an evolved twin beam, real ``M`` only.

    Returns ``(S1, S2, S3, S4)`` where ``S1`` and ``S4`` carry the
    anti-squeezed initial variance ``exp(2 lambda)/4`` and ``S2``, ``S3`` the
    squeezed one, each relaxing towards ``(1 + 2N +/- 2M)/4``.

    Raises:
        UnsupportedPathError: if ``M`` has a nonzero imaginary part; use
            :func:`evolve` for a general phase.
    """
    if not bath.is_real:
        raise UnsupportedPathError("sigma_squared needs a real M; use evolve() for complex M")
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    t = _check_time(t)
    decay = math.exp(-bath.Gamma * t)
    s_plus = math.exp(2 * lam) / 4
    s_minus = math.exp(-2 * lam) / 4
    m = bath.M.real
    d_plus = (1 + 2 * bath.N + 2 * m) / 4 * (1 - decay)
    d_minus = (1 + 2 * bath.N - 2 * m) / 4 * (1 - decay)
    return (
        s_plus * decay + d_plus,
        s_minus * decay + d_minus,
        s_minus * decay + d_plus,
        s_plus * decay + d_minus,
    )

