"""PPT separability of two-mode Gaussian states and entanglement survival times.

A two-mode Gaussian state with covariance ``V`` is separable iff the
Hermitian matrix ``S = V + (i/4) Omega`` is positive semidefinite, where
``Omega = blockdiag(J, -J)`` implements partial transposition on mode 2.

For a twin beam in a real-M channel, ``S >= 0`` reduces to two conditions on
products of principal variances, and the time at which they start to hold
has a closed form.  For complex ``M`` the survival time is found by
bisection on the smallest eigenvalue of ``S(t)``.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .channel import DerivedBath, derive_bath, evolve, evolve_decay
from .errors import DomainError, NumericalError
from .states import DEFAULT_TOL, OMEGA_PT, TwoModeGaussianState, check_symmetric, twb_state

log = logging.getLogger(__name__)

#: Upper end of the survival-time search, in units of 1/Gamma.
GAMMA_T_MAX = 100.0

#: Eigenvalues smaller than this in magnitude are treated as unresolved when
#: looking for a sign change (float noise of a 4x4 Hermitian eigensolve).
_RESOLVE_TOL = 1e-13


def characteristic_polynomial(mat: np.ndarray) -> np.ndarray:
    """Coefficients of ``det(mat - x I)``, highest degree first.

    Uses the Faddeev-LeVerrier recursion so the coefficients never go
    through an eigendecomposition.
    """
    mat = np.asarray(mat)
    n = mat.shape[0]
    coeffs = _leverrier(mat)
    # det(mat - x I) = (-1)^n det(x I - mat)
    return (-1) ** n * coeffs


def _leverrier(mat: np.ndarray) -> np.ndarray:
    # coefficients of det(x I - mat), highest degree first
    n = mat.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    m_k = np.zeros((n, n), dtype=complex)
    ident = np.eye(n)
    for k in range(1, n + 1):
        m_k = mat @ m_k + coeffs[k - 1] * ident
        coeffs[k] = -np.trace(mat @ m_k) / k
    return coeffs


@dataclass(frozen=True, eq=False)
class PptReport:
    """Outcome of the PPT test on one covariance matrix.

    Attributes:
        S: ``V + (i/4) blockdiag(J, -J)``.
        eigenvalues: ascending real eigenvalues of ``S``.
        min_eigenvalue: ``eigenvalues[0]``.
        char_poly: real coefficients of ``q_S(x) = det(S - x I)``,
            highest degree first.
        separable: ``min_eigenvalue >= -tolerance``.
    """

    S: np.ndarray
    eigenvalues: np.ndarray
    min_eigenvalue: float
    char_poly: np.ndarray
    separable: bool
    tolerance: float = DEFAULT_TOL

    @property
    def roots(self) -> np.ndarray:
        """Roots of ``q_S`` sorted by real part (complex dtype)."""
        r = np.roots(self.char_poly)
        return r[np.argsort(r.real)]

    def q(self, x):
        return np.polyval(self.char_poly, x)

    @property
    def n_negative(self) -> int:
        return int(np.sum(self.eigenvalues < -self.tolerance))


def ppt_test(state: TwoModeGaussianState, tolerance: float = DEFAULT_TOL) -> PptReport:
    """Positivity of the partial transpose for a two-mode Gaussian state.

    Raises:
        StructuralError: if the covariance is not symmetric.
    """
    cov = check_symmetric(state.cov if isinstance(state, TwoModeGaussianState) else state)
    S = cov + 0.25j * OMEGA_PT
    eigs = np.linalg.eigvalsh(S)
    poly = characteristic_polynomial(S)
    if np.max(np.abs(poly.imag)) > 1e-10:
        raise NumericalError("characteristic polynomial of a Hermitian matrix came out complex")
    S.setflags(write=False)
    return PptReport(
        S=S,
        eigenvalues=eigs,
        min_eigenvalue=float(eigs[0]),
        char_poly=poly.real.copy(),
        separable=bool(eigs[0] >= -tolerance),
        tolerance=tolerance,
    )


def sigma_conditions(s1: float, s2: float, s3: float, s4: float) -> tuple[bool, float, float]:
    """Separability from the four principal variances of a real-M twin beam.

    Returns:
        ``(separable, s1*s4 - 1/16, s2*s3 - 1/16)``.
    """
    for s in (s1, s2, s3, s4):
        if not s > 0:
            raise DomainError(f"variances must be positive, got {s}")
    m1 = s1 * s4 - 1 / 16
    m2 = s2 * s3 - 1 / 16
    return (m1 >= 0 and m2 >= 0), m1, m2


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    BISECTION = "bisection"


@dataclass(frozen=True)
class SurvivalResult:
    """Entanglement survival time of a twin beam, in units of ``1/Gamma``.

    ``t_0`` is the survival time for the same ``(lambda, n_th)`` with an
    unsqueezed reservoir and ``G = (t_s - t_0)/t_0``.  Infinite times are
    ``math.inf``.  When ``t_0`` is infinite (pure loss reference) ``G`` is
    ``-1`` if ``t_s`` is finite and NaN otherwise.
    """

    t_s: float
    t_0: float
    G: float
    method: Method
    diagnostic: str = ""

    def scaled(self, Gamma: float) -> "SurvivalResult":
        """Times in physical units for damping rate ``Gamma``."""
        return SurvivalResult(self.t_s / Gamma, self.t_0 / Gamma, self.G, self.method, self.diagnostic)


def _check_params(lam: float, n_th: float, n_s: float):
    for name, v in (("lambda", lam), ("n_th", n_th), ("n_s", n_s)):
        if not math.isfinite(v):
            raise DomainError(f"{name} must be finite")
    if lam <= 0:
        raise DomainError(
            f"lambda must be > 0, got {lam} (an unsqueezed input is separable at t = 0)"
        )
    if n_th < 0 or n_s < 0:
        raise DomainError("photon numbers must be >= 0")


def thermal_survival_time(lam: float, n_th: float) -> float:
    """Survival time in an unsqueezed bath, ``ln[(1 + 2 n_th - exp(-2 lambda)) / (2 n_th)]``."""
    if n_th == 0:
        return math.inf
    return math.log((1 + 2 * n_th - math.exp(-2 * lam)) / (2 * n_th))


def f_parameter(lam: float, n_th: float, n_s: float) -> float:
    """``(1+2n)(1 + 2n - exp(-2 lambda)(1 + 2 n_s)) / (4 n (1+n))`` with ``n = n_th > 0``."""
    if n_th <= 0:
        raise DomainError("f is only defined for n_th > 0")
    w = 1 + 2 * n_th - math.exp(-2 * lam) * (1 + 2 * n_s)
    return (1 + 2 * n_th) * w / (4 * n_th * (1 + n_th))


def _relative_change(t_s: float, t_0: float) -> float:
    if math.isinf(t_0):
        return math.nan if math.isinf(t_s) else -1.0
    return (t_s - t_0) / t_0


def survival_time_closed(lam: float, n_th: float, n_s: float) -> SurvivalResult:
    """Closed-form survival time for an in-phase (real M) squeezed bath.

    ``x = exp(Gamma t_s)`` is the larger root of the quadratic obtained from
    ``Sigma_2^2 Sigma_3^2 = 1/16`` (the other product condition is implied).
    With ``u = exp(-2 lambda)``, ``w = 1 + 2 n_th - u (1 + 2 n_s)`` and
    ``K = n_s (1 + n_s)``::

        x = [(1 + 2 n_th) w + sqrt(w^2 + 16 n_th (1 + n_th) u^2 K)] / (4 n_th (1 + n_th))
          = f + sqrt(f^2 + (1 + 2 n_th)^2 u^2 K / (n_th (1 + n_th))) / (1 + 2 n_th)

    For ``w < 0`` the rationalized form is used, which stays finite as
    ``n_th -> 0``; with ``n_th = 0`` and ``w >= 0`` entanglement is never
    lost and ``t_s`` is infinite.

    Raises:
        DomainError: if ``lambda <= 0`` or a photon number is negative.
    """
    _check_params(lam, n_th, n_s)
    t_0 = thermal_survival_time(lam, n_th)
    if n_s == 0:
        return SurvivalResult(t_0, t_0, 0.0, Method.CLOSED_FORM)

    u = math.exp(-2 * lam)
    K = n_s * (1 + n_s)
    w = 1 + 2 * n_th - u * (1 + 2 * n_s)
    q = 4 * n_th * (1 + n_th)
    root = math.sqrt(w * w + 4 * q * u * u * K)
    if w >= 0:
        if n_th == 0:
            return SurvivalResult(
                math.inf, t_0, _relative_change(math.inf, t_0), Method.CLOSED_FORM,
                "entangled at all times: exp(-2 lambda)(1 + 2 n_s) <= 1 with n_th = 0",
            )
        x = ((1 + 2 * n_th) * w + root) / q
    else:
        x = (w * w - 4 * u * u * K) / ((1 + 2 * n_th) * w - root)
    t_s = math.log(x)
    return SurvivalResult(t_s, t_0, _relative_change(t_s, t_0), Method.CLOSED_FORM)


def thermal_photons(bath: DerivedBath) -> float:
    """Recover ``n_th`` from ``N(N+1) - |M|^2 = n_th (1 + n_th)``."""
    if bath.n_th is not None:
        return bath.n_th
    excess = max(bath.N * (bath.N + 1) - abs(bath.M) ** 2, 0.0)
    return (math.sqrt(1 + 4 * excess) - 1) / 2


def twb_min_eigenvalue(lam: float, bath: DerivedBath, gamma_t: float) -> float:
    """Smallest eigenvalue of ``S`` for the twin beam after ``Gamma t = gamma_t``."""
    state = evolve_decay(twb_state(lam), bath, math.exp(-gamma_t))
    return float(np.linalg.eigvalsh(state.cov + 0.25j * OMEGA_PT)[0])


def find_threshold(func, gamma_t_max: float = GAMMA_T_MAX, lo: float = 1e-6, hi: float = 1.0, xtol: float = 1e-15):
    """Earliest ``Gamma t`` where ``func`` turns from negative to positive.

    ``func`` must be negative at ``lo`` (or at 0).  The upper end is doubled
    until ``func(hi)`` is resolvably positive or ``hi`` exceeds
    ``gamma_t_max``.

    Returns:
        ``(root, diagnostic)``; ``root`` is ``math.inf`` if no crossing was found.
    """
    if func(lo) >= 0:
        if func(0.0) >= 0:
            return 0.0, "already separable at t = 0"
        lo, hi = 0.0, lo
    f_hi = func(hi)
    while f_hi <= _RESOLVE_TOL:
        if hi >= gamma_t_max:
            return math.inf, f"no sign change of the PPT eigenvalue up to Gamma t = {gamma_t_max:g}"
        lo = hi
        hi = min(2 * hi, gamma_t_max)
        f_hi = func(hi)
    if func(lo) >= 0:
        raise NumericalError(f"bracket [{lo}, {hi}] has no sign change")
    root = optimize.bisect(func, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)
    return root, ""


def survival_time_numeric(lam: float, bath: DerivedBath, gamma_t_max: float = GAMMA_T_MAX) -> SurvivalResult:
    """Survival time for an arbitrary reservoir phase by bisection on ``min eig S(t)``.

    Times are in units of ``1/Gamma``.  If no crossing occurs before
    ``gamma_t_max`` the survival time is reported as infinite with a
    diagnostic.
    """
    n_th = thermal_photons(bath)
    _check_params(lam, n_th, 0.0)
    t_s, diag = find_threshold(lambda gt: twb_min_eigenvalue(lam, bath, gt), gamma_t_max)
    if diag:
        log.info("survival_time_numeric: %s", diag)
    t_0 = thermal_survival_time(lam, n_th)
    if bath.M == 0:
        # unsqueezed reservoir: t_s is t_0 by definition
        return SurvivalResult(t_s, t_0, 0.0 if t_s == t_0 else _relative_change(t_s, t_0), Method.BISECTION, diag)
    return SurvivalResult(t_s, t_0, _relative_change(t_s, t_0), Method.BISECTION, diag)


def survival_time(lam: float, n_th: float, n_s: float, theta: float = 0.0) -> SurvivalResult:
    """Closed form for ``theta == 0``, bisection otherwise."""
    if theta == 0:
        return survival_time_closed(lam, n_th, n_s)
    return survival_time_numeric(lam, derive_bath(n_th=n_th, n_s=n_s, theta=theta))


def char_poly_profile(lam: float, bath: DerivedBath, exp_gamma_t: float, tolerance: float = DEFAULT_TOL) -> PptReport:
    """PPT report for the twin beam at the time where ``exp(-Gamma t) = exp_gamma_t``."""
    if not 0 < exp_gamma_t <= 1:
        raise DomainError(f"exp(-Gamma t) must lie in (0, 1], got {exp_gamma_t}")
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    return ppt_test(evolve_decay(twb_state(lam), bath, exp_gamma_t), tolerance)


def twb_ppt_at(lam: float, bath: DerivedBath, t: float, tolerance: float = DEFAULT_TOL) -> PptReport:
    return ppt_test(evolve(twb_state(lam), bath, t), tolerance)
