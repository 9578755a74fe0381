"""Brute-force oracle: the two-mode master equation on a truncated Fock space.

The density operator is a dense ``d**2 x d**2`` matrix with mode-major index
``n1 * d + n2``.  Each mode evolves under::

    d rho/dt = Gamma (1 + N) L[a] rho + Gamma N L[a^dag] rho
               - Gamma M  Mc[a^dag] rho - Gamma M* Mc[a] rho

with ``L[O] rho = O rho O^dag - (O^dag O rho + rho O^dag O)/2`` and
``Mc[O] rho = O rho O - (O O rho + rho O O)/2``.  The phase-sensitive terms
carry a minus sign so that the stationary state has ``<a^2> = M``, which is
the reservoir described by :mod:`twinbeam.channel`.

Nothing here uses the Gaussian algebra; moments and the partial transpose
are computed directly from ``rho``.
"""
from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.sparse as sp

from .channel import DerivedBath
from .errors import DomainError, StructuralError, TruncationError
from .states import TwoModeGaussianState

log = logging.getLogger(__name__)

#: Partial-transpose eigenvalues above ``-PPT_FLOOR`` count as non-negative;
#: truncating a separable Gaussian state leaves spurious negatives of ~1e-9.
PPT_FLOOR = 1e-8


@dataclass(frozen=True)
class OracleConfig:
    """Integration settings; ``dt`` and ``t_final`` are in units of ``1/Gamma``.

    ``trunc_tol`` bounds the norm discarded when the initial state is cut off
    and the trace drift during integration.  ``edge_tol`` bounds the
    population of the top Fock level of either mode, which is where the
    truncated generator departs from the true one.
    """

    d: int = 25
    dt: float = 0.01
    t_final: float = 0.0
    trunc_tol: float = 1e-6
    edge_tol: float = 1e-5

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"cutoff must be >= 2, got {self.d}")
        if not self.dt > 0:
            raise DomainError(f"dt must be > 0, got {self.dt}")
        if not (math.isfinite(self.t_final) and self.t_final >= 0):
            raise DomainError(f"t_final must be >= 0, got {self.t_final}")
        if not (self.trunc_tol > 0 and self.edge_tol > 0):
            raise DomainError("tolerances must be > 0")


@dataclass(frozen=True, eq=False)
class TruncatedState:
    """Two-mode density operator on ``d x d`` Fock levels.

    ``info`` carries diagnostics: ``renormalization`` and ``norm_deficit``
    for freshly built states, and the fields listed in :func:`integrate`
    for evolved ones.
    """

    d: int
    rho: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rho.shape != (self.d**2, self.d**2):
            raise StructuralError(f"rho must be {self.d**2}x{self.d**2}, got {self.rho.shape}")

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def edge_population(self) -> float:
        """Largest single-mode population of the top Fock level ``d - 1``."""
        return _edge_population(self.rho, self.d)

    def validate(self, trunc_tol: float = 1e-6, herm_tol: float = 1e-10, eig_floor: float = -1e-8) -> None:
        """Check Hermiticity, trace and positivity; raise on violation."""
        herm = np.max(np.abs(self.rho - self.rho.conj().T))
        if herm > herm_tol:
            raise StructuralError(f"rho is not Hermitian (deviation {herm:.3g})")
        tr = self.trace
        if not (1 - trunc_tol <= tr <= 1 + 1e-10):
            raise TruncationError(f"trace {tr:.12g} outside [1 - {trunc_tol:g}, 1]")
        lo = np.linalg.eigvalsh(self.rho)[0]
        if lo < eig_floor:
            raise StructuralError(f"rho has eigenvalue {lo:.3g} below {eig_floor:g}")


def _edge_population(rho: np.ndarray, d: int) -> float:
    pops = np.diagonal(rho).real.reshape(d, d)
    return float(max(pops[-1, :].sum(), pops[:, -1].sum()))


def minimal_cutoff(lam: float, trunc_tol: float) -> int:
    """Smallest ``d`` with twin-beam norm deficit ``tanh(lambda)**(2d) <= trunc_tol``."""
    xi = math.tanh(lam)
    if xi == 0:
        return 2
    return max(2, math.ceil(math.log(trunc_tol) / (2 * math.log(xi))))


def twb_density(lam: float, d: int, trunc_tol: float = 1e-6) -> TruncatedState:
    """Truncated, renormalized twin-beam ``|TWB><TWB|``.

    Raises:
        TruncationError: if the discarded norm ``tanh(lambda)**(2d)`` exceeds
            ``trunc_tol``; the message names the smallest adequate cutoff.
    """
    if lam < 0:
        raise DomainError(f"lambda must be >= 0, got {lam}")
    if d < 2:
        raise DomainError(f"cutoff must be >= 2, got {d}")
    xi = math.tanh(lam)
    deficit = xi ** (2 * d)
    if deficit > trunc_tol:
        raise TruncationError(
            f"cutoff d={d} loses norm {deficit:.3g} > {trunc_tol:g}; "
            f"use d >= {minimal_cutoff(lam, trunc_tol)}"
        )
    amps = math.sqrt(1 - xi**2) * xi ** np.arange(d)
    psi = np.zeros(d * d, dtype=complex)
    psi[np.arange(d) * (d + 1)] = amps
    norm2 = float(np.vdot(psi, psi).real)
    psi /= math.sqrt(norm2)
    rho = np.outer(psi, psi.conj())
    return TruncatedState(d, rho, {"renormalization": 1 / norm2, "norm_deficit": deficit})


def thermal_density(n_th: float, d: int) -> TruncatedState:
    """Product of two thermal states with mean photon number ``n_th``, renormalized."""
    if n_th < 0:
        raise DomainError("n_th must be >= 0")
    p = np.zeros(d)
    if n_th == 0:
        p[0] = 1.0
    else:
        r = n_th / (1 + n_th)
        p = r ** np.arange(d) / (1 + n_th)
    p /= p.sum()
    return TruncatedState(d, np.diag(np.kron(p, p)).astype(complex))


def fock_density(n1: int, n2: int, d: int) -> TruncatedState:
    psi = np.zeros(d * d, dtype=complex)
    psi[n1 * d + n2] = 1.0
    return TruncatedState(d, np.outer(psi, psi))


@functools.lru_cache(maxsize=8)
def _ladder(d: int):
    a = sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), format="csr", dtype=complex)
    eye = sp.identity(d, format="csr", dtype=complex)
    a1 = sp.kron(a, eye, format="csr")
    a2 = sp.kron(eye, a, format="csr")
    return a1, a2


class Generator:
    """Right-hand side of the master equation for a fixed channel and cutoff."""

    def __init__(self, bath: DerivedBath, d: int):
        self.bath = bath
        self.d = d
        G, N, M = bath.Gamma, bath.N, bath.M
        modes = []
        K = sp.csr_matrix((d * d, d * d), dtype=complex)
        for a in _ladder(d):
            ad = a.conj().T.tocsr()
            # jump part: aRa^dag, a^dag R a, a^dag R a^dag, a R a
            right_of_a = (G * (1 + N) * ad - G * np.conj(M) * a).tocsr()
            right_of_ad = (G * N * a - G * M * ad).tocsr()
            modes.append((a, ad, right_of_a, right_of_ad))
            K = K - 0.5 * G * ((1 + N) * (ad @ a) + N * (a @ ad)) + 0.5 * G * (M * (ad @ ad) + np.conj(M) * (a @ a))
        self.modes = modes
        self.K = K.tocsr()

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        out = self.K @ rho
        out += (self.K.T @ rho.T).T
        for a, ad, right_a, right_ad in self.modes:
            out += _rmul(a @ rho, right_a)
            out += _rmul(ad @ rho, right_ad)
        return out


def _rmul(dense: np.ndarray, sparse) -> np.ndarray:
    return (sparse.T @ dense.T).T


def lindblad_rhs(rho, bath: DerivedBath) -> np.ndarray:
    """``d rho / dt`` (physical time) for a dense ``d**2 x d**2`` matrix or a TruncatedState."""
    mat = rho.rho if isinstance(rho, TruncatedState) else np.asarray(rho)
    n = mat.shape[0]
    d = math.isqrt(n)
    if mat.shape != (n, n) or d * d != n:
        raise StructuralError(f"rho must be square with side d**2, got {mat.shape}")
    if isinstance(rho, TruncatedState) and rho.d != d:
        raise StructuralError("cutoff does not match rho")
    return Generator(bath, d)(mat.astype(complex, copy=False))


@numba.njit(cache=True)
def _rhs_kernel(R, out, w, sq, G, N, M):
    # R[n1, n2, m1, m2]; same generator as Generator, written element-wise
    d = R.shape[0]
    Mc = np.conj(M)
    cj = G * (1 + N)
    cn = G * N
    hm = 0.5 * G * M
    hmc = 0.5 * G * Mc
    for n1 in range(d):
        for n2 in range(d):
            for m1 in range(d):
                for m2 in range(d):
                    v = (w[n1] + w[n2] + w[m1] + w[m2]) * R[n1, n2, m1, m2]
                    # mode 1
                    if n1 + 1 < d and m1 + 1 < d:
                        v += cj * sq[n1 + 1] * sq[m1 + 1] * R[n1 + 1, n2, m1 + 1, m2]
                    if n1 > 0 and m1 > 0:
                        v += cn * sq[n1] * sq[m1] * R[n1 - 1, n2, m1 - 1, m2]
                    if n1 > 0 and m1 + 1 < d:
                        v -= G * M * sq[n1] * sq[m1 + 1] * R[n1 - 1, n2, m1 + 1, m2]
                    if n1 + 1 < d and m1 > 0:
                        v -= G * Mc * sq[n1 + 1] * sq[m1] * R[n1 + 1, n2, m1 - 1, m2]
                    if n1 >= 2:
                        v += hm * sq[n1] * sq[n1 - 1] * R[n1 - 2, n2, m1, m2]
                    if n1 + 2 < d:
                        v += hmc * sq[n1 + 1] * sq[n1 + 2] * R[n1 + 2, n2, m1, m2]
                    if m1 + 2 < d:
                        v += hm * sq[m1 + 1] * sq[m1 + 2] * R[n1, n2, m1 + 2, m2]
                    if m1 >= 2:
                        v += hmc * sq[m1] * sq[m1 - 1] * R[n1, n2, m1 - 2, m2]
                    # mode 2
                    if n2 + 1 < d and m2 + 1 < d:
                        v += cj * sq[n2 + 1] * sq[m2 + 1] * R[n1, n2 + 1, m1, m2 + 1]
                    if n2 > 0 and m2 > 0:
                        v += cn * sq[n2] * sq[m2] * R[n1, n2 - 1, m1, m2 - 1]
                    if n2 > 0 and m2 + 1 < d:
                        v -= G * M * sq[n2] * sq[m2 + 1] * R[n1, n2 - 1, m1, m2 + 1]
                    if n2 + 1 < d and m2 > 0:
                        v -= G * Mc * sq[n2 + 1] * sq[m2] * R[n1, n2 + 1, m1, m2 - 1]
                    if n2 >= 2:
                        v += hm * sq[n2] * sq[n2 - 1] * R[n1, n2 - 2, m1, m2]
                    if n2 + 2 < d:
                        v += hmc * sq[n2 + 1] * sq[n2 + 2] * R[n1, n2 + 2, m1, m2]
                    if m2 + 2 < d:
                        v += hm * sq[m2 + 1] * sq[m2 + 2] * R[n1, n2, m1, m2 + 2]
                    if m2 >= 2:
                        v += hmc * sq[m2] * sq[m2 - 1] * R[n1, n2, m1, m2 - 2]
                    out[n1, n2, m1, m2] = v


class FastGenerator:
    """Element-wise version of :class:`Generator` used by :func:`integrate`."""

    def __init__(self, bath: DerivedBath, d: int):
        self.d = d
        G, N = bath.Gamma, bath.N
        n = np.arange(d, dtype=float)
        # truncated a a^dag has a zero in the top level
        aad = np.where(n < d - 1, n + 1, 0.0)
        self.w = (-0.5 * G * ((1 + N) * n + N * aad)).astype(complex)
        self.sq = np.sqrt(n)
        self.args = (complex(G), complex(N), complex(bath.M))

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        d = self.d
        out = np.empty((d, d, d, d), dtype=complex)
        _rhs_kernel(rho.reshape(d, d, d, d), out, self.w, self.sq, *self.args)
        return out.reshape(d * d, d * d)

    @property
    def norm_bound(self) -> float:
        """Upper bound on the generator norm (sum of both modes)."""
        G, N, M = (abs(x) for x in self.args)
        return 2 * G * (self.d - 1) * (2 + 4 * N + 4 * M)


#: RK4 is stable on the negative real axis up to |h lambda| ~ 2.78.
RK4_STABILITY = 2.5


def integrate(state: TruncatedState, bath: DerivedBath, config: OracleConfig, observer=None) -> TruncatedState:
    """Fixed-step RK4 over the master equation up to ``Gamma t = config.t_final``.

    The step is ``config.dt``, reduced if needed to keep ``h * ||L||`` inside
    the RK4 stability interval, then shortened to divide ``t_final`` evenly.  After
    each step ``rho`` is replaced by ``(rho + rho^dag)/2``.  ``observer``,
    if given, is called as ``observer(gamma_t, rho)`` at t = 0 and after
    every step.

    Diagnostics in ``info``: ``leakage`` (initial norm deficit plus trace
    drift), ``edge_population`` (largest top-level population seen),
    ``hermiticity_correction`` (largest entry changed by re-symmetrizing),
    ``steps`` and ``step``.

    Raises:
        TruncationError: if the leakage exceeds ``config.trunc_tol`` or the
            top-level population exceeds ``config.edge_tol``.
    """
    if state.d != config.d:
        raise StructuralError(f"state cutoff {state.d} differs from config cutoff {config.d}")
    d = config.d
    rho = state.rho.astype(complex, copy=True)
    deficit = state.info.get("norm_deficit", 0.0)
    edge = state.edge_population()
    if observer is not None:
        observer(0.0, rho)

    h = 0.0
    n_steps = 0
    max_corr = 0.0
    if config.t_final > 0:
        gen = FastGenerator(bath, d)
        # cap the step so every generator eigenvalue stays inside the RK4 stability region
        dt = min(config.dt, RK4_STABILITY * bath.Gamma / gen.norm_bound)
        n_steps = math.ceil(config.t_final / dt - 1e-9)
        h = config.t_final / n_steps
    # generator is in physical time; steps are in units of 1/Gamma
    scale = h / bath.Gamma
    for step in range(1, n_steps + 1):
        k1 = gen(rho)
        k2 = gen(rho + 0.5 * scale * k1)
        k3 = gen(rho + 0.5 * scale * k2)
        k4 = gen(rho + scale * k3)
        rho = rho + (scale / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        herm = 0.5 * (rho + rho.conj().T)
        max_corr = max(max_corr, float(np.max(np.abs(herm - rho))))
        rho = herm
        edge = max(edge, _edge_population(rho, d))
        if edge > config.edge_tol:
            raise TruncationError(
                f"population {edge:.3g} reached the Fock cutoff d={d} at Gamma t = {step * h:.4g}; "
                "increase the cutoff"
            )
        if observer is not None:
            observer(step * h, rho)

    leakage = deficit + abs(1 - float(np.trace(rho).real))
    if leakage > config.trunc_tol:
        raise TruncationError(f"trace leakage {leakage:.3g} exceeds {config.trunc_tol:g}; increase the cutoff")
    log.debug("integrate: %d steps, max hermiticity correction %.3g", n_steps, max_corr)
    info = {
        "leakage": leakage,
        "edge_population": edge,
        "hermiticity_correction": max_corr,
        "steps": n_steps,
        "step": h,
    }
    return TruncatedState(d, rho, info)


@functools.lru_cache(maxsize=8)
def _quadratures(d: int):
    ops = []
    for a in _ladder(d):
        ad = a.conj().T
        ops.append(((a + ad) / 2).tocsr())
        ops.append(((a - ad) / 2j).tocsr())
    return ops


def _expect(rho: np.ndarray, op) -> complex:
    # Tr(rho op) without forming the product
    return complex(op.multiply(rho.T).sum())


def moments_to_covariance(state: TruncatedState) -> TwoModeGaussianState:
    """Quadrature means and symmetrized covariance ``<{dx_p, dx_k}>/2`` of ``rho``.

    Products of truncated quadratures miss the ``a a^dag`` contribution of
    the top level, so ``rho`` is embedded one level higher where the
    quadratic moments of a state living on ``d`` levels are exact.
    """
    d = state.d
    rho = _embed(state.rho, d)
    ops = _quadratures(d + 1)
    mean = np.array([_expect(rho, q).real for q in ops])
    cov = np.empty((4, 4))
    for p in range(4):
        for k in range(p, 4):
            sym = (ops[p] @ ops[k] + ops[k] @ ops[p]) / 2
            cov[p, k] = cov[k, p] = _expect(rho, sym).real - mean[p] * mean[k]
    return TwoModeGaussianState(mean, cov)


def _embed(rho: np.ndarray, d: int) -> np.ndarray:
    big = np.zeros((d + 1, d + 1, d + 1, d + 1), dtype=rho.dtype)
    big[:d, :d, :d, :d] = rho.reshape(d, d, d, d)
    return big.reshape((d + 1) ** 2, (d + 1) ** 2)


def partial_transpose(rho: np.ndarray, d: int) -> np.ndarray:
    """Transpose the mode-2 indices: ``(n1 n2, m1 m2) -> (n1 m2, m1 n2)``."""
    return rho.reshape(d, d, d, d).transpose(0, 3, 2, 1).reshape(d * d, d * d)


def ppt_min_eigenvalue(state: TruncatedState) -> float:
    """Smallest eigenvalue of the partial transpose; negative means entangled."""
    pt = partial_transpose(state.rho, state.d)
    pt = 0.5 * (pt + pt.conj().T)
    return float(np.linalg.eigvalsh(pt)[0])


def is_ppt(state: TruncatedState, floor: float = PPT_FLOOR) -> bool:
    return ppt_min_eigenvalue(state) >= -floor
