"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run on its own with ``pytest tests/test_acceptance.py -v`` or
``python tests/test_acceptance.py``.
"""
import math
import sys
import time

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam.channel import derive_bath, evolve, sigma_squared
from twinbeam.fock import (
    PPT_FLOOR,
    Generator,
    OracleConfig,
    TruncatedState,
    integrate,
    moments_to_covariance,
    ppt_min_eigenvalue,
    twb_density,
)
from twinbeam.separability import (
    char_poly_profile,
    ppt_test,
    sigma_conditions,
    survival_time,
    survival_time_closed,
)
from twinbeam.states import physicality_check, twb_state

LAMS = [round(0.1 * k, 1) for k in range(1, 11)]
NTH = [1e-3, 0.5, 1.0]
NS = [0.01, 0.07, 0.5, 1.0]
G_GRID_LAMS = [round(0.1 + 0.15 * k, 2) for k in range(7)]


def report(capsys, number, ok, detail, elapsed):
    with capsys.disabled():
        print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail} ({elapsed:.2f} s)")


def sigma_bisection(lam, n_th, n_s, hi=100.0):
    """Survival time by plain bisection on the two variance-product conditions."""
    bath = derive_bath(n_th=n_th, n_s=n_s)

    def separable(gt):
        return sigma_conditions(*sigma_squared(lam, bath, gt))[0]

    lo = 0.0
    assert not separable(lo) and separable(hi)
    while hi - lo > 1e-15 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if separable(mid):
            hi = mid
        else:
            lo = mid
    return hi


def test_criterion_1_closed_form_vs_bisection(capsys):
    start = time.perf_counter()
    worst = 0.0
    for lam in LAMS:
        for n_th in NTH:
            for n_s in NS:
                closed = survival_time_closed(lam, n_th, n_s).t_s
                ref = sigma_bisection(lam, n_th, n_s)
                worst = max(worst, abs(closed - ref) / ref)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 1.0
    report(capsys, 1, ok, f"max relative deviation {worst:.2e} over {len(LAMS) * len(NTH) * len(NS)} points",
           elapsed)
    assert worst <= 1e-9
    assert elapsed < 1.0


def test_criterion_2_g_negative_on_grid(capsys):
    start = time.perf_counter()
    ns_grid = np.linspace(0.02, 1.0, 50)
    g_max, count = -math.inf, 0
    for n_th in (1e-3, 1.0):
        for lam in G_GRID_LAMS:
            for n_s in ns_grid:
                g_max = max(g_max, survival_time_closed(lam, n_th, float(n_s)).G)
                count += 1
    elapsed = time.perf_counter() - start
    ok = g_max < 0 and elapsed < 5.0
    report(capsys, 2, ok, f"largest G = {g_max:.3e} over {count} points", elapsed)
    assert g_max < 0
    assert elapsed < 5.0


ROOT_CASES = {
    "a": dict(n_th=0.0, n_s=0.0, theta=0.0),
    "b": dict(n_th=0.5, n_s=0.0, theta=0.0),
    "c": dict(n_th=0.5, n_s=0.07, theta=0.0),
    "d": dict(n_th=0.5, n_s=0.07, theta=math.pi / 5),
}


def test_criterion_3_char_poly_roots(capsys):
    start = time.perf_counter()
    reports = {k: char_poly_profile(1.0, derive_bath(**kw), 0.55) for k, kw in ROOT_CASES.items()}
    elapsed = time.perf_counter() - start
    four_real = all(np.max(np.abs(r.roots.imag)) < 1e-8 for r in reports.values())
    three_positive = all(np.sum(r.roots.real > 0) >= 3 for r in reports.values())
    ok = (
        reports["a"].n_negative == 1
        and np.all(reports["d"].eigenvalues >= 0)
        and four_real
        and three_positive
        and elapsed < 1.0
    )
    detail = ", ".join(f"({k}) min root {r.roots.real[0]:+.4g}" for k, r in reports.items())
    report(capsys, 3, ok, detail, elapsed)
    assert reports["a"].n_negative == 1
    assert np.all(reports["d"].eigenvalues >= 0)
    assert four_real and three_positive
    assert elapsed < 1.0


def test_criterion_4_phase_ordering(capsys):
    start = time.perf_counter()
    thetas = [0.0, math.pi / 10, math.pi / 5, math.pi / 2]
    t_s = [survival_time(1.0, 0.5, 0.07, th).t_s for th in thetas]
    elapsed = time.perf_counter() - start
    non_increasing = all(a >= b for a, b in zip(t_s, t_s[1:]))
    below_zero_phase = all(t < t_s[0] for t in t_s[1:])
    ok = non_increasing and below_zero_phase and elapsed < 1.0
    report(capsys, 4, ok, "t_s = " + ", ".join(f"{t:.6f}" for t in t_s), elapsed)
    assert non_increasing and below_zero_phase
    assert elapsed < 1.0


def test_criterion_5_monotone_in_photon_numbers(capsys):
    start = time.perf_counter()
    table = {(lam, n_th, n_s): survival_time_closed(lam, n_th, n_s).t_s for lam in LAMS for n_th in NTH for n_s in NS}
    bad = []
    for lam in LAMS:
        for n_s in NS:
            col = [table[lam, n_th, n_s] for n_th in NTH]
            bad += [("n_th", lam, n_s) for a, b in zip(col, col[1:]) if not b < a]
        for n_th in NTH:
            row = [table[lam, n_th, n_s] for n_s in NS]
            bad += [("n_s", lam, n_th) for a, b in zip(row, row[1:]) if not b < a]
    elapsed = time.perf_counter() - start
    report(capsys, 5, not bad, f"{len(bad)} non-decreasing finite differences", elapsed)
    assert not bad


# (lambda, n_th, n_s, theta, Gamma t); the phase-dependence reservoir plus pure loss and hotter baths
ORACLE_POINTS = [
    (0.5, 0.0, 0.0, 0.0, 1.0),
    (0.8, 0.0, 0.0, 0.0, 0.5),
    (0.8, 0.5, 0.07, 0.0, 0.6),
    (0.8, 0.5, 0.07, math.pi / 5, 0.6),
    (0.8, 0.5, 0.07, math.pi / 10, 1.0),
    (0.8, 0.5, 0.07, math.pi / 2, 0.4),
    (0.6, 1.0, 0.1, 0.0, 0.3),
    (0.8, 1.0, 0.0, 0.0, 0.3),
    (0.3, 1e-3, 0.5, 0.0, 1.0),
    (0.8, 0.5, 0.5, math.pi / 3, 0.3),
]
CROSSING = (0.8, 1.0, 0.1)
WINDOW = 0.02


def test_criterion_6_fock_oracle(capsys):
    start = time.perf_counter()
    d = 25
    worst, disagreements, checked = 0.0, [], 0
    for lam, n_th, n_s, theta, gt in ORACLE_POINTS:
        bath = derive_bath(n_th=n_th, n_s=n_s, theta=theta)
        fock = integrate(twb_density(lam, d), bath, OracleConfig(d=d, t_final=gt))
        gauss = evolve(twb_state(lam), bath, gt)
        worst = max(worst, float(np.max(np.abs(moments_to_covariance(fock).cov - gauss.cov))))
        t_s = survival_time(lam, n_th, n_s, theta).t_s
        if abs(gt - t_s) > WINDOW:
            checked += 1
            if ppt_test(gauss).separable != (ppt_min_eigenvalue(fock) >= -PPT_FLOOR):
                disagreements.append((lam, n_th, n_s, theta, gt))

    # sign crossing of the Fock partial transpose for a real-M reservoir
    lam, n_th, n_s = CROSSING
    t_s = survival_time_closed(lam, n_th, n_s).t_s
    bath = derive_bath(n_th=n_th, n_s=n_s)
    trace = []

    def observer(gt, rho):
        if gt >= t_s - 2 * WINDOW:
            trace.append((gt, ppt_min_eigenvalue(TruncatedState(d, rho))))

    integrate(twb_density(lam, d), bath, OracleConfig(d=d, t_final=t_s + 2 * WINDOW), observer=observer)
    crossing = next((gt for gt, m in trace if m >= -PPT_FLOOR), math.inf)
    elapsed = time.perf_counter() - start

    ok = (
        worst <= 1e-4
        and not disagreements
        and len(ORACLE_POINTS) >= 10
        and abs(crossing - t_s) <= WINDOW
        and elapsed < 300
    )
    report(capsys, 6, ok,
           f"max |dV| = {worst:.2e} over {len(ORACLE_POINTS)} points, {checked} verdicts compared, "
           f"{len(disagreements)} disagree, crossing {crossing:.4f} vs t_s {t_s:.4f}", elapsed)
    assert worst <= 1e-4
    assert not disagreements
    assert abs(crossing - t_s) <= WINDOW
    assert elapsed < 300


def _rk4_ratio():
    d, t = 4, 0.4
    bath = derive_bath(n_th=0.3, n_s=0.2, theta=0.7)
    rho0 = twb_density(0.2, d, trunc_tol=1e-3).rho
    gen = Generator(bath, d)
    n = d * d
    basis = np.eye(n * n, dtype=complex)
    liouv = np.array([gen(e.reshape(n, n)).ravel() for e in basis]).T
    exact = (scipy.linalg.expm(liouv * t) @ rho0.ravel()).reshape(n, n)
    errs = []
    for h in (0.01, 0.005):
        cfg = OracleConfig(d=d, dt=h, t_final=t, trunc_tol=1e-3, edge_tol=1.0)
        errs.append(np.max(np.abs(integrate(TruncatedState(d, rho0), bath, cfg).rho - exact)))
    return errs[0] / errs[1]


lam_st = st.floats(0.0, 2.0)
ph_st = st.floats(0.0, 5.0)
th_st = st.floats(0.0, 2 * math.pi)
t_st = st.floats(0.0, 10.0)


@settings(max_examples=300, deadline=None)
@given(lam_st, ph_st, ph_st, th_st, t_st, t_st)
def _semigroup_and_physicality(lam, n_th, n_s, theta, t1, t2):
    b = derive_bath(n_th=n_th, n_s=n_s, theta=theta)
    s = twb_state(lam)
    scale = 1 + b.N + math.cosh(2 * lam)
    mid = evolve(s, b, t1)
    assert evolve(mid, b, t2).allclose(evolve(s, b, t1 + t2), atol=1e-12 * scale)
    assert physicality_check(mid, 1e-12 * scale)


def test_criterion_7_property_suite(capsys):
    start = time.perf_counter()
    failures = []

    try:
        _semigroup_and_physicality()
    except AssertionError as exc:
        failures.append(f"semigroup/physicality: {exc}")

    mismatches = 0
    for lam in LAMS:
        for n_th in (0.0, 1e-3, 0.5, 1.0):
            for n_s in (0.0, 0.07, 0.5):
                bath = derive_bath(n_th=n_th, n_s=n_s)
                for k in range(31):
                    gt = 0.1 * k
                    state = evolve(twb_state(lam), bath, gt)
                    sep = sigma_conditions(*sigma_squared(lam, bath, gt))[0]
                    mismatches += ppt_test(state).separable != sep
    if mismatches:
        failures.append(f"{mismatches} ppt/sigma mismatches")

    ratio = _rk4_ratio()
    if abs(ratio - 16) > 2:
        failures.append(f"RK4 ratio {ratio:.2f}")
    if not math.isinf(survival_time_closed(1.0, 0.0, 0.0).t_s):
        failures.append("pure-loss t_s is finite")
    if not ppt_test(twb_state(0.0)).separable:
        failures.append("lambda = 0 entangled at t = 0")

    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    report(capsys, 7, ok, f"RK4 ratio {ratio:.2f}; " + ("; ".join(failures) or "all properties hold"), elapsed)
    assert not failures
    assert elapsed < 60


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
