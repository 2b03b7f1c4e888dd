"""Acceptance criteria, one test per criterion at its stated tolerance.

Each test prints a single PASS/FAIL line (visible under pytest -s) and
enforces its runtime budget.
"""

import math
import time

import numpy as np
import pytest

from polysob.constants import (
    DimensionPair,
    bubble_crit_mass,
    bubble_scale,
    c_green,
    c_small,
    sharp_constant,
    sphere_area,
)
from polysob.geometry import FlatTorus, RoundSphere, scalar_curvature, trace_identity_gap
from polysob.green import gamma_fn, l2_norm_sq, mass_integral, singular_limit
from polysob.quotient import predicted_slope, probe_iopt, sample_quotient_curve, slope_fit
from polysob.radial import verify_bubble_identity, verify_kernel_identity
from polysob.regimes import (
    BlowupParams,
    gradient_energy_regime,
    l2_mass_regime,
    pohozaev_check,
    standard_profiles,
)
from polysob.giraud import regime_verify

ALL_PAIRS = [(n, k) for n in range(3, 15) for k in range(1, n) if 2 * k < n]


def _report(num: int, name: str, ok: bool, detail: str, elapsed: float,
            budget: float):
    verdict = "PASS" if ok else "FAIL"
    print(f"[criterion {num:2d}] {verdict} {name}: {detail} "
          f"({elapsed:.1f}s / budget {budget:.0f}s)")
    assert ok, f"criterion {num} ({name}): {detail}"
    assert elapsed < budget, f"criterion {num} exceeded its {budget}s budget"


def test_criterion_01_exact_bubble_identity():
    t0 = time.time()
    bad = [(n, k) for n, k in ALL_PAIRS
           if not verify_bubble_identity(DimensionPair(n, k)).residual_zero]
    _report(1, "exact bubble identity", not bad,
            f"residual identically zero on all {len(ALL_PAIRS)} pairs"
            if not bad else f"nonzero residual at {bad}",
            time.time() - t0, 10.0)


def test_criterion_02_exact_kernel_identity():
    t0 = time.time()
    bad = []
    for n, k in ALL_PAIRS:
        for cert in verify_kernel_identity(DimensionPair(n, k)):
            if not cert.residual_zero:
                bad.append((n, k, cert.identity))
    _report(2, "exact linearization kernel identity", not bad,
            f"both mode families exact on all {len(ALL_PAIRS)} pairs"
            if not bad else f"nonzero residual at {bad}",
            time.time() - t0, 10.0)


def test_criterion_03_sharp_constant_consistency():
    from scipy.integrate import quad
    t0 = time.time()
    worst = 0.0
    for n, k in [(5, 2), (6, 2), (7, 3), (9, 4)]:
        d = DimensionPair(n, k)
        mass = bubble_crit_mass(d).to_float()
        assert sharp_constant(d) ** (-n / (2 * k)) == pytest.approx(mass, rel=1e-12)
        a = bubble_scale(d).to_float()
        omega = sphere_area(n).to_float()
        val = omega * quad(lambda r: r ** (n - 1) * (1 + a * r * r) ** -float(n),
                           0, np.inf, limit=500, epsrel=1e-13)[0]
        worst = max(worst, abs(val / mass - 1.0))
    _report(3, "sharp-constant consistency", worst < 1e-10,
            f"Beta route vs adaptive quadrature, worst rel {worst:.2e} < 1e-10",
            time.time() - t0, 5.0)


def test_criterion_04_green_singularity_constant():
    t0 = time.time()
    worst = 0.0
    for n, k in [(5, 2), (6, 2), (7, 3)]:
        d = DimensionPair(n, k)
        lim = singular_limit(gamma_fn(d))
        worst = max(worst, abs(lim / c_green(d).to_float() - 1.0))
    kernel31 = gamma_fn(DimensionPair(3, 1))
    classical = max(
        abs(kernel31(r) / (math.exp(-r) / (4 * math.pi * r)) - 1.0)
        for r in (0.01, 0.1, 1.0, 5.0))
    ok = worst < 1e-5 and classical < 1e-12
    _report(4, "kernel singularity constant", ok,
            f"extrapolated limit worst rel {worst:.2e} < 1e-5; "
            f"screened-Coulomb check {classical:.2e} < 1e-12",
            time.time() - t0, 30.0)


def test_criterion_05_green_mass_and_plancherel():
    t0 = time.time()
    worst_mass = 0.0
    worst_l2 = 0.0
    for n, k in [(5, 2), (6, 2), (7, 3)]:
        d = DimensionPair(n, k)
        kernel = gamma_fn(d)
        worst_mass = max(worst_mass, abs(mass_integral(kernel) - 1.0))
        res = l2_norm_sq(d, kernel)
        worst_l2 = max(worst_l2, abs(res.quadrature / res.plancherel - 1.0))
    closed = l2_norm_sq(DimensionPair(5, 2)).plancherel
    sym = math.sqrt(2) / (192 * math.pi**2)
    ok = (worst_mass < 1e-8 and worst_l2 < 1e-7
          and abs(closed / sym - 1.0) < 1e-13)
    _report(5, "kernel mass and Plancherel", ok,
            f"mass gap {worst_mass:.2e} < 1e-8; route gap {worst_l2:.2e} < 1e-7; "
            f"(5,2) closed form = sqrt(2)/(192 pi^2)",
            time.time() - t0, 30.0)


def test_criterion_06_slope_reproduction():
    t0 = time.time()
    d = DimensionPair(8, 2)
    sphere = RoundSphere(8)
    curve = sample_quotient_curve(sphere, d, np.geomspace(0.004, 0.02, 10))
    fit = slope_fit(curve)
    pred = predicted_slope(sphere, d)
    gap = abs(fit.slope / pred - 1.0)

    torus_curve = sample_quotient_curve(FlatTorus(8), d,
                                        np.geomspace(0.004, 0.02, 10),
                                        epsrel=1e-12)
    torus_fit = slope_fit(torus_curve)
    inv_k = 1.0 / sharp_constant(d)
    icept_gap = abs(torus_fit.intercept / inv_k - 1.0)
    ok = gap < 0.10 and torus_fit.slope_is_zero and icept_gap < 1e-3
    _report(6, "curvature slope reproduction", ok,
            f"S^8 slope within {gap:.1%} of prediction; torus slope "
            f"{torus_fit.slope:.3g} (2 sigma = {2 * torus_fit.slope_sigma:.3g}), "
            f"intercept gap {icept_gap:.2e} < 1e-3",
            time.time() - t0, 300.0)


def test_criterion_07_non_validity_witness():
    t0 = time.time()
    d = DimensionPair(6, 2)
    grid = np.geomspace(1e-3, 0.08, 10)
    probe_sphere = probe_iopt(RoundSphere(6), d, 1.0, grid)
    probe_torus = probe_iopt(FlatTorus(6), d, 1.0, grid)
    ok = probe_sphere.violated and not probe_torus.violated
    _report(7, "non-validity witness", ok,
            f"S^6 witness at eps = {probe_sphere.witness_eps} with margin "
            f"{probe_sphere.margin:.3g}; flat torus margin "
            f"{probe_torus.margin:.3g} (no violation)",
            time.time() - t0, 300.0)


def test_criterion_08_regime_constants():
    t0 = time.time()
    grad = gradient_energy_regime(DimensionPair(8, 2), BlowupParams(1.0, 1e-3))
    l2_high = l2_mass_regime(DimensionPair(9, 2), BlowupParams(1.0, 2e-4))
    l2_low = l2_mass_regime(DimensionPair(5, 2), BlowupParams(1000.0, 1e-6),
                            crossover=20.0)
    g_gap = abs(grad.ratio - 1.0)
    h_gap = abs(l2_high.ratio - 1.0)
    c_gap = abs(l2_low.ratio - 1.0)
    ok = g_gap < 0.01 and h_gap < 0.01 and c_gap < 0.05
    _report(8, "blow-up regime constants", ok,
            f"gradient (8,2) ratio gap {g_gap:.2%} < 1%; mass (9,2) gap "
            f"{h_gap:.2%} < 1%; composite (5,2) gap {c_gap:.2%} < 5%",
            time.time() - t0, 120.0)


def test_criterion_09_pohozaev_identity():
    t0 = time.time()
    d = DimensionPair(5, 2)
    worst = 0.0
    for prof in standard_profiles(d):
        rep = pohozaev_check(prof, d, 1.0, h=0.01)
        worst = max(worst, rep.relative)
    residuals = [abs(pohozaev_check(standard_profiles(d)[0], d, 1.0, h=h,
                                    dps=35).residual)
                 for h in (0.02, 0.01, 0.005)]
    ratios = [residuals[0] / residuals[1], residuals[1] / residuals[2]]
    order_ok = all(120.0 < r < 450.0 for r in ratios)
    ok = worst < 1e-7 and order_ok
    _report(9, "Pohozaev scaling identity", ok,
            f"5 profiles worst relative residual {worst:.2e} < 1e-7; "
            f"refinement ratios {ratios[0]:.0f}, {ratios[1]:.0f} ~ 2^8",
            time.time() - t0, 60.0)


def test_criterion_10_giraud_regimes():
    t0 = time.time()
    fits = [regime_verify(2.0, 2.0, 7.0, 7.0, 5),
            regime_verify(2.0, 3.0, 7.0, 7.0, 5),
            regime_verify(3.0, 3.0, 7.0, 7.0, 5)]
    gaps = [f.exponent_gap for f in fits]
    ok = all(g < 0.1 for g in gaps)
    _report(10, "convolution regime exponents", ok,
            "; ".join(f"{f.regime}: fitted {f.fitted_exponent:.3f} vs "
                      f"{f.expected_exponent:.3f}" for f in fits),
            time.time() - t0, 180.0)


def test_criterion_11_trace_identity():
    t0 = time.time()
    worst = 0.0
    for k in (2, 3):
        for rho in (0.5, 1.0, 2.0):
            for n in (2 * k + 2, 2 * k + 4):
                m = RoundSphere(n, rho)
                scale = abs(n * float(c_small(DimensionPair(n, k)))
                            * scalar_curvature(m)) or 1.0
                worst = max(worst, trace_identity_gap(m, k) / scale)
            worst = max(worst, trace_identity_gap(FlatTorus(2 * k + 2), k))
    _report(11, "curvature tensor trace identity", worst < 1e-13,
            f"trace vs n c_nk R_g, worst relative gap {worst:.2e} < 1e-13",
            time.time() - t0, 1.0)
