"""Model manifolds: curvature, trace identity, radial profiles, exact gauge."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from polysob.constants import DimensionPair, c_small
from polysob.geometry import (
    FlatTorus,
    RoundSphere,
    conformal_dress,
    manifold_from_config,
    radial_profile,
    scalar_curvature,
    sphere_volume,
    tensor_Tg_trace,
    trace_identity_gap,
)


def test_scalar_curvature_examples():
    assert scalar_curvature(RoundSphere(6)) == pytest.approx(30.0, rel=1e-15)
    assert scalar_curvature(FlatTorus(6)) == 0.0
    assert scalar_curvature(RoundSphere(5, 2.0)) == pytest.approx(5.0, rel=1e-15)


def test_trace_examples():
    assert tensor_Tg_trace(RoundSphere(6), 2) == pytest.approx(60.0, rel=1e-14)
    assert tensor_Tg_trace(FlatTorus(8), 2) == 0.0


def test_trace_identity_on_models():
    for k in (2, 3):
        for rho in (0.5, 1.0, 2.0):
            for n in range(2 * k + 1, 13):
                m = RoundSphere(n, rho)
                scale = abs(n * float(c_small(DimensionPair(n, k)))
                            * scalar_curvature(m))
                assert trace_identity_gap(m, k) <= 1e-13 * max(scale, 1.0)
        assert trace_identity_gap(FlatTorus(9), k) == 0.0


def test_radial_profile_sphere():
    prof = radial_profile(RoundSphere(6))
    r = 1.0
    assert prof.laplace_coefficient(r) == pytest.approx(5.0 / math.tan(1.0), rel=1e-14)
    # r -> 0 limit of coefficient * r
    for r in [1e-3, 1e-4]:
        assert prof.laplace_coefficient(r) * r == pytest.approx(5.0, abs=1e-5)


def test_radial_profile_torus_is_flat():
    prof = radial_profile(FlatTorus(7))
    for r in [0.1, 0.5, 1.2]:
        assert prof.warp(r) == r
        assert prof.laplace_coefficient(r) == pytest.approx(6.0 / r, rel=1e-15)
    assert prof.validity_radius == pytest.approx(math.pi, rel=1e-15)


def test_volume_from_radial_profile():
    for n, rho in [(4, 1.0), (6, 0.5), (5, 2.0)]:
        m = RoundSphere(n, rho)
        prof = radial_profile(m)
        omega = 2 * math.pi ** (n / 2) / math.gamma(n / 2)
        vol = omega * quad(lambda r: prof.volume_density(r), 0,
                           prof.validity_radius, limit=300, epsrel=1e-12)[0]
        assert vol == pytest.approx(sphere_volume(m), rel=1e-10)
    # flat ball volume inside the torus validity radius
    mt = FlatTorus(5, period=2.0)
    prof = radial_profile(mt)
    omega = 2 * math.pi ** 2.5 / math.gamma(2.5)
    vol = omega * quad(lambda r: r**4, 0, prof.validity_radius)[0]
    assert vol == pytest.approx(omega / 5.0 * prof.validity_radius**5, rel=1e-12)


def test_conformal_gauge_roundtrip():
    for rho in (0.5, 1.0, 2.0):
        g = conformal_dress(RoundSphere(6, rho), DimensionPair(6, 2))
        for r in np.linspace(1e-3, 0.9 * math.pi * rho, 15):
            assert abs(g.r_of_y(g.y_of_r(float(r))) - r) < 1e-13 * max(r, 1.0)


def test_conformal_gauge_normalization():
    g = conformal_dress(RoundSphere(8), DimensionPair(8, 2))
    assert g.phi_of_y(0.0) == 1.0
    # grad phi(0) = 0: the jet has no linear coefficient
    y = g.y_of_r_jet(1e-9, 3)
    phi = g.phi_jet(y)
    assert abs(phi.c[1]) < 1e-8


def test_conformal_volume_recovers_sphere_volume():
    m = RoundSphere(6, 1.0)
    g = conformal_dress(m, DimensionPair(6, 2))
    omega = 2 * math.pi**3 / math.gamma(3.0)
    val = omega * quad(lambda y: y**5 * g.flat_volume_density(y), 0, np.inf,
                       limit=500, epsrel=1e-12)[0]
    assert val == pytest.approx(sphere_volume(m), rel=1e-10)


def test_classical_stereographic_factor():
    # k=1, n=3: phi^(4/(n-2k)) = (1 + |y|^2/4)^2
    g = conformal_dress(RoundSphere(3), DimensionPair(3, 1))
    for y in [0.0, 0.7, 2.0]:
        lhs = g.phi_of_y(y) ** (4.0 / 1.0)
        assert lhs == pytest.approx((1 + y * y / 4) ** 2, rel=1e-13)


def test_trivial_gauge_on_torus():
    g = conformal_dress(FlatTorus(6), DimensionPair(6, 2))
    assert g.trivial
    assert g.phi_of_y(1.3) == 1.0
    assert g.y_of_r(0.8) == 0.8


def test_manifold_config_parsing():
    m = manifold_from_config({"kind": "sphere", "radius": 1.0, "n": 6})
    assert isinstance(m, RoundSphere) and m.n == 6
    m = manifold_from_config({"kind": "torus", "n": 8, "period": 4.0})
    assert isinstance(m, FlatTorus) and m.shortest_period == 4.0
    m = manifold_from_config({"kind": "torus", "n": 3, "period": [4.0, 6.0, 8.0]})
    assert m.shortest_period == 4.0
    with pytest.raises(ValueError):
        manifold_from_config({"kind": "klein", "n": 5})
