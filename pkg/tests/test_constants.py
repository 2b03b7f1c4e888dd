"""Exact-constants module: closed forms, Beta oracle, sharp constant."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import quad

from polysob.constants import (
    DimensionPair,
    DivergenceError,
    SymbolicConstant,
    beta_exact,
    bubble_crit_mass,
    bubble_scale,
    c_green,
    c_small,
    critical_exponent,
    gamma_exact,
    radial_moment,
    sharp_constant,
    sphere_area,
)

ALL_PAIRS = [(n, k) for n in range(3, 15) for k in range(1, n) if 2 * k < n]


def test_dimension_pair_validation():
    with pytest.raises(ValueError):
        DimensionPair(4, 2)
    with pytest.raises(ValueError):
        DimensionPair(3, 0)
    assert DimensionPair(5, 2).two_star == Fraction(10)


def test_critical_exponent_examples():
    assert critical_exponent(DimensionPair(5, 2)) == 10
    assert critical_exponent(DimensionPair(6, 2)) == 6
    assert critical_exponent(DimensionPair(3, 1)) == 6


def test_bubble_scale_examples():
    assert DimensionPair(3, 1).big_pi == 3
    assert bubble_scale(DimensionPair(3, 1)).to_float() == pytest.approx(1 / 3, rel=1e-15)
    assert DimensionPair(5, 2).big_pi == 105
    assert bubble_scale(DimensionPair(5, 2)).to_float() == pytest.approx(105**-0.5, rel=1e-14)
    assert DimensionPair(6, 2).big_pi == 384
    assert bubble_scale(DimensionPair(6, 2)).to_float() == pytest.approx(384**-0.5, rel=1e-14)


def test_bubble_scale_product_exact():
    # a_{n,k}^k * Pi = 1 exactly for every admissible pair up to n = 14
    for n, k in ALL_PAIRS:
        d = DimensionPair(n, k)
        val = bubble_scale(d) ** k * d.big_pi
        assert val == SymbolicConstant(1)


def test_c_small_examples():
    assert c_small(DimensionPair(6, 2)) == Fraction(1, 3)
    assert c_small(DimensionPair(5, 2)) == Fraction(11, 40)
    assert c_small(DimensionPair(6, 1)) == Fraction(1, 5)


def test_c_small_order_one_closed_form():
    for n in range(3, 15):
        assert c_small(DimensionPair(n, 1)) == Fraction(n - 2, 4 * (n - 1))


def test_green_singularity_constant_examples():
    assert c_green(DimensionPair(3, 1)).to_float() == pytest.approx(
        1 / (4 * math.pi), rel=1e-15)
    assert c_green(DimensionPair(5, 2)).to_float() == pytest.approx(
        1 / (16 * math.pi**2), rel=1e-15)
    assert c_green(DimensionPair(4, 1)).to_float() == pytest.approx(
        1 / (4 * math.pi**2), rel=1e-15)


def test_radial_moment_examples():
    d4 = DimensionPair(4, 1)
    assert radial_moment(0, 4, 1, d4).as_fraction() == Fraction(1, 12)
    with pytest.raises(DivergenceError):
        radial_moment(0, 1, 1, DimensionPair(3, 1))
    d5 = DimensionPair(5, 2)
    val = radial_moment(0, 5, 1, d5)
    assert val.to_float() == pytest.approx(3 * math.pi / 256, rel=1e-14)


def test_radial_moment_against_quadrature():
    d = DimensionPair(5, 2)
    a = bubble_scale(d).to_float()
    exact = radial_moment(1, 6, bubble_scale(d), d).to_float()
    num = quad(lambda r: r**4 * (a * r * r) ** 1 * (1 + a * r * r) ** -6.0 / a,
               0, np.inf, limit=300)[0]
    # moment defined against r^(2j): divide the t^j weight back out
    assert num == pytest.approx(exact, rel=1e-10)


def test_sphere_area_examples():
    assert sphere_area(2).to_float() == pytest.approx(2 * math.pi, rel=1e-15)
    assert sphere_area(3).to_float() == pytest.approx(4 * math.pi, rel=1e-15)
    assert sphere_area(5).to_float() == pytest.approx(8 * math.pi**2 / 3, rel=1e-15)


def test_beta_symmetry_and_recurrence():
    halves = [Fraction(j, 2) for j in range(1, 14)]
    for p in halves:
        for q in halves:
            if (p + q).denominator != 1 and p.denominator == q.denominator == 2:
                continue
            b1 = beta_exact(p, q)
            assert b1 == beta_exact(q, p)
            assert beta_exact(p + 1, q) == b1 * SymbolicConstant(
                Fraction(p, p + q))


def test_gamma_exact_values():
    assert gamma_exact(5).as_fraction() == 24
    half = gamma_exact(Fraction(1, 2))
    assert half.to_float() == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma_exact(Fraction(5, 2)).to_float() == pytest.approx(
        math.gamma(2.5), rel=1e-15)


def test_symbolic_constant_ring_ops():
    d = DimensionPair(5, 2)
    a = bubble_scale(d)
    x = SymbolicConstant(Fraction(3, 7), Fraction(1, 2), Fraction(1, 4), d)
    y = SymbolicConstant(Fraction(-2, 5), Fraction(-1), Fraction(3, 4), d)
    prod = x * y
    assert prod.to_float() == pytest.approx(x.to_float() * y.to_float(), rel=1e-14)
    quot = x / y
    assert quot.to_float() == pytest.approx(x.to_float() / y.to_float(), rel=1e-14)
    powed = (a ** Fraction(-5, 2)).to_float()
    assert powed == pytest.approx(105.0**1.25, rel=1e-14)
    same = x + x
    assert same.to_float() == pytest.approx(2 * x.to_float(), rel=1e-14)
    with pytest.raises(ValueError):
        _ = x + y  # incompatible factored forms


def test_symbolic_constant_float_agreement():
    # factored evaluation agrees with independent double evaluation
    d = DimensionPair(7, 3)
    c = bubble_crit_mass(d)
    direct = (float(c.mantissa) * float(d.big_pi) ** float(c.Pi_exponent)
              * math.pi ** float(c.pi_exponent))
    assert c.to_float() == pytest.approx(direct, rel=1e-14)


def test_sharp_constant_extremality_identity():
    for n, k in [(5, 2), (6, 2), (7, 3), (3, 1)]:
        d = DimensionPair(n, k)
        mass = bubble_crit_mass(d).to_float()
        k_val = sharp_constant(d)
        assert k_val ** (-n / (2 * k)) == pytest.approx(mass, rel=1e-12)


def test_crit_mass_closed_form_52():
    d = DimensionPair(5, 2)
    assert bubble_crit_mass(d).to_float() == pytest.approx(
        math.pi**3 / 32 * 105**1.25, rel=1e-14)


def test_sharp_constant_quadrature_consistency():
    # adaptive quadrature of int U^(2*) against the Beta route
    for n, k in [(5, 2), (6, 2), (3, 1)]:
        d = DimensionPair(n, k)
        a = bubble_scale(d).to_float()
        omega = sphere_area(n).to_float()
        val = omega * quad(lambda r: r ** (n - 1) * (1 + a * r * r) ** -float(n),
                           0, np.inf, limit=500, epsrel=1e-13)[0]
        assert val == pytest.approx(bubble_crit_mass(d).to_float(), rel=1e-10)


def test_sharp_constant_rayleigh_quadrature_31():
    # independent oracle: Rayleigh quotient of the bubble by direct quadrature
    d = DimensionPair(3, 1)
    a = bubble_scale(d).to_float()

    def u(r):
        return (1 + a * r * r) ** -0.5

    def du(r):
        return -a * r * (1 + a * r * r) ** -1.5

    omega = sphere_area(3).to_float()
    grad_sq = omega * quad(lambda r: r**2 * du(r) ** 2, 0, np.inf, limit=500)[0]
    mass = omega * quad(lambda r: r**2 * u(r) ** 6, 0, np.inf, limit=500)[0]
    inv_k = grad_sq / mass ** (1 / 3)
    assert inv_k == pytest.approx(1.0 / sharp_constant(d), rel=1e-8)
