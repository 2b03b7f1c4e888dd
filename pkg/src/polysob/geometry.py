"""Closed-form geometry of the model manifolds (round sphere, flat torus).

Everything needed by the quotient and regime experiments reduces to radial
data around a point: the warp of the volume element, the first-order
coefficient of the radial Laplacian, the curvature scalars, and (on the
sphere) the exact conformal gauge that flattens the metric in a
stereographic chart.

Only conformally flat models with closed-form curvature are provided.  The
remaining geometric regime of the theory is scalar-flat but not flat:
there, with k > 2 and n >= 2k+4, the quotient expansion is driven at order
eps^4 (times log(1/eps) exactly at n = 2k+4) by the squared norm of the
Weyl tensor, again with a negative sign, so concentration still breaks the
optimal inequality.  Ricci-flat non-flat metrics admit no closed form, so
that regime is covered qualitatively only (sign and order recorded here,
no numeric check).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from .constants import DimensionPair, c_small
from .jets import Jet


@dataclass(frozen=True)
class RoundSphere:
    n: int
    radius: float = 1.0

    def __post_init__(self):
        if self.n < 2 or self.radius <= 0:
            raise ValueError("need n >= 2 and radius > 0")


@dataclass(frozen=True)
class FlatTorus:
    """Flat torus R^n / (period lattice); period is a scalar or one per axis."""

    n: int
    period: float | tuple = 2.0 * math.pi

    def __post_init__(self):
        periods = self.period if isinstance(self.period, (tuple, list)) \
            else (self.period,) * self.n
        periods = tuple(float(p) for p in periods)
        if self.n < 2 or len(periods) != self.n or min(periods) <= 0:
            raise ValueError("need n >= 2 and n positive periods")
        object.__setattr__(self, "period", periods)

    @property
    def shortest_period(self) -> float:
        return min(self.period)


ModelManifold = Union[RoundSphere, FlatTorus]


def manifold_from_config(cfg: dict) -> ModelManifold:
    """Parse {"kind": "sphere", "radius": 1.0, "n": 6} style descriptors."""
    kind = cfg.get("kind", "").lower()
    n = int(cfg["n"])
    if kind == "sphere":
        return RoundSphere(n, float(cfg.get("radius", 1.0)))
    if kind == "torus":
        period = cfg.get("period", 2.0 * math.pi)
        if isinstance(period, (list, tuple)):
            return FlatTorus(n, tuple(float(p) for p in period))
        return FlatTorus(n, float(period))
    raise ValueError(f"unknown manifold kind {cfg.get('kind')!r}")


def scalar_curvature(m: ModelManifold) -> float:
    if isinstance(m, RoundSphere):
        return m.n * (m.n - 1) / m.radius**2
    return 0.0


def ricci_eigenvalue(m: ModelManifold) -> float:
    """Einstein constant lambda with Ric = lambda * g."""
    if isinstance(m, RoundSphere):
        return (m.n - 1) / m.radius**2
    return 0.0


def tensor_Tg_trace(m: ModelManifold, k: int) -> float:
    """Trace of the curvature tensor combination entering the 2k-th order
    operator, assembled term by term:

        T_g = k(n-2)/(4(n-1)) R g - 2k(k-1)(k+1)/(3(n-2)) (Ric - R/(2(n-1)) g).

    On any manifold its trace collapses to n * c_{n,k} * R; the direct
    term-by-term assembly here is what the consistency tests compare
    against that collapsed form.
    """
    n = m.n
    r_scal = scalar_curvature(m)
    ric = ricci_eigenvalue(m)
    first = k * (n - 2) / (4.0 * (n - 1)) * r_scal * n
    second = (2.0 * k * (k - 1) * (k + 1) / (3.0 * (n - 2))) * (
        ric * n - r_scal * n / (2.0 * (n - 1))
    )
    return first - second


@dataclass(frozen=True)
class RadialMetricProfile:
    """Radial data of the metric around a point: warp w with sqrt|g| = (w/r)^(n-1)."""

    manifold: ModelManifold

    @property
    def n(self) -> int:
        return self.manifold.n

    @property
    def validity_radius(self) -> float:
        """Strictly inside the injectivity radius of the model."""
        if isinstance(self.manifold, RoundSphere):
            return math.pi * self.manifold.radius
        return self.manifold.shortest_period / 2.0

    def warp(self, r: float) -> float:
        if isinstance(self.manifold, RoundSphere):
            rho = self.manifold.radius
            return rho * math.sin(r / rho)
        return r

    def warp_derivative(self, r: float) -> float:
        if isinstance(self.manifold, RoundSphere):
            return math.cos(r / self.manifold.radius)
        return 1.0

    def laplace_coefficient(self, r: float) -> float:
        """First-order coefficient (n-1) w'/w of the radial Laplacian."""
        return (self.n - 1) * self.warp_derivative(r) / self.warp(r)

    def volume_density(self, r: float) -> float:
        """Radial density w(r)^(n-1); multiply by omega_{n-1} dr for measure."""
        return self.warp(r) ** (self.n - 1)

    # -- jet versions for the differentiation stack -------------------------

    def warp_jet(self, r: float, order: int) -> Jet:
        x = Jet.variable(r, order)
        if isinstance(self.manifold, RoundSphere):
            rho = self.manifold.radius
            return (x * (1.0 / rho)).sin() * rho
        return x

    def laplace_coefficient_jet(self, r: float, order: int) -> Jet:
        x = Jet.variable(r, order)
        if isinstance(self.manifold, RoundSphere):
            rho = self.manifold.radius
            u = x * (1.0 / rho)
            return (self.n - 1) / rho * u.cos() / u.sin()
        return (self.n - 1) * x**-1


def radial_profile(m: ModelManifold) -> RadialMetricProfile:
    return RadialMetricProfile(m)


def sphere_volume(m: RoundSphere) -> float:
    """Total volume omega_n * rho^n of the round sphere of radius rho."""
    n = m.n
    omega_n = 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)
    return omega_n * m.radius**n


@dataclass(frozen=True)
class ConformalGauge:
    """Stereographic-type gauge in which the sphere metric is exactly flat.

    In the chart y the round metric of radius rho is (1 + |y|^2/(4 rho^2))^(-2) xi,
    so phi = (1 + |y|^2/(4 rho^2))^((n-2k)/2) satisfies phi^(4/(n-2k)) g = xi
    exactly, with phi(0) = 1 and grad phi(0) = 0.  On the flat torus the
    gauge is trivial (phi = 1, y = r).
    """

    manifold: ModelManifold
    dims: DimensionPair

    @property
    def trivial(self) -> bool:
        return not isinstance(self.manifold, RoundSphere)

    # -- chart maps ----------------------------------------------------------

    def y_of_r(self, r: float) -> float:
        """Flat radius of the geodesic radius: |y| = 2 rho tan(r / (2 rho))."""
        if self.trivial:
            return r
        rho = self.manifold.radius
        return 2.0 * rho * math.tan(r / (2.0 * rho))

    def r_of_y(self, y: float) -> float:
        if self.trivial:
            return y
        rho = self.manifold.radius
        return 2.0 * rho * math.atan(y / (2.0 * rho))

    def y_of_r_jet(self, r: float, order: int) -> Jet:
        x = Jet.variable(r, order)
        if self.trivial:
            return x
        rho = self.manifold.radius
        return (x * (1.0 / (2.0 * rho))).tan() * (2.0 * rho)

    # -- conformal data --------------------------------------------------------

    def phi_of_y(self, y: float) -> float:
        if self.trivial:
            return 1.0
        rho = self.manifold.radius
        q = 1.0 + y * y / (4.0 * rho * rho)
        return q ** (float(self.dims.bubble_decay))

    def phi_jet(self, y: Jet) -> Jet:
        if self.trivial:
            return Jet.constant(1.0, y.order)
        rho = self.manifold.radius
        q = y * y * (1.0 / (4.0 * rho * rho)) + 1.0
        return q ** float(self.dims.bubble_decay)

    def flat_volume_density(self, y: float) -> float:
        """dv_g = (1 + |y|^2 / (4 rho^2))^(-n) dy in the flat chart."""
        if self.trivial:
            return 1.0
        rho = self.manifold.radius
        return (1.0 + y * y / (4.0 * rho * rho)) ** (-self.manifold.n)


def conformal_dress(m: ModelManifold, d: DimensionPair) -> ConformalGauge:
    if m.n != d.n:
        raise ValueError("manifold and dimension pair disagree on n")
    return ConformalGauge(m, d)


def trace_identity_gap(m: ModelManifold, k: int) -> float:
    """|Tr T_g - n c_{n,k} R_g| for the consistency invariant."""
    n = m.n
    d = DimensionPair(n, k)
    lhs = tensor_Tg_trace(m, k)
    rhs = n * float(c_small(d)) * scalar_curvature(m)
    return abs(lhs - rhs)
