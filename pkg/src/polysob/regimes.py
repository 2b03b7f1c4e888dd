"""Blow-up regime quantities and the Pohozaev scaling identity.

The concentrating approximate solutions are truncated bubbles
V(x) = chi(alpha |x|) U_mu(x); their gradient-type energies and L^2 masses
switch leading behavior at the dimension thresholds n = 2k+1, 2k+2,
2k+2+tau, 2k+4 and 4k.  This module computes the regime tables, measures
the truncated-bubble quantities by quadrature against their predicted
normalizations, and verifies the Pohozaev-type identity
int Delta^k u (x . grad u + ((n-2k)/2) u) dx = 0 for compactly supported
radial profiles with an 8th-order finite-difference stack.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.integrate import IntegrationWarning, quad as _scipy_quad


def quad(*args, **kwargs):
    """scipy.integrate.quad with the conservative-roundoff warning muted.

    The truncated-bubble integrands are smooth on every split interval; the
    warning only reports that the requested relative tolerance sits at the
    roundoff floor, which the split construction already accounts for.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        return _scipy_quad(*args, **kwargs)

from .constants import DimensionPair, bubble_scale, c_small, sphere_area
from .green import BesselKernelSum, c_U_constant, gamma_fn, plancherel_l2_sq
from .jets import Jet, iterated_radial_laplacian
from .quotient import SmoothCutoff
from .radial import bubble_fn, energy_integral, half_laplacian_energy


# ---------------------------------------------------------------------------
# parameters and regime tables
# ---------------------------------------------------------------------------


def default_tau(d: DimensionPair) -> Fraction:
    """Largest admissible decay index min{2, (n-2k)/2}."""
    return min(Fraction(2), d.bubble_decay)


@dataclass(frozen=True)
class BlowupParams:
    """Concentration parameters: diverging alpha, scale mu, decay index tau."""

    alpha: float
    mu: float
    tau: float | None = None

    def __post_init__(self):
        if self.alpha <= 0 or self.mu <= 0:
            raise ValueError("alpha and mu must be positive")
        if self.alpha * self.mu > 1.0:
            raise ValueError("parameter set requires alpha * mu <= 1")

    @property
    def am(self) -> float:
        return self.alpha * self.mu

    def tau_for(self, d: DimensionPair) -> float:
        t = self.tau if self.tau is not None else float(default_tau(d))
        if not 0 < t <= float(default_tau(d)):
            raise ValueError(f"tau = {t} outside (0, min(2, (n-2k)/2)]")
        return t


@dataclass(frozen=True)
class RegimeValue:
    value: float
    regime: str
    constant_ref: str = ""


def sigma_regime(p: BlowupParams, d: DimensionPair) -> RegimeValue:
    """Size of the truncation error of V in the dual Lebesgue norm."""
    am = p.am
    n, k = d.n, d.k
    if n > 2 * k + 4:
        return RegimeValue(am**2, "n>2k+4")
    if n == 2 * k + 4:
        return RegimeValue(am**2 * math.log(1.0 / am), "n=2k+4")
    return RegimeValue(am ** ((n - 2 * k) / 2.0), "n<2k+4")


def theta_pair(p: BlowupParams, d: DimensionPair) -> tuple[RegimeValue, RegimeValue]:
    """The two remainder scales of the Pohozaev balance.

    theta:  mu^4 | mu^4 log(1/(alpha mu)) | mu^(n-2k)/alpha^(2k+4-n), split
    at n = 2k+4; theta': mu^2 (alpha mu)^tau with a log exactly at
    n = 2k+2+tau and exponent n-2k-2 below it.
    """
    n, k = d.n, d.k
    am, mu = p.am, p.mu
    if n > 2 * k + 4:
        theta = RegimeValue(mu**4, "n>2k+4")
    elif n == 2 * k + 4:
        theta = RegimeValue(mu**4 * math.log(1.0 / am), "n=2k+4")
    else:
        theta = RegimeValue(mu ** (n - 2 * k) / p.alpha ** (2 * k + 4 - n), "n<2k+4")
    tau = p.tau_for(d)
    pivot = 2 * k + 2 + tau
    if n > pivot:
        theta_p = RegimeValue(mu**2 * am**tau, "n>2k+2+tau")
    elif n == pivot:
        theta_p = RegimeValue(mu**2 * am**tau * math.log(1.0 / am), "n=2k+2+tau")
    else:
        theta_p = RegimeValue(mu**2 * am ** (n - 2 * k - 2), "n<2k+2+tau")
    return theta, theta_p


# ---------------------------------------------------------------------------
# truncated-bubble quadratures
# ---------------------------------------------------------------------------


def _truncated_bubble_jet(d: DimensionPair, p: BlowupParams,
                          cutoff: SmoothCutoff | None, r: float, order: int) -> Jet:
    """Jet of chi(alpha r) U_mu(r) on flat space."""
    a = bubble_scale(d).to_float()
    q = float(d.bubble_decay)
    x = Jet.variable(r, order)
    u = (x * x * a + p.mu**2) ** (-q) * p.mu**q
    if cutoff is None:
        return u
    return cutoff.jet(x * p.alpha) * u


def _half_power_sq_value(d: DimensionPair, jet: Jet, coeff: Jet) -> float:
    """(Delta^((k-1)/2) f)^2 at a point, gradient convention for even k."""
    k = d.k
    if k % 2 == 1:
        return iterated_radial_laplacian(jet, coeff, (k - 1) // 2).value ** 2
    v = iterated_radial_laplacian(jet, coeff, (k - 2) // 2)
    return v.derivative(1) ** 2


@dataclass
class RegimeMeasurement:
    measured: float
    normalization: float
    regime: str
    predicted_constant: float | None = None

    @property
    def normalized(self) -> float:
        return self.measured / self.normalization

    @property
    def ratio(self) -> float:
        """measured / (normalization * predicted_constant), when predicted."""
        if self.predicted_constant is None:
            raise ValueError("no predicted constant in this regime")
        return self.measured / (self.normalization * self.predicted_constant)


def gradient_energy_measure(d: DimensionPair, p: BlowupParams,
                            truncated: bool = True) -> float:
    """Quadrature of int (Delta^((k-1)/2) V)^2 dx for the truncated bubble."""
    cutoff = SmoothCutoff() if truncated else None
    order = max(2 * (d.k - 1), 1)
    n = d.n

    def integrand(r):
        jet = _truncated_bubble_jet(d, p, cutoff, r, order)
        coeff = Jet.variable(r, order - 1) ** -1 * (n - 1)
        return _half_power_sq_value(d, jet, coeff) * r ** (n - 1)

    omega = sphere_area(n).to_float()
    core = p.mu / math.sqrt(bubble_scale(d).to_float())
    total = 0.0
    if truncated:
        outer = 2.0 / p.alpha
        cuts = sorted({0.0, min(3 * core, outer), min(30 * core, outer),
                       min(300 * core, outer), 1.0 / p.alpha, outer})
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += quad(integrand, lo, hi, limit=400, epsrel=1e-11,
                          epsabs=1e-300)[0]
    else:
        cuts = [0.0, 3 * core, 30 * core, 300 * core]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += quad(integrand, lo, hi, limit=400, epsrel=1e-11,
                          epsabs=1e-300)[0]
        total += quad(integrand, cuts[-1], np.inf, limit=400, epsrel=1e-11)[0]
    return omega * total


def gradient_energy_regime(d: DimensionPair, p: BlowupParams) -> RegimeMeasurement:
    """Measured truncated-bubble energy against its regime normalization.

    n > 2k+2: normalization mu^2, constant int (Delta^((k-1)/2) U)^2;
    n = 2k+2: normalization mu^2 log(1/(alpha mu)) whose exact coefficient
    is the same boundary-flux constant used by the quotient expansion;
    n = 2k+1: normalization mu/alpha, only boundedness is claimed.
    """
    e = gradient_energy_measure(d, p)
    n, k = d.n, d.k
    if n > 2 * k + 2:
        return RegimeMeasurement(e, p.mu**2, "n>2k+2",
                                 half_laplacian_energy(d).to_float())
    if n == 2 * k + 2:
        norm = p.mu**2 * math.log(1.0 / p.am)
        return RegimeMeasurement(e, norm, "n=2k+2",
                                 half_laplacian_energy(d).to_float())
    return RegimeMeasurement(e, p.mu / p.alpha, "n=2k+1")


def fit_log_coefficient(pairs) -> float:
    """Slope A of data y = A log(1/x) + B sampled at pairs (x, y)."""
    xs = np.array([math.log(1.0 / x) for x, _ in pairs])
    ys = np.array([y for _, y in pairs])
    a_mat = np.vstack([xs, np.ones_like(xs)]).T
    sol, *_ = np.linalg.lstsq(a_mat, ys, rcond=None)
    return float(sol[0])


def l2_mass_measure(d: DimensionPair, p: BlowupParams) -> float:
    """Quadrature of alpha^(2k) int V^2 dx for the truncated bubble."""
    cutoff = SmoothCutoff()
    n = d.n

    def integrand(r):
        return _truncated_bubble_jet(d, p, cutoff, r, 0).value ** 2 * r ** (n - 1)

    omega = sphere_area(n).to_float()
    core = p.mu / math.sqrt(bubble_scale(d).to_float())
    outer = 2.0 / p.alpha
    cuts = sorted({0.0, min(3 * core, outer), min(30 * core, outer),
                   1.0 / p.alpha, outer})
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += quad(integrand, lo, hi, limit=400, epsrel=1e-11, epsabs=1e-300)[0]
    return p.alpha ** (2 * d.k) * omega * total


def l2_mass_regime(d: DimensionPair, p: BlowupParams, crossover: float = 20.0,
                   kernel: BesselKernelSum | None = None) -> RegimeMeasurement:
    """Measured L^2 mass term against the regime prediction.

    n > 4k: the truncated bubble carries the mass; ratio to
    (alpha mu)^(2k) int U^2 tends to 1.  n = 4k: logarithmic normalization
    (alpha mu)^(2k) log(1/(alpha mu)), coefficient fitted.  n < 4k: the mass
    concentrates at scale 1/alpha where the solution follows the far field
    c_U Gamma_alpha; a composite model glues the bubble inside radius
    1/(crossover * alpha) to that far field outside.  The bubble tail and
    the kernel singularity match exactly in the overlap, so the ratio to
    (alpha mu)^(n-2k) c_U^2 int Gamma^2 is insensitive to the crossover.
    """
    n, k = d.n, d.k
    am = p.am
    if n > 4 * k:
        measured = l2_mass_measure(d, p)
        u_sq = energy_integral(bubble_fn(d) * bubble_fn(d), d).to_float()
        return RegimeMeasurement(measured, am ** (2 * k), "n>4k", u_sq)
    if n == 4 * k:
        measured = l2_mass_measure(d, p)
        norm = am ** (2 * k) * math.log(1.0 / am)
        return RegimeMeasurement(measured, norm, "n=4k")
    if crossover <= 2.0:
        raise ValueError("crossover must exceed the cutoff shoulder (> 2)")
    if kernel is None:
        kernel = gamma_fn(d)
    a = bubble_scale(d).to_float()
    q = float(d.bubble_decay)
    omega = sphere_area(n).to_float()
    r_cross = 1.0 / (crossover * p.alpha)
    core = p.mu / math.sqrt(a)

    def near_integrand(r):
        return (p.mu / (p.mu**2 + a * r * r)) ** (2 * q) * r ** (n - 1)

    cuts = sorted({0.0, min(3 * core, r_cross), min(30 * core, r_cross), r_cross})
    near = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        near += quad(near_integrand, lo, hi, limit=400, epsrel=1e-11,
                     epsabs=1e-300)[0]
    near *= omega * p.alpha ** (2 * k)

    c_u = c_U_constant(d).to_float()

    def far_integrand(x):
        return kernel.evaluate(x) ** 2 * x ** (n - 1)

    x_max = 45.0 / kernel.min_decay_rate
    far_tail = 0.0
    for lo, hi in zip([1.0 / crossover, 1.0, 5.0], [1.0, 5.0, x_max]):
        far_tail += quad(far_integrand, lo, hi, limit=400, epsrel=1e-11,
                         epsabs=1e-300)[0]
    far = am ** (n - 2 * k) * c_u**2 * omega * far_tail

    predicted = c_u**2 * plancherel_l2_sq(d)
    return RegimeMeasurement(near + far, am ** (n - 2 * k), "n<4k", predicted)


# ---------------------------------------------------------------------------
# Pohozaev identity with an 8th-order finite-difference stack
# ---------------------------------------------------------------------------

_D1 = [Fraction(1, 280), Fraction(-4, 105), Fraction(1, 5), Fraction(-4, 5),
       Fraction(0), Fraction(4, 5), Fraction(-1, 5), Fraction(4, 105),
       Fraction(-1, 280)]
_D2 = [Fraction(-1, 560), Fraction(8, 315), Fraction(-1, 5), Fraction(8, 5),
       Fraction(-205, 72), Fraction(8, 5), Fraction(-1, 5), Fraction(8, 315),
       Fraction(-1, 560)]


def _stencil(values, i, stencil, scale):
    acc = 0
    for s, c in enumerate(stencil):
        if c:
            acc += values[i - 4 + s] * c.numerator / c.denominator
    return acc * scale


@dataclass
class PohozaevReport:
    residual: float
    magnitude: float
    boundary_flag: bool

    @property
    def relative(self) -> float:
        return abs(self.residual) / max(self.magnitude, 1e-300)


def pohozaev_check(profile, d: DimensionPair, support_radius: float,
                   h: float = 0.004, dps: int = 30) -> PohozaevReport:
    """Quadrature of int Delta^k u (x . grad u + ((n-2k)/2) u) dx over a ball.

    For u in C^(2k) with compact support the boundary terms of the
    Pohozaev-type identity vanish and the exact value is 0; the residual
    returned is pure discretization error, O(h^8) from the stencils (the
    trapezoid rule contributes nothing here: every odd derivative of the
    radial integrand vanishes at both ends).  ``profile`` must accept
    mpmath arguments; extended precision keeps the FD roundoff floor below
    the h^8 truncation under refinement.  A profile still alive at the
    boundary is reported via ``boundary_flag``: the identity then has
    uncontrolled boundary terms and the residual is meaningless.
    """
    n, k = d.n, d.k
    pad = 4 * (k + 1)
    with mpmath.workdps(dps):
        hh = mpmath.mpf(h)
        m_pts = int(mpmath.ceil(support_radius / hh * mpmath.mpf("1.05"))) + 1
        total_pts = m_pts + 2 * pad
        # even reflection through r = 0 feeds the centered stencils
        radii = [(i - pad) * hh for i in range(total_pts)]
        vals = [profile(abs(r)) for r in radii]
        # a jump at the support radius means live boundary terms
        r_edge = mpmath.mpf(support_radius)
        jump = abs(profile(r_edge * (1 - mpmath.mpf("1e-9")))
                   - profile(r_edge * (1 + mpmath.mpf("1e-9"))))
        boundary_val = max(abs(vals[-1]), jump)
        inv_h = 1 / hh

        lap = list(vals)
        lap_off = 0  # grid index of lap[0]
        for _ in range(k):
            new = []
            for i in range(4, len(lap) - 4):
                r = radii[lap_off + i]
                d2 = _stencil(lap, i, _D2, inv_h * inv_h)
                if r == 0:
                    new.append(-n * d2)
                else:
                    d1 = _stencil(lap, i, _D1, inv_h)
                    new.append(-d2 - (n - 1) / r * d1)
            lap = new
            lap_off += 4

        du_off = 4
        du = [_stencil(vals, i, _D1, inv_h) for i in range(4, len(vals) - 4)]

        decay = mpmath.mpf(n - 2 * k) / 2
        total = mpmath.mpf(0)
        total_abs = mpmath.mpf(0)
        i_start = lap_off  # first grid index with a Delta^k value
        i_end = lap_off + len(lap)
        for i in range(max(i_start, pad), min(i_end, total_pts - du_off)):
            r = radii[i]
            if r <= 0:
                continue
            t_u = decay * vals[i] + r * du[i - du_off]
            w = lap[i - lap_off] * t_u * r ** (n - 1)
            total += w
            total_abs += abs(w)
        omega = sphere_area(n).to_mpf(dps)
        total *= omega * hh
        total_abs *= omega * hh
        return PohozaevReport(
            residual=float(total),
            magnitude=float(total_abs),
            boundary_flag=bool(boundary_val > mpmath.mpf("1e-12")),
        )


# ---------------------------------------------------------------------------
# standard compactly supported radial test profiles
# ---------------------------------------------------------------------------


def _generic_polyval(coeffs, x):
    acc = x * 0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


class CompactProfile:
    """Compactly supported radial profile body(r) * bump(2r/R), mp-friendly.

    The bump is the C^6 polynomial step: identically 1 on [0, R/2], 0
    beyond R.  With ``hard_truncate`` the body is chopped at R without any
    taper; that deliberately breaks compact-support smoothness and serves
    as the negative control for the Pohozaev check.
    """

    def __init__(self, body, support_radius: float, smoothness: int = 6,
                 hard_truncate: bool = False):
        self.body = body
        self.support_radius = support_radius
        self.hard = hard_truncate
        self._poly = SmoothCutoff(smoothness)._poly

    def __call__(self, r):
        s = 2 * r / self.support_radius
        if self.hard:
            return self.body(r) if s < 2 else r * 0
        if s <= 1:
            return self.body(r)
        if s >= 2:
            return r * 0
        return self.body(r) * (1 - _generic_polyval(self._poly, s - 1))


def standard_profiles(d: DimensionPair, support_radius: float = 1.0,
                      seed: int = 11) -> list[CompactProfile]:
    """Five smooth compactly supported radial profiles for identity checks."""
    rng = np.random.default_rng(seed)
    a = bubble_scale(d).to_float()
    q = float(d.bubble_decay)
    profiles = [
        CompactProfile(lambda r: (1 + a * r * r) ** (-q), support_radius),
        CompactProfile(lambda r: mpmath.exp(-3 * r * r), support_radius),
    ]
    for _ in range(3):
        coeffs = [float(c) for c in rng.uniform(-1.0, 1.0, size=4)]
        profiles.append(
            CompactProfile(lambda r, c=coeffs: _generic_polyval([1.0] + c, r * r),
                           support_radius)
        )
    return profiles


# ---------------------------------------------------------------------------
# balance table
# ---------------------------------------------------------------------------


@dataclass
class BalanceRow:
    alpha: float
    mu: float
    term_curvature: float
    term_l2: float
    theta: float
    theta_prime: float
    sigma: float
    regime_gradient: str
    regime_l2: str
    diagnosis: str


def balance_table(m, d: DimensionPair, params,
                  kernel: BesselKernelSum | None = None) -> list[BalanceRow]:
    """Rows of the Pohozaev balance: curvature term vs L^2 term vs remainders.

    The identity forces c_{n,k} R_g (gradient energy) ~ k (L^2 mass) up to
    O(theta) + O(theta'); each diagnosis states which side dominates and
    what that forces: on positively curved models the curvature sign, on
    curvature-flat models an outright contradiction, and for n = 2k+1 the
    alpha^2 imbalance that rules out concentration regardless of geometry.
    """
    from .geometry import scalar_curvature

    r_g = scalar_curvature(m)
    c_nk = float(c_small(d))
    if kernel is None and d.n < 4 * d.k:
        kernel = gamma_fn(d)
    rows = []
    for p in params:
        grad = gradient_energy_regime(d, p)
        l2 = l2_mass_regime(d, p, kernel=kernel)
        theta, theta_p = theta_pair(p, d)
        term_curv = c_nk * r_g * grad.measured
        term_l2 = d.k * l2.measured
        remainder = max(theta.value, theta_p.value)
        if d.n == 2 * d.k + 1:
            diag = ("n=2k+1: the L^2 term ~ alpha*mu outruns the gradient "
                    "term ~ mu/alpha; contradiction regardless of geometry")
        elif r_g == 0.0:
            if term_l2 > 10 * remainder:
                diag = ("flat model: curvature term vanishes while the L^2 "
                        "term exceeds the remainder scale; contradiction")
            else:
                diag = "flat model: inconclusive at these parameters"
        elif term_curv > 0 and term_curv > 10 * remainder:
            diag = ("curvature term dominant and positive: nonnegative "
                    "scalar curvature forced at the concentration point")
        else:
            diag = "terms comparable to the remainder: no forcing"
        rows.append(BalanceRow(
            alpha=p.alpha, mu=p.mu,
            term_curvature=term_curv, term_l2=term_l2,
            theta=theta.value, theta_prime=theta_p.value,
            sigma=sigma_regime(p, d).value,
            regime_gradient=grad.regime, regime_l2=l2.regime,
            diagnosis=diag,
        ))
    return rows
