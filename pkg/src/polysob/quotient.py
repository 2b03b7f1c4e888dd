"""Sobolev quotient experiments along the dressed concentrating family.

The family member at scale eps is  u_eps = chi * phi * B_eps  where B_eps is
the bubble profile in the flat chart radius, phi the conformal factor of the
exact gauge (trivial on the torus) and chi a C^6 polynomial cutoff.  All 2k
derivatives come from jet propagation through the closed forms, so the only
numerical error is quadrature.

The quotient expands as  Q(eps) = 1/K + slope * theta_eps + o(theta_eps)
with theta_eps = eps^2 (or eps^2 log(1/eps) at the borderline dimension
n = 2k+2) and the slope proportional to the scalar curvature; the fits here
recover intercept and slope against regime-aware nuisance terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import quad

from .constants import DimensionPair, bubble_crit_mass, bubble_scale, c_small, sharp_constant
from .geometry import (
    ConformalGauge,
    ModelManifold,
    RadialMetricProfile,
    conformal_dress,
    radial_profile,
    scalar_curvature,
)
from .jets import Jet, iterated_radial_laplacian
from .radial import half_laplacian_energy


# ---------------------------------------------------------------------------
# C^6 cutoff
# ---------------------------------------------------------------------------


def _smoothstep_coeffs(smoothness: int) -> list[float]:
    """Polynomial smoothstep of class C^smoothness on [0, 1]."""
    n = smoothness
    coeffs = [0.0] * (2 * n + 2)
    for j in range(n + 1):
        coeffs[n + 1 + j] = comb(n + j, j) * comb(2 * n + 1, n - j) * (-1.0) ** j
    return coeffs


class SmoothCutoff:
    """chi(s): identically 1 on [0, 1], identically 0 on [2, inf), C^6 between.

    Realized as 1 - S(s-1) with S a polynomial smoothstep; C^6 provides the
    2k continuous derivatives needed for every k <= 3.
    """

    def __init__(self, smoothness: int = 6):
        self.smoothness = smoothness
        self._poly = _smoothstep_coeffs(smoothness)

    def __call__(self, s: float) -> float:
        if s <= 1.0:
            return 1.0
        if s >= 2.0:
            return 0.0
        x = s - 1.0
        acc = 0.0
        for c in reversed(self._poly):
            acc = acc * x + c
        return 1.0 - acc

    def jet(self, s: Jet) -> Jet:
        s0 = s.value
        if s0 <= 1.0:
            return Jet.constant(1.0, s.order)
        if s0 >= 2.0:
            return Jet.constant(0.0, s.order)
        return 1.0 - (s - 1.0).poly(self._poly)


# ---------------------------------------------------------------------------
# the test-function family
# ---------------------------------------------------------------------------


@dataclass
class TestFunctionFamily:
    """Concentrating family around a point of a model manifold.

    (The round metric is homogeneous, so no center point is carried: every
    choice gives the same radial data.)

    The cutoff transition happens between flat-chart radii delta and
    2*delta; delta defaults to the chart radius of one quarter of the
    validity radius, mirroring the requirement that the support stay well
    inside the injectivity radius.
    """

    manifold: ModelManifold
    dims: DimensionPair
    cutoff: SmoothCutoff = field(default_factory=SmoothCutoff)
    delta_fraction: float = 0.25

    __test__ = False  # bare "Test" prefix, not a pytest class

    def __post_init__(self):
        if self.manifold.n != self.dims.n:
            raise ValueError("manifold and dimension pair disagree on n")
        self.gauge: ConformalGauge = conformal_dress(self.manifold, self.dims)
        self.profile: RadialMetricProfile = radial_profile(self.manifold)
        self.delta_r = self.profile.validity_radius * self.delta_fraction
        self.delta_y = self.gauge.y_of_r(self.delta_r)

    @property
    def support_radius(self) -> float:
        """Geodesic radius of the support (cutoff dies at flat radius 2 delta)."""
        return self.gauge.r_of_y(2.0 * self.delta_y)


@dataclass
class DressedBubble:
    """One member u_eps of the family, with jet access to 2k derivatives."""

    family: TestFunctionFamily
    eps: float

    def __post_init__(self):
        if not 0 < self.eps < self.family.delta_y / 10.0:
            raise ValueError("eps must satisfy 0 < eps < delta/10")
        self._a = bubble_scale(self.family.dims).to_float()
        self._q = float(self.family.dims.bubble_decay)

    def jet(self, r: float, order: int) -> Jet:
        fam = self.family
        y = fam.gauge.y_of_r_jet(r, order)
        phi = fam.gauge.phi_jet(y)
        bubble = (y * y * self._a + self.eps**2) ** (-self._q) * self.eps**self._q
        chi = fam.cutoff.jet(y * (1.0 / fam.delta_y))
        return chi * phi * bubble

    def __call__(self, r: float) -> float:
        if r >= self.family.support_radius:
            return 0.0
        return self.jet(r, 0).value

    def laplacian_power(self, r: float, times: int) -> float:
        """Value of Delta_g^times u_eps at geodesic radius r."""
        order = 2 * times
        u = self.jet(r, order)
        coeff = self.family.profile.laplace_coefficient_jet(r, order - 1)
        return iterated_radial_laplacian(u, coeff, times).value

    def quadrature_cuts(self) -> list[float]:
        """Split radii separating core, tail and cutoff annulus."""
        fam = self.family
        core = self.eps / math.sqrt(self._a)
        r2 = fam.support_radius
        pts = {0.0, min(3 * core, fam.delta_r), min(30 * core, fam.delta_r),
               fam.delta_r, r2}
        return sorted(pts)


def build_test_function(fam: TestFunctionFamily, eps: float) -> DressedBubble:
    return DressedBubble(fam, eps)


# ---------------------------------------------------------------------------
# quotient evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuotientSample:
    eps: float
    value: float
    error: float


class QuadratureFailure(RuntimeError):
    """Raised when a quotient integral does not converge on some annulus."""


def quotient_eval(fam: TestFunctionFamily, eps: float, b_coeff: float = 0.0,
                  epsrel: float = 1e-11) -> QuotientSample:
    """Rayleigh quotient of P = Delta_g^k + B against the dressed bubble.

        Q(eps) = int u (Delta_g^k u + B u) dv / (int |u|^(2*) dv)^(2/2*)

    The numerator pairs u with the full 2k-th order operator (the two weak
    forms agree for these compactly supported profiles; the pairing identity
    is exercised separately by tests).
    """
    if b_coeff < 0:
        raise ValueError("the zeroth-order coefficient must be >= 0")
    d = fam.dims
    u = build_test_function(fam, eps)
    dens = fam.profile.volume_density
    k = d.k
    two_star = float(d.two_star)

    def num_integrand(r):
        uj = u.jet(r, 2 * k)
        coeff = fam.profile.laplace_coefficient_jet(r, 2 * k - 1)
        lap = iterated_radial_laplacian(uj, coeff, k)
        return (uj.value * (lap.value + b_coeff * uj.value)) * dens(r)

    def den_integrand(r):
        return abs(u.jet(r, 0).value) ** two_star * dens(r)

    omega = 2.0 * math.pi ** (d.n / 2) / math.gamma(d.n / 2)
    cuts = u.quadrature_cuts()
    num = num_err = den = den_err = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        v, e = quad(num_integrand, lo, hi, limit=400, epsrel=epsrel, epsabs=1e-14)
        if not math.isfinite(v):
            raise QuadratureFailure(f"numerator quadrature failed on [{lo}, {hi}]")
        num += v
        num_err += e
        v, e = quad(den_integrand, lo, hi, limit=400, epsrel=epsrel * 0.1, epsabs=1e-15)
        if not math.isfinite(v) or v < 0:
            raise QuadratureFailure(f"denominator quadrature failed on [{lo}, {hi}]")
        den += v
        den_err += e
    num *= omega
    den *= omega
    q_val = num / den ** (2.0 / two_star)
    # first-order error propagation from the two quadratures
    q_err = (omega * num_err / den ** (2.0 / two_star)
             + abs(q_val) * (2.0 / two_star) * omega * den_err / den)
    return QuotientSample(eps, q_val, q_err)


# ---------------------------------------------------------------------------
# regimes and fits
# ---------------------------------------------------------------------------


REGIME_LOG = "n=2k+2"
REGIME_PLAIN = "n>2k+2"
REGIME_LOW = "n=2k+1"


@dataclass(frozen=True)
class ThetaValue:
    value: float | None
    regime: str


def theta_eps(d: DimensionPair, eps: float) -> ThetaValue:
    """Regime-dependent expansion scale of the quotient."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    n, k = d.n, d.k
    if n > 2 * k + 2:
        return ThetaValue(eps**2, REGIME_PLAIN)
    if n == 2 * k + 2:
        return ThetaValue(eps**2 * math.log(1.0 / eps), REGIME_LOG)
    return ThetaValue(None, REGIME_LOW)


@dataclass
class QuotientCurve:
    manifold: ModelManifold
    dims: DimensionPair
    b_coeff: float
    samples: list[QuotientSample]

    def sorted_samples(self) -> list[QuotientSample]:
        return sorted(self.samples, key=lambda s: s.eps)


def sample_quotient_curve(m: ModelManifold, d: DimensionPair, eps_grid,
                          b_coeff: float = 0.0, epsrel: float = 1e-11) -> QuotientCurve:
    fam = TestFunctionFamily(m, d)
    samples = [quotient_eval(fam, float(e), b_coeff, epsrel) for e in eps_grid]
    return QuotientCurve(m, d, b_coeff, samples)


@dataclass
class SlopeFit:
    intercept: float
    slope: float
    slope_sigma_stat: float
    slope_sigma_sys: float
    intercept_sigma: float
    regime: str
    residual_rms: float
    n_samples: int

    @property
    def slope_sigma(self) -> float:
        return math.hypot(self.slope_sigma_stat, self.slope_sigma_sys)

    @property
    def slope_is_zero(self) -> bool:
        """Statistical-zero verdict at two combined sigmas."""
        return abs(self.slope) < 2.0 * self.slope_sigma


def _design_matrix(eps: np.ndarray, regime: str) -> np.ndarray:
    """Regime-aware fit basis: intercept, theta, and nuisance columns.

    Above the borderline dimension the nuisance terms are theta powers
    (theta^(3/2) plus the even truncation orders).  At n = 2k+2 the plain
    eps^2 term is only logarithmically smaller than theta, so it and the
    next log pair are separated explicitly.
    """
    if regime == REGIME_PLAIN:
        th = eps**2
        cols = [np.ones_like(th), th, th**1.5, th**2, th**3]
    elif regime == REGIME_LOG:
        log = np.log(1.0 / eps)
        th = eps**2 * log
        cols = [np.ones_like(th), th, eps**2, eps**4 * log, eps**4]
    else:
        raise ValueError("no slope expansion in the n = 2k+1 regime")
    return np.vstack(cols).T


def _weighted_fit(a: np.ndarray, y: np.ndarray, w: np.ndarray):
    """Weighted least squares with column scaling; returns coef and covariance."""
    scale = np.max(np.abs(a), axis=0)
    an = a / scale
    sw = np.sqrt(w)
    coef_n, *_ = np.linalg.lstsq(an * sw[:, None], y * sw, rcond=None)
    resid = y - an @ coef_n
    dof = max(len(y) - a.shape[1], 1)
    sig2 = float(np.sum(w * resid**2) / dof)
    cov_n = sig2 * np.linalg.inv((an * w[:, None]).T @ an)
    coef = coef_n / scale
    sig = np.sqrt(np.diag(cov_n)) / scale
    rms = float(np.sqrt(np.mean(resid**2)))
    return coef, sig, rms


def slope_fit(curve: QuotientCurve) -> SlopeFit:
    """Recover intercept and theta-slope of a sampled quotient curve.

    The statistical sigma comes from the weighted residuals; a systematic
    sigma is added from refitting on the lower half of the eps window,
    which exposes the truncation bias of the nuisance basis.
    """
    samples = curve.sorted_samples()
    if len(samples) < 6:
        raise ValueError("need at least 6 samples for a slope fit")
    regime = theta_eps(curve.dims, samples[0].eps).regime
    if regime == REGIME_LOW:
        raise ValueError("slope fit undefined for n = 2k+1 (no theta regime)")
    eps = np.array([s.eps for s in samples])
    q = np.array([s.value for s in samples])
    err = np.array([max(s.error, 1e-13 * abs(s.value)) for s in samples])
    a = _design_matrix(eps, regime)
    w = 1.0 / err**2
    coef, sig, rms = _weighted_fit(a, q, w)
    # systematic: refit on the small-eps half
    half = max(len(samples) // 2 + 1, a.shape[1] + 1)
    if half < len(samples):
        coef_lo, _, _ = _weighted_fit(a[:half], q[:half], w[:half])
        sys_slope = abs(coef[1] - coef_lo[1])
        sys_icept = abs(coef[0] - coef_lo[0])
    else:
        sys_slope = sys_icept = 0.0
    return SlopeFit(
        intercept=float(coef[0]),
        slope=float(coef[1]),
        slope_sigma_stat=float(sig[1]),
        slope_sigma_sys=float(sys_slope),
        intercept_sigma=float(math.hypot(sig[0], sys_icept)),
        regime=regime,
        residual_rms=rms,
        n_samples=len(samples),
    )


def predicted_slope(m: ModelManifold, d: DimensionPair) -> float:
    """Analytic theta-slope of the quotient: -c_{n,k} R_g C_{n,k} / (int U^(2*))^(2/2*).

    Valid for n >= 2k+2 and k > 1 (the zeroth-order term enters below the
    theta order there).
    """
    if d.n < 2 * d.k + 2:
        raise ValueError("no theta expansion for n < 2k+2")
    if d.k == 1:
        raise ValueError("the k = 1 slope mixes in the zeroth-order datum")
    mass = bubble_crit_mass(d).to_float()
    c_energy = half_laplacian_energy(d).to_float()
    return -float(c_small(d)) * scalar_curvature(m) * c_energy / mass ** (
        2.0 / float(d.two_star)
    )


# ---------------------------------------------------------------------------
# optimal-inequality probing
# ---------------------------------------------------------------------------


@dataclass
class IoptProbe:
    violated: bool
    witness_eps: float | None
    margin: float
    sharp_bound: float
    samples: list[QuotientSample]
    note: str = ""


def probe_iopt(m: ModelManifold, d: DimensionPair, b_coeff: float,
               eps_grid) -> IoptProbe:
    """Search for a test function pushing the quotient below 1/K(n,k).

    A witness certifies that no B-independent optimal inequality holds with
    this zeroth-order coefficient.  B = 0 is rejected: without the L^2 term
    the inequality already fails against near-constant functions for a
    different (non-geometric) reason.
    """
    if b_coeff <= 0:
        raise ValueError(
            "probe_iopt needs B > 0; with B = 0 constant functions break the "
            "inequality for reasons unrelated to curvature"
        )
    inv_k = 1.0 / sharp_constant(d)
    fam = TestFunctionFamily(m, d)
    usable = [float(e) for e in eps_grid if 0 < float(e) < fam.delta_y / 10.0]
    skipped = len(list(eps_grid)) - len(usable)
    curve = sample_quotient_curve(m, d, usable, b_coeff)
    best_eps, best_margin = None, -math.inf
    for s in curve.sorted_samples():
        margin = inv_k - (s.value + s.error)
        if margin > best_margin:
            best_margin, best_eps = margin, s.eps
    violated = best_margin > 0
    note = "witness found" if violated else "no violation on the grid"
    if skipped:
        note += f" ({skipped} grid points above delta/10 skipped)"
    return IoptProbe(
        violated=violated,
        witness_eps=best_eps if violated else None,
        margin=best_margin,
        sharp_bound=inv_k,
        samples=curve.samples,
        note=note,
    )


# ---------------------------------------------------------------------------
# direct Rayleigh-quotient minimization over a radial spline space
# ---------------------------------------------------------------------------


@dataclass
class MinimizeResult:
    lambda_est: float
    converged: bool
    iterations: int
    coeffs: np.ndarray
    grid: np.ndarray
    profile: np.ndarray
    message: str = ""


def _bspline_basis(knots: np.ndarray, degree: int, grid: np.ndarray):
    """Design matrices of the basis and its iterated flat Laplacian inputs."""
    from scipy.interpolate import BSpline

    inner = np.concatenate([
        np.repeat(knots[0], degree), knots, np.repeat(knots[-1], degree)
    ])
    n_basis = len(inner) - degree - 1
    vals = np.zeros((len(grid), n_basis))
    d1 = np.zeros_like(vals)
    d2 = np.zeros_like(vals)
    for i in range(n_basis):
        c = np.zeros(n_basis)
        c[i] = 1.0
        sp = BSpline(inner, c, degree)
        vals[:, i] = sp(grid)
        d1[:, i] = sp.derivative(1)(grid)
        d2[:, i] = sp.derivative(2)(grid)
    return vals, d1, d2


class SplineQuotientSpace:
    """Radial spline discretization of the quotient

        J(u) = (int (Delta_g^(k/2) u)^2 + (alpha^(2k) + B) int u^2)
               / (int |u|^(2*) dv)^(2/2*)

    over compactly supported cubic-spline profiles with geometrically
    refined knots toward the center.  Only k = 2 is wired: the energy needs
    u in H^2, which cubic splines provide.
    """

    def __init__(self, m: ModelManifold, d: DimensionPair, alpha: float,
                 b_coeff: float = 0.0, n_basis: int = 80,
                 init_eps: float | None = None):
        if d.k != 2:
            raise NotImplementedError("spline minimization is wired for k = 2")
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.dims = d
        prof = radial_profile(m)
        self.family = TestFunctionFamily(m, d)
        r_max = self.family.support_radius * 0.999
        a_scale = bubble_scale(d).to_float()
        if init_eps is None:
            init_eps = self.family.delta_y / 50.0
        self.init_eps = init_eps
        core = init_eps / math.sqrt(a_scale)
        knots = np.unique(np.concatenate([
            [0.0],
            np.geomspace(core / 20.0, r_max, n_basis - 2),
            [r_max],
        ]))
        # per-interval Gauss-Legendre rule (exact for the spline products)
        gx, gw = np.polynomial.legendre.leggauss(6)
        grid_parts, weight_parts = [], []
        for lo, hi in zip(knots[:-1], knots[1:]):
            half = 0.5 * (hi - lo)
            grid_parts.append(0.5 * (lo + hi) + half * gx)
            weight_parts.append(half * gw)
        self.grid = np.concatenate(grid_parts)
        weights = np.concatenate(weight_parts)
        omega = 2.0 * math.pi ** (d.n / 2) / math.gamma(d.n / 2)
        self.dens = np.array([prof.volume_density(r) for r in self.grid]) * omega * weights

        vals, d1, d2 = _bspline_basis(knots, 3, self.grid)
        coeffs_lap = np.array([prof.laplace_coefficient(r) for r in self.grid])
        lap = -d2 - coeffs_lap[:, None] * d1
        # compact support: drop basis functions alive at the outer boundary
        keep = [i for i in range(vals.shape[1])
                if abs(vals[-1, i]) < 1e-12 and abs(d1[-1, i]) < 1e-9]
        self.vals, self.lap = vals[:, keep], lap[:, keep]
        gram_energy = (self.lap * self.dens[:, None]).T @ self.lap
        gram_mass = (self.vals * self.dens[:, None]).T @ self.vals
        self.quad_form = gram_energy + (alpha ** (2 * d.k) + b_coeff) * gram_mass
        self.two_star = float(d.two_star)

    def initial_coeffs(self) -> np.ndarray:
        """Least-squares projection of the concentrated test function."""
        u0 = build_test_function(self.family, self.init_eps)
        target = np.array([u0(r) for r in self.grid])
        c_vec, *_ = np.linalg.lstsq(self.vals, target, rcond=None)
        return c_vec

    def j_value(self, c) -> tuple[float, float]:
        u = self.vals @ c
        num = c @ (self.quad_form @ c)
        den = float(np.sum(np.abs(u) ** self.two_star * self.dens))
        return num / den ** (2.0 / self.two_star), den

    def j_grad(self, c, den) -> np.ndarray:
        ts = self.two_star
        u = self.vals @ c
        num = c @ (self.quad_form @ c)
        dnum = 2.0 * (self.quad_form @ c)
        dden = ts * self.vals.T @ (np.abs(u) ** (ts - 2) * u * self.dens)
        return (dnum * den ** (2.0 / ts)
                - num * (2.0 / ts) * den ** (2.0 / ts - 1) * dden
                ) / den ** (4.0 / ts)


def minimize_quotient(m: ModelManifold, d: DimensionPair, alpha: float,
                      b_coeff: float = 0.0, n_basis: int = 80,
                      init_eps: float | None = None, max_iter: int = 200,
                      tol: float = 1e-10) -> MinimizeResult:
    """Projected gradient descent with backtracking on the spline space.

    Initialization is the projected concentrated test function; descent is
    monotone, so the returned value is always a certified upper bound for
    the infimum of J over the space (hence for the global infimum of J).
    """
    space = SplineQuotientSpace(m, d, alpha, b_coeff, n_basis, init_eps)
    c_vec = space.initial_coeffs()
    j_cur, den = space.j_value(c_vec)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = space.j_grad(c_vec, den)
        gnorm = np.linalg.norm(g)
        if gnorm < tol * max(abs(j_cur), 1.0):
            converged = True
            break
        direction = -g / gnorm
        improved = False
        while step > 1e-14:
            trial = c_vec + step * direction
            j_try, den_try = space.j_value(trial)
            if j_try < j_cur - 1e-14 * abs(j_cur):
                c_vec, j_cur, den = trial, j_try, den_try
                step *= 1.6
                improved = True
                break
            step *= 0.5
        if not improved:
            converged = True
            break
        # scale projection: J is 0-homogeneous, keep the iterate normalized
        scale = np.max(np.abs(space.vals @ c_vec))
        if scale > 0:
            c_vec = c_vec / scale
            j_cur, den = space.j_value(c_vec)
    message = "converged" if converged else "max iterations reached"
    return MinimizeResult(
        lambda_est=float(j_cur),
        converged=converged,
        iterations=it,
        coeffs=c_vec,
        grid=space.grid,
        profile=space.vals @ c_vec,
        message=message,
    )


# ---------------------------------------------------------------------------
# pairing identity check (numerator assembly validation)
# ---------------------------------------------------------------------------


def pairing_identity_gap(m: ModelManifold, d: DimensionPair, jet_fn,
                         r_support: float) -> float:
    """Relative gap between int u Delta^k u dv and int (Delta^(k/2) u)^2 dv.

    ``jet_fn(r, order)`` must produce jets of a compactly supported radial
    profile (support inside r_support).  For even k the half power is a
    whole Laplacian power; for odd k it is the gradient of one.
    """
    prof = radial_profile(m)
    omega = 2.0 * math.pi ** (d.n / 2) / math.gamma(d.n / 2)
    k = d.k

    def pair_a(r):
        u = jet_fn(r, 2 * k)
        coeff = prof.laplace_coefficient_jet(r, 2 * k - 1)
        return u.value * iterated_radial_laplacian(u, coeff, k).value * prof.volume_density(r)

    def pair_b(r):
        u = jet_fn(r, 2 * k)
        coeff = prof.laplace_coefficient_jet(r, 2 * k - 1)
        if k % 2 == 0:
            v = iterated_radial_laplacian(u, coeff, k // 2)
            val = v.value**2
        else:
            v = iterated_radial_laplacian(u, coeff, (k - 1) // 2)
            val = v.derivative(1) ** 2
        return val * prof.volume_density(r)

    cuts = np.linspace(0.0, r_support, 6)
    va = vb = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        va += quad(pair_a, lo, hi, limit=300, epsrel=1e-11)[0]
        vb += quad(pair_b, lo, hi, limit=300, epsrel=1e-11)[0]
    va *= omega
    vb *= omega
    return abs(va - vb) / max(abs(vb), 1e-300)
