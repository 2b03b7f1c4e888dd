"""Fundamental solution of Delta^k + 1 on R^n and its rescalings.

Partial fractions over the poles of 1/(1 + |xi|^(2k)) turn the inverse
Fourier transform into a finite mixture of Macdonald (modified Bessel,
second kind) kernels with complex unit-modulus scales,

    Gamma(r) = sum_m c_m (2 pi)^(-n/2) (z_m / r)^(n/2-1) K_{n/2-1}(z_m r),

where z_m = sqrt(-omega_m) is taken with positive real part so every term
decays.  The mixture is absolutely convergent and real after conjugate
pairing.  Near r = 0 the residues cancel the individual r^(2-n)
singularities down to r^(2k-n); that cancellation is catastrophic in
double precision for k >= 2, so small radii are evaluated in extended
precision.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np
from scipy.integrate import quad

from .constants import DimensionPair, DivergenceError, SymbolicConstant
from .radial import bubble_power, energy_integral

EULER_GAMMA = 0.5772156649015328606

# float-path switchover radii for integer-order K evaluation
_SERIES_MAX = 3.5
_ASYMPTOTIC_MIN = 16.0


# ---------------------------------------------------------------------------
# Macdonald function backend
# ---------------------------------------------------------------------------


def _kv_half_integer(m: int, z, lib=None):
    """K_{m+1/2}(z) in closed form, valid for any Re z > 0.

    K_{m+1/2}(z) = sqrt(pi/(2z)) e^(-z) sum_{j<=m} (m+j)! / (j! (m-j)! (2z)^j).
    Works for both complex floats and mpmath types via ``lib``.
    """
    if lib is None:
        lib = cmath
    acc = 0
    for j in range(m + 1):
        coeff = math.factorial(m + j) / (
            math.factorial(j) * math.factorial(m - j)
        )
        acc = acc + coeff / (2 * z) ** j
    return lib.sqrt(math.pi / (2 * z)) * lib.exp(-z) * acc


def _kv_int_series_float(nu: int, z: complex) -> complex:
    """Ascending series for integer order (A&S 9.6.11); use for |z| <= 3.5."""
    z2_4 = z * z / 4.0
    # finite singular sum
    fin = 0j
    for j in range(nu):
        fin += (
            math.factorial(nu - j - 1)
            / math.factorial(j)
            * (-z2_4) ** j
        )
    fin *= 0.5 * (z / 2.0) ** (-nu)
    # Bessel I and the psi-weighted tail
    log_half_z = cmath.log(z / 2.0)
    psi = lambda m: -EULER_GAMMA + sum(1.0 / i for i in range(1, m))
    term_i = (z / 2.0) ** nu
    bessel_i = 0j
    tail = 0j
    j = 0
    factor = 1.0 / math.factorial(nu)
    while True:
        contrib_i = term_i * factor
        bessel_i += contrib_i
        tail += contrib_i * (psi(j + 1) + psi(nu + j + 1))
        j += 1
        term_i *= z2_4
        factor /= j * (nu + j)
        if j > 3 and abs(contrib_i) < 1e-20 * (abs(bessel_i) + 1e-300):
            break
        if j > 400:
            break
    sign = (-1.0) ** (nu + 1)
    return fin + sign * log_half_z * bessel_i - sign * 0.5 * tail


def _kv_asymptotic(nu: float, z: complex) -> complex:
    """Large-|z| expansion, truncated at the smallest term.

    Only accurate once the terms decrease from the start, i.e. for
    |z| well above nu^2/2; ``macdonald_K`` enforces that regime.
    """
    acc = 1.0 + 0j
    term = 1.0 + 0j
    best = abs(term)
    four_nu2 = 4.0 * nu * nu
    for j in range(1, 80):
        term = term * (four_nu2 - (2 * j - 1) ** 2) / (8.0 * j * z)
        if abs(term) >= best:
            break
        best = abs(term)
        acc += term
        if abs(term) < 1e-18 * abs(acc):
            break
    return cmath.sqrt(math.pi / (2 * z)) * cmath.exp(-z) * acc


def _kv_mp(nu, z, dps: int):
    """Arbitrary-precision K_nu(z); mpmath backs the awkward middle range."""
    with mpmath.workdps(dps):
        return mpmath.besselk(nu, mpmath.mpmathify(z))


def macdonald_K(nu, z, dps: int | None = None):
    """Modified Bessel function of the second kind for Re z > 0.

    Half-integer orders use the closed elementary form; integer orders use
    the ascending series for small |z| and the asymptotic expansion for
    large |z|.  Double precision cannot bridge the two regimes at 1e-12, so
    the window in between is evaluated in extended precision (mpmath).
    Passing ``dps`` forces an arbitrary-precision evaluation throughout.
    """
    nu = abs(Fraction(nu))
    if complex(z).real <= 0:
        raise ValueError("macdonald_K requires Re z > 0")
    if dps is not None:
        with mpmath.workdps(dps):
            if nu.denominator == 2:
                zz = mpmath.mpmathify(z)
                return +_kv_half_integer(int(nu - Fraction(1, 2)), zz, lib=mpmath)
            return +_kv_mp(int(nu), z, dps)
    z = complex(z)
    if nu.denominator == 2:
        return _kv_half_integer(int(nu - Fraction(1, 2)), z)
    order = int(nu)
    az = abs(z)
    if az <= _SERIES_MAX:
        return _kv_int_series_float(order, z)
    if az >= max(_ASYMPTOTIC_MIN, order * order + 10.0):
        return _kv_asymptotic(order, z)
    return complex(_kv_mp(order, z, 25))


# ---------------------------------------------------------------------------
# partial fractions and the kernel mixture
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PartialFractionDecomp:
    """Poles and residues of 1/(1 + t^k) in the t = |xi|^2 variable."""

    order: int
    poles: tuple[complex, ...]
    residues: tuple[complex, ...]

    @classmethod
    def from_order(cls, k: int) -> "PartialFractionDecomp":
        if k < 1:
            raise ValueError("order must be >= 1")
        poles = [cmath.exp(1j * math.pi * (2 * m + 1) / k) for m in range(k)]
        residues = []
        for m in range(k):
            prod = 1.0 + 0j
            for j in range(k):
                if j != m:
                    prod *= poles[m] - poles[j]
            residues.append(1.0 / prod)
        return cls(k, tuple(poles), tuple(residues))

    def residue_sum(self) -> complex:
        return sum(self.residues)

    def reconstruct(self, t: float) -> complex:
        """Evaluate sum c_m / (t - omega_m); should reproduce 1/(1+t^k)."""
        return sum(c / (t - w) for c, w in zip(self.residues, self.poles))


@dataclass
class BesselKernelSum:
    """Evaluable fundamental solution of Delta^k + 1 on R^n."""

    dims: DimensionPair
    decomp: PartialFractionDecomp = field(init=False)
    scales: tuple[complex, ...] = field(init=False)
    r_cancel: float = 0.1
    mp_dps: int = 40

    def __post_init__(self):
        k = self.dims.k
        self.decomp = PartialFractionDecomp.from_order(k)
        scales = []
        for w in self.decomp.poles:
            z = cmath.sqrt(-w)
            if z.real <= 0:
                z = -z
            scales.append(z)
        self.scales = tuple(scales)
        self._mp_cache: dict[int, tuple[list, list]] = {}

    def _mp_data(self, dps: int):
        """Residues and kernel scales recomputed at working precision.

        The small-r cancellations rely on exact identities among the poles;
        double-precision pole data would cap the achievable accuracy at
        1e-16 times the cancellation ratio.
        """
        if dps not in self._mp_cache:
            k = self.dims.k
            with mpmath.workdps(dps):
                poles = [mpmath.exp(1j * mpmath.pi * (2 * m + 1) / k) for m in range(k)]
                residues = []
                for m in range(k):
                    prod = mpmath.mpc(1)
                    for j in range(k):
                        if j != m:
                            prod *= poles[m] - poles[j]
                    residues.append(1 / prod)
                scales = []
                for w in poles:
                    z = mpmath.sqrt(-w)
                    if mpmath.re(z) <= 0:
                        z = -z
                    scales.append(z)
            self._mp_cache[dps] = (residues, scales)
        return self._mp_cache[dps]

    @property
    def order_nu(self) -> Fraction:
        return Fraction(self.dims.n, 2) - 1

    @property
    def min_decay_rate(self) -> float:
        return min(z.real for z in self.scales)

    def _term(self, m: int, r: float, dps: int | None):
        z = self.scales[m]
        c = self.decomp.residues[m]
        nu = self.order_nu
        n = self.dims.n
        if dps is None:
            pref = (2 * math.pi) ** (-n / 2) * (z / r) ** float(nu)
            return c * pref * macdonald_K(nu, z * r)
        residues, scales = self._mp_data(dps)
        with mpmath.workdps(dps):
            zz = scales[m]
            cc = residues[m]
            rr = mpmath.mpf(r)
            nunu = mpmath.mpf(nu.numerator) / nu.denominator
            pref = (2 * mpmath.pi) ** (mpmath.mpf(-n) / 2) * (zz / rr) ** nunu
            return cc * pref * macdonald_K(nu, zz * rr, dps=dps)

    def evaluate_complex(self, r: float, dps: int | None = None) -> complex:
        """Full unpaired sum; the imaginary part measures roundoff."""
        if r <= 0:
            raise ValueError("kernel evaluation needs r > 0")
        if dps is None and r < self.r_cancel:
            dps = self.mp_dps
        if dps is None:
            return sum(self._term(m, r, None) for m in range(self.dims.k))
        with mpmath.workdps(dps):
            total = mpmath.mpc(0)
            for m in range(self.dims.k):
                total += self._term(m, r, dps)
            return complex(total)

    def evaluate(self, r: float) -> float:
        """Real kernel value, conjugate-paired for exactness of Im = 0."""
        if r <= 0:
            raise ValueError("kernel evaluation needs r > 0")
        k = self.dims.k
        dps = self.mp_dps if r < self.r_cancel else None
        if dps is not None:
            with mpmath.workdps(dps):
                total = mpmath.mpf(0)
                for m in range(k // 2):
                    total += 2 * self._term(m, r, dps).real
                if k % 2 == 1:
                    total += self._term(k // 2, r, dps).real
                return float(total)
        total = 0.0
        for m in range(k // 2):
            total += 2.0 * self._term(m, r, None).real
        if k % 2 == 1:
            total += self._term(k // 2, r, None).real
        return total

    __call__ = evaluate

    def evaluate_mp(self, r, dps: int) -> mpmath.mpf:
        with mpmath.workdps(dps):
            total = mpmath.mpf(0)
            k = self.dims.k
            for m in range(k // 2):
                total += 2 * self._term(m, float(r), dps).real
            if k % 2 == 1:
                total += self._term(k // 2, float(r), dps).real
            return +total


def gamma_fn(d: DimensionPair, r_cancel: float = 0.1, mp_dps: int = 40) -> BesselKernelSum:
    """Fundamental solution Gamma of Delta^k + 1 on R^n as a kernel mixture."""
    return BesselKernelSum(d, r_cancel=r_cancel, mp_dps=mp_dps)


def gamma_alpha(kernel: BesselKernelSum, alpha: float, r: float) -> float:
    """Rescaled fundamental solution of Delta^k + alpha^(2k): alpha^(n-2k) Gamma(alpha r)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    d = kernel.dims
    return alpha ** (d.n - 2 * d.k) * kernel.evaluate(alpha * r)


# ---------------------------------------------------------------------------
# integral cross-checks
# ---------------------------------------------------------------------------


def _sphere_area_float(n: int) -> float:
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def _radial_integral(kernel: BesselKernelSum, weight, r_max: float | None = None) -> tuple[float, float]:
    """Adaptive quadrature of omega_{n-1} int_0^inf r^(n-1) weight(Gamma(r)) dr."""
    n = kernel.dims.n
    omega = _sphere_area_float(n)
    if r_max is None:
        r_max = 45.0 / kernel.min_decay_rate

    def integrand(r):
        return r ** (n - 1) * weight(kernel.evaluate(r), r)

    cuts = [0.0, kernel.r_cancel, 1.0, 5.0, r_max]
    total, err = 0.0, 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        val, e = quad(integrand, lo, hi, limit=300, epsabs=1e-13, epsrel=1e-11)
        total += val
        err += e
    return omega * total, omega * err


def mass_integral(kernel: BesselKernelSum) -> float:
    """int_{R^n} Gamma dx; equals 1 (the symbol at xi = 0)."""
    val, _ = _radial_integral(kernel, lambda g, r: g)
    return val


@dataclass(frozen=True)
class L2Norms:
    """Both routes to int Gamma^2: direct quadrature and Plancherel."""

    quadrature: float
    plancherel: float


def plancherel_l2_sq(d: DimensionPair) -> float:
    """Closed form (2pi)^(-n) omega_{n-1} (1/2k) B(n/2k, 2 - n/2k) for n < 4k.

    The Beta value reduces by the reflection formula to
    (1 - n/2k) pi / sin(pi n / 2k).
    """
    n, k = d.n, d.k
    if n >= 4 * k:
        raise DivergenceError(
            f"Gamma is not square-integrable for n = {n} >= 4k = {4 * k}",
            monomial=("l2", n, k),
        )
    x = n / (2.0 * k)
    beta = (1.0 - x) * math.pi / math.sin(math.pi * x)
    return (2.0 * math.pi) ** (-n) * _sphere_area_float(n) / (2.0 * k) * beta


def l2_norm_sq(d: DimensionPair, kernel: BesselKernelSum | None = None) -> L2Norms:
    """int Gamma^2 via radial quadrature and via the Plancherel closed form."""
    if d.n >= 4 * d.k:
        raise DivergenceError(
            f"Gamma is not square-integrable for n = {d.n} >= 4k = {4 * d.k}",
            monomial=("l2", d.n, d.k),
        )
    route_b = plancherel_l2_sq(d)
    if kernel is None:
        kernel = gamma_fn(d)
    route_a, _ = _radial_integral(kernel, lambda g, r: g * g)
    return L2Norms(quadrature=route_a, plancherel=route_b)


def c_U_constant(d: DimensionPair) -> SymbolicConstant:
    """Mass of the critical nonlinearity, int U^(2*-1) dx, exactly."""
    return energy_integral(bubble_power(d, d.two_star - 1), d)


# ---------------------------------------------------------------------------
# singular limit and decay diagnostics
# ---------------------------------------------------------------------------


def singular_limit(kernel: BesselKernelSum, r_hi: float = 0.1, levels: int = 8,
                   dps: int = 60) -> float:
    """Extrapolated lim_{r->0} r^(n-2k) Gamma(r) from a geometric ladder.

    Odd n: plain integer-power Richardson ladder.  Even n: the small-r
    expansion carries r^(2j) log r terms, so the constant is solved from a
    small linear system in the basis {1, r^2 log r, r^2, r^4 log r, ...}.
    Extended precision keeps the residue cancellation harmless.
    """
    d = kernel.dims
    p = d.n - 2 * d.k
    with mpmath.workdps(dps):
        radii = [mpmath.mpf(r_hi) / 2**j for j in range(levels)]
        vals = [kernel.evaluate_mp(r, dps) * r**p for r in radii]
        if d.n % 2 == 1:
            table = list(vals)
            for m in range(1, levels):
                factor = mpmath.mpf(2) ** m
                table = [
                    (factor * table[i + 1] - table[i]) / (factor - 1)
                    for i in range(len(table) - 1)
                ]
            return float(table[0])
        basis = [lambda r: mpmath.mpf(1)]
        j = 1
        while len(basis) < levels:
            basis.append(lambda r, j=j: r ** (2 * j) * mpmath.log(r))
            if len(basis) < levels:
                basis.append(lambda r, j=j: r ** (2 * j))
            j += 1
        mat = mpmath.matrix(levels, levels)
        rhs = mpmath.matrix(levels, 1)
        for i, r in enumerate(radii):
            for jj, fn in enumerate(basis):
                mat[i, jj] = fn(r)
            rhs[i] = vals[i]
        sol = mpmath.lu_solve(mat, rhs)
        return float(sol[0])


def decay_slope(kernel: BesselKernelSum, r_lo: float = 5.0, r_hi: float = 15.0,
                count: int = 25) -> float:
    """Log-linear slope of r^(n-2k) Gamma(r) on [r_lo, r_hi].

    Super-polynomial decay shows up as slope <= -min_m Re z_m (up to the
    algebraic prefactor drift absorbed in the fit tolerance).
    """
    d = kernel.dims
    p = d.n - 2 * d.k
    rs = np.linspace(r_lo, r_hi, count)
    ys = np.array([abs(kernel.evaluate(r)) * r**p for r in rs])
    slope = np.polyfit(rs, np.log(ys), 1)[0]
    return float(slope)


def envelope_decay_power(kernel: BesselKernelSum, alpha: float,
                         r1: float, r2: float) -> float:
    """Fitted q in the envelope |Gamma_alpha| <= C r^(2k-n) / (1 + (alpha r)^q).

    Two-point fit of the super-polynomial factor between radii r1 < r2.
    """
    d = kernel.dims
    p = d.n - 2 * d.k
    g1 = gamma_alpha(kernel, alpha, r1) * r1**p
    g2 = gamma_alpha(kernel, alpha, r2) * r2**p
    return float(-(math.log(abs(g2)) - math.log(abs(g1)))
                 / (math.log(alpha * r2) - math.log(alpha * r1)))


# 8th-order centered finite difference stencils (step h, 9 points)
_D1_STENCIL = [Fraction(1, 280), Fraction(-4, 105), Fraction(1, 5), Fraction(-4, 5),
               Fraction(0), Fraction(4, 5), Fraction(-1, 5), Fraction(4, 105),
               Fraction(-1, 280)]
_D2_STENCIL = [Fraction(-1, 560), Fraction(8, 315), Fraction(-1, 5), Fraction(8, 5),
               Fraction(-205, 72), Fraction(8, 5), Fraction(-1, 5), Fraction(8, 315),
               Fraction(-1, 560)]


def _fd_laplacian(values, radii, h, n):
    """One radial Laplacian -f'' - ((n-1)/r) f' on a uniform grid (8th order)."""
    pad = 4
    out_vals, out_radii = [], []
    inv_h = 1 / h
    for i in range(pad, len(values) - pad):
        d1 = 0
        d2 = 0
        for s, (c1, c2) in enumerate(zip(_D1_STENCIL, _D2_STENCIL)):
            v = values[i - pad + s]
            if c1:
                d1 += v * c1.numerator / c1.denominator
            if c2:
                d2 += v * c2.numerator / c2.denominator
        d1 *= inv_h
        d2 *= inv_h * inv_h
        out_vals.append(-d2 - (n - 1) / radii[i] * d1)
        out_radii.append(radii[i])
    return out_vals, out_radii


def pde_residual(kernel: BesselKernelSum, r_lo: float = 0.5, r_hi: float = 5.0,
                 h: float = 0.02, dps: int = 30) -> float:
    """Max relative residual of Delta^k Gamma + Gamma away from the origin.

    The iterated radial Laplacian is applied with 8th-order finite
    differences on a uniform grid; values are computed in extended
    precision so the FD roundoff floor stays below the truncation error.
    """
    d = kernel.dims
    pad = 4 * d.k
    start = r_lo - pad * h
    count = int(round((r_hi - r_lo) / h)) + 2 * pad + 1
    with mpmath.workdps(dps):
        radii = [mpmath.mpf(start) + i * mpmath.mpf(h) for i in range(count)]
        vals = [kernel.evaluate_mp(r, dps) for r in radii]
        work, rads = vals, radii
        for _ in range(d.k):
            work, rads = _fd_laplacian(work, rads, mpmath.mpf(h), d.n)
        worst = 0.0
        base = {float(r): v for r, v in zip(radii, vals)}
        for r, lap in zip(rads, work):
            g = base[float(r)]
            rel = abs(lap + g) / abs(g)
            worst = max(worst, float(rel))
    return worst
