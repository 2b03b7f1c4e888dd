"""Exact symbolic calculus on radial rational profiles.

Profiles live in the class  a^s * P(t) / (1+t)^m  with t = a r^2 the
normalized squared radius (a the bubble scale), P a polynomial with exact
rational coefficients, m a half-integer and s an integer bookkeeping power
of a picked up by differentiation.  The class is closed under the radial
Laplacian: with Delta = -d^2/dr^2 - ((n-1)/r) d/dr,

    Delta [g(t)] = -a (4 t g'' + 2 n g'),

so iterated Laplacians, the extremal-bubble equation and the linearized
kernel equation can all be checked with zero floating-point error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .constants import (
    _rational_power,
    DimensionPair,
    DivergenceError,
    SymbolicConstant,
    beta_exact,
    bubble_scale,
    sphere_area,
)

# ---------------------------------------------------------------------------
# polynomial helpers (coefficient lists in t, exact Fractions)
# ---------------------------------------------------------------------------


def _trim(p: list[Fraction]) -> tuple[Fraction, ...]:
    n = len(p)
    while n and p[n - 1] == 0:
        n -= 1
    return tuple(p[:n])


def _padd(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] += c
    for i, c in enumerate(b):
        out[i] += c
    return _trim(out)


def _pmul(a: Sequence[Fraction], b: Sequence[Fraction]) -> tuple[Fraction, ...]:
    if not a or not b:
        return ()
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] += ca * cb
    return _trim(out)


def _pscale(a: Sequence[Fraction], c: Fraction) -> tuple[Fraction, ...]:
    return _trim([c * x for x in a])


def _pderiv(a: Sequence[Fraction]) -> tuple[Fraction, ...]:
    return _trim([i * a[i] for i in range(1, len(a))])


_ONE_PLUS_T = (Fraction(1), Fraction(1))


@dataclass(frozen=True)
class RadialRational:
    """Exact radial profile  a^scale_exponent * P(t) / (1+t)^den_power."""

    dims: DimensionPair
    coeffs: tuple[Fraction, ...]
    den_power: Fraction
    scale_exponent: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim([Fraction(c) for c in self.coeffs]))
        object.__setattr__(self, "den_power", Fraction(self.den_power))
        if self.den_power.denominator not in (1, 2):
            raise ValueError("denominator power must be a half-integer")

    # -- construction helpers ---------------------------------------------

    @classmethod
    def constant(cls, d: DimensionPair, c=1) -> "RadialRational":
        return cls(d, (Fraction(c),), Fraction(0))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    # -- ring operations ----------------------------------------------------

    def _aligned(self, other: "RadialRational"):
        """Bring two profiles to a common denominator power and scale."""
        if self.dims != other.dims:
            raise ValueError("mixed dimension pairs")
        a, b = self, other
        ds = a.scale_exponent - b.scale_exponent
        if ds != 0:
            # a^k = 1/Pi is rational, so scale gaps fold away in units of k
            if ds % self.dims.k != 0:
                raise ValueError(
                    f"cannot align scale exponents {a.scale_exponent} and {b.scale_exponent}"
                )
            if ds > 0:
                a = a.fold_scale(b.scale_exponent)
            else:
                b = b.fold_scale(a.scale_exponent)
        dm = a.den_power - b.den_power
        if dm.denominator != 1:
            raise ValueError("denominator powers differ by a non-integer")
        ca, cb = a.coeffs, b.coeffs
        m = max(a.den_power, b.den_power)
        for _ in range(int(abs(dm))):
            if dm > 0:
                cb = _pmul(cb, _ONE_PLUS_T)
            else:
                ca = _pmul(ca, _ONE_PLUS_T)
        return ca, cb, m, a.scale_exponent

    def fold_scale(self, target: int) -> "RadialRational":
        """Rewrite with a smaller scale exponent using a^k = 1/Pi."""
        ds = self.scale_exponent - target
        if ds % self.dims.k != 0:
            raise ValueError("scale gap is not a multiple of k")
        factor = Fraction(1, self.dims.big_pi) ** (ds // self.dims.k)
        return RadialRational(self.dims, _pscale(self.coeffs, factor), self.den_power, target)

    def __add__(self, other: "RadialRational") -> "RadialRational":
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        ca, cb, m, s = self._aligned(other)
        return RadialRational(self.dims, _padd(ca, cb), m, s)

    def __neg__(self):
        return RadialRational(self.dims, _pscale(self.coeffs, Fraction(-1)),
                              self.den_power, self.scale_exponent)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, RadialRational):
            if self.dims != other.dims:
                raise ValueError("mixed dimension pairs")
            return RadialRational(
                self.dims,
                _pmul(self.coeffs, other.coeffs),
                self.den_power + other.den_power,
                self.scale_exponent + other.scale_exponent,
            )
        return RadialRational(self.dims, _pscale(self.coeffs, Fraction(other)),
                              self.den_power, self.scale_exponent)

    __rmul__ = __mul__

    def times_t(self) -> "RadialRational":
        return RadialRational(self.dims, (Fraction(0),) + self.coeffs,
                              self.den_power, self.scale_exponent)

    def t_derivative(self) -> "RadialRational":
        """d/dt of P/(1+t)^m: numerator P'(1+t) - mP over (1+t)^(m+1)."""
        num = _padd(_pmul(_pderiv(self.coeffs), _ONE_PLUS_T),
                    _pscale(self.coeffs, -self.den_power))
        return RadialRational(self.dims, num, self.den_power + 1, self.scale_exponent)

    # -- evaluation ---------------------------------------------------------

    def eval_t(self, t):
        """Value at normalized squared radius t (exact when t is a Fraction).

        The a^scale_exponent prefactor is *not* applied here; use eval_r for
        the fully scaled value at a physical radius.
        """
        num = Fraction(0) if isinstance(t, Fraction) else 0.0
        for c in reversed(self.coeffs):
            num = num * t + (c if isinstance(t, Fraction) else float(c))
        if isinstance(t, Fraction):
            return num * _rational_power(1 + t, -self.den_power)
        return num / (1.0 + t) ** float(self.den_power)

    def eval_r(self, r: float) -> float:
        a = bubble_scale(self.dims).to_float()
        t = a * r * r
        return a**self.scale_exponent * self.eval_t(float(t))


# ---------------------------------------------------------------------------
# half-Laplacian convention
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HalfLaplacianConvention:
    """Odd powers of the geometer's Laplacian: Delta^(p/2) = grad Delta^l, p = 2l+1."""

    order: int

    @property
    def whole_laplacians(self) -> int:
        return self.order // 2

    @property
    def has_gradient(self) -> bool:
        return self.order % 2 == 1


# ---------------------------------------------------------------------------
# core operations
# ---------------------------------------------------------------------------


def bubble_fn(d: DimensionPair) -> RadialRational:
    """Normalized extremal profile (1+t)^(-(n-2k)/2), t = a_{n,k} r^2."""
    return RadialRational(d, (Fraction(1),), d.bubble_decay)


def bubble_power(d: DimensionPair, p) -> RadialRational:
    """U^p as a profile; p(n-2k)/2 must be a half-integer."""
    return RadialRational(d, (Fraction(1),), Fraction(p) * d.bubble_decay)


def apply_laplacian(f: RadialRational, d: DimensionPair, dim_offset: int = 0) -> RadialRational:
    """Radial Laplacian -f'' - ((N-1)/r) f' in dimension N = n + dim_offset.

    In the t-chart this is -a(4 t g'' + 2 N g'); the result picks up one
    power of the bubble scale a in scale_exponent.  dim_offset=2 realizes
    the vector reduction: Delta(x_j h(t)) = x_j * (N=n+2 operator applied to h).
    """
    if f.dims != d:
        raise ValueError("profile dimensions do not match")
    big_n = d.n + dim_offset
    g1 = f.t_derivative()
    g2 = g1.t_derivative()
    out = g2.times_t() * 4 + RadialRational(d, _pmul(g1.coeffs, _ONE_PLUS_T),
                                            g1.den_power + 1, g1.scale_exponent) * (2 * big_n)
    out = out * Fraction(-1)
    return RadialRational(d, out.coeffs, out.den_power, out.scale_exponent + 1)


def iterate_laplacian(f: RadialRational, d: DimensionPair, times: int,
                      dim_offset: int = 0) -> RadialRational:
    for _ in range(times):
        f = apply_laplacian(f, d, dim_offset)
    return f


@dataclass
class IdentityCertificate:
    """Outcome of an exact residual computation."""

    identity: str
    n: int
    k: int
    residual_zero: bool
    residual_terms: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "n": self.n,
            "k": self.k,
            "residual_zero": self.residual_zero,
            "residual_terms": self.residual_terms,
        }


def _residual_terms(res: RadialRational) -> list[str]:
    return [f"{c} * t^{i}" for i, c in enumerate(res.coeffs) if c != 0]


def verify_bubble_identity(d: DimensionPair, scale_factor=Fraction(1)) -> IdentityCertificate:
    """Exact check of Delta^k U = U^(2*-1) for the extremal bubble.

    ``scale_factor`` rationally perturbs the bubble scale (a -> c*a); the
    residual vanishes iff c = 1, which is what pins a_{n,k}.
    """
    c = Fraction(scale_factor)
    u = bubble_fn(d)
    lhs = iterate_laplacian(u, d, d.k)
    # Delta^k carries a^k = 1/Pi; a perturbed scale contributes c^k
    lhs = lhs.fold_scale(0) * c**d.k
    rhs = bubble_power(d, d.two_star - 1)
    res = lhs - rhs
    return IdentityCertificate("bubble", d.n, d.k, res.is_zero, _residual_terms(res))


def kernel_elements(d: DimensionPair) -> tuple[RadialRational, RadialRational]:
    """Generators of the kernel of the linearized bubble equation.

    Returns (z0, h) where z0(t) is the dilation mode
        z0 = y . grad U + ((n-2k)/2) U = 2 t U'(t) + ((n-2k)/2) U,
    and h(t) encodes the translation modes via Z^j(y) = y_j * h(t)
    (h = 2 a U'(t), one power of a in scale_exponent).
    """
    u = bubble_fn(d)
    ut = u.t_derivative()
    z0 = ut.times_t() * 2 + u * d.bubble_decay
    h = RadialRational(d, _pscale(ut.coeffs, Fraction(2)), ut.den_power, 1)
    return z0, h


def verify_kernel_identity(d: DimensionPair, eigenvalue_shift=Fraction(0)) -> list[IdentityCertificate]:
    """Exact check that Delta^k Z = (2*-1) U^(2*-2) Z for both mode types.

    The translation modes use the vector reduction: the radial Laplacian in
    dimension n+2 acts on the h-profile.  A nonzero ``eigenvalue_shift``
    replaces the eigenvalue 2*-1 and must break the identity.
    """
    lam = d.two_star - 1 + Fraction(eigenvalue_shift)
    u2 = bubble_power(d, d.two_star - 2)  # (1+t)^(-2k)
    z0, h = kernel_elements(d)

    res0 = iterate_laplacian(z0, d, d.k).fold_scale(0) - (u2 * z0) * lam
    cert0 = IdentityCertificate("kernel_dilation", d.n, d.k, res0.is_zero,
                                _residual_terms(res0))

    lhs_h = iterate_laplacian(h, d, d.k, dim_offset=2).fold_scale(1)
    res1 = lhs_h - (u2 * h) * lam
    cert1 = IdentityCertificate("kernel_translation", d.n, d.k, res1.is_zero,
                                _residual_terms(res1))
    return [cert0, cert1]


def energy_integral(f: RadialRational, d: DimensionPair, weight_power: int = 0) -> SymbolicConstant:
    """Exact integral of f(t) * t^weight_power over R^n.

    Every monomial reduces to a Beta moment:
        int_0^inf r^(n-1) t^j (1+t)^(-m) dr = (1/2) a^(-n/2) B(n/2+j, m-n/2-j).
    Raises ``DivergenceError`` on the first non-integrable monomial.
    """
    if f.dims != d:
        raise ValueError("profile dimensions do not match")
    a = bubble_scale(d)
    half_n = Fraction(d.n, 2)
    total = SymbolicConstant(0, dims=d)
    for j, cj in enumerate(f.coeffs):
        if cj == 0:
            continue
        p = half_n + j + weight_power
        q = f.den_power - p
        if q <= 0:
            raise DivergenceError(
                f"divergent monomial t^{j + weight_power}/(1+t)^{f.den_power} in R^{d.n}",
                monomial=(j + weight_power, f.den_power),
            )
        total = total + beta_exact(p, q) * cj
    out = sphere_area(d.n) * SymbolicConstant(Fraction(1, 2)) * a**(-half_n) * total
    return out * a**f.scale_exponent


def gradient_square(f: RadialRational, d: DimensionPair) -> RadialRational:
    """|grad f|^2 = (f'(r))^2 = 4 a t (df/dt)^2 as an exact profile."""
    ft = f.t_derivative()
    out = (ft * ft).times_t() * 4
    return RadialRational(d, out.coeffs, out.den_power, out.scale_exponent + 1)


def half_laplacian_profile_sq(d: DimensionPair) -> RadialRational:
    """Exact profile of (Delta^((k-1)/2) U)^2 under the gradient convention."""
    conv = HalfLaplacianConvention(d.k - 1)
    w = iterate_laplacian(bubble_fn(d), d, conv.whole_laplacians)
    if conv.has_gradient:
        return gradient_square(w, d)
    return w * w


def half_laplacian_energy(d: DimensionPair) -> SymbolicConstant:
    """Energy constant of the curvature term in the quotient expansion.

    For n > 2k+2 this is the convergent integral int (Delta^((k-1)/2) U)^2 dx.
    At n = 2k+2 that integral diverges logarithmically and the relevant
    constant is the coefficient of the divergence,
        omega_{n-1} * lim_{r->inf} r^n (Delta^((k-1)/2) U(r))^2,
    read off the leading coefficient of the exact profile.
    """
    n, k = d.n, d.k
    sq = half_laplacian_profile_sq(d)
    if n > 2 * k + 2:
        return energy_integral(sq, d)
    if n == 2 * k + 2:
        # finite limit requires deg + n/2 == den_power; true for the bubble
        half_n = Fraction(n, 2)
        if sq.degree + half_n != sq.den_power:
            raise ValueError("profile does not have the expected critical decay")
        lead = sq.coeffs[-1]
        a = bubble_scale(d)
        return sphere_area(n) * a**(sq.scale_exponent - half_n) * lead
    raise DivergenceError(
        f"gradient energy of the bubble diverges for n = {n} <= 2k+1 = {2 * k + 1}",
        monomial=("half_laplacian_energy", n, k),
    )
