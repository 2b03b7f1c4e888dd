"""Exact algebra of the closed-form constants shared by every other module.

All constants attached to the extremal bubble profile on R^n are, after
factoring, of the form

    q * Pi^e * pi^m

with q, e rational, m a half-integer, and Pi the dimension product
prod_{j=-k}^{k-1} (n + 2j).  ``SymbolicConstant`` keeps that factorization
exact until a final float conversion; Gamma and Beta values at integer and
half-integer arguments reduce into the same ring.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import mpmath

Rational = Union[int, Fraction]


class DivergenceError(ValueError):
    """A radial integral diverges; carries the offending monomial data."""

    def __init__(self, message: str, monomial=None):
        super().__init__(message)
        self.monomial = monomial


@dataclass(frozen=True)
class DimensionPair:
    """Space dimension n and operator half-order k, with 2 <= 2k < n."""

    n: int
    k: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.k, int)):
            raise TypeError("n and k must be integers")
        if not (1 <= self.k and 2 * self.k < self.n):
            raise ValueError(
                f"invalid dimensions (n={self.n}, k={self.k}): need 2 <= 2k < n"
            )

    @property
    def two_star(self) -> Fraction:
        return Fraction(2 * self.n, self.n - 2 * self.k)

    @property
    def big_pi(self) -> int:
        """The product prod_{j=-k}^{k-1} (n + 2j)."""
        out = 1
        for j in range(-self.k, self.k):
            out *= self.n + 2 * j
        return out

    @property
    def bubble_decay(self) -> Fraction:
        """Denominator exponent (n - 2k)/2 of the bubble profile."""
        return Fraction(self.n - 2 * self.k, 2)


def _integer_root(value: int, r: int) -> int:
    """Exact r-th root of a positive integer, or raise ValueError."""
    root = round(value ** (1.0 / r))
    for cand in (root - 1, root, root + 1):
        if cand > 0 and cand**r == value:
            return cand
    raise ValueError(f"{value} has no exact integer {r}-th root")


def _rational_power(q: Fraction, s: Fraction) -> Fraction:
    """q**s as an exact Fraction; raises if the result is irrational."""
    if q == 1 or s == 0:
        return Fraction(1)
    if q == 0:
        if s <= 0:
            raise ZeroDivisionError("0 raised to a nonpositive power")
        return Fraction(0)
    if s.denominator == 1:
        return q ** int(s)
    if q < 0:
        raise ValueError("negative base with fractional exponent")
    num = _integer_root(q.numerator, s.denominator)
    den = _integer_root(q.denominator, s.denominator)
    return Fraction(num, den) ** s.numerator


class SymbolicConstant:
    """Exact constant q * Pi^e * pi^m for an ambient ``DimensionPair``.

    Normal form keeps e in [0, 1): integer powers of Pi fold into the
    rational mantissa.  m may be any half-integer (sqrt(pi) bookkeeping).
    Constants with e = 0 need no ambient dimensions and combine freely.
    """

    __slots__ = ("mantissa", "pi_exponent", "Pi_exponent", "dims")

    def __init__(self, mantissa, pi_exponent=0, Pi_exponent=0, dims: DimensionPair | None = None):
        q = Fraction(mantissa)
        m = Fraction(pi_exponent)
        e = Fraction(Pi_exponent)
        if m.denominator not in (1, 2):
            raise ValueError(f"pi exponent must be a half-integer, got {m}")
        if q == 0:
            m = Fraction(0)
            e = Fraction(0)
        if e != 0 and dims is None:
            raise ValueError("a Pi power needs an ambient DimensionPair")
        if e != 0:
            shift = math.floor(e)
            if shift:
                q *= Fraction(dims.big_pi) ** shift
                e -= shift
        # dims is kept even when e lands on 0, for later Pi re-extraction
        self.mantissa = q
        self.pi_exponent = m
        self.Pi_exponent = e
        self.dims = dims

    # -- ring/field operations -------------------------------------------

    @staticmethod
    def _coerce(other, dims) -> "SymbolicConstant":
        if isinstance(other, SymbolicConstant):
            return other
        if isinstance(other, (int, Fraction)):
            return SymbolicConstant(other, dims=dims)
        raise TypeError(f"cannot combine SymbolicConstant with {type(other)!r}")

    def _join_dims(self, other: "SymbolicConstant") -> DimensionPair | None:
        if self.dims is None:
            return other.dims
        if other.dims is None:
            return self.dims
        if (self.Pi_exponent != 0 and other.Pi_exponent != 0
                and self.dims != other.dims):
            raise ValueError("mixed ambient dimensions in SymbolicConstant arithmetic")
        return self.dims

    def __mul__(self, other):
        other = self._coerce(other, self.dims)
        dims = self._join_dims(other)
        return SymbolicConstant(
            self.mantissa * other.mantissa,
            self.pi_exponent + other.pi_exponent,
            self.Pi_exponent + other.Pi_exponent,
            dims,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other, self.dims)
        return self * other**-1

    def __rtruediv__(self, other):
        return self._coerce(other, self.dims) * self**-1

    def __pow__(self, s):
        s = Fraction(s)
        if self.mantissa == 0:
            return SymbolicConstant(0, dims=self.dims)
        # pull Pi content back out of the mantissa so that fractional powers
        # of pure Pi expressions stay exact
        q, e = self.mantissa, self.Pi_exponent
        if self.dims is not None and s.denominator != 1:
            big_pi = self.dims.big_pi
            if big_pi > 1:
                while q.numerator % big_pi == 0:
                    q /= big_pi
                    e += 1
                while q.denominator % big_pi == 0:
                    q *= big_pi
                    e -= 1
        return SymbolicConstant(
            _rational_power(q, s),
            self.pi_exponent * s,
            e * s,
            self.dims,
        )

    def __neg__(self):
        return SymbolicConstant(-self.mantissa, self.pi_exponent, self.Pi_exponent, self.dims)

    def __add__(self, other):
        other = self._coerce(other, self.dims)
        if self.mantissa == 0:
            return other
        if other.mantissa == 0:
            return self
        dims = self._join_dims(other)
        if (self.pi_exponent, self.Pi_exponent) != (other.pi_exponent, other.Pi_exponent):
            raise ValueError(
                "incompatible factored forms in addition: "
                f"{self!r} + {other!r}"
            )
        return SymbolicConstant(
            self.mantissa + other.mantissa, self.pi_exponent, self.Pi_exponent, dims
        )

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._coerce(other, self.dims))

    def __rsub__(self, other):
        return self._coerce(other, self.dims) + (-self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = SymbolicConstant(other, dims=self.dims)
        if not isinstance(other, SymbolicConstant):
            return NotImplemented
        if self.mantissa == other.mantissa == 0:
            return True
        return (
            self.mantissa == other.mantissa
            and self.pi_exponent == other.pi_exponent
            and self.Pi_exponent == other.Pi_exponent
        )

    def __hash__(self):
        return hash((self.mantissa, self.pi_exponent, self.Pi_exponent))

    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def is_rational(self) -> bool:
        return self.pi_exponent == 0 and self.Pi_exponent == 0

    def as_fraction(self) -> Fraction:
        if not self.is_rational:
            raise ValueError(f"{self!r} is not rational")
        return self.mantissa

    # -- conversions ------------------------------------------------------

    def to_float(self) -> float:
        out = float(self.mantissa)
        if self.Pi_exponent != 0:
            out *= float(self.dims.big_pi) ** float(self.Pi_exponent)
        if self.pi_exponent != 0:
            out *= math.pi ** float(self.pi_exponent)
        return out

    __float__ = to_float

    def to_mpf(self, dps: int = 30) -> mpmath.mpf:
        with mpmath.workdps(dps + 10):
            out = mpmath.mpf(self.mantissa.numerator) / self.mantissa.denominator
            if self.Pi_exponent != 0:
                e = self.Pi_exponent
                out *= mpmath.power(self.dims.big_pi, mpmath.mpf(e.numerator) / e.denominator)
            if self.pi_exponent != 0:
                m = self.pi_exponent
                out *= mpmath.pi ** (mpmath.mpf(m.numerator) / m.denominator)
            return +out

    def __repr__(self):
        parts = [str(self.mantissa)]
        if self.Pi_exponent != 0:
            parts.append(f"{self.dims.big_pi}^({self.Pi_exponent})")
        if self.pi_exponent != 0:
            parts.append(f"pi^({self.pi_exponent})")
        return " * ".join(parts)


def gamma_exact(x: Rational) -> SymbolicConstant:
    """Gamma(x) for positive integer or half-integer x, reduced exactly.

    Integer x gives (x-1)!; half-integer x gives a rational times sqrt(pi).
    """
    x = Fraction(x)
    if x <= 0:
        raise ValueError(f"gamma_exact needs a positive argument, got {x}")
    if x.denominator == 1:
        return SymbolicConstant(math.factorial(int(x) - 1))
    if x.denominator == 2:
        # Gamma(1/2) = sqrt(pi); climb with Gamma(y+1) = y Gamma(y)
        coeff = Fraction(1)
        y = Fraction(1, 2)
        while y < x:
            coeff *= y
            y += 1
        return SymbolicConstant(coeff, Fraction(1, 2))
    raise ValueError(f"gamma_exact only handles integers and half-integers, got {x}")


def beta_exact(p: Rational, q: Rational) -> SymbolicConstant:
    """Euler Beta B(p, q) = Gamma(p)Gamma(q)/Gamma(p+q) at (half-)integers."""
    p, q = Fraction(p), Fraction(q)
    return gamma_exact(p) * gamma_exact(q) / gamma_exact(p + q)


def critical_exponent(d: DimensionPair) -> Fraction:
    """The Sobolev embedding exponent 2n/(n-2k)."""
    return d.two_star


def bubble_scale(d: DimensionPair) -> SymbolicConstant:
    """Normalizing scale of the bubble profile: Pi^(-1/k)."""
    return SymbolicConstant(1, 0, Fraction(-1, d.k), d)


def c_small(d: DimensionPair) -> Fraction:
    """Scalar-curvature coefficient k(3n(n-2) - 4(k^2-1)) / (12n(n-1))."""
    n, k = d.n, d.k
    return Fraction(k * (3 * n * (n - 2) - 4 * (k * k - 1)), 12 * n * (n - 1))


def c_green(d: DimensionPair) -> SymbolicConstant:
    """Singularity constant Gamma(n/2-k) / (2^(2k) (k-1)! pi^(n/2)).

    This is the coefficient of |x|^(2k-n) in the fundamental solution of
    the polyharmonic operator; it is exact for every integer n since
    n/2 - k is then an integer or a half-integer.
    """
    n, k = d.n, d.k
    if n <= 2 * k:
        raise ValueError("singularity constant needs n > 2k")
    arg = Fraction(n, 2) - k
    denom = SymbolicConstant(
        Fraction(4**k * math.factorial(k - 1)), Fraction(n, 2)
    )
    return gamma_exact(arg) / denom


def radial_moment(j: int, m: Rational, a, d: DimensionPair) -> SymbolicConstant:
    """Exact moment of a bubble-type monomial over R^n (radial part only):

        int_0^inf r^(n-1) r^(2j) (1 + a r^2)^(-m) dr
            = (1/2) a^(-(n/2+j)) B(n/2 + j, m - n/2 - j).

    Raises ``DivergenceError`` unless m - n/2 - j > 0.
    """
    if j < 0:
        raise ValueError("moment order j must be >= 0")
    m = Fraction(m)
    p = Fraction(d.n, 2) + j
    q = m - p
    if q <= 0:
        raise DivergenceError(
            f"divergent radial moment: tail exponent n-1+2j-2m = {2 * q - 1} >= -1",
            monomial=(j, m),
        )
    if not isinstance(a, SymbolicConstant):
        a = SymbolicConstant(a, dims=d)
    return SymbolicConstant(Fraction(1, 2)) * a**(-p) * beta_exact(p, q)


def sphere_area(n: int) -> SymbolicConstant:
    """Area of the unit sphere S^(n-1) in R^n: 2 pi^(n/2) / Gamma(n/2)."""
    if n < 2:
        raise ValueError("sphere_area needs n >= 2")
    return SymbolicConstant(2, Fraction(n, 2)) / gamma_exact(Fraction(n, 2))


def bubble_crit_mass(d: DimensionPair) -> SymbolicConstant:
    """Exact mass int_{R^n} U^(2*) dx of the extremal bubble.

    The bubble U = (1 + a_{n,k} |x|^2)^(-(n-2k)/2) raised to the critical
    power is (1 + a r^2)^(-n), so the Beta-moment oracle applies directly.
    """
    return sphere_area(d.n) * radial_moment(0, d.n, bubble_scale(d), d)


def sharp_constant(d: DimensionPair) -> float:
    """Best constant K(n, k) of the Euclidean higher-order Sobolev inequality.

    Testing the bubble equation against the bubble itself turns the extremal
    quotient into (int U^(2*))^(2k/n), so K(n,k) = (int U^(2*))^(-2k/n).
    """
    mass = bubble_crit_mass(d)
    return float(mass.to_mpf(30) ** (-mpmath.mpf(2 * d.k) / d.n))
