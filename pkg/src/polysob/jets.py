"""Univariate truncated Taylor arithmetic ("jets").

Evaluating the dressed test functions and their iterated radial Laplacians
needs 2k exact derivatives of compositions like bubble(chart(r)) * cutoff *
conformal factor.  Finite differences are too noisy at that depth, so each
quadrature node carries a small jet (Taylor coefficients f, f', f''/2!, ...)
propagated through the closed-form building blocks.  All nonlinearity is
handled by composing with the finite nilpotent part, so every operation is
exact up to the truncation order.
"""

from __future__ import annotations

import math


class Jet:
    """Taylor coefficients [f, f', f''/2!, ...] of a function at a point."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @classmethod
    def variable(cls, x: float, order: int) -> "Jet":
        c = [0.0] * (order + 1)
        c[0] = float(x)
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, x: float, order: int) -> "Jet":
        c = [0.0] * (order + 1)
        c[0] = float(x)
        return cls(c)

    @property
    def order(self) -> int:
        return len(self.c) - 1

    @property
    def value(self) -> float:
        return self.c[0]

    def derivative(self, j: int) -> float:
        """The j-th derivative value (coefficients times j!)."""
        return self.c[j] * math.factorial(j)

    def truncated(self, order: int) -> "Jet":
        return Jet(self.c[: order + 1])

    # -- ring operations ----------------------------------------------------

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(float(other), self.order)

    def __add__(self, other):
        o = self._lift(other)
        n = min(len(self.c), len(o.c))
        return Jet([self.c[i] + o.c[i] for i in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-x for x in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            x = float(other)
            return Jet([ci * x for ci in self.c])
        n = min(len(self.c), len(other.c))
        out = [0.0] * n
        for i in range(n):
            ai = self.c[i]
            if ai:
                for j in range(n - i):
                    out[i + j] += ai * other.c[j]
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / float(other))
        return self * other**-1.0

    def __rtruediv__(self, other):
        return self._lift(other) * self**-1.0

    # -- analytic functions of the jet ---------------------------------------

    def _compose(self, series_coeffs) -> "Jet":
        """Sum series_coeffs[j] * w^j with w the nilpotent part of self."""
        n = len(self.c)
        w = Jet([0.0] + self.c[1:])
        acc = Jet.constant(series_coeffs[0], n - 1)
        power = Jet.constant(1.0, n - 1)
        for j in range(1, n):
            power = power * w
            if series_coeffs[j]:
                acc = acc + power * series_coeffs[j]
        return acc

    def __pow__(self, s: float):
        x0 = self.c[0]
        is_int = isinstance(s, int) or float(s).is_integer()
        if is_int and int(s) >= 0:
            out = Jet.constant(1.0, self.order)
            for _ in range(int(s)):
                out = out * self
            return out
        if is_int:
            if x0 == 0:
                raise ZeroDivisionError("negative power of a jet with zero value")
        elif x0 <= 0:
            raise ValueError("fractional power of a jet needs a positive value")
        s = float(s)
        coeffs = []
        binom = 1.0
        for j in range(self.order + 1):
            coeffs.append(binom * x0 ** (s - j))
            binom *= (s - j) / (j + 1)
        return self._compose(coeffs)

    def exp(self) -> "Jet":
        e0 = math.exp(self.c[0])
        coeffs = [e0 / math.factorial(j) for j in range(self.order + 1)]
        return self._compose(coeffs)

    def log(self) -> "Jet":
        x0 = self.c[0]
        if x0 <= 0:
            raise ValueError("log of a jet needs a positive value")
        coeffs = [math.log(x0)]
        for j in range(1, self.order + 1):
            coeffs.append((-1.0) ** (j + 1) / (j * x0**j))
        return self._compose(coeffs)

    def sin(self) -> "Jet":
        s0, c0 = math.sin(self.c[0]), math.cos(self.c[0])
        cycle = [s0, c0, -s0, -c0]
        coeffs = [cycle[j % 4] / math.factorial(j) for j in range(self.order + 1)]
        return self._compose(coeffs)

    def cos(self) -> "Jet":
        s0, c0 = math.sin(self.c[0]), math.cos(self.c[0])
        cycle = [c0, -s0, -c0, s0]
        coeffs = [cycle[j % 4] / math.factorial(j) for j in range(self.order + 1)]
        return self._compose(coeffs)

    def tan(self) -> "Jet":
        return self.sin() / self.cos()

    def diff(self) -> "Jet":
        """Jet of the derivative (one order lower)."""
        return Jet([(j + 1) * self.c[j + 1] for j in range(len(self.c) - 1)])

    def poly(self, coeffs) -> "Jet":
        """Evaluate a plain polynomial (Horner) on the jet."""
        acc = Jet.constant(0.0, self.order)
        for a in reversed(list(coeffs)):
            acc = acc * self + float(a)
        return acc

    def __repr__(self):
        return f"Jet({self.c})"


def radial_laplacian_jet(f: Jet, coeff: Jet) -> Jet:
    """One geometer's radial Laplacian -f'' - coeff * f' on jets.

    ``coeff`` is the first-order coefficient (n-1) w'/w of the radial
    Laplace-Beltrami operator.  The result loses two orders.
    """
    f1 = f.diff()
    f2 = f1.diff()
    return -f2 - (coeff.truncated(f2.order) * f1.truncated(f2.order))


def iterated_radial_laplacian(f: Jet, coeff: Jet, times: int) -> Jet:
    for _ in range(times):
        f = radial_laplacian_jet(f, coeff)
    return f
