"""Truncated Laurent series with exact rational coefficients.

A series stores the coefficients of ``t**val .. t**(prec-1)``.  Everything at
degree ``prec`` or above is unknown; every operation propagates the
conservative precision of its result so that reading an unknown coefficient
raises instead of silently returning zero.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from gmpy2 import mpq

from .errors import (
    DivisionByZeroSeries,
    InvalidValuation,
    NonSquareLeading,
    NotInvertible,
    OutOfRange,
    ResidueObstruction,
    TagMismatch,
    TruncationExhausted,
)
from .scalar import Q, rational_root

_ZERO = mpq(0)
_ONE = mpq(1)


class LaurentSeries:
    __slots__ = ("val", "coeffs", "prec", "tag", "center")

    def __init__(
        self,
        coeffs: Iterable[object] = (),
        val: int = 0,
        prec: int | None = None,
        tag: str = "t",
        center: object = "local",
    ):
        cs = [c if type(c) is type(_ZERO) else Q(c) for c in coeffs]
        if prec is None:
            prec = val + len(cs)
        self._set(cs, val, prec)
        self.tag = tag
        self.center = center

    @classmethod
    def _raw(cls, cs: list, val: int, prec: int, tag: str = "t", center: object = "local") -> "LaurentSeries":
        obj = cls.__new__(cls)
        obj._set(cs, val, prec)
        obj.tag = tag
        obj.center = center
        return obj

    def _set(self, cs: list, val: int, prec: int) -> None:
        n = prec - val
        if n <= 0:
            self.val, self.coeffs, self.prec = prec, [], prec
            return
        if len(cs) > n:
            cs = cs[:n]
        start = 0
        while start < len(cs) and cs[start] == 0:
            start += 1
        if start == len(cs):
            self.val, self.coeffs, self.prec = prec, [], prec
            return
        end = len(cs)
        while cs[end - 1] == 0:
            end -= 1
        self.val = val + start
        self.coeffs = cs[start:end] if (start or end != len(cs)) else cs
        self.prec = prec

    # -- constructors ------------------------------------------------------
    @classmethod
    def monomial(cls, degree: int, prec: int, coeff: object = 1, tag: str = "t") -> "LaurentSeries":
        return cls._raw([Q(coeff)], degree, prec, tag)

    @classmethod
    def zero(cls, prec: int, tag: str = "t") -> "LaurentSeries":
        return cls._raw([], prec, prec, tag)

    @classmethod
    def from_poly(cls, coeffs: Sequence[object], prec: int, tag: str = "t") -> "LaurentSeries":
        """Polynomial (low to high) regarded as exact up to ``prec``."""
        return cls._raw([Q(c) for c in coeffs], 0, prec, tag)

    # -- inspection ----------------------------------------------------------
    @property
    def min_degree(self) -> int:
        return self.val

    @property
    def truncation_order(self) -> int:
        """Highest degree with a known coefficient."""
        return self.prec - 1

    @property
    def relative_precision(self) -> int:
        return self.prec - self.val

    def is_zero(self) -> bool:
        return not self.coeffs

    def coeff(self, k: int) -> mpq:
        if k >= self.prec:
            raise OutOfRange(f"coefficient of degree {k} unknown (known below {self.prec})")
        i = k - self.val
        if i < 0 or i >= len(self.coeffs):
            return _ZERO
        return self.coeffs[i]

    residue_and_coeff = coeff

    def residue(self) -> mpq:
        return self.coeff(-1)

    def items(self) -> list[tuple[int, mpq]]:
        return [(self.val + i, c) for i, c in enumerate(self.coeffs) if c != 0]

    def __repr__(self) -> str:
        terms = " + ".join(f"({c})*{self.tag}^{d}" for d, c in self.items()) or "0"
        return f"<{terms} + O({self.tag}^{self.prec})>"

    def same_known(self, other: "LaurentSeries") -> bool:
        """Equality of coefficients on the common known window."""
        p = min(self.prec, other.prec)
        lo = min(self.val, other.val, p)
        return all(self.coeff(k) == other.coeff(k) for k in range(lo, p))

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other: "LaurentSeries") -> None:
        if self.tag != other.tag:
            raise TagMismatch(f"series in {self.tag!r} combined with series in {other.tag!r}")

    def _coerce(self, other: object) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            self._check(other)
            return other
        c = Q(other)
        return LaurentSeries._raw([c], 0, max(self.prec, 1), self.tag)

    def __add__(self, other: object) -> "LaurentSeries":
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        val = min(self.val, other.val)
        n = prec - val
        if n <= 0:
            return LaurentSeries.zero(prec, self.tag)
        out = [_ZERO] * n
        for src in (self, other):
            off = src.val - val
            for i, c in enumerate(src.coeffs):
                j = off + i
                if j >= n:
                    break
                out[j] += c
        return LaurentSeries._raw(out, val, prec, self.tag, self.center)

    __radd__ = __add__

    def __neg__(self) -> "LaurentSeries":
        return LaurentSeries._raw([-c for c in self.coeffs], self.val, self.prec, self.tag, self.center)

    def __sub__(self, other: object) -> "LaurentSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other: object) -> "LaurentSeries":
        return (-self) + other

    def scale(self, c: object) -> "LaurentSeries":
        c = Q(c)
        if c == 0:
            return LaurentSeries.zero(self.prec, self.tag)
        return LaurentSeries._raw([c * x for x in self.coeffs], self.val, self.prec, self.tag, self.center)

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by t**k."""
        return LaurentSeries._raw(list(self.coeffs), self.val + k, self.prec + k, self.tag, self.center)

    def mul(self, other: "LaurentSeries", cap: int | None = None) -> "LaurentSeries":
        """Product, optionally discarding degrees >= ``cap``."""
        self._check(other)
        prec = min(self.val + other.prec, other.val + self.prec)
        if cap is not None and cap < prec:
            prec = cap
        val = self.val + other.val
        n = prec - val
        if n <= 0 or not self.coeffs or not other.coeffs:
            return LaurentSeries.zero(prec, self.tag)
        a, b = self.coeffs, other.coeffs
        la, lb = min(len(a), n), min(len(b), n)
        out = [_ZERO] * min(n, la + lb - 1)
        m = len(out)
        for i in range(la):
            ai = a[i]
            if ai == 0:
                continue
            lim = min(lb, m - i)
            for j in range(lim):
                out[i + j] += ai * b[j]
        return LaurentSeries._raw(out, val, prec, self.tag, self.center)

    def __mul__(self, other: object) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            return self.mul(other)
        return self.scale(other)

    __rmul__ = __mul__

    def inverse(self) -> "LaurentSeries":
        if not self.coeffs:
            raise DivisionByZeroSeries("series is zero to its known order")
        a = self.coeffs
        n = self.prec - self.val
        inv0 = 1 / a[0]
        b = [inv0]
        for k in range(1, n):
            acc = _ZERO
            for i in range(1, min(k, len(a) - 1) + 1):
                acc += a[i] * b[k - i]
            b.append(-acc * inv0)
        return LaurentSeries._raw(b, -self.val, -self.val + n, self.tag, self.center)

    def __truediv__(self, other: object) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            self._check(other)
            return self.mul(other.inverse())
        return self.scale(1 / Q(other))

    def __rtruediv__(self, other: object) -> "LaurentSeries":
        return self.inverse().scale(other)

    def __pow__(self, k: int) -> "LaurentSeries":
        if k < 0:
            return self.inverse() ** (-k)
        result = LaurentSeries._raw([_ONE], 0, self.val * k + self.relative_precision, self.tag, self.center)
        base = self
        while k:
            if k & 1:
                result = result.mul(base)
            k >>= 1
            if k:
                base = base.mul(base)
        return result

    def truncate(self, prec: int) -> "LaurentSeries":
        if prec >= self.prec:
            return self
        return LaurentSeries._raw(list(self.coeffs), self.val, prec, self.tag, self.center)

    # -- calculus ------------------------------------------------------------
    def derivative(self) -> "LaurentSeries":
        out = [(self.val + i) * c for i, c in enumerate(self.coeffs)]
        return LaurentSeries._raw(out, self.val - 1, self.prec - 1, self.tag, self.center)

    def antiderivative(self) -> "LaurentSeries":
        """Term-wise antiderivative with zero constant; needs a vanishing residue."""
        if self.prec <= -1:
            raise TruncationExhausted("residue of the integrand is unknown")
        if self.coeff(-1) != 0:
            raise ResidueObstruction(f"nonzero residue {self.coeff(-1)}")
        out = []
        val = self.val + 1
        for i, c in enumerate(self.coeffs):
            d = self.val + i + 1
            out.append(_ZERO if d == 0 else c / d)
        return LaurentSeries._raw(out, val, self.prec + 1, self.tag, self.center)

    # -- composition ---------------------------------------------------------
    def compose(self, g: "LaurentSeries") -> "LaurentSeries":
        """self(g(t)); g must have positive valuation."""
        if g.val < 1:
            raise InvalidValuation("inner series must vanish at the origin")
        f = self
        if f.val < 0:
            if not g.coeffs:
                raise DivisionByZeroSeries("inner series is zero to its known order")
            head = LaurentSeries._raw(list(f.coeffs), 0, f.prec - f.val, f.tag)
            return head.compose(g).mul(g.inverse() ** (-f.val))
        prec = min(f.prec * g.val, g.prec) if f.prec > 0 else 0
        if len(f.coeffs) == 1 and f.val == 0 and f.prec > 1:
            prec = f.prec * g.val
        total = LaurentSeries.zero(prec, g.tag)
        acc = [_ZERO] * max(prec, 0)
        power = LaurentSeries._raw([_ONE], 0, prec, g.tag)
        for k in range(0, f.prec):
            if k * g.val >= prec:
                break
            if k:
                power = power.mul(g, cap=prec)
            fk = f.coeff(k) if k >= f.val else _ZERO
            if fk != 0:
                for d, c in zip(range(power.val, prec), power.coeffs):
                    acc[d] += fk * c
        total = LaurentSeries._raw(acc, 0, prec, g.tag, self.center)
        return total

    def revert(self) -> "LaurentSeries":
        """Compositional inverse of a series with valuation exactly one."""
        if self.val != 1 or not self.coeffs:
            raise NotInvertible("reversion needs a simple zero at the origin")
        prec = self.prec
        c1 = self.coeffs[0]
        t = LaurentSeries._raw([_ONE], 1, prec, self.tag)
        g = LaurentSeries._raw([1 / c1], 1, prec, self.tag)
        fprime = self.derivative()
        known = 2
        while True:
            err = self.compose(g) - t
            if err.is_zero():
                break
            g = (g - err.mul(fprime.compose(g).inverse())).truncate(prec)
            known *= 2
            if known > 4 * prec + 8:
                raise NotInvertible("reversion failed to converge")
        check = self.compose(g) - t
        if not check.is_zero():
            raise NotInvertible("reversion postcondition failed")
        return g

    def sqrt_even(self) -> "LaurentSeries":
        """Square root of a series with even valuation and square leading term."""
        if not self.coeffs:
            raise NonSquareLeading("zero series")
        if self.val % 2:
            raise NonSquareLeading(f"odd valuation {self.val}")
        r = rational_root(self.coeffs[0], 2)
        if r is None:
            raise NonSquareLeading(f"leading coefficient {self.coeffs[0]} is not a rational square")
        unit = LaurentSeries._raw([c / self.coeffs[0] for c in self.coeffs], 0, self.prec - self.val, self.tag)
        root = unit.pow_unit(mpq(1, 2))
        return root.scale(abs(r)).shift(self.val // 2)

    def pow_unit(self, e: object) -> "LaurentSeries":
        """(1 + u)^e for a series with constant term 1 and any rational e."""
        e = Q(e)
        if self.val != 0 or not self.coeffs or self.coeffs[0] != 1:
            raise InvalidValuation("pow_unit needs constant term 1")
        a = self.coeffs
        n = self.prec
        b = [_ONE]
        for k in range(1, n):
            acc = _ZERO
            for i in range(1, min(k, len(a) - 1) + 1):
                acc += a[i] * (e * i - (k - i)) * b[k - i]
            b.append(acc / k)
        return LaurentSeries._raw(b, 0, n, self.tag, self.center)

    def exp(self) -> "LaurentSeries":
        """exp of a series with positive valuation."""
        if self.val < 1:
            raise InvalidValuation("exp needs positive valuation")
        n = self.prec
        u = [self.coeff(i) if i < n else _ZERO for i in range(n)]
        b = [_ONE]
        for k in range(1, n):
            acc = _ZERO
            for i in range(1, k + 1):
                if u[i] != 0:
                    acc += i * u[i] * b[k - i]
            b.append(acc / k)
        return LaurentSeries._raw(b, 0, n, self.tag, self.center)

    def log_unit(self) -> "LaurentSeries":
        """log of a series with constant term 1."""
        if self.val != 0 or not self.coeffs or self.coeffs[0] != 1:
            raise InvalidValuation("log_unit needs constant term 1")
        return (self.derivative() / self).antiderivative()


def arith(a: LaurentSeries, b: LaurentSeries, op: str) -> LaurentSeries:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")
