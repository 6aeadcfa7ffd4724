"""Exact rationals, Bernoulli-type sequences and formal log combinations."""

from __future__ import annotations

import threading
from fractions import Fraction
from math import comb, factorial
from numbers import Rational
from typing import Iterable, Mapping

import gmpy2
import mpmath
from gmpy2 import mpq

from .errors import InvalidInput

# Every coefficient in the package is a gmpy2 rational.
ExactScalar = mpq

ZERO = mpq(0)
ONE = mpq(1)


def Q(value: object, den: object = None) -> mpq:
    """Coerce an exact value to :class:`mpq`.

    Accepts ints, :class:`fractions.Fraction`, ``mpq`` and strings of the form
    ``"p"`` or ``"p/q"``.  Floats are refused on purpose.
    """
    if den is not None:
        return Q(value) / Q(den)
    if isinstance(value, type(ZERO)):
        return value
    if isinstance(value, bool):
        raise InvalidInput(f"boolean is not an exact scalar: {value!r}")
    if isinstance(value, int):
        return mpq(value)
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        text = value.strip()
        try:
            if "/" in text:
                num, _, den_s = text.partition("/")
                d = int(den_s)
                if d == 0:
                    raise InvalidInput(f"zero denominator in {value!r}")
                return mpq(int(num), d)
            return mpq(int(text))
        except ValueError as exc:
            raise InvalidInput(f"not an exact fraction string: {value!r}") from exc
    if isinstance(value, Rational):
        return mpq(int(value.numerator), int(value.denominator))
    raise InvalidInput(f"not an exact scalar: {value!r}")


def qstr(value: mpq) -> str:
    """Render as ``"p"`` or ``"p/q"``."""
    value = Q(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def rational_root(value: mpq, n: int) -> mpq | None:
    """Exact positive n-th root of a rational, or None if it is irrational."""
    value = Q(value)
    if n == 1:
        return value
    if value < 0:
        if n % 2 == 0:
            return None
        r = rational_root(-value, n)
        return None if r is None else -r
    num, ok1 = gmpy2.iroot(gmpy2.mpz(value.numerator), n)
    den, ok2 = gmpy2.iroot(gmpy2.mpz(value.denominator), n)
    if ok1 and ok2:
        return mpq(num, den)
    return None


# ---------------------------------------------------------------------------
# Bernoulli and beta tables

_TABLE_LOCK = threading.Lock()
_BERNOULLI: list[mpq] = [ONE]
DEFAULT_TABLE_BOUND = 14


def bernoulli(n: int) -> mpq:
    """B_n with B_1 = -1/2, from sum_{k<=n} C(n+1, k) B_k = 0."""
    if n < 0:
        raise InvalidInput("bernoulli index must be nonnegative")
    table = _BERNOULLI
    if n < len(table):
        return table[n]
    with _TABLE_LOCK:
        while len(table) <= n:
            m = len(table)
            acc = sum((comb(m + 1, k) * table[k] for k in range(m)), ZERO)
            table.append(-acc / (m + 1))
    return table[n]


def beta_coeff(k: int) -> mpq:
    """Coefficient of u^(2k) in 1/S(u), S(u) = 2 sinh(u/2)/u."""
    if k < 0:
        raise InvalidInput("beta index must be nonnegative")
    return (mpq(2) ** (1 - 2 * k) - 1) * bernoulli(2 * k) / factorial(2 * k)


def s_pair_coeff(h: int, y_r: object, y_s: object) -> mpq:
    """[hbar^(2h)] of 1 / (S(hbar/y_r) S(hbar/y_s))."""
    y_r, y_s = Q(y_r), Q(y_s)
    if y_r == 0 or y_s == 0:
        raise InvalidInput("log-times must be nonzero")
    if h < 0:
        raise InvalidInput("h must be nonnegative")
    return sum(
        (beta_coeff(i) * beta_coeff(h - i) * y_r ** (-2 * i) * y_s ** (-2 * (h - i)) for i in range(h + 1)),
        ZERO,
    )


def warm_tables(bound: int = DEFAULT_TABLE_BOUND) -> None:
    bernoulli(bound)


# ---------------------------------------------------------------------------
# Nonpositive polylogarithms


def _theta_step(p: list[mpq], k: int) -> tuple[list[mpq], int]:
    # x d/dx [P / (1-x)^k] = (x P' (1-x) + k x P) / (1-x)^(k+1)
    deg = len(p)
    out = [ZERO] * (deg + 1)
    for i, c in enumerate(p):
        if i:
            out[i] += i * c
            out[i + 1] -= i * c
        out[i + 1] += k * c
    while out and out[-1] == 0:
        out.pop()
    return out, k + 1


def polylog_numerator(m: int) -> tuple[list[mpq], int]:
    """(P, k) with Li_m(x) = P(x) / (1-x)^k for m <= 0; P low-to-high."""
    if m > 0:
        raise InvalidInput("only nonpositive polylog orders are rational")
    p, k = [ZERO, ONE], 1
    for _ in range(-m):
        p, k = _theta_step(p, k)
    return p, k


def polylog_nonpositive(m: int, x: object) -> mpq:
    """Li_m(x) for m <= 0 as an exact rational."""
    x = Q(x)
    if x == 1:
        raise InvalidInput("Li_m has a pole at x = 1")
    p, k = polylog_numerator(m)
    val = ZERO
    for c in reversed(p):
        val = val * x + c
    return val / (1 - x) ** k


# ---------------------------------------------------------------------------
# Formal log combinations


class LogCombination:
    """rational + sum_i c_i log(arg_i) with rational arguments, kept formal."""

    __slots__ = ("rational", "logs")

    def __init__(self, rational: object = 0, logs: Mapping[object, object] | Iterable | None = None):
        self.rational = Q(rational)
        acc: dict[mpq, mpq] = {}
        items = logs.items() if isinstance(logs, Mapping) else (logs or ())
        for arg, coeff in items:
            arg, coeff = Q(arg), Q(coeff)
            if arg == 0:
                raise InvalidInput("log(0) is not allowed in a LogCombination")
            if arg == 1 or coeff == 0:
                continue
            acc[arg] = acc.get(arg, ZERO) + coeff
        self.logs = tuple(sorted((a, c) for a, c in acc.items() if c != 0))

    @classmethod
    def log(cls, arg: object, coeff: object = 1) -> "LogCombination":
        return cls(0, {arg: coeff})

    def __add__(self, other: object) -> "LogCombination":
        if not isinstance(other, LogCombination):
            other = LogCombination(Q(other))
        merged = dict(self.logs)
        for a, c in other.logs:
            merged[a] = merged.get(a, ZERO) + c
        return LogCombination(self.rational + other.rational, merged)

    __radd__ = __add__

    def __neg__(self) -> "LogCombination":
        return LogCombination(-self.rational, {a: -c for a, c in self.logs})

    def __sub__(self, other: object) -> "LogCombination":
        if not isinstance(other, LogCombination):
            other = LogCombination(Q(other))
        return self + (-other)

    def __rsub__(self, other: object) -> "LogCombination":
        return (-self) + other

    def __mul__(self, scalar: object) -> "LogCombination":
        s = Q(scalar)
        return LogCombination(self.rational * s, {a: c * s for a, c in self.logs})

    __rmul__ = __mul__

    def __truediv__(self, scalar: object) -> "LogCombination":
        return self * (1 / Q(scalar))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LogCombination):
            return self.rational == other.rational and self.logs == other.logs
        try:
            return not self.logs and self.rational == Q(other)
        except InvalidInput:
            return NotImplemented

    def __hash__(self) -> int:
        return hash((self.rational, self.logs))

    def is_zero(self) -> bool:
        return self.rational == 0 and not self.logs

    @property
    def negative_args(self) -> tuple[mpq, ...]:
        return tuple(a for a, _ in self.logs if a < 0)

    def expand_primes(self) -> "LogCombination":
        """Rewrite every log over primes and -1 (log laws applied, branches ignored).

        Only meant for comparisons modulo 2*pi*i; the default equality stays structural.
        """
        from sympy import factorint

        acc: dict[mpq, mpq] = {}
        for arg, c in self.logs:
            if arg < 0:
                acc[mpq(-1)] = acc.get(mpq(-1), ZERO) + c
                arg = -arg
            for part, sign in ((arg.numerator, 1), (arg.denominator, -1)):
                for prime, e in factorint(int(part)).items():
                    key = mpq(prime)
                    acc[key] = acc.get(key, ZERO) + sign * e * c
        return LogCombination(self.rational, acc)

    def to_complex(self, dps: int = 30) -> mpmath.mpc:
        """Principal-branch numeric value."""
        with mpmath.workdps(dps):
            total = mpmath.mpc(mpmath.mpf(self.rational.numerator) / self.rational.denominator)
            for a, c in self.logs:
                arg = mpmath.mpf(a.numerator) / a.denominator
                total += (mpmath.mpf(c.numerator) / c.denominator) * mpmath.log(mpmath.mpc(arg))
            return total

    def __str__(self) -> str:
        parts = []
        if self.rational != 0 or not self.logs:
            parts.append(qstr(self.rational))
        for a, c in self.logs:
            parts.append(f"{qstr(c)}*log({qstr(a)})")
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"LogCombination({self})"

    def latex(self) -> str:
        parts = []
        if self.rational != 0 or not self.logs:
            parts.append(_latex_q(self.rational))
        for a, c in self.logs:
            parts.append(f"{_latex_q(c)}\\log\\left({_latex_q(a)}\\right)")
        return " + ".join(parts)

    def to_json(self) -> dict:
        return {
            "rational": qstr(self.rational),
            "logs": [{"arg": qstr(a), "coeff": qstr(c)} for a, c in self.logs],
        }


def _latex_q(value: mpq) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    sign = "-" if value < 0 else ""
    return f"{sign}\\frac{{{abs(value.numerator)}}}{{{value.denominator}}}"
