"""Genus-zero spectral curves: input model, admissibility and local analysis.

Points on the sphere are exact rationals or the string ``INF``.  Logarithms in
``x`` and ``y`` are kept formal; only the rational one-forms ``dx`` and ``dy``
and the rational part of ``y`` enter the engine.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import sympy as sp
from gmpy2 import mpq

from .errors import (
    AdmissibilityError,
    DySingularAtRamification,
    EvaluationAtPole,
    InvalidInput,
    IrrationalRamification,
    NonSimpleRamification,
    RamificationMismatch,
    SharedZeroLoci,
    Unsupported,
    UnsupportedLocalModel,
    VitalAtLogCutConflict,
)
from .scalar import ZERO, ONE, LogCombination, Q, qstr, rational_root
from .series import LaurentSeries

INF = "oo"
Point = Union[mpq, str]

_Z = sp.Symbol("z")


# ---------------------------------------------------------------------------
# dense polynomials over Q, low degree first


def _trim(p: Sequence[mpq]) -> list[mpq]:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return p


def poly_eval(p: Sequence[mpq], v: mpq) -> mpq:
    acc = ZERO
    for c in reversed(p):
        acc = acc * v + c
    return acc


def poly_shift(p: Sequence[mpq], a: mpq) -> list[mpq]:
    """Coefficients of p(a + t) in t."""
    out = list(p)
    n = len(out)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            out[j] += a * out[j + 1]
    return out


def poly_valuation(p: Sequence[mpq]) -> int | None:
    for i, c in enumerate(p):
        if c != 0:
            return i
    return None


def _sympy_to_q(c: sp.Expr) -> mpq:
    c = sp.Rational(c)
    return mpq(int(c.p), int(c.q))


def _q_to_sympy(c: mpq) -> sp.Rational:
    return sp.Rational(int(c.numerator), int(c.denominator))


def ratio_series(num: Sequence[mpq], den: Sequence[mpq], prec: int, tag: str = "t") -> LaurentSeries:
    """Laurent series of num(t)/den(t) at t = 0 known below degree ``prec``."""
    nv = poly_valuation(num)
    dv = poly_valuation(den)
    if dv is None:
        raise InvalidInput("zero denominator")
    if nv is None:
        return LaurentSeries.zero(prec, tag)
    rel = prec - (nv - dv)
    if rel <= 0:
        return LaurentSeries.zero(prec, tag)
    n = LaurentSeries._raw(list(num), 0, nv + rel, tag)
    d = LaurentSeries._raw(list(den), 0, dv + rel, tag)
    return n / d


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RationalFunction:
    """Reduced quotient of polynomials with a monic denominator."""

    num: tuple
    den: tuple

    @classmethod
    def from_sympy(cls, expr: sp.Expr, var: sp.Symbol = _Z) -> "RationalFunction":
        expr = sp.cancel(sp.together(sp.sympify(expr)))
        n, d = sp.fraction(expr)
        pn = sp.Poly(n, var, domain="QQ")
        pd = sp.Poly(d, var, domain="QQ")
        lc = pd.LC()
        num = tuple(_sympy_to_q(c / lc) for c in reversed(pn.all_coeffs()))
        den = tuple(_sympy_to_q(c / lc) for c in reversed(pd.all_coeffs()))
        return cls(tuple(_trim(num)), den)

    @classmethod
    def from_coeffs(cls, num: Iterable[object], den: Iterable[object] = (1,)) -> "RationalFunction":
        num = [Q(c) for c in num]
        den = [Q(c) for c in den]
        if not _trim(den):
            raise InvalidInput("denominator polynomial is zero")
        n = sum((_q_to_sympy(c) * _Z**i for i, c in enumerate(num)), sp.Integer(0))
        d = sum((_q_to_sympy(c) * _Z**i for i, c in enumerate(den)), sp.Integer(0))
        return cls.from_sympy(n / d)

    @classmethod
    def constant(cls, c: object) -> "RationalFunction":
        c = Q(c)
        return cls((c,) if c != 0 else (), (ONE,))

    def to_sympy(self, var: sp.Symbol = _Z) -> sp.Expr:
        n = sum((_q_to_sympy(c) * var**i for i, c in enumerate(self.num)), sp.Integer(0))
        d = sum((_q_to_sympy(c) * var**i for i, c in enumerate(self.den)), sp.Integer(0))
        return n / d

    def is_zero(self) -> bool:
        return not self.num

    def __add__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.from_sympy(self.to_sympy() + other.to_sympy())

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.from_sympy(self.to_sympy() - other.to_sympy())

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.from_sympy(self.to_sympy() * other.to_sympy())

    def scale(self, c: object) -> "RationalFunction":
        c = Q(c)
        if c == 0:
            return RationalFunction((), (ONE,))
        return RationalFunction(tuple(c * v for v in self.num), self.den)

    def derivative(self) -> "RationalFunction":
        return RationalFunction.from_sympy(sp.diff(self.to_sympy(), _Z))

    def __call__(self, v: object) -> mpq:
        v = Q(v)
        d = poly_eval(self.den, v)
        if d == 0:
            raise EvaluationAtPole(f"pole at {qstr(v)}")
        return poly_eval(self.num, v) / d

    @property
    def deg_num(self) -> int:
        return len(self.num) - 1

    @property
    def deg_den(self) -> int:
        return len(self.den) - 1

    def order_at(self, p: Point) -> int | None:
        """Valuation of the function at p (None for the zero function)."""
        if self.is_zero():
            return None
        if p == INF:
            return self.deg_den - self.deg_num
        p = Q(p)
        return poly_valuation(poly_shift(self.num, p)) - poly_valuation(poly_shift(self.den, p))

    def form_order_at(self, p: Point) -> int | None:
        """Valuation of the one-form f(z) dz at p in the local coordinate."""
        o = self.order_at(p)
        if o is None:
            return None
        return o - 2 if p == INF else o

    def series_at(self, p: Point, prec: int, tag: str = "t") -> LaurentSeries:
        """Function series in t = z - p, or in w = 1/z at infinity."""
        if p == INF:
            n, d = list(self.num), list(self.den)
            m = max(len(n), len(d))
            n = [ZERO] * (m - len(n)) + list(reversed(n))
            d = [ZERO] * (m - len(d)) + list(reversed(d))
            return ratio_series(n, d, prec, tag)
        p = Q(p)
        return ratio_series(poly_shift(self.num, p), poly_shift(self.den, p), prec, tag)

    def form_series_at(self, p: Point, prec: int, tag: str = "t") -> LaurentSeries:
        """Coefficient series of f(z) dz in the local coordinate at p."""
        if p == INF:
            return -self.series_at(INF, prec + 2, tag).shift(-2)
        return self.series_at(p, prec, tag)

    def rational_roots(self, of: str = "num") -> tuple[list[tuple[mpq, int]], list[sp.Expr]]:
        """Rational roots with multiplicity, plus the irreducible non-linear factors."""
        coeffs = self.num if of == "num" else self.den
        if len(coeffs) <= 1:
            return [], []
        poly = sp.Poly(sum((_q_to_sympy(c) * _Z**i for i, c in enumerate(coeffs)), sp.Integer(0)), _Z, domain="QQ")
        _, factors = sp.factor_list(poly.as_expr(), _Z)
        roots, other = [], []
        for fac, mult in factors:
            fp = sp.Poly(fac, _Z, domain="QQ")
            if fp.degree() == 1:
                a, b = fp.all_coeffs()
                roots.append((_sympy_to_q(-b / a), int(mult)))
            elif fp.degree() > 1:
                other.append(fac)
        roots.sort()
        return roots, other


# ---------------------------------------------------------------------------
# Partial-fraction one-forms


@dataclass
class PartialFractionForm:
    """poly(q) dq + sum_{(a, k)} c / (q - a)^k dq with rational data."""

    poly: list = field(default_factory=list)
    poles: dict = field(default_factory=dict)

    def add_pole(self, a: mpq, k: int, c: mpq) -> None:
        if c == 0:
            return
        key = (Q(a), int(k))
        v = self.poles.get(key, ZERO) + c
        if v == 0:
            self.poles.pop(key, None)
        else:
            self.poles[key] = v

    def add_poly(self, j: int, c: mpq) -> None:
        while len(self.poly) <= j:
            self.poly.append(ZERO)
        self.poly[j] += c

    def __add__(self, other: "PartialFractionForm") -> "PartialFractionForm":
        out = PartialFractionForm(list(self.poly), dict(self.poles))
        for j, c in enumerate(other.poly):
            out.add_poly(j, c)
        for (a, k), c in other.poles.items():
            out.add_pole(a, k, c)
        return out

    def scale(self, s: object) -> "PartialFractionForm":
        s = Q(s)
        return PartialFractionForm([s * c for c in self.poly], {k: s * c for k, c in self.poles.items() if s * c != 0})

    def to_sympy(self, var: sp.Symbol = _Z) -> sp.Expr:
        expr = sum((_q_to_sympy(c) * var**j for j, c in enumerate(self.poly)), sp.Integer(0))
        for (a, k), c in sorted(self.poles.items()):
            expr += _q_to_sympy(c) / (var - _q_to_sympy(a)) ** k
        return expr

    def to_rational(self) -> RationalFunction:
        return RationalFunction.from_sympy(self.to_sympy())

    def is_zero(self) -> bool:
        return not any(self.poly) and not self.poles


# ---------------------------------------------------------------------------
# Input model


LOG_FORMS = ("z-b", "1-z/b")


@dataclass(frozen=True)
class LogTerm:
    """weight * log(z - point), or weight * log(1 - z/point) for the second form."""

    point: mpq
    weight: mpq
    form: str = "z-b"

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", Q(self.point))
        object.__setattr__(self, "weight", Q(self.weight))
        if self.weight == 0:
            raise InvalidInput("log weight must be nonzero")
        if self.form not in LOG_FORMS:
            raise InvalidInput(f"unknown log form {self.form!r}")
        if self.form == "1-z/b" and self.point == 0:
            raise InvalidInput("log(1 - z/b) needs b != 0")

    def constant_shift(self) -> LogCombination:
        """Difference between this term and weight*log(z - point)."""
        if self.form == "z-b":
            return LogCombination()
        return LogCombination.log(-self.point, -self.weight)

    def value_at(self, v: mpq) -> LogCombination:
        if self.form == "z-b":
            return LogCombination.log(v - self.point, self.weight)
        return LogCombination.log(1 - v / self.point, self.weight)


def _as_logs(items: Iterable[object]) -> tuple[LogTerm, ...]:
    out = []
    for it in items:
        if isinstance(it, LogTerm):
            out.append(it)
        elif isinstance(it, dict):
            out.append(LogTerm(it["point"], it["weight"], it.get("form", "z-b")))
        else:
            out.append(LogTerm(*it))
    pts = [t.point for t in out]
    if len(set(pts)) != len(pts):
        raise InvalidInput("duplicate log points")
    return tuple(sorted(out, key=lambda t: t.point))


def parse_rational_expression(text: str, var: str = "z") -> RationalFunction:
    """Parse a rational expression in one variable; floats are refused."""
    from sympy.parsing.sympy_parser import parse_expr, standard_transformations

    sym = sp.Symbol(var)
    try:
        expr = parse_expr(str(text), local_dict={var: sym}, transformations=standard_transformations, evaluate=True)
    except Exception as exc:  # sympy raises a wide range of errors here
        raise InvalidInput(f"cannot parse {text!r}: {exc}") from exc
    if expr.atoms(sp.Float):
        raise InvalidInput(f"floating literal in {text!r}")
    if not expr.free_symbols <= {sym}:
        raise InvalidInput(f"unknown symbols in {text!r}")
    if not expr.is_rational_function(sym):
        raise InvalidInput(f"not a rational function: {text!r}")
    return RationalFunction.from_sympy(expr.subs(sym, _Z))


@dataclass(frozen=True)
class CurveSpec:
    x_rational: RationalFunction
    y_rational: RationalFunction
    x_logs: tuple = ()
    y_logs: tuple = ()
    basepoint: mpq | None = None
    declared_ramification: tuple | None = None
    truncation_hint: int | None = None
    variable: str = "z"

    def __post_init__(self) -> None:
        object.__setattr__(self, "x_logs", _as_logs(self.x_logs))
        object.__setattr__(self, "y_logs", _as_logs(self.y_logs))
        if self.basepoint is not None:
            object.__setattr__(self, "basepoint", Q(self.basepoint))
        if self.declared_ramification is not None:
            object.__setattr__(self, "declared_ramification", tuple(sorted(Q(p) for p in self.declared_ramification)))

    @classmethod
    def build(
        cls,
        x: str | RationalFunction = "0",
        y: str | RationalFunction = "0",
        x_logs: Iterable[object] = (),
        y_logs: Iterable[object] = (),
        **kwargs: object,
    ) -> "CurveSpec":
        """Convenience constructor from expression strings, e.g. build("z**2", "z")."""
        xr = x if isinstance(x, RationalFunction) else parse_rational_expression(x)
        yr = y if isinstance(y, RationalFunction) else parse_rational_expression(y)
        return cls(xr, yr, tuple(x_logs), tuple(y_logs), **kwargs)

    def replace(self, **changes: object) -> "CurveSpec":
        data = dict(
            x_rational=self.x_rational,
            y_rational=self.y_rational,
            x_logs=self.x_logs,
            y_logs=self.y_logs,
            basepoint=self.basepoint,
            declared_ramification=self.declared_ramification,
            truncation_hint=self.truncation_hint,
            variable=self.variable,
        )
        data.update(changes)
        return CurveSpec(**data)

    def _differential(self, rat: RationalFunction, logs: tuple) -> RationalFunction:
        expr = sp.diff(rat.to_sympy(), _Z)
        for t in logs:
            expr += _q_to_sympy(t.weight) / (_Z - _q_to_sympy(t.point))
        return RationalFunction.from_sympy(expr)

    def dx(self) -> RationalFunction:
        return self._differential(self.x_rational, self.x_logs)

    def dy(self) -> RationalFunction:
        return self._differential(self.y_rational, self.y_logs)


# ---------------------------------------------------------------------------
# Derived data


@dataclass(frozen=True)
class LocalRamification:
    """Series data at a ramification point in t = z - p, known below ``prec``."""

    prec: int
    x1: LaurentSeries  # x'(p + t)
    y1: LaurentSeries  # y'(p + t)
    Y: LaurentSeries  # y(p + t) - y(p)
    zeta_hat: LaurentSeries  # t * sqrt((x - x(p)) / (c2 t^2))
    sigma: LaurentSeries  # sigma(p + t) - p
    dsigma: LaurentSeries


@dataclass
class RamificationData:
    location: mpq
    c2: mpq  # (x - x(p)) = c2 t^2 + ...
    dy_at: mpq  # dy/dz at p
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _dx: RationalFunction | None = field(default=None, repr=False, compare=False)
    _dy: RationalFunction | None = field(default=None, repr=False, compare=False)

    @property
    def sqrt_c2(self) -> mpq | None:
        return rational_root(self.c2, 2)

    @property
    def y_prime(self) -> mpq | None:
        """dy/dzeta at p with zeta = sqrt(x - x(p)); None if that needs sqrt(c2) irrational."""
        r = self.sqrt_c2
        return None if r is None else self.dy_at / r

    @property
    def y_prime_squared(self) -> mpq:
        return self.dy_at**2 / self.c2

    def log_y_prime(self) -> LogCombination:
        yp = self.y_prime
        if yp is not None:
            return LogCombination.log(yp)
        return LogCombination.log(self.y_prime_squared, mpq(1, 2))

    def local(self, prec: int) -> LocalRamification:
        hit = self._cache.get(prec)
        if hit is not None:
            return hit
        p = self.location
        x1 = self._dx.series_at(p, prec + 2)
        X = x1.antiderivative()
        unit = X.shift(-2).scale(1 / self.c2)
        zeta_hat = unit.pow_unit(mpq(1, 2)).shift(1)
        sigma = zeta_hat.revert().compose(-zeta_hat)
        y1 = self._dy.series_at(p, prec + 2)
        data = LocalRamification(prec, x1, y1, y1.antiderivative(), zeta_hat, sigma, sigma.derivative())
        with self._lock:
            self._cache.setdefault(prec, data)
        return self._cache[prec]

    def local_coord(self, prec: int) -> LaurentSeries:
        """zeta = sqrt(x - x(p)) as a series in z - p."""
        r = self.sqrt_c2
        if r is None:
            from .errors import NonSquareLeading

            raise NonSquareLeading(f"x''(p)/2 = {qstr(self.c2)} at p = {qstr(self.location)} is not a rational square")
        return self.local(prec).zeta_hat.scale(r)


@dataclass(frozen=True)
class VitalData:
    location: mpq
    log_time: mpq
    x_prime_at_a: mpq


@dataclass(frozen=True)
class CheckItem:
    name: str
    passed: bool
    witness: object = None

    def to_json(self) -> dict:
        w = self.witness
        if isinstance(w, (list, tuple)):
            w = [qstr(v) if isinstance(v, type(ZERO)) else str(v) for v in w]
        elif w is not None:
            w = qstr(w) if isinstance(w, type(ZERO)) else str(w)
        return {"check": self.name, "pass": self.passed, "witness": w}


@dataclass
class AnalyzedCurve:
    spec: CurveSpec
    dx: RationalFunction
    dy: RationalFunction
    ramification: tuple
    vital: tuple
    basepoint: mpq
    report: tuple = ()
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def y_rational(self) -> RationalFunction:
        return self.spec.y_rational

    @property
    def x_rational(self) -> RationalFunction:
        return self.spec.x_rational

    def vital_index(self, a: object) -> int:
        a = Q(a)
        for i, v in enumerate(self.vital):
            if v.location == a:
                return i
        raise InvalidInput(f"{qstr(a)} is not a vital singularity")

    def x_difference_series(self, a: mpq, prec: int) -> LaurentSeries:
        """x(a + t) - x(a) for x regular at a."""
        return self.dx.series_at(a, prec - 1).antiderivative()

    def y_regular_value(self, s: int) -> LogCombination:
        """Value at a_s of y minus its log(z - a_s) term."""
        a = self.vital[s].location
        total = LogCombination(self.spec.y_rational(a))
        for t in self.spec.y_logs:
            if t.point == a:
                total = total + t.constant_shift()
            else:
                total = total + t.value_at(a)
        return total

    def special_points(self) -> list[mpq]:
        pts = set()
        for rf in (self.dx, self.dy):
            for of in ("num", "den"):
                roots, _ = rf.rational_roots(of)
                pts.update(r for r, _ in roots)
        pts.update(t.point for t in self.spec.x_logs)
        pts.update(t.point for t in self.spec.y_logs)
        return sorted(pts)


# ---------------------------------------------------------------------------


def admissibility_report(spec: CurveSpec) -> tuple[list[CheckItem], list[AdmissibilityError | Unsupported]]:
    """Run every admissibility check; returns the report and the list of violations."""
    items: list[CheckItem] = []
    errors: list = []
    dx, dy = spec.dx(), spec.dy()
    if dx.is_zero():
        raise InvalidInput("x is constant")
    zeros, irrational = dx.rational_roots("num")
    if irrational:
        err = IrrationalRamification("dx has zeros outside Q", witness=[str(f) for f in irrational])
        items.append(CheckItem("rational_ramification", False, err.witness))
        errors.append(err)
    else:
        items.append(CheckItem("rational_ramification", True))
    inf_order = dx.form_order_at(INF)
    if inf_order == 1:
        err = Unsupported("ramification point at infinity")
        items.append(CheckItem("no_ramification_at_infinity", False, "oo"))
        errors.append(err)
    elif inf_order is not None and inf_order >= 2:
        err = NonSimpleRamification(f"dx vanishes to order {inf_order} at infinity", witness="oo")
        items.append(CheckItem("simple_ramification", False, "oo"))
        errors.append(err)
    simple_ok = True
    for p, mult in zeros:
        if mult > 1:
            simple_ok = False
            errors.append(NonSimpleRamification(f"dx has a zero of order {mult} at {qstr(p)}", witness=p))
    items.append(CheckItem("simple_ramification", simple_ok, [p for p, m in zeros if m > 1] or None))
    dy_ok, shared_ok = True, True
    for p, _ in zeros:
        if poly_eval(dy.den, p) == 0:
            dy_ok = False
            errors.append(DySingularAtRamification(f"dy has a pole at the ramification point {qstr(p)}", witness=p))
        elif poly_eval(dy.num, p) == 0:
            shared_ok = False
            errors.append(SharedZeroLoci(f"dx and dy both vanish at {qstr(p)}", witness=p))
    items.append(CheckItem("dy_regular_at_ramification", dy_ok))
    items.append(CheckItem("disjoint_zero_loci", shared_ok))
    if spec.declared_ramification is not None:
        found = tuple(sorted(p for p, _ in zeros))
        ok = found == spec.declared_ramification
        items.append(CheckItem("declared_ramification", ok, None if ok else list(found)))
        if not ok:
            errors.append(RamificationMismatch("declared ramification points differ from the zeros of dx", witness=found))
    return items, errors


def _vital_points(spec: CurveSpec, dx: RationalFunction) -> list[VitalData]:
    out = []
    x_log_pts = {t.point for t in spec.x_logs}
    for t in spec.y_logs:
        a = t.point
        if a in x_log_pts or poly_eval(dx.den, a) == 0:
            continue
        if poly_eval(spec.y_rational.den, a) == 0:
            continue
        xp = dx(a)
        if xp == 0:
            continue
        out.append(VitalData(a, t.weight, xp))
    return out


def _choose_basepoint(spec: CurveSpec, specials: set, ram: list[mpq], vital: list[VitalData]) -> mpq:
    values = set()
    if not spec.x_logs:
        for p in ram:
            values.add(spec.x_rational(p))
        for v in vital:
            values.add(spec.x_rational(v.location))
    o = 0
    while True:
        cand = mpq(o)
        if cand not in specials:
            if not values or spec.x_rational.order_at(cand) is None or poly_eval(spec.x_rational.den, cand) == 0:
                return cand
            if spec.x_rational(cand) not in values:
                return cand
        o += 1


def analyze(spec: CurveSpec) -> AnalyzedCurve:
    """Validate admissibility and compute ramification and vital data."""
    items, errors = admissibility_report(spec)
    if errors:
        raise errors[0]
    dx, dy = spec.dx(), spec.dy()
    zeros, _ = dx.rational_roots("num")
    ram_points = [p for p, _ in zeros]
    ramification = []
    for p in ram_points:
        c2 = dx.derivative()(p) / 2
        r = RamificationData(p, c2, dy(p), _dx=dx, _dy=dy)
        ramification.append(r)
    vital = _vital_points(spec, dx)

    # infinity as a vital singularity
    res_inf = -sum((t.weight for t in spec.y_logs), ZERO)
    if res_inf != 0:
        y_reg_inf = spec.y_rational.is_zero() or spec.y_rational.order_at(INF) >= 0
        dx_reg_inf = (dx.form_order_at(INF) or 0) >= 0
        if y_reg_inf and dx_reg_inf:
            raise Unsupported("vital singularity at infinity")

    specials = set()
    for rf in (dx, dy):
        for of in ("num", "den"):
            roots, _ = rf.rational_roots(of)
            specials.update(r for r, _ in roots)
    specials.update(t.point for t in spec.x_logs)
    specials.update(t.point for t in spec.y_logs)
    if spec.basepoint is not None:
        if spec.basepoint in specials:
            raise VitalAtLogCutConflict(f"basepoint {qstr(spec.basepoint)} is a special point", witness=spec.basepoint)
        o = spec.basepoint
    else:
        o = _choose_basepoint(spec, specials, ram_points, vital)
    items.append(CheckItem("vital_singularities", True, [v.location for v in vital] or None))
    return AnalyzedCurve(spec, dx, dy, tuple(ramification), tuple(vital), o, tuple(items))


def vital_singularities(curve: AnalyzedCurve) -> list[VitalData]:
    return list(curve.vital)


def local_involution(curve: AnalyzedCurve, p: object, order: int) -> LaurentSeries:
    """sigma(z) around p as a series in z - p (constant term p), valid below ``order``."""
    p = Q(p)
    for r in curve.ramification:
        if r.location == p:
            s = r.local(order).sigma.truncate(order)
            return s + p
    raise InvalidInput(f"{qstr(p)} is not a ramification point")


# ---------------------------------------------------------------------------
# Times (local coordinates at singular points of y~ dx)


@dataclass(frozen=True)
class TimesData:
    point: Point
    kind: str  # "regular", "pole", "log"
    degree: int
    order: int  # R_a
    irregular: tuple  # t_{a,1..R_a}
    monodromy: mpq
    experimental: bool = False

    def to_json(self) -> dict:
        return {
            "point": self.point if self.point == INF else qstr(self.point),
            "kind": self.kind,
            "degree": self.degree,
            "order": self.order,
            "irregular": [qstr(t) for t in self.irregular],
            "monodromy": qstr(self.monodromy),
            "experimental": self.experimental,
        }


def ytilde_dx(curve: AnalyzedCurve) -> RationalFunction:
    """Rational part of y times dx; the log parts of y are subtracted."""
    return curve.spec.y_rational * curve.dx


def singular_points(curve: AnalyzedCurve) -> list[Point]:
    form = ytilde_dx(curve)
    if form.is_zero():
        return []
    roots, other = form.rational_roots("den")
    if other:
        raise IrrationalRamification("y dx has singular points outside Q", witness=[str(f) for f in other])
    pts: list[Point] = [r for r, _ in roots]
    if form.form_order_at(INF) < 0:
        pts.append(INF)
    return pts


def _x_constant_at(curve: AnalyzedCurve, a: Point) -> LogCombination:
    """Constant term of the local expansion of x at a pole of dx without residue."""
    spec = curve.spec
    if a == INF:
        total = LogCombination()
        for t in spec.x_logs:
            total = total + t.constant_shift()
        return total + spec.x_rational.series_at(INF, 1).coeff(0)
    total = LogCombination()
    for t in spec.x_logs:
        total = total + t.value_at(a)
    rat = spec.x_rational.series_at(a, 1).coeff(0)
    return total + rat


def local_coordinate(curve: AnalyzedCurve, a: Point, prec: int, tag: str = "t") -> tuple[LaurentSeries, str, int, bool]:
    """z_a as a series in the local variable, with (kind, degree, experimental)."""
    dx_s = curve.dx.form_series_at(a, prec + 2, tag)
    v = dx_s.val
    res = dx_s.coeff(-1)
    if v >= 0:
        za = dx_s.antiderivative()
        return za, "regular", -1, False
    if v <= -2:
        if res != 0:
            raise UnsupportedLocalModel("pole of dx of order >= 2 with a residue")
        d = -v - 1
        xs = dx_s.antiderivative()  # constant missing
        const = _x_constant_at(curve, a)
        if const.logs:
            raise UnsupportedLocalModel("log-valued constant in the local expansion of x")
        xs = xs + const.rational
        mu = xs.coeffs[0]
        unit = xs.shift(d).scale(1 / mu)
        root = rational_root(1 / mu, d)
        if root is None:
            raise UnsupportedLocalModel(f"no rational {d}-th root of 1/{qstr(mu)}")
        za = unit.pow_unit(mpq(-1, d)).shift(1).scale(root)
        return za, "pole", d, False
    # simple pole of dx with residue x_a
    reg = (dx_s - LaurentSeries.monomial(-1, dx_s.prec, res, tag)).antiderivative()
    za = reg.scale(1 / res).exp().shift(1)
    return za, "log", 0, True


def extract_times(curve: AnalyzedCurve, a: Point, prec: int | None = None) -> TimesData:
    """Irregular times and monodromy of y~ dx at a singular point a."""
    form = ytilde_dx(curve)
    if a != INF:
        a = Q(a)
    tag = "t"
    if form.is_zero():
        return TimesData(a, "regular", -1, 0, (), ZERO)
    order = form.form_order_at(a)
    R = max(0, -order - 1)
    if prec is None:
        prec = R + 4
    za, kind, d, exp_flag = local_coordinate(curve, a, prec, tag)
    f = form.form_series_at(a, prec, tag)
    times = []
    power = LaurentSeries._raw([ONE], 0, prec + R + 2, tag)
    for k in range(1, R + 1):
        power = power.mul(za)
        times.append(-power.mul(f).residue() / k)
    return TimesData(a, kind, d, R, tuple(times), f.residue(), exp_flag)


def bergman_form(curve: AnalyzedCurve, a: Point, k: int, prec: int | None = None) -> PartialFractionForm:
    """B_{a,k}(q) = Res_{s->a} B(q, s) z_a(s)^{-k} as a partial-fraction form."""
    if k < 1:
        raise InvalidInput("k must be >= 1")
    if prec is None:
        prec = k + 4
    za, *_ = local_coordinate(curve, a, prec)
    inv = za.inverse() ** k
    out = PartialFractionForm()
    for j in range(0, k):
        c = inv.coeff(-1 - j)
        if c == 0:
            continue
        if a == INF:
            out.add_poly(j, -(j + 1) * c)
        else:
            out.add_pole(Q(a), j + 2, (j + 1) * c)
    return out


def monodromy_form(a: Point, o: mpq) -> PartialFractionForm:
    """dS_{a,o}(q) = dq/(q - a) - dq/(q - o)."""
    out = PartialFractionForm()
    if a != INF:
        out.add_pole(Q(a), 1, ONE)
    out.add_pole(Q(o), 1, -ONE)
    return out


@dataclass(frozen=True)
class DecompositionReport:
    passed: bool
    times: tuple
    monodromy_sum: mpq
    difference: str

    def to_json(self) -> dict:
        return {
            "pass": self.passed,
            "times": [t.to_json() for t in self.times],
            "monodromy_sum": qstr(self.monodromy_sum),
            "difference": self.difference,
        }


def decomposition_form(curve: AnalyzedCurve, times: Sequence[TimesData]) -> PartialFractionForm:
    """sum_a ( sum_k (-t_{a,k}) B_{a,k} + t_{a,0} dS_{a,o'} ) with o' the curve basepoint."""
    total = PartialFractionForm()
    o = curve.basepoint
    for td in times:
        for k, t in enumerate(td.irregular, start=1):
            if t != 0:
                total = total + bergman_form(curve, td.point, k).scale(-t)
        if td.monodromy != 0:
            total = total + monodromy_form(td.point, o).scale(td.monodromy)
    return total


def decomposition_roundtrip(curve: AnalyzedCurve) -> DecompositionReport:
    pts = singular_points(curve)
    times = tuple(extract_times(curve, a) for a in pts)
    mono = sum((t.monodromy for t in times), ZERO)
    rebuilt = decomposition_form(curve, times).to_sympy()
    target = ytilde_dx(curve).to_sympy()
    diff = sp.cancel(rebuilt - target)
    return DecompositionReport(diff == 0 and mono == 0, times, mono, str(diff))
