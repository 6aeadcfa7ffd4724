"""Variational formulas: exact residue right-hand sides against finite differences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from gmpy2 import mpq

from .correlator import CorrelatorCache, PointContext, PoleSum, compute_omega, max_retries
from .curve import (
    INF,
    AnalyzedCurve,
    CurveSpec,
    LogTerm,
    RationalFunction,
    analyze,
    bergman_form,
    local_coordinate,
)
from .errors import (
    AdmissibilityError,
    CollisionOfSpecialPoints,
    InconclusiveFD,
    InvalidInput,
    TauUnsupported,
    TruncationExhausted,
)
from .identities import (
    CheckReport,
    _omega_factor,
    _pair_residues,
    dilaton_rhs,
    free_energy,
    free_energy_f1,
)
from .scalar import ONE, ZERO, LogCombination, Q, qstr
from .series import LaurentSeries

DEFAULT_EPS = (mpq(1, 10**3), mpq(1, 10**4), mpq(1, 10**5))
DEFAULT_TOLERANCE = mpmath.mpf("1e-10")
FD_DPS = 80

KINDS = ("irregular_time", "monodromy_pair", "vital_position")


@dataclass(frozen=True)
class DeformationSpec:
    kind: str
    a: object = None
    b: object = None
    k: int = 1
    r: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise InvalidInput(f"unknown deformation kind {self.kind!r}")
        if self.kind == "irregular_time" and self.k < 1:
            raise InvalidInput("irregular times need k >= 1")
        if self.kind == "monodromy_pair" and _pt(self.a) == _pt(self.b):
            raise InvalidInput("monodromy pair needs two distinct poles")

    @classmethod
    def irregular_time(cls, a: object, k: int) -> "DeformationSpec":
        return cls("irregular_time", a=_pt(a), k=k)

    @classmethod
    def monodromy_pair(cls, a: object, b: object) -> "DeformationSpec":
        return cls("monodromy_pair", a=_pt(a), b=_pt(b))

    @classmethod
    def vital_position(cls, r: int) -> "DeformationSpec":
        return cls("vital_position", r=r)

    def describe(self) -> str:
        if self.kind == "irregular_time":
            return f"irregular_time(a={_ptstr(self.a)}, k={self.k})"
        if self.kind == "monodromy_pair":
            return f"monodromy_pair(a={_ptstr(self.a)}, b={_ptstr(self.b)})"
        return f"vital_position(r={self.r})"


def _pt(v: object):
    if v is None or v == INF:
        return v
    return Q(v)


def _ptstr(v) -> str:
    return v if v == INF else qstr(v)


# ---------------------------------------------------------------------------
# Deformed curves


def _added_form(curve: AnalyzedCurve, d: DeformationSpec) -> RationalFunction:
    """The rational one-form (coefficient of dq) added to y dx."""
    if d.kind == "irregular_time":
        return bergman_form(curve, d.a, d.k).to_rational()
    import sympy as sp

    z = sp.Symbol("z")
    expr = 0
    if d.a != INF:
        expr += 1 / (z - sp.Rational(int(d.a.numerator), int(d.a.denominator)))
    if d.b != INF:
        expr -= 1 / (z - sp.Rational(int(d.b.numerator), int(d.b.denominator)))
    return RationalFunction.from_sympy(expr)


def deform_curve(curve: AnalyzedCurve, d: DeformationSpec, t: object) -> CurveSpec:
    """The curve at parameter t along the deformation (t = 0 gives the original)."""
    t = Q(t)
    spec = curve.spec
    if t == 0:
        return spec
    if d.kind == "vital_position":
        if not 0 <= d.r < len(curve.vital):
            raise InvalidInput(f"no vital singularity with index {d.r}")
        a = curve.vital[d.r].location
        new = a + t
        others = set(curve.special_points()) - {a}
        if new in others or (spec.basepoint is not None and new == spec.basepoint):
            raise CollisionOfSpecialPoints(f"moving {qstr(a)} to {qstr(new)} hits a special point")
        logs = tuple(LogTerm(new, lt.weight, lt.form) if lt.point == a else lt for lt in spec.y_logs)
        return spec.replace(y_logs=logs)
    import sympy as sp

    form = _added_form(curve, d)
    extra = RationalFunction.from_sympy(sp.cancel(form.to_sympy() / curve.dx.to_sympy()))
    return spec.replace(y_rational=spec.y_rational + extra.scale(t))


def analyze_deformed(curve: AnalyzedCurve, d: DeformationSpec, t: object) -> AnalyzedCurve:
    try:
        return analyze(deform_curve(curve, d, t))
    except AdmissibilityError as exc:
        raise CollisionOfSpecialPoints(f"deformation leaves the admissible family at t = {qstr(Q(t))}: {exc}") from exc


# ---------------------------------------------------------------------------
# Right-hand sides


def _slot_series_at_infinity(ps: PoleSum, prec: int) -> dict:
    """Slot 0 of ps as a form in w = 1/s at s = oo (coefficient of dw)."""
    out: dict = {}
    for key, c in ps.terms.items():
        p, k = key[0]
        # ds/(s-p)^k = -w^(k-2) (1 - p w)^(-k) dw
        base = LaurentSeries._raw([ONE, -p], 0, prec + 1)
        s = base.inverse() ** k
        s = s.shift(k - 2).scale(-c)
        rest = key[1:]
        cur = out.get(rest)
        out[rest] = s if cur is None else cur + s
    return out


def _retry(fn, start: int):
    N = start
    for _ in range(max_retries() + 1):
        try:
            return fn(N)
        except TruncationExhausted:
            N *= 2
    raise TruncationExhausted("residue needs more terms than the retry budget allows")


def _pair_lambda(curve: AnalyzedCurve, d: DeformationSpec, ps: PoleSum) -> dict:
    """int over the contour of Lambda times slot 0 of ps, keyed by the other slots."""
    if ps.is_zero():
        return {}
    if d.kind == "monodromy_pair":
        out: dict = {}
        for key, c in ps.terms.items():
            p, k = key[0]
            if k < 2:
                raise InvalidInput("integrand has a residue")
            val = ZERO
            for end, sign in ((d.a, 1), (d.b, -1)):
                if end == INF:
                    continue
                if end == p:
                    raise InvalidInput("monodromy endpoint is a pole of the integrand")
                val += sign * (-c / (k - 1)) / (end - p) ** (k - 1)
            rest = key[1:]
            out[rest] = out.get(rest, ZERO) + val
        return {k: v for k, v in out.items() if v != 0}

    def run(N):
        za, *_ = local_coordinate(curve, d.a, N)
        weight = za.inverse() ** d.k
        if d.a == INF:
            parts = _slot_series_at_infinity(ps, N)
        else:
            parts = PointContext(d.a, N).eval_slot0(ps)
        out: dict = {}
        for rest, s in parts.items():
            c = weight.mul(s, cap=0).coeff(-1)
            if c != 0:
                out[rest] = c
        return out

    return _retry(run, d.k + ps.max_order() + 6)


def variation_rhs_standard(
    curve: AnalyzedCurve, d: DeformationSpec, h: int, m: int, cache: CorrelatorCache | None = None
) -> PoleSum:
    """The pairing of Lambda with omega_{h,m+1} for irregular times and monodromy pairs."""
    if d.kind == "vital_position":
        raise InvalidInput("use variation_rhs_vital for vital positions")
    if (h, m) == (0, 1) or m < 1:
        raise InvalidInput("(h, m) = (0, 1) is excluded")
    cache = cache or CorrelatorCache(curve)
    ps = compute_omega(curve, h, m + 1, cache)
    return PoleSum(m, _pair_lambda(curve, d, ps))


def omega_vital_form(curve: AnalyzedCurve, r: int) -> tuple[mpq, mpq, RationalFunction]:
    """(a_r, y_r, dx) with Omega_{a_r}(q) = -y_r dx(q) / (q - a_r) = d_{a_r}[y dx]."""
    v = curve.vital[r]
    return v.location, v.log_time, curve.dx


def _omega_series(curve: AnalyzedCurve, r: int, center: mpq, prec: int) -> LaurentSeries:
    a, y, dx = omega_vital_form(curve, r)
    inv = LaurentSeries._raw([center - a, ONE], 0, prec + 1).inverse()
    return dx.series_at(center, prec).mul(inv).scale(-y)


def _dphi_term(curve, cache, r: int, ps: PoleSum) -> dict:
    """sum_i Res_{p_i} d[Phi_{p_i}] slot0(ps), keyed by the other slots."""
    if not curve.ramification or ps.is_zero():
        return {}

    def run(N):
        out: dict = {}
        for ram in curve.ramification:
            p = ram.location
            dphi = _omega_series(curve, r, p, N).antiderivative()
            for rest, s in PointContext(p, N).eval_slot0(ps).items():
                c = dphi.mul(s, cap=0).coeff(-1)
                if c != 0:
                    out[rest] = out.get(rest, ZERO) + c
        return out

    return _retry(run, ps.max_order() + 6)


def variation_rhs_vital(curve: AnalyzedCurve, r: int, h: int, n: int, cache: CorrelatorCache | None = None) -> PoleSum:
    """Derivative of omega_{h,n} with respect to the position of a_r, per unit displacement."""
    if (h, n) == (0, 1) or n < 1:
        raise InvalidInput("(h, n) = (0, 1) is excluded")
    if not 0 <= r < len(curve.vital):
        raise InvalidInput(f"no vital singularity with index {r}")
    cache = cache or CorrelatorCache(curve)
    if (h, n) == (0, 2):
        # the Bergman kernel does not move; d[Phi] has a double zero at each p_i
        return PoleSum.zero(2)
    terms = dict(_dphi_term(curve, cache, r, compute_omega(curve, h, n + 1, cache)))
    a = curve.vital[r].location
    xa = curve.vital[r].x_prime_at_a
    free = tuple(range(n))

    def run(N):
        ctx = PointContext(a, N)
        weight = curve.dx.series_at(a, N).inverse().scale(xa)
        out: dict = {}
        for h1 in range(1, h + 1):
            w1 = ctx.eval_slot0(compute_omega(curve, h1, 1, cache))
            f2 = _omega_factor(curve, cache, ctx, h - h1, n)
            for key, c in _pair_residues(weight, [(w1, ()), (f2, free)], n, a, N).items():
                out[key] = out.get(key, ZERO) + c
        return out

    for key, c in _retry(run, 4 * h + 6).items():
        terms[key] = terms.get(key, ZERO) + c
    return PoleSum(n, terms)


def _series_of(ps: PoleSum, a: mpq, N: int) -> LaurentSeries:
    return PointContext(a, N).eval_slot0(ps).get((), LaurentSeries.zero(N))


def variation_free_energy(curve: AnalyzedCurve, d: DeformationSpec, h: int, cache: CorrelatorCache | None = None):
    """Residue formula for the derivative of F_h along d (LogCombination-free: always rational)."""
    if h < 1:
        raise InvalidInput("h >= 1 expected")
    cache = cache or CorrelatorCache(curve)
    if d.kind != "vital_position":
        if h == 1 and curve.ramification:
            raise TauUnsupported("variation of F_1 along standard times needs tau data when ramification points exist")
        ps = compute_omega(curve, h, 1, cache)
        return _pair_lambda(curve, d, ps).get((), ZERO)
    r = d.r
    if not 0 <= r < len(curve.vital):
        raise InvalidInput(f"no vital singularity with index {r}")
    a = curve.vital[r].location
    xa = curve.vital[r].x_prime_at_a
    omega = compute_omega(curve, h, 1, cache)
    prim = omega.antiderivative_of(curve.basepoint)
    total = _dphi_term(curve, cache, r, omega).get((), ZERO)

    def run(N):
        acc = ZERO
        W = prim.series_at(a, N)
        if h >= 2:
            weight = curve.dx.series_at(a, N).inverse().scale(xa)
            quad = LaurentSeries.zero(N)
            for h1 in range(1, h):
                quad = quad + _series_of(compute_omega(curve, h1, 1, cache), a, N).mul(
                    _series_of(compute_omega(curve, h - h1, 1, cache), a, N)
                )
            acc += weight.mul(quad).coeff(-1) / 2
            acc -= curve.dy.series_at(a, N).scale(xa).mul(W).coeff(-1)
            for v in curve.vital:
                Wj = prim.series_at(v.location, N)
                acc -= _omega_series(curve, r, v.location, N).mul(Wj).coeff(-1)
        else:
            # the log of d[Phi] at a_r is regrouped with dx(a_r) y(z); both sides
            # are integrated by parts against the rational antiderivative
            for v in curve.vital:
                Wj = prim.series_at(v.location, N)
                g = _omega_series(curve, r, v.location, N)
                if v.location == a:
                    g = g + curve.dy.series_at(a, N).scale(xa)
                acc -= g.mul(Wj).coeff(-1)
        return acc

    total += _retry(run, 4 * h + 8)
    if h == 1:
        total += _log_constant_drift(curve, r)
    return total


def _log_constant_drift(curve: AnalyzedCurve, r: int) -> mpq:
    """F_1 response to the constant that moves with a log(1 - z/b) point.

    log(1 - z/b) = log(z - b) - log(-b), so moving b also shifts y by a
    constant; F_1 sees constants only through the regularized vital limit.
    """
    from .identities import F1_VITAL_SIGN

    a = curve.vital[r].location
    term = next((t for t in curve.spec.y_logs if t.point == a), None)
    if term is None or term.form == "z-b":
        return ZERO
    shift = -term.weight / a
    return F1_VITAL_SIGN * shift * sum((1 / v.log_time for v in curve.vital), ZERO) / 24


# ---------------------------------------------------------------------------
# Finite differences


@dataclass(frozen=True)
class Target:
    """What to differentiate: omega_{h,n} at sample points, or F_h (n = 0)."""

    h: int
    n: int = 0
    points: tuple = ()

    def describe(self) -> str:
        if self.n == 0:
            return f"F_{self.h}"
        return f"omega_{{{self.h},{self.n}}}"


def evaluate_target(curve: AnalyzedCurve, target: Target) -> list:
    if target.n == 0:
        if target.h == 1:
            return [free_energy_f1(curve, allow_missing_tau=True)]
        return [free_energy(curve, target.h)]
    ps = compute_omega(curve, target.h, target.n, CorrelatorCache(curve))
    return [ps.evaluate_at(pt) for pt in target.points]


@dataclass
class FDResult:
    eps: tuple
    differences: list  # per eps, list of components
    value: list  # extrapolated components (mpf / mpc)
    error: list  # error estimates per component
    table: list = field(default_factory=list, repr=False)


def _to_mp(v):
    if isinstance(v, LogCombination):
        return v.to_complex(FD_DPS)
    return mpmath.mpf(v.numerator) / mpmath.mpf(v.denominator)


def _neville(us: Sequence, values: Sequence) -> tuple[object, object]:
    """Extrapolate values(u) to u = 0; returns (value, last increment)."""
    n = len(values)
    P = list(values)
    prev_best = P[-1]
    best = P[-1]
    for level in range(1, n):
        P = [(P[i + 1] * us[i] - P[i] * us[i + level]) / (us[i] - us[i + level]) for i in range(n - level)]
        prev_best, best = best, P[-1]
    return best, abs(best - prev_best)


def fd_derivative(
    curve: AnalyzedCurve, d: DeformationSpec, target: Target, eps_schedule: Sequence[object] | None = None
) -> FDResult:
    """Central differences per eps, extrapolated in eps^2 (orders eps^2 and eps^4 removed)."""
    eps = tuple(Q(e) for e in (eps_schedule or DEFAULT_EPS))
    if len(eps) < 2 or any(e <= 0 for e in eps):
        raise InvalidInput("eps schedule needs at least two positive entries")
    with mpmath.workdps(FD_DPS):
        diffs = []
        for e in eps:
            plus = evaluate_target(analyze_deformed(curve, d, e), target)
            minus = evaluate_target(analyze_deformed(curve, d, -e), target)
            comp = []
            for p, m in zip(plus, minus):
                if isinstance(p, LogCombination) or isinstance(m, LogCombination):
                    p = p if isinstance(p, LogCombination) else LogCombination(p)
                    m = m if isinstance(m, LogCombination) else LogCombination(m)
                    delta = p - m
                    comp.append(_to_mp(delta) / (2 * _to_mp(e)))
                else:
                    comp.append(_to_mp((p - m) / (2 * e)))
            diffs.append(comp)
        us = [_to_mp(e) ** 2 for e in eps]
        values, errors = [], []
        for j in range(len(diffs[0])):
            col = [row[j] for row in diffs]
            incs = [abs(col[i + 1] - col[i]) for i in range(len(col) - 1)]
            # increments at rounding level mean the differences are already exact
            floor = mpmath.mpf(10) ** (15 - FD_DPS) * max(mpmath.mpf(1), abs(col[-1]))
            for i in range(len(incs) - 1):
                if incs[i + 1] > floor and incs[i + 1] * 4 > incs[i]:
                    raise InconclusiveFD(
                        f"finite differences for {target.describe()} do not contract: "
                        f"{mpmath.nstr(incs[i], 5)} then {mpmath.nstr(incs[i + 1], 5)}"
                    )
            v, err = _neville(us, col)
            values.append(v)
            errors.append(err)
    return FDResult(eps, diffs, values, errors)


def rhs_for_target(curve: AnalyzedCurve, d: DeformationSpec, target: Target, cache: CorrelatorCache | None = None) -> list:
    cache = cache or CorrelatorCache(curve)
    if target.n == 0:
        return [variation_free_energy(curve, d, target.h, cache)]
    if d.kind == "vital_position":
        ps = variation_rhs_vital(curve, d.r, target.h, target.n, cache)
    else:
        ps = variation_rhs_standard(curve, d, target.h, target.n, cache)
    return [ps.evaluate_at(pt) for pt in target.points]


def _close(fd_vals, rhs_vals, tol) -> tuple[bool, object]:
    with mpmath.workdps(FD_DPS):
        worst = mpmath.mpf(0)
        for f, r in zip(fd_vals, rhs_vals):
            rv = _to_mp(r)
            dev = abs(f - rv) / max(mpmath.mpf(1), abs(rv))
            worst = max(worst, dev)
        return worst <= tol, worst


def check_variational(
    curve: AnalyzedCurve,
    d: DeformationSpec,
    target: Target,
    tolerance: object = None,
    eps_schedule: Sequence[object] | None = None,
    dilaton: bool = True,
) -> list[CheckReport]:
    """Residue right-hand side against finite differences; optionally the dilaton cross-check."""
    tol = mpmath.mpf(str(tolerance)) if tolerance is not None else DEFAULT_TOLERANCE
    name = "variation_vital" if d.kind == "vital_position" else "variation_standard"
    params = (d.describe(), target.describe())
    rhs = rhs_for_target(curve, d, target)
    try:
        fd = fd_derivative(curve, d, target, eps_schedule)
    except InconclusiveFD as exc:
        return [CheckReport(name, params, False, str(exc))]
    ok, worst = _close(fd.value, rhs, tol)
    reports = [CheckReport(name, params, ok, None if ok else f"relative deviation {mpmath.nstr(worst, 5)}")]
    if dilaton and target.n >= 1 and (target.h, target.n) not in ((0, 1), (0, 2)):
        reports.append(check_dilaton_compatibility(curve, d, target, tol, eps_schedule))
    return reports


def check_dilaton_compatibility(
    curve: AnalyzedCurve, d: DeformationSpec, target: Target, tolerance: object = None, eps_schedule=None
) -> CheckReport:
    """Differentiate both sides of the dilaton equation along d and compare."""
    tol = mpmath.mpf(str(tolerance)) if tolerance is not None else DEFAULT_TOLERANCE
    h, k = target.h, target.n
    lhs_t = Target(h, k, target.points)
    lhs = fd_derivative(curve, d, lhs_t, eps_schedule)

    eps = tuple(Q(e) for e in (eps_schedule or DEFAULT_EPS))
    with mpmath.workdps(FD_DPS):
        diffs = []
        for e in eps:
            vals = []
            for sgn in (1, -1):
                c = analyze_deformed(curve, d, sgn * e)
                ps = dilaton_rhs(c, h, k, CorrelatorCache(c))
                vals.append([ps.evaluate_at(pt) for pt in target.points])
            diffs.append([_to_mp((p - m) / (2 * e)) for p, m in zip(*vals)])
        us = [_to_mp(e) ** 2 for e in eps]
        rhs_vals = [_neville(us, [row[j] for row in diffs])[0] for j in range(len(diffs[0]))]
        scale = 2 - 2 * h - k
        worst = mpmath.mpf(0)
        for lv, rv in zip(lhs.value, rhs_vals):
            worst = max(worst, abs(scale * lv - rv) / max(mpmath.mpf(1), abs(rv)))
    ok = worst <= tol
    return CheckReport(
        "dilaton_variation", (d.describe(), target.describe()), ok, None if ok else f"relative deviation {mpmath.nstr(worst, 5)}"
    )
