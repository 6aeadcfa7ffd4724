"""Dilaton equations, free energies and closed-form example oracles."""

from __future__ import annotations

import itertools
from typing import Sequence

from gmpy2 import mpq

from .correlator import (
    CorrelatorCache,
    PointContext,
    PoleSum,
    compute_omega,
    max_retries,
)
from .curve import AnalyzedCurve
from .errors import InvalidInput, TauUnsupported, TruncationExhausted
from .scalar import ONE, ZERO, LogCombination, Q, bernoulli, polylog_nonpositive, qstr, s_pair_coeff
from .report import CheckReport
from .series import LaurentSeries


def _report(name: str, params: tuple, diff) -> CheckReport:
    zero = diff.is_zero() if hasattr(diff, "is_zero") else diff == 0
    return CheckReport(name, params, bool(zero), None if zero else diff)


def _retrying(fn, start: int):
    N = start
    for _ in range(max_retries() + 1):
        try:
            return fn(N)
        except TruncationExhausted:
            N *= 2
    raise TruncationExhausted("local expansion needs more terms than the retry budget allows")


# ---------------------------------------------------------------------------
# Local products at a point


def _omega_factor(curve, cache, ctx: PointContext, h: int, size: int):
    """Slot 0 of omega_{h,size+1} at the context point; None marks a Bergman factor."""
    if h == 0 and size == 1:
        return None
    ps = compute_omega(curve, h, size + 1, cache)
    return ctx.eval_slot0(ps)


def _gen_bergman(point: mpq, prec: int, mmax: int) -> dict:
    return {((point, m + 2),): LaurentSeries._raw([mpq(m + 1)], m, m + prec) for m in range(mmax + 1)}


def _pair_residues(weight: LaurentSeries, factors: list, nfree: int, point: mpq, prec: int) -> dict:
    """Res of weight * prod(factors), keyed by the free slots.

    ``factors`` holds (dict rest -> series, positions) or (None, positions) for
    a Bergman kernel against a single free slot.
    """
    known = [f for f in factors if f[0] is not None]
    gens = [f for f in factors if f[0] is None]
    acc: dict = {(None,) * nfree: weight}
    for d, pos in known:
        acc = _merge(acc, d, pos, cap=None)
    for _, pos in gens:
        v = min((s.val for s in acc.values()), default=0)
        mmax = max(0, -1 - v)
        acc = _merge(acc, _gen_bergman(point, prec, mmax), pos, cap=None)
    out: dict = {}
    for key, s in acc.items():
        c = s.coeff(-1)
        if c != 0:
            out[key] = out.get(key, ZERO) + c
    return out


def _merge(acc: dict, d: dict, pos: tuple, cap) -> dict:
    out: dict = {}
    for k1, s1 in acc.items():
        for k2, s2 in d.items():
            key = list(k1)
            for i, v in zip(pos, k2):
                key[i] = v
            key = tuple(key)
            prod = s1.mul(s2, cap=cap)
            cur = out.get(key)
            out[key] = prod if cur is None else cur + prod
    return out


def _weight_over_dx(curve: AnalyzedCurve, a: mpq, prec: int) -> LaurentSeries:
    """(x - x(a)) / x'(z) around a."""
    return curve.x_difference_series(a, prec + 1).mul(curve.dx.series_at(a, prec).inverse())


def _phi_series(cache: CorrelatorCache, ram, prec: int) -> LaurentSeries:
    ctx = cache.context(ram, prec)
    return ctx.loc.Y.mul(ctx.loc.x1).antiderivative()


# ---------------------------------------------------------------------------
# Dilaton equations


def _check_hk(h: int, k: int) -> None:
    if k < 1 or h < 0 or (h, k) == (0, 1):
        raise InvalidInput("dilaton equations need k >= 1 and (h, k) != (0, 1)")


def _lhs_dilaton(curve, cache, h, k) -> PoleSum:
    if (h, k) == (0, 2):
        return PoleSum.zero(2)
    return compute_omega(curve, h, k, cache).scale(2 - 2 * h - k)


def _phi_term(curve, cache, h: int, k: int) -> dict:
    """sum_i Res_{p_i} Phi omega_{h,k+1}(z, z_1..z_k)."""
    terms: dict = {}
    if not curve.ramification:
        return terms
    ps = compute_omega(curve, h, k + 1, cache)

    def run(N):
        out: dict = {}
        for ram in curve.ramification:
            phi = _phi_series(cache, ram, N)
            ctx = PointContext(ram.location, N)
            for rest, s in ctx.eval_slot0(ps).items():
                c = phi.mul(s, cap=0).coeff(-1)
                if c != 0:
                    out[rest] = out.get(rest, ZERO) + c
        return out

    return _retrying(run, ps.max_order() + 6)


def dilaton_rhs(curve: AnalyzedCurve, h: int, k: int, cache: CorrelatorCache, form: str = "standard") -> PoleSum:
    _check_hk(h, k)
    terms = dict(_phi_term(curve, cache, h, k))
    vital = _vital_standard(curve, cache, h, k) if form == "standard" else _vital_alt(curve, cache, h, k)
    for key, c in vital.items():
        terms[key] = terms.get(key, ZERO) - c
    return PoleSum(k, terms)


def _vital_standard(curve, cache, h: int, k: int) -> dict:
    out: dict = {}
    free = tuple(range(k))

    def run(N):
        res: dict = {}
        for v in curve.vital:
            a = v.location
            ctx = PointContext(a, N)
            weight = _weight_over_dx(curve, a, N)
            for h1 in range(1, h + 1):
                w1 = ctx.eval_slot0(compute_omega(curve, h1, 1, cache))
                f2 = _omega_factor(curve, cache, ctx, h - h1, k)
                factors = [(w1, ()), (f2, free)]
                for key, c in _pair_residues(weight, factors, k, a, N).items():
                    res[key] = res.get(key, ZERO) + c
        return res

    out = _retrying(run, 4 * h + 6)
    return out


def _vital_alt(curve, cache, h: int, k: int) -> dict:
    free = tuple(range(k))

    def run(N):
        res: dict = {}
        for v in curve.vital:
            a = v.location
            ctx = PointContext(a, N)
            weight = _weight_over_dx(curve, a, N).scale(mpq(1, 2))
            if h >= 1:
                ps = compute_omega(curve, h - 1, k + 2, cache)
                diag = _diagonal(ctx, ps)
                for key, c in _pair_residues(weight, [(diag, free)], k, a, N).items():
                    res[key] = res.get(key, ZERO) + c
            for h1 in range(0, h + 1):
                for r in range(0, k + 1):
                    for I1 in itertools.combinations(free, r):
                        I2 = tuple(i for i in free if i not in I1)
                        if (h1 == 0 and not I1) or (h - h1 == 0 and not I2):
                            continue
                        f1 = _omega_factor(curve, cache, ctx, h1, len(I1))
                        f2 = _omega_factor(curve, cache, ctx, h - h1, len(I2))
                        for key, c in _pair_residues(weight, [(f1, I1), (f2, I2)], k, a, N).items():
                            res[key] = res.get(key, ZERO) + c
        return res

    return _retrying(run, 4 * h + 6)


def _diagonal(ctx: PointContext, ps: PoleSum) -> dict:
    """omega(z, z, rest) as series around the context point."""
    out: dict = {}
    for key, c in ps.terms.items():
        s = ctx.et(*key[0]).mul(ctx.et(*key[1])).scale(c)
        rest = key[2:]
        cur = out.get(rest)
        out[rest] = s if cur is None else cur + s
    return out


def check_dilaton(curve: AnalyzedCurve, h: int, k: int, cache: CorrelatorCache | None = None) -> list[CheckReport]:
    """Both forms of the dilaton equation; one report per form."""
    _check_hk(h, k)
    cache = cache or CorrelatorCache(curve)
    lhs = _lhs_dilaton(curve, cache, h, k)
    std = dilaton_rhs(curve, h, k, cache, "standard")
    alt = dilaton_rhs(curve, h, k, cache, "alt")
    return [
        _report("dilaton", (h, k), lhs - std),
        _report("dilaton_alt", (h, k), lhs - alt),
    ]


# ---------------------------------------------------------------------------
# Lemma on vital residues


def check_lemma31(
    curve: AnalyzedCurve, h: int, s: int, F: LaurentSeries | None = None, cache: CorrelatorCache | None = None
) -> list[CheckReport]:
    """Residue identities for omega_{h,1} at a_s against a holomorphic F(a_s + t).

    Without F the Bergman form of the identity is checked as a pole sum in z_1.
    """
    if h < 1:
        raise InvalidInput("needs h >= 1")
    cache = cache or CorrelatorCache(curve)
    a = curve.vital[s].location
    ps = compute_omega(curve, h, 1, cache)

    if F is None:

        def run_b(N):
            ctx = PointContext(a, N)
            w = ctx.eval_slot0(ps).get((), LaurentSeries.zero(N))
            gen_int = {((a, m + 1),): LaurentSeries._raw([ONE], m, m + N) for m in range(1, 2 * h + 2)}
            lhs = _pair_residues(w.scale(2 * h - 1), [(gen_int, (0,))], 1, a, N)
            rhs = _pair_residues(_weight_over_dx(curve, a, N).mul(w), [(None, (0,))], 1, a, N)
            return PoleSum(1, lhs) - PoleSum(1, rhs)

        return [_report("lemma31_bergman", (h, s), _retrying(run_b, 4 * h + 6))]

    if F.val < 0:
        raise InvalidInput("F must be holomorphic at a_s")

    def run(N):
        ctx = PointContext(a, N)
        w = ctx.eval_slot0(ps).get((), LaurentSeries.zero(N))
        X = curve.x_difference_series(a, N + 1)
        x1 = curve.dx.series_at(a, N)
        Fn = F.truncate(N)
        g = X.mul(w).mul(x1.inverse())
        d1 = Fn.mul(g.derivative()).coeff(-1) - (1 - 2 * h) * Fn.mul(w).coeff(-1)
        # the differential acts on (x - x(a_s)) F
        d2 = w.mul(x1.inverse()).mul(X.mul(Fn).derivative()).coeff(-1) - 2 * h * Fn.mul(w).coeff(-1)
        return d1, d2

    d1, d2 = _retrying(run, 4 * h + 6 + max(0, F.val))
    return [_report("lemma31", (h, s), d1), _report("lemma31_dF", (h, s), d2)]


def check_residue_tricks(curve: AnalyzedCurve, a: object, F: LaurentSeries, k: int) -> list[CheckReport]:
    """Two residue identities for a regular one-form F(q) dq at a and derivatives in x."""
    a = Q(a)
    if k < 1:
        raise InvalidInput("k must be at least 1")
    if F.val < 0:
        raise InvalidInput("F must be regular at a")

    def run(N):
        x1 = curve.dx.series_at(a, N + 2 * k)
        inv = x1.inverse()
        t = LaurentSeries._raw([ONE], 1, N + 2 * k + 1)
        inv_t = t.inverse()

        def dpow(f, m):
            for _ in range(m):
                f = f.derivative().mul(inv)
            return f

        Fn = F.truncate(N)
        x1a = x1.coeff(0)
        e1 = x1a * Fn.mul(dpow(inv.mul(inv_t), k - 1)).coeff(-1)
        e2 = -Fn.antiderivative().mul(x1).mul(dpow(inv_t, k)).coeff(-1)
        e3 = Fn.mul(dpow(inv_t, k - 1)).coeff(-1)
        X = curve.x_difference_series(a, N + 2 * k + 1)
        e4 = X.mul(Fn).mul(dpow(inv_t, k)).coeff(-1)
        e5 = -k * e3
        return e1, e2, e3, e4, e5

    e1, e2, e3, e4, e5 = _retrying(run, 2 * k + 6)
    return [
        _report("trick_log", (qstr(a), k), e1 - e3),
        _report("trick_parts", (qstr(a), k), e2 - e3),
        _report("trick_x", (qstr(a), k), e4 - e5),
    ]


# ---------------------------------------------------------------------------
# Free energies


def free_energy(curve: AnalyzedCurve, h: int, cache: CorrelatorCache | None = None, basepoint: object = None) -> mpq:
    """F_h for h >= 2."""
    if h < 2:
        raise InvalidInput("free_energy needs h >= 2; use free_energy_f1 for h = 1")
    cache = cache or CorrelatorCache(curve)
    omega = compute_omega(curve, h, 1, cache)
    total = _phi_term(curve, cache, h, 0) if curve.ramification else {}
    acc = total.get((), ZERO)
    o = curve.basepoint if basepoint is None else Q(basepoint)
    prim = omega.antiderivative_of(o)

    def run(N):
        res = ZERO
        for v in curve.vital:
            a = v.location
            ctx = PointContext(a, N)
            X = curve.x_difference_series(a, N + 1)
            inv_dx = curve.dx.series_at(a, N).inverse()
            quad = LaurentSeries.zero(N)
            for h1 in range(1, h):
                w1 = ctx.eval_slot0(compute_omega(curve, h1, 1, cache)).get((), LaurentSeries.zero(N))
                w2 = ctx.eval_slot0(compute_omega(curve, h - h1, 1, cache)).get((), LaurentSeries.zero(N))
                quad = quad + w1.mul(w2)
            quad = quad.mul(inv_dx).scale(mpq(1, 2))
            lin = curve.dy.series_at(a, N).mul(prim.series_at(a, N))
            res += X.mul(quad - lin).coeff(-1)
        return res

    acc -= _retrying(run, 4 * h + 8)
    return acc / (2 - 2 * h)


def _phi_term_scalar(curve, cache, h):
    return _phi_term(curve, cache, h, 0).get((), ZERO)


def free_energy_f1(curve: AnalyzedCurve, allow_missing_tau: bool = False) -> LogCombination:
    """F_1 with ln tau_B = 0 when there are no ramification points.

    With ramification points the tau term is unknown; TauUnsupported is raised
    unless ``allow_missing_tau`` is set, in which case the rest is returned.
    """
    if curve.ramification and not allow_missing_tau:
        raise TauUnsupported("F_1 needs the Bergman tau-function when ramification points exist (tau term omitted)")
    total = LogCombination(0)
    for r in curve.ramification:
        total = total - r.log_y_prime() * mpq(1, 24)
    for s, v in enumerate(curve.vital):
        limit = curve.y_regular_value(s) / v.log_time - LogCombination.log(v.x_prime_at_a)
        total = total + F1_VITAL_SIGN * mpq(1, 24) * limit
    return total


# Sign of the regularized vital limit in F_1, tied to the vital-term sign of
# the correlators so that the variational identities for F_1 hold.
F1_VITAL_SIGN = 1


# ---------------------------------------------------------------------------
# Closed-form oracles


def _check_points(a: Sequence[object], y: Sequence[object]) -> tuple[list[mpq], list[mpq]]:
    a = [Q(v) for v in a]
    y = [Q(v) for v in y]
    if len(a) != len(y):
        raise InvalidInput("a and y must have equal length")
    if len(set(a)) != len(a):
        raise InvalidInput("coincident a_s")
    if any(v == 0 for v in y):
        raise InvalidInput("log-times must be nonzero")
    return a, y


def _pair(h: int, ys: mpq, yr: mpq) -> mpq:
    return ys * yr * s_pair_coeff(h, ys, yr)


def sw_half_free_energy(a, y, h: int) -> mpq:
    a, y = _check_points(a, y)
    if h < 2:
        raise InvalidInput("h >= 2 expected")
    from math import factorial

    total = ZERO
    for s in range(len(a)):
        for r in range(len(a)):
            if r != s:
                total += factorial(2 * h - 2) / (a[s] - a[r]) ** (2 * h - 2) * _pair(h, y[s], y[r])
    return total / (2 * (2 * h - 2))


def strip_free_energy(a, y, h: int) -> mpq:
    a, y = _check_points(a, y)
    if h < 2:
        raise InvalidInput("h >= 2 expected")
    if any(v == 0 for v in a):
        raise InvalidInput("a_s must be nonzero")
    total = -bernoulli(2 * h - 2) / (2 * (2 * h - 2)) * sum((_pair(h, v, v) for v in y), ZERO)
    for s in range(len(a)):
        for r in range(len(a)):
            if r != s:
                total += polylog_nonpositive(3 - 2 * h, a[s] / a[r]) * _pair(h, y[r], y[s]) / 2
    return total


def sw_half_f1(a, y, lam) -> LogCombination:
    a, y = _check_points(a, y)
    total = LogCombination(-Q(lam) / 24 * sum((1 / v for v in y), ZERO))
    for s in range(len(a)):
        for r in range(len(a)):
            if r != s:
                total = total - LogCombination.log(a[r] - a[s], y[r] / y[s] / 24)
    return total


def strip_f1(a, y) -> LogCombination:
    a, y = _check_points(a, y)
    total = LogCombination(0)
    for s in range(len(a)):
        for r in range(len(a)):
            if r != s:
                total = total - LogCombination.log(1 - a[s] / a[r], y[r] / y[s] / 24)
    return total


def sw_half_omega(a, y, h: int) -> PoleSum:
    a, y = _check_points(a, y)
    coeff = (mpq(2) ** (1 - 2 * h) - 1) * bernoulli(2 * h) / (2 * h)
    return PoleSum(1, {((av, 2 * h),): -(yv ** (1 - 2 * h)) * coeff for av, yv in zip(a, y)})


def strip_omega_value(a, y, h: int, z: object) -> mpq:
    """The polylog closed form of omega_{h,1}/dz at z for x = log z."""
    from .scalar import beta_coeff

    a, y = _check_points(a, y)
    z = Q(z)
    return sum((yv ** (1 - 2 * h) * beta_coeff(h) * polylog_nonpositive(1 - 2 * h, z / av) for av, yv in zip(a, y)), ZERO) / z


def paper_example_oracles(example_id: str, parameters: dict):
    """Closed forms for the two worked examples, evaluated directly."""
    h = int(parameters["h"])
    a = parameters["a"]
    y = parameters.get("y") or [1] * len(a)
    if example_id in ("sw-half", "SW-half"):
        if h == 1:
            return sw_half_f1(a, y, parameters.get("lambda", 0))
        return sw_half_free_energy(a, y, h)
    if example_id == "strip":
        if h == 1:
            return strip_f1(a, y)
        return strip_free_energy(a, y, h)
    raise InvalidInput(f"unknown example {example_id!r}")


def strip_omega(a, y, h: int) -> PoleSum:
    """The polylog closed form of omega_{h,1} for x = log z as a pole sum."""
    import sympy as sp

    from .scalar import beta_coeff, polylog_numerator

    a, y = _check_points(a, y)
    z = sp.Symbol("z")
    expr = sp.Integer(0)
    for av, yv in zip(a, y):
        num, k = polylog_numerator(1 - 2 * h)
        u = z / sp.Rational(int(av.numerator), int(av.denominator))
        li = sum((sp.Rational(int(c.numerator), int(c.denominator)) * u**i for i, c in enumerate(num)), sp.Integer(0)) / (1 - u) ** k
        c = yv ** (1 - 2 * h) * beta_coeff(h)
        expr += sp.Rational(int(c.numerator), int(c.denominator)) * li
    terms = {}
    for part in sp.Add.make_args(sp.apart(sp.cancel(expr / z), z)):
        num, den = sp.fraction(sp.factor(part))
        poly = sp.Poly(den, z)
        (root, mult), = sp.roots(poly).items()
        lead = poly.LC()
        c = sp.Rational(num) / lead
        terms[((Q(str(root)), int(mult)),)] = Q(str(c))
    return PoleSum(1, terms)


def example_curve(example_id: str, a, y=None, lam: object = 0):
    """Spectral curves of the two worked examples."""
    from .curve import CurveSpec, RationalFunction

    y = y or [1] * len(a)
    a, y = _check_points(a, y)
    if example_id in ("sw-half", "SW-half"):
        return CurveSpec(
            RationalFunction.from_coeffs([0, 1]),
            RationalFunction.constant(lam),
            (),
            tuple((av, yv) for av, yv in zip(a, y)),
        )
    if example_id == "strip":
        if any(v == 0 for v in a):
            raise InvalidInput("a_s must be nonzero")
        return CurveSpec(
            RationalFunction.constant(0),
            RationalFunction.constant(0),
            ((0, 1),),
            tuple((av, yv, "1-z/b") for av, yv in zip(a, y)),
        )
    raise InvalidInput(f"unknown example {example_id!r}")
