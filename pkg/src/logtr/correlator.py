"""The LogTR engine: correlators as exact pole sums.

Every correlator with 2h + n - 2 > 0 on a genus-zero curve is a finite sum of
products of elementary pole factors dz_i / (z_i - p)^k with rational
coefficients.  ``PoleSum`` stores that tensor; the recursion fills it by
taking residues of local series at ramification points, and adds the extra
term at the vital singularities for n = 1.
"""

from __future__ import annotations

import itertools
import os
import threading
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .curve import AnalyzedCurve, RamificationData
from .report import CheckReport
from .errors import EvaluationAtPole, InvalidInput, TruncationExhausted, Unsupported
from .scalar import ONE, ZERO, Q, beta_coeff, qstr
from .series import LaurentSeries

# Overall sign of the vital-singularity term relative to the literal
# integrated and residue expressions.  With -1 the h = 1 term is
# +1/(24 y_a x'(a)) dz/(z-a)^2 and both expressions agree with each other.
VITAL_SIGN = -1

DEFAULT_MAX_RETRIES = 4
H_MAX = 6
N_MAX = 8

Key = tuple  # tuple of (pole, order) per slot


def max_retries() -> int:
    raw = os.environ.get("LOGTR_MAX_RETRIES")
    if raw is None:
        return DEFAULT_MAX_RETRIES
    try:
        v = int(raw)
    except ValueError as exc:
        raise InvalidInput(f"LOGTR_MAX_RETRIES must be an integer, got {raw!r}") from exc
    if v < 0:
        raise InvalidInput("LOGTR_MAX_RETRIES must be nonnegative")
    return v


def default_truncation(h: int, n: int) -> int:
    return 6 * h + 2 * n + 6


# ---------------------------------------------------------------------------
# Pole sums


def _fmt_point(var: str, p: mpq) -> str:
    if p < 0:
        return f"{var}+{qstr(-p)}"
    return f"{var}-{qstr(p)}"


class PoleSum:
    """sum_key c * prod_i dz_i / (z_i - p_i)^{k_i} with the full symmetric tensor stored."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity: int, terms: Mapping[Key, object] | None = None):
        self.arity = arity
        clean: dict[Key, mpq] = {}
        for key, c in (terms or {}).items():
            c = c if type(c) is type(ZERO) else Q(c)
            if c == 0:
                continue
            if len(key) != arity:
                raise InvalidInput(f"key {key!r} does not match arity {arity}")
            clean[tuple((Q(p), int(k)) for p, k in key)] = c
        self.terms = clean

    @classmethod
    def zero(cls, arity: int) -> "PoleSum":
        return cls(arity)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PoleSum):
            return NotImplemented
        return self.arity == other.arity and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.arity, frozenset(self.terms.items())))

    def __add__(self, other: "PoleSum") -> "PoleSum":
        if self.arity != other.arity:
            raise InvalidInput("arity mismatch")
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, ZERO) + c
        return PoleSum(self.arity, out)

    def __neg__(self) -> "PoleSum":
        return PoleSum(self.arity, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other: "PoleSum") -> "PoleSum":
        return self + (-other)

    def scale(self, c: object) -> "PoleSum":
        c = Q(c)
        return PoleSum(self.arity, {k: c * v for k, v in self.terms.items()})

    __rmul__ = scale

    def __repr__(self) -> str:
        return f"PoleSum({self.arity}, {self.to_text()})"

    # -- structure ---------------------------------------------------------
    def pole_locations(self) -> set:
        return {p for key in self.terms for p, _ in key}

    def max_order(self) -> int:
        return max((k for key in self.terms for _, k in key), default=0)

    def permuted(self, perm: Sequence[int]) -> "PoleSum":
        """Relabel slots: new slot i carries old slot perm[i]."""
        return PoleSum(self.arity, {tuple(key[j] for j in perm): c for key, c in self.terms.items()})

    def is_symmetric(self) -> bool:
        for perm in itertools.permutations(range(self.arity)):
            if self.permuted(perm) != self:
                return False
        return True

    def is_residue_free(self) -> bool:
        return all(k >= 2 for key in self.terms for _, k in key)

    def sorted_terms(self) -> list[tuple[Key, mpq]]:
        return sorted(self.terms.items())

    def restrict(self, pole: mpq) -> "PoleSum":
        """Arity-one part supported at one pole."""
        if self.arity != 1:
            raise InvalidInput("restrict needs arity one")
        pole = Q(pole)
        return PoleSum(1, {k: c for k, c in self.terms.items() if k[0][0] == pole})

    # -- evaluation ----------------------------------------------------------
    def evaluate_at(self, points: Sequence[object]) -> mpq:
        if len(points) != self.arity:
            raise InvalidInput(f"expected {self.arity} points, got {len(points)}")
        pts = [Q(v) for v in points]
        total = ZERO
        for key, c in self.terms.items():
            term = c
            for (p, k), z in zip(key, pts):
                d = z - p
                if d == 0:
                    raise EvaluationAtPole(f"point {qstr(z)} is a pole")
                term /= d**k
            total += term
        return total

    def antiderivative_of(self, basepoint: object) -> "PoleFunction":
        """The rational antiderivative of an arity-one residue-free form vanishing at ``basepoint``."""
        if self.arity != 1:
            raise InvalidInput("antiderivative_of needs arity one")
        terms: dict[tuple[mpq, int], mpq] = {}
        for ((p, k),), c in self.terms.items():
            if k == 1:
                raise InvalidInput("form has a residue")
            terms[(p, k - 1)] = terms.get((p, k - 1), ZERO) - c / (k - 1)
        f = PoleFunction(terms, ZERO)
        return PoleFunction(terms, -f(basepoint))

    # -- serialization -------------------------------------------------------
    def _vars(self) -> list[str]:
        return ["z"] if self.arity == 1 else [f"z{i + 1}" for i in range(self.arity)]

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        names = self._vars()
        parts = []
        for key, c in self.sorted_terms():
            factors = " * ".join(
                f"d{v}/({_fmt_point(v, p)})^{k}" if k != 1 else f"d{v}/({_fmt_point(v, p)})" for v, (p, k) in zip(names, key)
            )
            parts.append((c, f"{qstr(abs(c))} * {factors}"))
        out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
        for c, body in parts[1:]:
            out += (" - " if c < 0 else " + ") + body
        return out

    def to_latex(self) -> str:
        if not self.terms:
            return "0"
        names = ["z"] if self.arity == 1 else [f"z_{{{i + 1}}}" for i in range(self.arity)]
        parts = []
        for key, c in self.sorted_terms():
            num = abs(c.numerator)
            den = c.denominator
            coeff = f"\\frac{{{num}}}{{{den}}}" if den != 1 else str(num)
            factors = "".join(
                f"\\frac{{d{v}}}{{({_fmt_point(v, p)})^{{{k}}}}}" for v, (p, k) in zip(names, key)
            )
            parts.append((c, f"{coeff}{factors}"))
        out = ("-" if parts[0][0] < 0 else "") + parts[0][1]
        for c, body in parts[1:]:
            out += (" - " if c < 0 else " + ") + body
        return out

    def to_json(self) -> dict:
        return {
            "arity": self.arity,
            "terms": [
                {"poles": [[qstr(p), k] for p, k in key], "coeff": qstr(c)} for key, c in self.sorted_terms()
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "PoleSum":
        try:
            arity = int(data["arity"])
            terms = {}
            for t in data["terms"]:
                key = tuple((Q(p), int(k)) for p, k in t["poles"])
                terms[key] = terms.get(key, ZERO) + Q(t["coeff"])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInput(f"malformed pole-sum document: {exc}") from exc
        return cls(arity, terms)


@dataclass(frozen=True)
class PoleFunction:
    """constant + sum c / (z - p)^k as a function of z."""

    terms: Mapping
    constant: mpq

    def __call__(self, z: object) -> mpq:
        z = Q(z)
        total = self.constant
        for (p, k), c in self.terms.items():
            d = z - p
            if d == 0:
                raise EvaluationAtPole(f"point {qstr(z)} is a pole")
            total += c / d**k
        return total

    def value_at_infinity(self) -> mpq:
        return self.constant

    def series_at(self, a: mpq, prec: int, tag: str = "t") -> LaurentSeries:
        out = LaurentSeries._raw([self.constant], 0, prec, tag)
        for (p, k), c in self.terms.items():
            out = out + _pole_factor_series(p, k, a, prec, tag).scale(c)
        return out


def _pole_factor_series(pole: mpq, k: int, center: mpq, prec: int, tag: str = "t") -> LaurentSeries:
    """1/(center + t - pole)^k as a series in t."""
    c = center - pole
    if c == 0:
        return LaurentSeries._raw([ONE], -k, prec, tag)
    base = LaurentSeries._raw([c, ONE], 0, prec + 1, tag)
    return base.inverse() ** k


# ---------------------------------------------------------------------------
# Local contexts


def _lincomb(pairs: Iterable[tuple[LaurentSeries, mpq]]) -> LaurentSeries | None:
    pairs = [(s, c) for s, c in pairs if c != 0]
    if not pairs:
        return None
    val = min(s.val for s, _ in pairs)
    prec = min(s.prec for s, _ in pairs)
    n = prec - val
    if n <= 0:
        return LaurentSeries.zero(prec, pairs[0][0].tag)
    acc = [ZERO] * n
    for s, c in pairs:
        off = s.val - val
        for i, v in enumerate(s.coeffs):
            j = off + i
            if j >= n:
                break
            acc[j] += c * v
    return LaurentSeries._raw(acc, val, prec, pairs[0][0].tag)


class PointContext:
    """Series of pole factors around a point p (no involution)."""

    def __init__(self, point: mpq, prec: int):
        self.point = point
        self.prec = prec
        self._t: dict = {}

    def et(self, q: mpq, k: int) -> LaurentSeries:
        key = (q, k)
        s = self._t.get(key)
        if s is None:
            s = _pole_factor_series(q, k, self.point, self.prec)
            self._t[key] = s
        return s

    def eval_slot0(self, ps: PoleSum) -> dict:
        """Partial evaluation of slot 0 at p + t: rest key -> series."""
        groups: dict = defaultdict(list)
        for key, c in ps.terms.items():
            groups[key[1:]].append((self.et(*key[0]), c))
        out = {}
        for rest, pairs in groups.items():
            s = _lincomb(pairs)
            if s is not None:
                out[rest] = s
        return out


class RamContext(PointContext):
    """Kernel and pole-factor series at a ramification point, valid below ``prec``."""

    def __init__(self, curve: AnalyzedCurve, ram: RamificationData, prec: int):
        super().__init__(ram.location, prec)
        self.ram = ram
        loc = ram.local(prec + 2)
        self.loc = loc
        self.sigma = loc.sigma
        self.dsigma = loc.dsigma
        t = LaurentSeries._raw([ONE], 1, prec + 2)
        self.t = t
        dY = loc.Y.compose(self.sigma) - loc.Y
        self.kernel_den = (dY.mul(loc.x1).scale(2)).inverse()
        self._kernel: dict[int, LaurentSeries] = {}
        self._spow: list[LaurentSeries] = [LaurentSeries._raw([ONE], 0, prec + 2)]
        self._s: dict = {}
        self._sinv: LaurentSeries | None = None
        self._partials: dict = {}

    def sigma_power(self, k: int) -> LaurentSeries:
        while len(self._spow) <= k:
            self._spow.append(self._spow[-1].mul(self.sigma))
        return self._spow[k]

    def kernel(self, k: int) -> LaurentSeries:
        """Coefficient of 1/(z1 - p)^{k+1} in the recursion kernel, as a series in t."""
        s = self._kernel.get(k)
        if s is None:
            num = self.sigma_power(k) - LaurentSeries._raw([ONE], k, self.sigma_power(k).prec)
            s = num.mul(self.kernel_den)
            self._kernel[k] = s
        return s

    def es(self, q: mpq, k: int) -> LaurentSeries:
        """sigma'(t) / (sigma(z) - q)^k."""
        key = (q, k)
        s = self._s.get(key)
        if s is None:
            c = self.point - q
            if c == 0:
                if self._sinv is None:
                    self._sinv = self.sigma.inverse()
                base = self._sinv
            else:
                base = (self.sigma + c).inverse()
            s = (base**k).mul(self.dsigma)
            self._s[key] = s
        return s

    def gen_t(self, m: int) -> LaurentSeries:
        return LaurentSeries._raw([mpq(m + 1)], m, m + self.prec)

    def gen_s(self, m: int) -> LaurentSeries:
        return self.sigma_power(m).mul(self.dsigma).scale(m + 1)

    def eval_slot0_sigma(self, ps: PoleSum) -> dict:
        groups: dict = defaultdict(list)
        for key, c in ps.terms.items():
            groups[key[1:]].append((self.es(*key[0]), c))
        out = {}
        for rest, pairs in groups.items():
            s = _lincomb(pairs)
            if s is not None:
                out[rest] = s
        return out

    def eval_pair(self, ps: PoleSum, cap: int) -> dict:
        """Slot 0 at z, slot 1 at sigma(z) (with Jacobian): rest key -> series."""
        groups: dict = defaultdict(lambda: defaultdict(list))
        for key, c in ps.terms.items():
            groups[key[2:]][key[1]].append((self.et(*key[0]), c))
        out = {}
        for rest, inner in groups.items():
            acc = None
            for qk, pairs in inner.items():
                a = _lincomb(pairs)
                if a is None:
                    continue
                term = a.mul(self.es(*qk), cap=cap)
                acc = term if acc is None else acc + term
            if acc is not None:
                out[rest] = acc
        return out

    def partial(self, kind: str, h: int, n: int, ps: PoleSum) -> dict:
        key = (kind, h, n)
        hit = self._partials.get(key)
        if hit is None:
            hit = self.eval_slot0(ps) if kind == "t" else self.eval_slot0_sigma(ps)
            self._partials[key] = hit
        return hit


# ---------------------------------------------------------------------------
# Cache


class CorrelatorCache:
    """Per-curve store of computed correlators; first writer wins."""

    def __init__(self, curve: AnalyzedCurve):
        self.curve = curve
        self._omega: dict[tuple[int, int], PoleSum] = {}
        self._contexts: dict = {}
        self._lock = threading.Lock()

    def get(self, h: int, n: int) -> PoleSum | None:
        return self._omega.get((h, n))

    def insert(self, h: int, n: int, value: PoleSum) -> PoleSum:
        with self._lock:
            return self._omega.setdefault((h, n), value)

    def context(self, ram: RamificationData, prec: int) -> RamContext:
        key = (ram.location, prec)
        ctx = self._contexts.get(key)
        if ctx is None:
            ctx = RamContext(self.curve, ram, prec)
            with self._lock:
                ctx = self._contexts.setdefault(key, ctx)
        return ctx

    def entries(self) -> dict:
        return dict(self._omega)

    def corrupt(self, h: int, n: int, delta: PoleSum) -> None:
        """Test hook: overwrite a stored correlator."""
        with self._lock:
            base = self._omega.get((h, n), PoleSum.zero(delta.arity))
            self._omega[(h, n)] = base + delta


# ---------------------------------------------------------------------------
# Vital term


def _check_h(h: int) -> None:
    if h < 1:
        raise InvalidInput("vital term needs h >= 1")


def vital_term(curve: AnalyzedCurve, h: int, s: int, route: str = "residue", prec: int | None = None) -> PoleSum:
    """Contribution of the vital singularity a_s to omega_{h,1}."""
    _check_h(h)
    data = curve.vital[s]
    N = prec or (2 * h + 4)
    for _ in range(max_retries() + 1):
        try:
            if route == "residue":
                return _vital_residue(curve, h, data, N)
            if route == "derivative":
                return _vital_derivative(curve, h, data, N)
            raise InvalidInput(f"unknown route {route!r}")
        except TruncationExhausted:
            N *= 2
    raise TruncationExhausted(f"vital term h={h} at {qstr(data.location)} needs more terms")


def _vital_prefactor(h: int, y: mpq) -> mpq:
    return y ** (1 - 2 * h) * beta_coeff(h)


def _vital_residue(curve: AnalyzedCurve, h: int, data, N: int) -> PoleSum:
    a = data.location
    x1 = curve.dx.series_at(a, N)
    s = LaurentSeries._raw([ONE], 1, N + 1)
    L = x1.mul(s).inverse()
    for _ in range(2 * h - 1):
        L = L.derivative().mul(x1.inverse())
    F = x1.mul(L)
    pref = VITAL_SIGN * (-_vital_prefactor(h, data.log_time))
    terms = {}
    for j in range(1, 2 * h):
        c = F.coeff(-1 - j)
        if c != 0:
            terms[((a, j + 1),)] = pref * c
    return PoleSum(1, terms)


def _vital_derivative(curve: AnalyzedCurve, h: int, data, N: int) -> PoleSum:
    a = data.location
    x1 = curve.dx.series_at(a, N)
    inv_x1 = x1.inverse()
    pref = VITAL_SIGN * _vital_prefactor(h, data.log_time)
    terms = {}
    for j in range(0, 2 * h - 1):
        f = LaurentSeries._raw([ONE], j, N + j).mul(inv_x1)
        for _ in range(2 * h - 2):
            f = f.derivative().mul(inv_x1)
        c = f.coeff(0)
        if c != 0:
            terms[((a, j + 2),)] = pref * (j + 1) * c
    return PoleSum(1, terms)


# ---------------------------------------------------------------------------
# Recursion


def _free_factor(curve: AnalyzedCurve, cache: CorrelatorCache, ctx: RamContext, h: int, size: int, side: str):
    """Partially evaluated factor omega_{h,size+1}(z or sigma z, free...)."""
    if h == 0 and size == 1:
        return ("gen", side)
    ps = compute_omega(curve, h, size + 1, cache)
    return ("ps", ctx.partial(side, h, size + 1, ps))


def _gen_factor(ctx: RamContext, side: str, pole: mpq, mmax: int) -> dict:
    out = {}
    for m in range(0, mmax + 1):
        s = ctx.gen_t(m) if side == "t" else ctx.gen_s(m)
        out[((pole, m + 2),)] = s
    return out


def _min_val(d: dict) -> int | None:
    return min((s.val for s in d.values()), default=None)


def _combine(out: dict, f1: dict, f2: dict, pos1: tuple, pos2: tuple, nfree: int, cap: int) -> None:
    for k1, s1 in f1.items():
        for k2, s2 in f2.items():
            key = [None] * nfree
            for i, v in zip(pos1, k1):
                key[i] = v
            for i, v in zip(pos2, k2):
                key[i] = v
            key = tuple(key)
            prod = s1.mul(s2, cap=cap)
            if prod.is_zero() and prod.prec >= cap:
                continue
            cur = out.get(key)
            out[key] = prod if cur is None else cur + prod


def bracket(
    curve: AnalyzedCurve,
    h: int,
    n: int,
    cache: CorrelatorCache,
    ctx: RamContext,
    cap: int = 1,
    with_01: bool = False,
) -> dict:
    """The quadratic combination at a ramification point, keyed by the free slots z_2..z_n.

    With ``with_01`` the omega_{0,1} terms are included (y(p) dropped), which is
    the quadratic loop equation combination.
    """
    nfree = n - 1
    out: dict = {}
    # omega_{h-1,n+1}(z, sigma z, J)
    if h >= 1:
        if h == 1 and n == 1:
            diff = ctx.sigma - ctx.t
            b = ctx.dsigma.mul(diff.mul(diff).inverse(), cap=cap)
            out[()] = b
        else:
            ps = compute_omega(curve, h - 1, n + 1, cache)
            for k, s in ctx.eval_pair(ps, cap).items():
                cur = out.get(k)
                out[k] = s if cur is None else cur + s
    free = tuple(range(nfree))
    for h1 in range(0, h + 1):
        h2 = h - h1
        for r in range(0, nfree + 1):
            for I1 in itertools.combinations(free, r):
                I2 = tuple(i for i in free if i not in I1)
                if h1 == 0 and not I1 and not with_01:
                    continue
                if h2 == 0 and not I2 and not with_01:
                    continue
                if (h1 == 0 and not I1) and (h2 == 0 and not I2):
                    continue
                f1 = _side_factor(curve, cache, ctx, h1, I1, "t")
                f2 = _side_factor(curve, cache, ctx, h2, I2, "s")
                if f1 is None or f2 is None:
                    continue
                m1 = _materialize(ctx, f1, f2, "t")
                m2 = _materialize(ctx, f2, f1, "s")
                if not m1 or not m2:
                    continue
                _combine(out, m1, m2, I1, I2, nfree, cap)
    return out


def _side_factor(curve, cache, ctx, h, I, side):
    if h == 0 and not I:
        Y = ctx.loc.Y if side == "t" else ctx.loc.Y.compose(ctx.sigma)
        return ("ps", {(): Y.mul(ctx.loc.x1)})
    if h == 0 and len(I) == 1:
        return ("gen", side)
    ps = compute_omega(curve, h, len(I) + 1, cache)
    if ps.is_zero():
        return None
    return ("ps", ctx.partial(side, h, len(I) + 1, ps))


def _materialize(ctx: RamContext, f, other, side: str) -> dict:
    kind, data = f
    if kind == "ps":
        return data
    okind, odata = other
    if okind == "gen":
        mmax = 2
    else:
        v = _min_val(odata)
        mmax = max(0, -(v if v is not None else 0)) + 1
    return _gen_factor(ctx, side, ctx.point, mmax)


def _recursion(curve: AnalyzedCurve, h: int, n: int, cache: CorrelatorCache, N: int) -> PoleSum:
    terms: dict = defaultdict(lambda: ZERO)
    for ram in curve.ramification:
        ctx = cache.context(ram, N)
        br = bracket(curve, h, n, cache, ctx, cap=1)
        p = ram.location
        for jkey, s in br.items():
            if s.val >= 1:
                continue
            for k in range(1, 2 - s.val):
                c = ctx.kernel(k).mul(s, cap=0).coeff(-1)
                if c != 0:
                    terms[((p, k + 1),) + jkey] += c
    if n == 1:
        for idx in range(len(curve.vital)):
            for key, c in vital_term(curve, h, idx).terms.items():
                terms[key] += c
    return PoleSum(n, terms)


def compute_omega(
    curve: AnalyzedCurve, h: int, n: int, cache: CorrelatorCache | None = None, prec: int | None = None
) -> PoleSum:
    """omega_{h,n} for 2h + n - 2 > 0."""
    if h < 0 or n < 1 or 2 * h + n - 2 <= 0:
        raise InvalidInput(f"omega_{{{h},{n}}} is not produced by the recursion")
    if h > H_MAX or n > N_MAX:
        raise Unsupported(f"(h, n) = ({h}, {n}) is beyond the supported range")
    if cache is None:
        cache = CorrelatorCache(curve)
    hit = cache.get(h, n)
    if hit is not None and prec is None:
        return hit
    N = prec or curve.spec.truncation_hint or default_truncation(h, n)
    for _ in range(max_retries() + 1):
        try:
            result = _recursion(curve, h, n, cache, N)
            break
        except TruncationExhausted:
            N *= 2
    else:
        raise TruncationExhausted(f"omega_{{{h},{n}}} not resolved within the retry budget")
    if prec is not None:
        return result
    return cache.insert(h, n, result)


# ---------------------------------------------------------------------------
# Property checks


def _series_low(s: LaurentSeries, upto: int) -> list:
    return [s.coeff(d) for d in range(min(s.val, upto), upto + 1) if s.coeff(d) != 0]


def check_lle(curve: AnalyzedCurve, h: int, m: int, cache: CorrelatorCache, prec: int | None = None) -> CheckReport:
    """omega_{h,m+1}(.., z) + sigma^* omega_{h,m+1}(.., z) has at least a simple zero at each p."""
    if h < 0 or m < 1:
        raise InvalidInput("LLE needs h >= 0 and m >= 1")
    N = prec or default_truncation(h, m + 1)
    bad = []
    for _ in range(max_retries() + 1):
        try:
            bad = []
            for ram in curve.ramification:
                ctx = cache.context(ram, N)
                if (h, m) == (0, 1):
                    for mm in range(0, 4):
                        s = ctx.gen_t(mm) + ctx.gen_s(mm)
                        if s.val < 1:
                            bad.append((ram.location, ((ram.location, mm + 2),), _series_low(s, 0)))
                    continue
                ps = compute_omega(curve, h, m + 1, cache)
                a = ctx.eval_slot0(ps)
                b = ctx.eval_slot0_sigma(ps)
                for key in set(a) | set(b):
                    s = a.get(key)
                    t = b.get(key)
                    tot = s if t is None else (t if s is None else s + t)
                    if tot.val < 1:
                        bad.append((ram.location, key, _series_low(tot, 0)))
            break
        except TruncationExhausted:
            N *= 2
    return CheckReport("lle", (h, m), not bad, bad or None)


def check_qle(curve: AnalyzedCurve, h: int, m: int, cache: CorrelatorCache, prec: int | None = None) -> CheckReport:
    """The quadratic combination including omega_{0,1} has at least a double zero at each p."""
    if 2 * h - 2 + m <= 0:
        raise InvalidInput("QLE needs 2h - 2 + m > 0")
    n = m + 1
    N = prec or default_truncation(h, n)
    bad = []
    for _ in range(max_retries() + 1):
        try:
            bad = []
            for ram in curve.ramification:
                ctx = cache.context(ram, N)
                br = bracket(curve, h, n, cache, ctx, cap=2, with_01=True)
                for key, s in br.items():
                    if s.val < 2:
                        bad.append((ram.location, key, _series_low(s, 1)))
            break
        except TruncationExhausted:
            N *= 2
    return CheckReport("qle", (h, m), not bad, bad or None)


def projection(curve: AnalyzedCurve, ps: PoleSum, points: Sequence[mpq], prec: int | None = None) -> PoleSum:
    """sum_p Res_{z'->p} (int_p^{z'} B(., z_1)) omega(z', z_2, ...)."""
    N = prec or (ps.max_order() + 4)
    for _ in range(max_retries() + 1):
        try:
            terms: dict = defaultdict(lambda: ZERO)
            for p in points:
                ctx = PointContext(p, N)
                for rest, s in ctx.eval_slot0(ps).items():
                    for k in range(1, max(1, -s.val) + 1):
                        c = s.coeff(-1 - k)
                        if c != 0:
                            terms[((p, k + 1),) + rest] += c
            return PoleSum(ps.arity, terms)
        except TruncationExhausted:
            N *= 2
    raise TruncationExhausted("projection needs more terms")


def check_lpp(curve: AnalyzedCurve, h: int, m: int, cache: CorrelatorCache) -> CheckReport:
    ps = compute_omega(curve, h, m, cache)
    pts = [r.location for r in curve.ramification]
    if m == 1:
        pts += [v.location for v in curve.vital]
    rebuilt = projection(curve, ps, pts)
    diff = rebuilt - ps
    return CheckReport("lpp", (h, m), diff.is_zero(), None if diff.is_zero() else diff.to_text())


def check_residue_free(curve: AnalyzedCurve, h: int, n: int, cache: CorrelatorCache) -> CheckReport:
    ps = compute_omega(curve, h, n, cache)
    allowed = {r.location for r in curve.ramification}
    if n == 1:
        allowed |= {v.location for v in curve.vital}
    stray = ps.pole_locations() - allowed
    ok = ps.is_residue_free() and not stray and ps.is_symmetric()
    witness = None
    if not ok:
        witness = {"stray_poles": sorted(qstr(p) for p in stray), "residue_free": ps.is_residue_free(), "symmetric": ps.is_symmetric()}
    return CheckReport("residue_free", (h, n), ok, witness)


def check_vital_loop(curve: AnalyzedCurve, h: int, cache: CorrelatorCache) -> CheckReport:
    """Principal part of omega_{h,1} at each a_s against both closed expressions."""
    ps = compute_omega(curve, h, 1, cache)
    bad = []
    for s, v in enumerate(curve.vital):
        proj = projection(curve, ps, [v.location])
        r1 = vital_term(curve, h, s, "residue")
        r2 = vital_term(curve, h, s, "derivative")
        if proj != r1 or proj != r2:
            bad.append((qstr(v.location), (proj - r1).to_text(), (proj - r2).to_text()))
    return CheckReport("vital_loop", (h,), not bad, bad or None)


def check_truncation_stability(curve: AnalyzedCurve, h: int, n: int, cache: CorrelatorCache) -> CheckReport:
    """Recompute with doubled truncation and compare exactly."""
    base = compute_omega(curve, h, n, cache)
    N = 2 * (curve.spec.truncation_hint or default_truncation(h, n))
    again = compute_omega(curve, h, n, cache, prec=N)
    diff = again - base
    return CheckReport("truncation_stability", (h, n), diff.is_zero(), None if diff.is_zero() else diff.to_text())
