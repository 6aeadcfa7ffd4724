"""Command-line entry point: ``logtr validate | omega | free-energy | check | paper-examples``."""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import mpmath
from gmpy2 import mpq

from .correlator import (
    CorrelatorCache,
    PoleSum,
    check_lle,
    check_lpp,
    check_qle,
    check_residue_free,
    check_truncation_stability,
    check_vital_loop,
    compute_omega,
)
from .curve import INF, AnalyzedCurve, CurveSpec, RationalFunction, admissibility_report, analyze, local_coordinate
from .errors import CollisionOfSpecialPoints, InvalidInput, LogTRError, TauUnsupported, Unsupported
from .identities import (
    check_dilaton,
    check_lemma31,
    check_residue_tricks,
    example_curve,
    free_energy,
    free_energy_f1,
    strip_f1,
    strip_free_energy,
    strip_omega,
    sw_half_f1,
    sw_half_free_energy,
    sw_half_omega,
)
from .report import CheckReport
from .scalar import LogCombination, Q, qstr
from .series import LaurentSeries
from .variation import DEFAULT_EPS, DeformationSpec, Target, analyze_deformed, check_variational

FORMATS = ("text", "json", "latex")
SUITES = ("loops", "projection", "dilaton", "lemma31", "variational-time", "variational-vital", "all")
EXAMPLES = ("sw-half", "strip")

_FRACTION = re.compile(r"^\s*-?\d+(/\d+)?\s*$")
_TOP_KEYS = {"variable", "x", "y", "basepoint", "ramification", "truncation"}
_SIDE_KEYS = {"num", "den", "logs"}
_LOG_KEYS = {"point", "weight", "form"}


# ---------------------------------------------------------------------------
# Curve files


def _fraction(value: object, where: str) -> mpq:
    if not isinstance(value, str) or not _FRACTION.match(value):
        raise InvalidInput(f"schema: {where} must be an exact-fraction string, got {json.dumps(value)}")
    return Q(value.strip())


def _fraction_list(value: object, where: str) -> list[mpq]:
    if not isinstance(value, list) or not value:
        raise InvalidInput(f"schema: {where} must be a nonempty list of fraction strings")
    return [_fraction(v, f"{where}[{i}]") for i, v in enumerate(value)]


def _strict_keys(obj: object, allowed: set, required: set, where: str) -> dict:
    if not isinstance(obj, dict):
        raise InvalidInput(f"schema: {where} must be an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise InvalidInput(f"schema: unknown field(s) {unknown} in {where}")
    missing = sorted(required - set(obj))
    if missing:
        raise InvalidInput(f"schema: missing field(s) {missing} in {where}")
    return obj


def _side(obj: object, name: str) -> tuple[RationalFunction, list]:
    obj = _strict_keys(obj, _SIDE_KEYS, {"num"}, name)
    num = _fraction_list(obj["num"], f"{name}.num")
    den = _fraction_list(obj.get("den", ["1"]), f"{name}.den")
    if all(c == 0 for c in den):
        raise InvalidInput(f"schema: {name}.den is zero")
    logs = obj.get("logs", [])
    if not isinstance(logs, list):
        raise InvalidInput(f"schema: {name}.logs must be a list")
    out = []
    for i, item in enumerate(logs):
        where = f"{name}.logs[{i}]"
        item = _strict_keys(item, _LOG_KEYS, {"point", "weight"}, where)
        form = item.get("form", "z-b")
        if not isinstance(form, str):
            raise InvalidInput(f"schema: {where}.form must be a string")
        out.append(
            {"point": _fraction(item["point"], f"{where}.point"), "weight": _fraction(item["weight"], f"{where}.weight"), "form": form}
        )
    return RationalFunction.from_coeffs(num, den), out


def curve_from_document(doc: object) -> CurveSpec:
    """Build a CurveSpec from a parsed curve document, rejecting anything off-schema."""
    doc = _strict_keys(doc, _TOP_KEYS, {"x", "y"}, "curve")
    variable = doc.get("variable", "z")
    if not isinstance(variable, str) or not variable.isidentifier():
        raise InvalidInput("schema: variable must be an identifier string")
    xr, xl = _side(doc["x"], "x")
    yr, yl = _side(doc["y"], "y")
    basepoint = doc.get("basepoint")
    if basepoint is not None:
        basepoint = _fraction(basepoint, "basepoint")
    ram = doc.get("ramification")
    if ram is not None:
        if not isinstance(ram, list):
            raise InvalidInput("schema: ramification must be a list")
        ram = [_fraction(v, f"ramification[{i}]") for i, v in enumerate(ram)]
    trunc = doc.get("truncation")
    if trunc is not None and (isinstance(trunc, bool) or not isinstance(trunc, int) or trunc < 1):
        raise InvalidInput("schema: truncation must be a positive integer")
    try:
        return CurveSpec(xr, yr, xl, yl, basepoint, ram, trunc, variable)
    except InvalidInput as exc:
        raise InvalidInput(f"schema: {exc}") from exc


def parse_curve_text(text: str) -> CurveSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return curve_from_document(doc)


def load_curve_file(path: str) -> CurveSpec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InvalidInput(f"cannot read {path}: {exc.strerror}") from exc
    return parse_curve_text(text)


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class RunConfig:
    h_max: int = 2
    n_max: int = 3
    truncation: int | None = None
    tolerance: str = "1e-10"
    eps_schedule: tuple = DEFAULT_EPS
    fmt: str = "text"

    def __post_init__(self) -> None:
        try:
            tol = mpmath.mpf(self.tolerance)
        except (ValueError, TypeError) as exc:
            raise InvalidInput(f"bad tolerance {self.tolerance!r}") from exc
        if not tol > 0:
            raise InvalidInput("tolerance must be positive")
        eps = tuple(Q(e) for e in self.eps_schedule)
        if len(eps) < 2 or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
            raise InvalidInput("eps schedule must be positive and strictly decreasing")
        object.__setattr__(self, "eps_schedule", eps)
        if self.fmt not in FORMATS:
            raise InvalidInput(f"unknown format {self.fmt!r}")
        if self.h_max < 0 or self.n_max < 1:
            raise InvalidInput("need h >= 0 and n >= 1")
        if self.truncation is not None and self.truncation < 1:
            raise InvalidInput("truncation must be positive")

    def grid(self) -> list[tuple[int, int]]:
        return [(h, n) for h in range(self.h_max + 1) for n in range(1, self.n_max + 1) if 2 * h + n - 2 > 0]


def _parse_eps(text: str) -> tuple:
    parts = [p for p in text.split(",") if p.strip()]
    return tuple(_fraction(p.strip(), "eps schedule") for p in parts)


# ---------------------------------------------------------------------------
# Output


@dataclass
class Outcome:
    """Result of a subcommand: printable payload plus exit code."""

    code: int
    text: str
    data: object
    latex: str | None = None

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.data, sort_keys=True, indent=2)
        if fmt == "latex" and self.latex is not None:
            return self.latex
        return self.text


def _reports_outcome(reports: list[CheckReport], skipped: list[str], code_if_fail: int = 1) -> Outcome:
    failed = [r for r in reports if not r.passed]
    lines = [r.to_text() for r in reports] + [f"SKIP {s}" for s in skipped]
    lines.append(f"{len(reports)} checks, {len(failed)} failed")
    data = {"checks": [r.to_json() for r in reports], "skipped": skipped, "passed": not failed}
    return Outcome(code_if_fail if failed else 0, "\n".join(lines), data)


# ---------------------------------------------------------------------------
# Subcommands


def _with_truncation(spec: CurveSpec, cfg: RunConfig) -> CurveSpec:
    return spec.replace(truncation_hint=cfg.truncation) if cfg.truncation else spec


def cmd_validate(spec: CurveSpec, cfg: RunConfig) -> Outcome:
    items, errors = admissibility_report(spec)
    curve = None
    if not errors:
        try:
            curve = analyze(spec)
        except LogTRError as exc:
            errors.append(exc)
    lines = [f"{'PASS' if it.passed else 'FAIL'} {it.name}" for it in items]
    data: dict = {"checks": [it.to_json() for it in items]}
    for exc in errors:
        lines.append(f"ERROR {type(exc).__name__}: {exc}")
    data["errors"] = [{"kind": type(exc).__name__, "message": str(exc)} for exc in errors]
    if curve is not None:
        ram = [qstr(r.location) for r in curve.ramification]
        vital = [{"point": qstr(v.location), "log_time": qstr(v.log_time)} for v in curve.vital]
        lines.append("ramification: " + (", ".join(ram) or "none"))
        lines.append("vital: " + (", ".join(f"{v['point']} (y={v['log_time']})" for v in vital) or "none"))
        lines.append(f"basepoint: {qstr(curve.basepoint)}")
        data.update(ramification=ram, vital=vital, basepoint=qstr(curve.basepoint))
    if not errors:
        code = 0
    elif any(exc.exit_code == 2 for exc in errors):
        code = 2
    else:
        code = 3
    lines.append("admissible" if code == 0 else "not admissible")
    data["admissible"] = code == 0
    return Outcome(code, "\n".join(lines), data)


def cmd_omega(spec: CurveSpec, h: int, n: int, cfg: RunConfig) -> Outcome:
    curve = analyze(_with_truncation(spec, cfg))
    ps = compute_omega(curve, h, n, CorrelatorCache(curve))
    data = ps.to_json()
    data.update(h=h, n=n)
    return Outcome(0, ps.to_text(), data, ps.to_latex())


def cmd_free_energy(spec: CurveSpec, h: int, cfg: RunConfig) -> Outcome:
    if h < 1:
        raise InvalidInput("free energies need h >= 1")
    curve = analyze(_with_truncation(spec, cfg))
    if h >= 2:
        value = free_energy(curve, h)
        return Outcome(0, qstr(value), {"h": h, "value": qstr(value)}, _latex_scalar(value))
    value = free_energy_f1(curve, allow_missing_tau=True)
    if curve.ramification:
        marker = "tau term omitted"
        return Outcome(3, f"{value}  [{marker}]", {"h": 1, "value": value.to_json(), "note": marker}, f"{value.latex()} \\quad (\\text{{{marker}}})")
    return Outcome(0, str(value), {"h": 1, "value": value.to_json()}, value.latex())


def _latex_scalar(value: mpq) -> str:
    return LogCombination(value).latex()


_SAMPLE_CANDIDATES = tuple(Q(v) for v in ("7/2", "-5/3", "11/4", "-9/5", "13/6", "-17/7", "19/8", "-23/9"))


def sample_points(curve: AnalyzedCurve, count: int, skip: int = 0) -> tuple:
    bad = set(curve.special_points()) | {r.location for r in curve.ramification} | {curve.basepoint}
    good = [p for p in _SAMPLE_CANDIDATES if p not in bad]
    return tuple(good[skip : skip + count])


def _suite_loops(curve, cfg, cache):
    reports = []
    for h, n in cfg.grid():
        reports.append(check_residue_free(curve, h, n, cache))
        reports.append(check_truncation_stability(curve, h, n, cache))
    if curve.ramification:
        if cfg.n_max >= 2:
            reports.append(check_lle(curve, 0, 1, cache))
        for h, n in cfg.grid():
            if n >= 2 and 2 * h + n - 2 > 0:
                reports.append(check_lle(curve, h, n - 1, cache))
            if 2 * h - 2 + (n - 1) > 0:
                reports.append(check_qle(curve, h, n - 1, cache))
    if curve.vital:
        for h in range(1, cfg.h_max + 1):
            reports.append(check_vital_loop(curve, h, cache))
    return reports, []


def _suite_projection(curve, cfg, cache):
    return [check_lpp(curve, h, n, cache) for h, n in cfg.grid()], []


def _suite_dilaton(curve, cfg, cache):
    reports = []
    for h in range(cfg.h_max + 1):
        for k in range(1, cfg.n_max + 1):
            if (h, k) != (0, 1):
                reports.extend(check_dilaton(curve, h, k, cache))
    return reports, []


_LEMMA_TEST_FUNCTIONS = ((1,), (0, 0, 1), (2, -1, 3))


def _suite_lemma31(curve, cfg, cache):
    reports = []
    for s, v in enumerate(curve.vital):
        for h in range(1, cfg.h_max + 1):
            reports.extend(check_lemma31(curve, h, s, None, cache))
            for coeffs in _LEMMA_TEST_FUNCTIONS:
                reports.extend(check_lemma31(curve, h, s, LaurentSeries.from_poly(list(coeffs), 40), cache))
        for k in (1, 2):
            reports.extend(check_residue_tricks(curve, v.location, LaurentSeries.from_poly([1, 2, 3], 40), k))
    skipped = [] if curve.vital else ["lemma31: no vital singularities"]
    return reports, skipped


def _probe(curve: AnalyzedCurve, d: DeformationSpec, cfg: RunConfig) -> str | None:
    """Reason the deformation is not usable on this curve, or None."""
    try:
        if d.kind == "irregular_time":
            local_coordinate(curve, d.a, 4)
        for e in (cfg.eps_schedule[0], -cfg.eps_schedule[0]):
            analyze_deformed(curve, d, e)
    except (CollisionOfSpecialPoints, Unsupported, InvalidInput) as exc:
        return str(exc)
    return None


def standard_deformations(curve: AnalyzedCurve, cfg: RunConfig) -> tuple[list[DeformationSpec], list[str]]:
    """Irregular times at the poles of x, plus one monodromy pair when there is no ramification."""
    poles = [INF] + [p for p, _ in curve.x_rational.rational_roots("den")[0]]
    cands = [DeformationSpec.irregular_time(a, k) for a in poles for k in (1, 2, 3)]
    if not curve.ramification:
        extra = sample_points(curve, 2, skip=4)
        if len(extra) == 2:
            cands.append(DeformationSpec.monodromy_pair(*extra))
    usable, skipped = [], []
    for d in cands:
        why = _probe(curve, d, cfg)
        if why is None:
            usable.append(d)
        else:
            skipped.append(f"{d.describe()}: {why}")
    return usable, skipped


def _targets(curve: AnalyzedCurve, cfg: RunConfig) -> list[Target]:
    out = []
    for h, n in cfg.grid():
        if 2 * h + n <= 4:
            out.append(Target(h, n, (sample_points(curve, n, 0), sample_points(curve, n, 1))))
    for h in range(2, min(cfg.h_max, 3) + 1):
        out.append(Target(h))
    if not curve.ramification:
        out.append(Target(1))
    return out


def _run_variational(curve, cfg, deformations):
    reports = []
    for d in deformations:
        for t in _targets(curve, cfg):
            reports.extend(check_variational(curve, d, t, cfg.tolerance, cfg.eps_schedule))
    return reports


def _suite_variational_time(curve, cfg, cache):
    usable, skipped = standard_deformations(curve, cfg)
    return _run_variational(curve, cfg, usable), skipped


def _suite_variational_vital(curve, cfg, cache):
    usable, skipped = [], []
    for r in range(len(curve.vital)):
        d = DeformationSpec.vital_position(r)
        why = _probe(curve, d, cfg)
        if why is None:
            usable.append(d)
        else:
            skipped.append(f"{d.describe()}: {why}")
    if not curve.vital:
        skipped.append("variational-vital: no vital singularities")
    return _run_variational(curve, cfg, usable), skipped


SUITE_RUNNERS: dict[str, Callable] = {
    "loops": _suite_loops,
    "projection": _suite_projection,
    "dilaton": _suite_dilaton,
    "lemma31": _suite_lemma31,
    "variational-time": _suite_variational_time,
    "variational-vital": _suite_variational_vital,
}


def _corruption(curve: AnalyzedCurve, n: int) -> PoleSum:
    """A symmetric term with a pole away from every special point."""
    far = max([abs(p) for p in curve.special_points()] + [abs(curve.basepoint), Q(0)]) + 1
    return PoleSum(n, {tuple((far, 2) for _ in range(n)): Q(1)})


def cmd_check(spec: CurveSpec, suite: str, cfg: RunConfig, corrupt: tuple[int, int] | None = None) -> Outcome:
    if suite not in SUITES:
        raise InvalidInput(f"unknown suite {suite!r}")
    curve = analyze(_with_truncation(spec, cfg))
    cache = CorrelatorCache(curve)
    if corrupt is not None:
        h, n = corrupt
        compute_omega(curve, h, n, cache)
        cache.corrupt(h, n, _corruption(curve, n))
    names = [s for s in SUITES if s != "all"] if suite == "all" else [suite]
    reports, skipped = [], []
    for name in names:
        r, s = SUITE_RUNNERS[name](curve, cfg, cache)
        reports.extend(r)
        skipped.extend(s)
    return _reports_outcome(reports, skipped)


# ---------------------------------------------------------------------------
# Worked examples


@dataclass(frozen=True)
class ExampleRow:
    example: str
    quantity: str
    params: str
    engine: str
    oracle: str
    match: bool

    def to_json(self) -> dict:
        return {
            "example": self.example,
            "quantity": self.quantity,
            "params": self.params,
            "engine": self.engine,
            "oracle": self.oracle,
            "match": self.match,
        }


def _fmt(seq) -> str:
    return "(" + ",".join(qstr(Q(v)) for v in seq) + ")"


def same_mod_branch(u: LogCombination, v: LogCombination) -> bool:
    """Equality after prime factorization of log arguments, ignoring multiples of log(-1)."""
    d = (u - v).expand_primes()
    return d.rational == 0 and all(a == -1 for a, _ in d.logs)


SW_HALF_GRID = tuple(
    (a, y)
    for m in (1, 2, 3)
    for a, y in (
        (("0", "1", "3")[:m], ("1", "1", "1")[:m]),
        (("0", "1", "3")[:m], ("2", "3", "-1")[:m]),
    )
)
SW_HALF_LAMBDA = "24"
STRIP_GRID = ((("1", "2"), ("1", "1")), (("2", "3"), ("1", "2")), (("1", "3"), ("1/2", "3")))
STRIP_REFERENCE_A = ("3", "5")


def sw_half_rows() -> list[ExampleRow]:
    rows = []
    for a, y in SW_HALF_GRID:
        label = f"M={len(a)} a={_fmt(a)} y={_fmt(y)}"
        curve = analyze(example_curve("sw-half", a, y, 0))
        cache = CorrelatorCache(curve)
        for h in range(1, 5):
            e, o = compute_omega(curve, h, 1, cache), sw_half_omega(a, y, h)
            rows.append(ExampleRow("sw-half", f"omega_{h},1", label, e.to_text(), o.to_text(), e == o))
        for h in range(2, 5):
            e, o = free_energy(curve, h, cache), sw_half_free_energy(a, y, h)
            rows.append(ExampleRow("sw-half", f"F_{h}", label, qstr(e), qstr(o), e == o))
        lam_curve = analyze(example_curve("sw-half", a, y, SW_HALF_LAMBDA))
        e1, o1 = free_energy_f1(lam_curve), sw_half_f1(a, y, SW_HALF_LAMBDA)
        rows.append(ExampleRow("sw-half", "F_1", f"{label} lambda={SW_HALF_LAMBDA}", str(e1), str(o1), same_mod_branch(e1, o1)))
    return rows


def strip_rows() -> list[ExampleRow]:
    rows = []
    for a, y in STRIP_GRID:
        label = f"M=2 a={_fmt(a)} y={_fmt(y)}"
        curve = analyze(example_curve("strip", a, y))
        cache = CorrelatorCache(curve)
        for h in range(1, 4):
            e, o = compute_omega(curve, h, 1, cache), strip_omega(a, y, h)
            rows.append(ExampleRow("strip", f"omega_{h},1", label, e.to_text(), o.to_text(), e == o))
        for h in (2, 3):
            e, o = free_energy(curve, h, cache), strip_free_energy(a, y, h)
            rows.append(ExampleRow("strip", f"F_{h}", label, qstr(e), qstr(o), e == o))
        ref = analyze(example_curve("strip", STRIP_REFERENCE_A, y))
        d_here = free_energy_f1(curve) - strip_f1(a, y)
        d_ref = free_energy_f1(ref) - strip_f1(STRIP_REFERENCE_A, y)
        rows.append(
            ExampleRow(
                "strip",
                "F_1 - oracle",
                f"{label} vs a={_fmt(STRIP_REFERENCE_A)}",
                str(d_here),
                str(d_ref),
                same_mod_branch(d_here, d_ref),
            )
        )
    return rows


def cmd_paper_examples(cfg: RunConfig, only: str | None = None) -> Outcome:
    if only is not None and only not in EXAMPLES and only != "SW-half":
        raise InvalidInput(f"unknown example family {only!r}")
    rows = []
    if only in (None, "sw-half", "SW-half"):
        rows += sw_half_rows()
    if only in (None, "strip"):
        rows += strip_rows()
    failed = [r for r in rows if not r.match]
    lines = [f"{'ok  ' if r.match else 'DIFF'} {r.example:8} {r.quantity:14} {r.params}" for r in rows]
    for r in failed:
        lines.append(f"DIFF {r.example} {r.quantity} {r.params}\n  engine: {r.engine}\n  oracle: {r.oracle}")
    lines.append(f"{len(rows)} rows, {len(failed)} mismatched")
    data = {"rows": [r.to_json() for r in rows], "passed": not failed}
    marks = {True: "\\checkmark", False: "\\times"}
    latex = "\n".join(f"{r.example} & {r.quantity} & {r.params} & {marks[r.match]} \\\\" for r in rows)
    return Outcome(1 if failed else 0, "\n".join(lines), data, latex)


# ---------------------------------------------------------------------------
# Argument parsing


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=FORMATS, default="text")
    p.add_argument("--truncation", type=int, default=None)
    p.add_argument("--tolerance", default="1e-10")
    p.add_argument("--eps-schedule", default=None, help="comma-separated fractions, strictly decreasing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="logtr", description="Exact logarithmic topological recursion on the sphere.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="admissibility report for a curve file")
    p.add_argument("file")
    _common(p)

    p = sub.add_parser("omega", help="print omega_{h,n}")
    p.add_argument("file")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("free-energy", help="print F_h")
    p.add_argument("file")
    p.add_argument("--h", type=int, required=True)
    _common(p)

    p = sub.add_parser("check", help="run verification suites")
    p.add_argument("file")
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--h", type=int, default=2, help="largest genus in the grid")
    p.add_argument("--n", type=int, default=3, help="largest number of points in the grid")
    p.add_argument("--corrupt-cache", default=None, help=argparse.SUPPRESS)
    _common(p)

    p = sub.add_parser("paper-examples", help="reproduce the built-in worked examples")
    p.add_argument("--only", default=None, choices=EXAMPLES + ("SW-half",))
    _common(p)
    return parser


def _config(args: argparse.Namespace) -> RunConfig:
    eps = _parse_eps(args.eps_schedule) if args.eps_schedule else DEFAULT_EPS
    return RunConfig(
        h_max=getattr(args, "h", None) if args.command == "check" else 2,
        n_max=getattr(args, "n", None) if args.command == "check" else 3,
        truncation=args.truncation,
        tolerance=args.tolerance,
        eps_schedule=eps,
        fmt=args.format,
    )


def _dispatch(args: argparse.Namespace) -> Outcome:
    cfg = _config(args)
    if args.command == "paper-examples":
        return cmd_paper_examples(cfg, args.only)
    spec = load_curve_file(args.file)
    if args.command == "validate":
        return cmd_validate(spec, cfg)
    if args.command == "omega":
        return cmd_omega(spec, args.h, args.n, cfg)
    if args.command == "free-energy":
        return cmd_free_energy(spec, args.h, cfg)
    corrupt = None
    if args.corrupt_cache:
        try:
            h, n = (int(v) for v in args.corrupt_cache.split(","))
        except ValueError as exc:
            raise InvalidInput("--corrupt-cache expects H,N") from exc
        corrupt = (h, n)
    return cmd_check(spec, args.suite, cfg, corrupt)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fmt = args.format
    try:
        outcome = _dispatch(args)
    except TauUnsupported as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except LogTRError as exc:
        if fmt == "json":
            print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True, indent=2))
        else:
            print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    print(outcome.render(fmt))
    return outcome.code


if __name__ == "__main__":
    raise SystemExit(main())
