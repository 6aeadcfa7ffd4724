import json

import pytest

from logtr.cli import RunConfig, curve_from_document, main, parse_curve_text
from logtr.correlator import PoleSum
from logtr.errors import InvalidInput

AIRY = {"variable": "z", "x": {"num": ["0", "0", "1"]}, "y": {"num": ["0", "1"]}}
EX1 = {"x": {"num": ["0", "1"]}, "y": {"num": ["0"], "logs": [{"point": "0", "weight": "1"}, {"point": "1", "weight": "1"}]}}
MIXED = {"x": {"num": ["0", "0", "1"]}, "y": {"num": ["0", "1"], "logs": [{"point": "3", "weight": "1"}]}}
LAMBDA24 = {"x": {"num": ["0", "1"]}, "y": {"num": ["24"], "logs": [{"point": "0", "weight": "1"}]}}
EMPTY = {"x": {"num": ["0", "1"]}, "y": {"num": ["0"]}}


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="curve.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_airy(capsys, write):
    code, out, _ = run(capsys, "validate", write(AIRY))
    assert code == 0
    assert out.strip().endswith("admissible")


def test_validate_cubic(capsys, write):
    code, out, _ = run(capsys, "validate", write({"x": {"num": ["0", "0", "0", "1"]}, "y": {"num": ["0", "1"]}}))
    assert code == 2
    assert "NonSimpleRamification" in out


def test_validate_irrational_ramification_is_unsupported(capsys, write):
    code, out, _ = run(capsys, "validate", write({"x": {"num": ["0", "-2", "0", "1/3"]}, "y": {"num": ["0", "1"]}}))
    assert code == 3
    assert "IrrationalRamification" in out


def test_duplicate_log_points(capsys, write):
    doc = {"x": {"num": ["0", "1"]}, "y": {"num": ["0"], "logs": [{"point": "0", "weight": "1"}, {"point": "0", "weight": "2"}]}}
    code, _, err = run(capsys, "validate", write(doc))
    assert code == 2
    assert "schema" in err


def test_parse_error_position(capsys, write):
    code, _, err = run(capsys, "validate", write('{"x": {"num": ["1"]}\n  "y"}'))
    assert code == 2
    assert "line 2, column 3" in err


@pytest.mark.parametrize(
    "doc",
    [
        {**AIRY, "colour": "red"},
        {"x": {"num": [0, 1]}, "y": {"num": ["1"]}},
        {"x": {"num": ["0.5"]}, "y": {"num": ["1"]}},
        {"x": {"num": ["0", "1"], "extra": []}, "y": {"num": ["1"]}},
        {"x": {"num": ["0", "1"]}, "y": {"num": ["1"], "logs": [{"point": "1"}]}},
        {"x": {"num": ["0", "1"]}, "y": {"num": ["1"]}, "truncation": 2.5},
        {"y": {"num": ["1"]}},
    ],
)
def test_strict_schema(doc):
    with pytest.raises(InvalidInput):
        curve_from_document(doc)


def test_schema_accepts_optional_fields():
    spec = parse_curve_text(json.dumps({**AIRY, "basepoint": "5/2", "ramification": ["0"], "truncation": 20}))
    assert spec.basepoint == 5 / 2 and spec.declared_ramification == (0,) and spec.truncation_hint == 20


def test_omega_sw_half(capsys, write):
    code, out, _ = run(capsys, "omega", write(EX1), "--h", "1", "--n", "1")
    assert code == 0
    assert out == "1/24 * dz/(z-0)^2 + 1/24 * dz/(z-1)^2\n"


def test_omega_empty_curve(capsys, write):
    assert run(capsys, "omega", write(EMPTY), "--h", "2", "--n", "1")[:2] == (0, "0\n")


def test_omega_json_roundtrip(capsys, write):
    code, out, _ = run(capsys, "omega", write(AIRY), "--h", "0", "--n", "3", "--format", "json")
    ps = PoleSum.from_json(json.loads(out))
    assert code == 0
    assert ps.to_text() == "-1/2 * dz1/(z1-0)^2 * dz2/(z2-0)^2 * dz3/(z3-0)^2"


def test_omega_unsupported(capsys, write):
    assert run(capsys, "omega", write(AIRY), "--h", "9", "--n", "1")[0] == 3


def test_omega_latex(capsys, write):
    code, out, _ = run(capsys, "omega", write(EX1), "--h", "1", "--n", "1", "--format", "latex")
    assert code == 0 and "\\frac" in out


def test_byte_determinism(capsys, write):
    path = write(MIXED)
    first = run(capsys, "omega", path, "--h", "1", "--n", "2", "--format", "json")
    second = run(capsys, "omega", path, "--h", "1", "--n", "2", "--format", "json")
    assert first == second


@pytest.mark.parametrize("h, value", [("2", "1/240"), ("3", "-1/1008")])
def test_free_energy_sw_half(capsys, write, h, value):
    assert run(capsys, "free-energy", write(EX1), "--h", h)[:2] == (0, value + "\n")


def test_free_energy_f1_lambda(capsys, write):
    # positive under the engine's vital-sign convention
    assert run(capsys, "free-energy", write(LAMBDA24), "--h", "1")[:2] == (0, "1\n")


def test_free_energy_tau_marker(capsys, write):
    code, out, _ = run(capsys, "free-energy", write(MIXED), "--h", "1")
    assert code == 3
    assert "tau term omitted" in out


def test_check_loops_airy(capsys, write):
    code, out, _ = run(capsys, "check", write(AIRY), "--suite", "loops")
    assert code == 0
    assert "0 failed" in out


def test_check_dilaton_mixed(capsys, write):
    assert run(capsys, "check", write(MIXED), "--suite", "dilaton")[0] == 0


def test_check_corrupted_cache(capsys, write):
    code, out, _ = run(capsys, "check", write(AIRY), "--suite", "loops", "--corrupt-cache", "0,3", "--format", "json")
    data = json.loads(out)
    assert code == 1
    assert not data["passed"]
    assert any(c["witness"] for c in data["checks"] if not c["pass"])


def test_check_variational_time(capsys, write):
    code, out, _ = run(capsys, "check", write(EX1), "--suite", "variational-time", "--h", "2", "--n", "2")
    assert code == 0, out


def test_builtin_examples_filter(capsys):
    code, out, _ = run(capsys, "paper-examples", "--only", "sw-half", "--format", "json")
    rows = json.loads(out)["rows"]
    assert {r["example"] for r in rows} == {"sw-half"}
    assert all(r["match"] for r in rows if r["quantity"] != "F_1")
    # F_1 rows differ from the closed form by the documented sign
    assert not any(r["match"] for r in rows if r["quantity"] == "F_1")
    assert code == 1
    assert all(isinstance(r["engine"], str) for r in rows)


def test_run_config_validation():
    with pytest.raises(InvalidInput):
        RunConfig(tolerance="-1")
    with pytest.raises(InvalidInput):
        RunConfig(eps_schedule=("1/100", "1/10"))
    assert RunConfig().grid()[:2] == [(0, 3), (1, 1)]


def test_bad_eps_flag(capsys, write):
    assert run(capsys, "check", write(AIRY), "--suite", "loops", "--eps-schedule", "1/10,1/5")[0] == 2
