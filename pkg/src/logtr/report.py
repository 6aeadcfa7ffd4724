"""Check records shared by the verification suites."""

from __future__ import annotations

from dataclasses import dataclass


def jsonable(value: object) -> object:
    """Exact objects rendered as strings; containers recursively."""
    from .correlator import PoleSum
    from .scalar import LogCombination, qstr

    if value is None or isinstance(value, (bool, int, str)):
        return value
    if isinstance(value, PoleSum):
        return value.to_text()
    if isinstance(value, LogCombination):
        return str(value)
    if type(value).__name__ == "mpq":
        return qstr(value)
    if isinstance(value, dict):
        return {str(jsonable(k)): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


@dataclass(frozen=True)
class CheckReport:
    name: str
    params: tuple
    passed: bool
    witness: object = None

    def to_json(self) -> dict:
        return {"check": self.name, "params": jsonable(list(self.params)), "pass": self.passed, "witness": jsonable(self.witness)}

    def to_text(self) -> str:
        params = ", ".join(str(p) for p in jsonable(list(self.params)))
        line = f"{'PASS' if self.passed else 'FAIL'} {self.name}({params})"
        if not self.passed:
            line += f" witness={jsonable(self.witness)}"
        return line
