"""Exception types.

Every error carries a machine-readable ``category`` that the CLI writes to
stderr, so scripts can branch on it without parsing messages.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class BinidentError(Exception):
    category = "error"

    def to_dict(self) -> dict:
        return {"category": self.category, "message": str(self)}


class ConfigParseError(BinidentError):
    category = "parse"

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["path"] = self.path
        d["line"] = self.line
        return d


@dataclass(frozen=True)
class Violation:
    """One failed validation rule.

    ``code`` is the stable identifier (e.g. ``non_identifiable``), ``rule``
    names the modelling assumption or condition that was broken.
    """

    code: str
    rule: str
    message: str

    def to_dict(self) -> dict:
        return {"code": self.code, "rule": self.rule, "message": self.message}


class ValidationError(BinidentError):
    """Raised with every violated rule, not just the first one found."""

    category = "validation"

    def __init__(self, violations: list[Violation]):
        if not violations:
            raise ValueError("ValidationError needs at least one violation")
        self.violations = list(violations)
        lines = [f"[{v.code}] {v.rule}: {v.message}" for v in self.violations]
        super().__init__("; ".join(lines))

    @classmethod
    def single(cls, code: str, rule: str, message: str) -> "ValidationError":
        return cls([Violation(code, rule, message)])

    @property
    def codes(self) -> list[str]:
        return [v.code for v in self.violations]

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["violations"] = [v.to_dict() for v in self.violations]
        return d


class FitError(BinidentError):
    category = "fit"


class OutputError(BinidentError):
    category = "io"


@dataclass
class ViolationCollector:
    """Accumulates violations and raises them together."""

    items: list[Violation] = field(default_factory=list)

    def add(self, code: str, rule: str, message: str) -> None:
        self.items.append(Violation(code, rule, message))

    def raise_if_any(self) -> None:
        if self.items:
            raise ValidationError(self.items)
