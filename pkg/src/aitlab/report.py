"""Deterministic experiment reports: a line-oriented text form and a TSV table."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from aitlab.bits import to_text


@dataclass(frozen=True)
class HardAssert:
    """A stage-exact identity; failing one is a defect, not an approximation gap."""

    name: str
    passed: bool
    value: object = ""


def fmt(value: object) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else repr(value)
    if isinstance(value, str):
        return to_text(value)
    if isinstance(value, tuple):
        return ",".join(fmt(v) for v in value)
    return str(value)


@dataclass
class ConservationReport:
    experiment: str
    version_id: str
    config: dict[str, object]
    columns: list[str]
    rows: list[dict[str, object]] = field(default_factory=list)
    hard_asserts: list[HardAssert] = field(default_factory=list)
    # soft findings: gaps outside the slack policy, unconverged stages, undefined rows
    consistency: list[str] = field(default_factory=list)
    summary: dict[str, object] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(h.passed for h in self.hard_asserts)

    def require(self, name: str, passed: bool, value: object = "") -> bool:
        self.hard_asserts.append(HardAssert(name, bool(passed), value))
        return bool(passed)

    def flag(self, message: str) -> None:
        self.consistency.append(message)

    def column(self, name: str) -> list[object]:
        return [row.get(name) for row in self.rows]

    def to_text(self) -> str:
        lines = [f"# experiment {self.experiment}", f"# machine {self.version_id}"]
        lines += [f"# config {k}={fmt(v)}" for k, v in self.config.items()]
        lines.append("[hard_asserts]")
        lines += [f"{'PASS' if h.passed else 'FAIL'} {h.name} {fmt(h.value)}" for h in self.hard_asserts]
        lines.append("[summary]")
        lines += [f"{k}={fmt(v)}" for k, v in self.summary.items()]
        lines.append("[consistency]")
        lines += self.consistency or ["none"]
        lines.append("[rows]")
        for row in self.rows:
            lines.append(" ".join(f"{c}={fmt(row.get(c))}" for c in self.columns))
        return "\n".join(lines) + "\n"

    def to_tsv(self) -> str:
        out = ["\t".join(self.columns)]
        out += ["\t".join(fmt(row.get(c)) for c in self.columns) for row in self.rows]
        return "\n".join(out) + "\n"

    def write(self, directory: str | Path, stem: str | None = None) -> tuple[Path, Path]:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        stem = stem or self.experiment
        text_path = directory / f"{stem}.txt"
        tsv_path = directory / f"{stem}.tsv"
        text_path.write_text(self.to_text(), encoding="utf-8")
        tsv_path.write_text(self.to_tsv(), encoding="utf-8")
        return text_path, tsv_path
