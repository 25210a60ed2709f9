"""
Suite reports: named checks plus numeric tables, written as deterministic JSON/CSV files.

Floats are rounded to 12 significant digits before serialization and keys are sorted, so equal
configurations produce byte-identical files. Files are replaced atomically.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np
from rich.console import Console
from rich.table import Table as RichTable

from toeplitz_lattice.cli.config import ReportFormat

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


def canonical(value: Any) -> Any:
    """JSON-ready copy of `value` with floats rounded to 12 significant digits."""
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        number = float(value)
        if not math.isfinite(number):
            return str(number)
        rounded = float(f"{number:.{SIGNIFICANT_DIGITS}g}")
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, (complex, np.complexfloating)):
        return {"real": canonical(value.real), "imag": canonical(value.imag)}
    if isinstance(value, np.ndarray):
        return canonical(value.tolist())
    if isinstance(value, dict):
        return {str(k): canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [canonical(v) for v in value]
    raise TypeError(f"Cannot serialize {type(value).__name__} into a report")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass
class Table:
    name: str
    header: tuple[str, ...]
    rows: list[tuple[Any, ...]] = field(default_factory=list)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow(["" if cell is None else canonical(cell) for cell in row])
        return buffer.getvalue()


@dataclass
class SuiteReport:
    """Outcome of one CLI command."""

    command: str
    seed: int
    config: dict[str, Any]
    checks: list[CheckResult] = field(default_factory=list)
    data: dict[str, Any] = field(default_factory=dict)
    tables: list[Table] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def check(
        self,
        name: str,
        passed: bool,
        value: Optional[float] = None,
        tolerance: Optional[float] = None,
        detail: str = "",
    ) -> CheckResult:
        result = CheckResult(
            name,
            bool(passed),
            None if value is None else float(value),
            tolerance,
            detail,
        )
        self.checks.append(result)
        if result.passed:
            logger.debug("check %s passed (%s)", name, value)
        else:
            logger.warning("check %s failed: value %s, tolerance %s %s", name, value, tolerance, detail)
        return result

    def add_table(self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> Table:
        table = Table(name, tuple(header), [tuple(r) for r in rows])
        self.tables.append(table)
        return table

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "passed": self.passed,
            "config": self.config,
            "checks": [c.to_dict() for c in self.checks],
            "data": self.data,
        }

    def failure_manifest(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "seed": self.seed,
            "failed": [c.to_dict() for c in self.failures],
        }


def dumps(payload: Any) -> str:
    return json.dumps(canonical(payload), sort_keys=True, indent=2) + "\n"


def write_atomic(path: Path, text: str):
    """Write to a temporary file in the target directory, then rename it over `path`."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(temporary, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(temporary)
        raise


def write_report(report: SuiteReport, out_dir: Path, fmt: ReportFormat) -> list[Path]:
    """
    Write `<command>-<seed>.json`; with `csv` also one CSV per table (the first table is
    `<command>-<seed>.csv`, the others get their name as suffix). A failed report also gets
    `<command>-<seed>-failures.json`.
    """
    base = f"{report.command}-{report.seed}"
    written = [out_dir / f"{base}.json"]
    write_atomic(written[0], dumps(report.to_dict()))

    if fmt == "csv":
        checks = Table(
            "checks",
            ("name", "passed", "value", "tolerance", "detail"),
            [(c.name, c.passed, c.value, c.tolerance, c.detail) for c in report.checks],
        )
        for i, table in enumerate([*report.tables, checks]):
            path = out_dir / (f"{base}.csv" if i == 0 else f"{base}-{table.name}.csv")
            write_atomic(path, table.to_csv())
            written.append(path)

    manifest = out_dir / f"{base}-failures.json"
    if not report.passed:
        write_atomic(manifest, dumps(report.failure_manifest()))
        written.append(manifest)
    elif manifest.exists():
        manifest.unlink()
    return written


def render_report(report: SuiteReport, console: Console):
    table = RichTable(title=f"{report.command} (seed {report.seed})")
    table.add_column("check")
    table.add_column("status")
    table.add_column("value", justify="right")
    table.add_column("tolerance", justify="right")
    table.add_column("detail")
    for check in report.checks:
        table.add_row(
            check.name,
            "[green]pass[/green]" if check.passed else "[red]FAIL[/red]",
            "" if check.value is None else f"{check.value:.3e}",
            "" if check.tolerance is None else f"{check.tolerance:.0e}",
            check.detail,
        )
    console.print(table)
