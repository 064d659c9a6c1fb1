import hashlib
import math
from dataclasses import dataclass
from typing import Dict, Iterable, Sequence

import numpy as np
from rich.box import MINIMAL
from rich.table import Table
from rich.text import Text

from spherot.common import fmt_number

REPORT_SCHEMA = "wsl-1"


def _digest_parts(item) -> Iterable[str]:
    # measures go in sorted-atom order so equal measures hash equally
    if hasattr(item, 'sorted_atoms'):
        points, weights = item.sorted_atoms()
        for point, weight in zip(points, weights):
            yield ','.join(fmt_number(c) for c in point) + ':' + fmt_number(weight)
    elif isinstance(item, str):
        yield item
    elif isinstance(item, (np.ndarray, list, tuple)):
        yield ','.join(fmt_number(c) for c in np.asarray(item, dtype=float).ravel())
    else:
        yield fmt_number(item)


def inputs_digest(inputs: Sequence) -> str:
    """sha256 of the inputs written with 17 significant digits."""
    text = '|'.join(';'.join(_digest_parts(item)) for item in inputs)
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class PropertyReport:
    name: str
    inputs_digest: str
    residual: float
    tolerance: float
    passed: bool
    notes: str = ''

    @classmethod
    def evaluate(cls, name: str, inputs: Sequence, residual: float, tolerance: float,
                 notes: str = '') -> 'PropertyReport':
        residual = float(residual)
        return cls(name, inputs_digest(inputs), residual, float(tolerance), abs(residual) <= tolerance, notes)

    @classmethod
    def failure(cls, name: str, inputs: Sequence, tolerance: float, error: BaseException) -> 'PropertyReport':
        return cls(name, inputs_digest(inputs), math.inf, float(tolerance), False, f"{type(error).__name__}: {error}")

    def serialize(self) -> Dict:
        return {
            "schema": REPORT_SCHEMA,
            "name": self.name,
            "inputs_digest": self.inputs_digest,
            "residual": self.residual if math.isfinite(self.residual) else None,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "notes": self.notes,
        }

    @classmethod
    def deserialize(cls, data: Dict) -> 'PropertyReport':
        residual = data["residual"]
        return cls(
            name=data["name"],
            inputs_digest=data["inputs_digest"],
            residual=math.inf if residual is None else float(residual),
            tolerance=float(data["tolerance"]),
            passed=bool(data["passed"]),
            notes=data.get("notes", ""),
        )

    def __rich__(self):
        return reports_table(self)


def reports_table(*reports: PropertyReport):
    table = Table(show_header=True, box=MINIMAL)
    table.add_column("Property")
    table.add_column("Residual", justify="right")
    table.add_column("Tolerance", justify="right")
    table.add_column("Result", style="bold")
    table.add_column("Notes")

    for report in reports:
        result = Text("passed", style="green") if report.passed else Text("FAILED", style="red")
        table.add_row(
            f"[bold blue]{report.name}[/bold blue]",
            f"{report.residual:.3e}",
            f"{report.tolerance:.1e}",
            result,
            report.notes,
        )

    return table
