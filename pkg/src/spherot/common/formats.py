"""
Documents read and written by the command line: measure JSON, potential and plan CSV, report JSON lines.

Every document carries `"schema": "wsl-1"` (JSON) and every number is written through
:func:`spherot.common.fmt_number`, so identical inputs give byte-identical output.
"""

import csv
import io
import json
from typing import Any, Dict, Iterable, List, Mapping

import numpy as np

from spherot.common import fmt_number
from spherot.common.report import PropertyReport
from spherot.core.err import SchemaViolation
from spherot.core.potential import PotentialSamples
from spherot.core.sphere import DiscreteMeasure
from spherot.core.transport import TransportPlan

SCHEMA = "wsl-1"
WEIGHT_SUM_TOL = 1e-9
SPHERE_SNAP_TOL = 1e-9


def encode(value: Any) -> str:
    """JSON text with sorted keys and 17-significant-digit numbers."""
    if value is None:
        return 'null'
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, Mapping):
        items = (f"{json.dumps(str(key))}: {encode(value[key])}" for key in sorted(value))
        return '{' + ', '.join(items) + '}'
    if isinstance(value, (list, tuple, np.ndarray)):
        return '[' + ', '.join(encode(item) for item in value) + ']'
    if isinstance(value, (bool, int, float, np.bool_, np.integer, np.floating)):
        return fmt_number(value)
    raise TypeError(f"Cannot encode {type(value).__name__}")


def _number(value, field) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaViolation(f"`{field}` must be a number, got {value!r}")
    if not np.isfinite(value):
        raise SchemaViolation(f"`{field}` must be finite")
    return float(value)


def _number_list(data: Mapping, key: str) -> List:
    value = data.get(key)
    if not isinstance(value, list) or not value:
        raise SchemaViolation(f"`{key}` must be a non-empty list")
    return value


def check_schema(data: Any, kind: str):
    if not isinstance(data, Mapping):
        raise SchemaViolation(f"{kind} document must be a JSON object")
    if data.get("schema") != SCHEMA:
        raise SchemaViolation(f"{kind} document schema must be `{SCHEMA}`, got {data.get('schema')!r}")


def measure_from_document(data: Any, **measure_options) -> DiscreteMeasure:
    """Measure JSON to DiscreteMeasure.

    Weights summing to 1 within 1e−9 are renormalized; points within 1e−9 of the unit sphere are put on it.
    For dim 1 a `theta` list (radians) may replace `points`.
    """
    check_schema(data, "Measure")
    dim = data.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise SchemaViolation(f"`dim` must be a positive integer, got {dim!r}")

    if "theta" in data and "points" not in data:
        if dim != 1:
            raise SchemaViolation("`theta` is accepted only for dim 1")
        theta = np.array([_number(t, 'theta') for t in _number_list(data, "theta")])
        points = np.column_stack([np.cos(theta), np.sin(theta)])
    else:
        rows = _number_list(data, "points")
        if any(not isinstance(row, list) or len(row) != dim + 1 for row in rows):
            raise SchemaViolation(f"every point must have {dim + 1} coordinates")
        points = np.array([[_number(c, 'points') for c in row] for row in rows])

    weights = np.array([_number(w, 'weights') for w in _number_list(data, "weights")])
    if weights.size != points.shape[0]:
        raise SchemaViolation(f"{weights.size} weights for {points.shape[0]} points")
    if np.any(weights < 0):
        raise SchemaViolation("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > WEIGHT_SUM_TOL:
        raise SchemaViolation(f"weights sum to {weights.sum()!r}, expected 1")

    norms = np.linalg.norm(points, axis=1)
    near = np.abs(norms - 1.0) <= SPHERE_SNAP_TOL
    points[near] = points[near] / norms[near, None]
    return DiscreteMeasure.normalized(points, weights, **measure_options)


def load_measure(file, **measure_options) -> DiscreteMeasure:
    try:
        with open(file, encoding='utf-8') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaViolation(f"`{file}` is not valid JSON: {e}") from e
    return measure_from_document(data, **measure_options)


def measure_document(mu: DiscreteMeasure) -> Dict:
    points, weights = mu.sorted_atoms()
    return {"schema": SCHEMA, "dim": mu.dim, "points": points, "weights": weights}


def _write_csv(header: List[str], rows: Iterable[List[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def potential_to_csv(samples: PotentialSamples) -> str:
    """`theta,value` for sites on S¹, `x1,...,xk,value` otherwise; values in the chord normalization."""
    samples = samples.to_chord()
    if samples.sites.shape[1] == 2:
        header = ["theta"]
        sites = samples.thetas[:, None]
    else:
        header = [f"x{i + 1}" for i in range(samples.sites.shape[1])]
        sites = samples.sites
    rows = ([fmt_number(c) for c in site] + [fmt_number(value)] for site, value in zip(sites, samples.values))
    return _write_csv(header + ["value"], rows)


def potential_from_csv(text: str, p: float) -> PotentialSamples:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if not header or header[-1].strip() != "value":
        raise SchemaViolation("potential CSV header must end with `value`")
    header = [column.strip() for column in header]
    angular = header == ["theta", "value"]
    if not angular and header[:-1] != [f"x{i + 1}" for i in range(len(header) - 1)]:
        raise SchemaViolation(f"unexpected potential CSV header {','.join(header)}")

    sites, values = [], []
    for line, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise SchemaViolation(f"line {line}: expected {len(header)} columns, got {len(row)}")
        try:
            numbers = [float(cell) for cell in row]
        except ValueError as e:
            raise SchemaViolation(f"line {line}: {e}") from e
        if angular:
            sites.append([np.cos(numbers[0]), np.sin(numbers[0])])
        else:
            sites.append(numbers[:-1])
        values.append(numbers[-1])

    if not values:
        raise SchemaViolation("potential CSV has no rows")
    return PotentialSamples(np.array(sites), np.array(values), p, generated=False)


def load_potential(file, p: float) -> PotentialSamples:
    with open(file, encoding='utf-8') as f:
        return potential_from_csv(f.read(), p)


def plan_to_csv(plan: TransportPlan) -> str:
    rows = ([str(i), str(j), fmt_number(mass)] for i, j, mass in plan.to_rows())
    return _write_csv(["row", "col", "mass"], rows)


def reports_to_jsonl(reports: Iterable[PropertyReport]) -> str:
    return ''.join(encode(report.serialize()) + '\n' for report in reports)


def reports_from_jsonl(text: str) -> List[PropertyReport]:
    reports = []
    for line in text.splitlines():
        if not line.strip():
            continue
        data = json.loads(line)
        check_schema(data, "Report")
        reports.append(PropertyReport.deserialize(data))
    return reports
