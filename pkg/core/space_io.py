"""Reading and writing point tables, distance matrices and weights."""

import csv
import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from core.errors import MetricValidationError
from core.metric_core import load_space
from core.reports import write_csv
from models.measure import SampledMeasure
from models.metric_space import FiniteMetricSpace, mask_from_indices
from models.results import LocalDimensionField, QField

logger = logging.getLogger(__name__)


def _read_rows(path: Path) -> List[List[str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return [row for row in csv.reader(f) if row and any(cell.strip() for cell in row)]


def _parse_floats(row: List[str], path: Path, line: int) -> List[float]:
    try:
        return [float(cell) for cell in row]
    except ValueError as e:
        raise MetricValidationError(f"{path}:{line}: non-numeric value ({e})")


def read_space_file(path: Path) -> Tuple[Optional[List[str]], np.ndarray, bool]:
    """
    Parse a space file.

    CSV files with a header starting with ``id`` are point tables
    (``id,x1,...,xk``); any other CSV is a square distance matrix, optionally
    preceded by a header row of ids. JSON files hold either
    ``{"points": [{"id": ..., "coords": [...]}, ...]}`` or
    ``{"ids": [...], "matrix": [[...], ...]}``.

    Args:
        path: Input file

    Returns:
        (ids, data, is_matrix)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"space file not found: {path}")

    if path.suffix.lower() == '.json':
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if isinstance(data, dict) and 'points' in data:
            ids = [str(p['id']) for p in data['points']]
            coords = np.array([p['coords'] for p in data['points']], dtype=float)
            return ids, coords, False
        if isinstance(data, dict) and 'matrix' in data:
            return data.get('ids'), np.array(data['matrix'], dtype=float), True
        if isinstance(data, list):
            return None, np.array(data, dtype=float), True
        raise MetricValidationError(f"{path}: expected 'points' or 'matrix'")

    rows = _read_rows(path)
    if not rows:
        raise MetricValidationError(f"empty input: {path} has no rows")
    header = [cell.strip() for cell in rows[0]]
    if header[0].lower() == 'id':
        ids, coords = [], []
        for line, row in enumerate(rows[1:], start=2):
            if len(row) != len(header):
                raise MetricValidationError(f"{path}:{line}: expected {len(header)} columns, got {len(row)}")
            ids.append(row[0].strip())
            coords.append(_parse_floats(row[1:], path, line))
        return ids, np.array(coords, dtype=float).reshape(len(ids), len(header) - 1), False

    ids = None
    try:
        _parse_floats(rows[0], path, 1)
    except MetricValidationError:
        ids, rows = header, rows[1:]
    matrix = [_parse_floats(row, path, line) for line, row in enumerate(rows, start=2 if ids else 1)]
    return ids, np.array(matrix, dtype=float), True


def load_space_file(path: Path, metric: str = "euclidean") -> FiniteMetricSpace:
    """Load and validate a space file; distance matrices force ``precomputed``."""
    ids, data, is_matrix = read_space_file(path)
    if is_matrix and metric != "precomputed":
        logger.info(f"{path} holds a distance matrix; using the precomputed metric")
        metric = "precomputed"
    elif not is_matrix and metric == "precomputed":
        raise MetricValidationError(f"{path} is a point table; choose euclidean or manhattan")
    return load_space(data, metric=metric, ids=ids)


def read_weights(path: Path, space: FiniteMetricSpace) -> SampledMeasure:
    """
    Read an ``id,weight`` CSV onto the points of ``space``.

    Weights of merged duplicate points add up; points without a row get 0.
    """
    rows = _read_rows(Path(path))
    if not rows or [c.strip().lower() for c in rows[0][:2]] != ['id', 'weight']:
        raise MetricValidationError(f"{path}: header must be 'id,weight'")
    weights = np.zeros(space.n)
    seen = 0
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise MetricValidationError(f"{path}:{line}: expected 2 columns, got {len(row)}")
        try:
            index = space.index_of(row[0].strip())
        except KeyError as e:
            raise MetricValidationError(f"{path}:{line}: {e.args[0]}")
        weights[index] += _parse_floats([row[1]], Path(path), line)[0]
        seen += 1
    if seen < space.n:
        logger.warning(f"{path}: {space.n - seen} points have no weight row; using 0")
    return SampledMeasure(weights)


def write_space(path: Path, space: FiniteMetricSpace) -> Path:
    """Write a point table when coordinates exist, else a distance matrix with an id header.

    Values are written at full precision so a reload reproduces the distances.
    """
    if space.coords is not None:
        k = space.coords.shape[1]
        header = ['id'] + [f"x{j + 1}" for j in range(k)]
        rows = ([pid] + [repr(float(c)) for c in space.coords[i]] for i, pid in enumerate(space.ids))
        return write_csv(path, header, rows)
    return write_csv(path, list(space.ids), ([repr(float(d)) for d in row] for row in space.dist))


def write_weights(path: Path, space: FiniteMetricSpace, measure: SampledMeasure) -> Path:
    return write_csv(path, ['id', 'weight'], zip(space.ids, (repr(float(w)) for w in measure.weights)))


FIELD_HEADER = ['index', 'id', 'd', 'ci', 'radius', 'neighbors', 'flagged']


def write_field(path: Path, space: FiniteMetricSpace, field: LocalDimensionField) -> Path:
    """Local dimension field as ``index,id,d,ci,radius,neighbors,flagged``; neighbour counts joined by ';'."""
    rows = (
        [i, space.ids[i], float(field.values[i]), float(field.ci[i]), float(field.chosen_radius[i]),
         ";".join(str(c) for c in field.neighbor_counts[i]), bool(field.flagged[i])]
        for i in range(space.n)
    )
    return write_csv(path, FIELD_HEADER, rows)


def read_field(path: Path, space: FiniteMetricSpace) -> LocalDimensionField:
    """Read a field written by ``write_field`` back onto ``space`` by point id."""
    rows = _read_rows(Path(path))
    if not rows or [c.strip() for c in rows[0]] != FIELD_HEADER:
        raise MetricValidationError(f"{path}: header must be '{','.join(FIELD_HEADER)}'")
    values = np.zeros(space.n)
    ci = np.zeros(space.n)
    chosen = np.zeros(space.n)
    flagged = np.zeros(space.n, dtype=bool)
    seen = np.zeros(space.n, dtype=bool)
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != len(FIELD_HEADER):
            raise MetricValidationError(f"{path}:{line}: expected {len(FIELD_HEADER)} columns, got {len(row)}")
        try:
            i = space.index_of(row[1].strip())
        except KeyError as e:
            raise MetricValidationError(f"{path}:{line}: {e.args[0]}")
        values[i], ci[i], chosen[i] = _parse_floats(row[2:5], Path(path), line)
        flagged[i] = row[6].strip().lower() == 'true'
        seen[i] = True
    if not seen.all():
        raise MetricValidationError(f"{path}: {int((~seen).sum())} points have no field row")
    return LocalDimensionField(values=values, ci=ci, radii=[[] for _ in range(space.n)],
                               neighbor_counts=[[] for _ in range(space.n)], chosen_radius=chosen,
                               flagged=flagged)


def write_qfield(path: Path, space: FiniteMetricSpace, qfield: QField,
                 dims: Optional[np.ndarray] = None) -> Path:
    """Q field as ``index,id,q,stderr,d``; ``d`` is empty without a local dimension field."""
    rows = (
        [i, space.ids[i], float(qfield.values[i]), float(qfield.stderr[i]),
         None if dims is None else float(dims[i])]
        for i in range(space.n)
    )
    return write_csv(path, ['index', 'id', 'q', 'stderr', 'd'], rows)


def parse_id_list(space: FiniteMetricSpace, text: Optional[str]) -> int:
    """Mask of comma-separated point ids; the whole space when ``text`` is empty."""
    if not text:
        return space.full_mask
    try:
        return mask_from_indices(space.index_of(pid.strip()) for pid in text.split(',') if pid.strip())
    except KeyError as e:
        raise MetricValidationError(e.args[0])
