"""Tests for space, weight and field files."""

import csv
import json
import tempfile
from pathlib import Path

import numpy as np
import pytest

from core.errors import MetricValidationError
from core.metric_core import load_space
from core.space_io import (
    load_space_file,
    parse_id_list,
    read_field,
    read_weights,
    write_field,
    write_qfield,
    write_space,
    write_weights,
)
from core.spaces import generate
from models.generator import GeneratorSpec
from models.measure import SampledMeasure
from models.results import LocalDimensionField, QField


@pytest.fixture
def temp_dir():
    """Create a temporary directory for data files."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def abc():
    """Three labelled points."""
    return load_space([[0.0], [1.0], [3.0]], ids=['a', 'b', 'c'])


def test_point_table_round_trip(temp_dir):
    """Test that a written point table reloads to the same distances."""
    space, measure, _ = generate(GeneratorSpec.cantor(depth=3))
    write_space(temp_dir / 'space.csv', space)
    write_weights(temp_dir / 'weights.csv', space, measure)

    loaded = load_space_file(temp_dir / 'space.csv')
    assert loaded.ids == space.ids
    assert np.array_equal(loaded.dist, space.dist)
    assert np.array_equal(read_weights(temp_dir / 'weights.csv', loaded).weights, measure.weights)


def test_matrix_round_trip(temp_dir):
    """Test a distance matrix with an id header."""
    dist = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.5], [2.0, 1.5, 0.0]]
    space = load_space(dist, metric="precomputed", ids=['x', 'y', 'z'])
    path = write_space(temp_dir / 'matrix.csv', space)

    with open(path, newline='') as f:
        assert next(csv.reader(f)) == ['x', 'y', 'z']
    loaded = load_space_file(path)
    assert loaded.ids == ('x', 'y', 'z')
    assert loaded.metric == "precomputed"
    assert np.array_equal(loaded.dist, space.dist)


def test_matrix_without_header(temp_dir):
    """Test that a bare matrix gets default ids."""
    path = temp_dir / 'bare.csv'
    path.write_text("0,2\n2,0\n", encoding='utf-8')
    space = load_space_file(path)
    assert space.ids == ('p0', 'p1')
    assert space.diameter == 2.0


def test_json_points(temp_dir):
    """Test the JSON point format."""
    path = temp_dir / 'points.json'
    path.write_text(json.dumps({"points": [{"id": "a", "coords": [0, 0]}, {"id": "b", "coords": [3, 4]}]}))
    space = load_space_file(path)
    assert space.ids == ('a', 'b')
    assert space.dist[0, 1] == 5.0


def test_json_without_data(temp_dir):
    """Test that JSON files must hold points or a matrix."""
    path = temp_dir / 'bad.json'
    path.write_text(json.dumps({"nodes": []}))
    with pytest.raises(MetricValidationError):
        load_space_file(path)


def test_point_table_rejects_precomputed(temp_dir, abc):
    """Test that coordinates cannot be read as a matrix."""
    path = write_space(temp_dir / 'space.csv', abc)
    with pytest.raises(MetricValidationError):
        load_space_file(path, metric="precomputed")


def test_ragged_point_table(temp_dir):
    """Test that rows must match the header."""
    path = temp_dir / 'ragged.csv'
    path.write_text("id,x1,x2\na,0,0\nb,1\n", encoding='utf-8')
    with pytest.raises(MetricValidationError, match=":3:"):
        load_space_file(path)


def test_missing_file(temp_dir):
    """Test a missing space file."""
    with pytest.raises(FileNotFoundError):
        load_space_file(temp_dir / 'nope.csv')


def test_weights_header_required(temp_dir, abc):
    """Test the weights header check."""
    path = temp_dir / 'w.csv'
    path.write_text("point,mass\na,1\n", encoding='utf-8')
    with pytest.raises(MetricValidationError):
        read_weights(path, abc)


def test_weights_unknown_id(temp_dir, abc):
    """Test that weights must name known points."""
    path = temp_dir / 'w.csv'
    path.write_text("id,weight\na,1\nzz,1\n", encoding='utf-8')
    with pytest.raises(MetricValidationError, match="zz"):
        read_weights(path, abc)


def test_weights_of_merged_points_add_up(temp_dir):
    """Test that duplicate points pool their weights."""
    space = load_space([[0.0], [0.0], [1.0]], ids=['a', 'b', 'c'])
    path = temp_dir / 'w.csv'
    path.write_text("id,weight\na,0.25\nb,0.25\nc,0.5\n", encoding='utf-8')
    assert read_weights(path, space).weights.tolist() == [0.5, 0.5]


def test_missing_weight_rows_are_zero(temp_dir, abc):
    """Test that points without a row get no mass."""
    path = temp_dir / 'w.csv'
    path.write_text("id,weight\nb,2\n", encoding='utf-8')
    assert read_weights(path, abc).weights.tolist() == [0.0, 2.0, 0.0]


def test_field_round_trip(temp_dir, abc):
    """Test writing and reading a local dimension field."""
    field = LocalDimensionField.constant(3, 0.5)
    field.values[2] = 0.75
    field.flagged[1] = True
    field.neighbor_counts[0] = [16, 32]
    path = write_field(temp_dir / 'field.csv', abc, field)

    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[1][5] == "16;32"
    assert rows[2][6] == "true"

    loaded = read_field(path, abc)
    assert loaded.values.tolist() == [0.5, 0.5, 0.75]
    assert loaded.flagged.tolist() == [False, True, False]


def test_field_header_and_coverage(temp_dir, abc):
    """Test field files with a wrong header or missing points."""
    path = temp_dir / 'field.csv'
    path.write_text("i,d\n0,1\n", encoding='utf-8')
    with pytest.raises(MetricValidationError):
        read_field(path, abc)

    path.write_text("index,id,d,ci,radius,neighbors,flagged\n0,a,1,0,0,,false\n", encoding='utf-8')
    with pytest.raises(MetricValidationError, match="2 points"):
        read_field(path, abc)


def test_write_qfield(temp_dir, abc):
    """Test the Q field table."""
    q = QField(values=np.array([1.0, 1.0, 0.5]), stderr=np.zeros(3), window=(0.1, 0.2),
               radii=np.array([0.1, 0.2]), flagged=np.zeros(3, dtype=bool))
    path = write_qfield(temp_dir / 'qfield.csv', abc, q)
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['index', 'id', 'q', 'stderr', 'd']
    assert rows[3] == ['2', 'c', '0.5', '0', '']


def test_parse_id_list(abc):
    """Test id lists for --set."""
    assert parse_id_list(abc, None) == 0b111
    assert parse_id_list(abc, "a, c") == 0b101
    with pytest.raises(MetricValidationError):
        parse_id_list(abc, "a,q")


def test_sampled_measure_from_generator():
    """Test that generated weights are a probability vector."""
    _, measure, _ = generate(GeneratorSpec.grid(5))
    assert isinstance(measure, SampledMeasure)
    assert measure.total == pytest.approx(1.0)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
