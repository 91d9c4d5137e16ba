"""Tests for the command-line front end."""

import csv
import json
import tempfile
from pathlib import Path

import pytest
import yaml

from core.cli import build_parser, run


@pytest.fixture
def temp_dir():
    """Create a temporary working directory."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def grid_dir(temp_dir):
    """A generated nine-point grid."""
    out = temp_dir / 'grid'
    assert run(['gen', '--kind', 'grid', '--n', '9', '--out', str(out)]) == 0
    return out


def read_json(path: Path):
    with open(path, encoding='utf-8') as f:
        return json.load(f)


def test_gen_writes_three_files(temp_dir):
    """Test the generator outputs."""
    out = temp_dir / 'cantor'
    assert run(['gen', '--kind', 'cantor', '--depth', '4', '--out', str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ['space.csv', 'truth.json', 'weights.csv']
    truth = read_json(out / 'truth.json')
    assert truth['kind'] == 'cantor'
    assert truth['dimension'] == pytest.approx(0.630929753571, abs=1e-9)


def test_gen_glue_pieces(temp_dir):
    """Test repeated --piece options."""
    out = temp_dir / 'glue'
    code = run(['gen', '--kind', 'glue', '--piece', 'cantor:3', '--piece', 'grid:9', '--out', str(out)])
    assert code == 0
    assert read_json(out / 'truth.json')['pieces'] == [{'start': 0, 'stop': 8}, {'start': 8, 'stop': 17}]


def test_gen_invalid_spec(temp_dir):
    """Test that a generator validation error exits with 1."""
    assert run(['gen', '--kind', 'glue', '--piece', 'grid:9', '--out', str(temp_dir)]) == 1


@pytest.mark.parametrize("argv", [[], ['nope'], ['dim'], ['measure', '--space', 'x.csv', '--delta', '0.5']])
def test_usage_errors(argv):
    """Test that argument errors exit with 2."""
    assert run(argv) == 2


def test_missing_space_file(temp_dir):
    """Test that a missing input exits with 1."""
    assert run(['dim', '--space', str(temp_dir / 'missing.csv')]) == 1


def test_invalid_flag_value(grid_dir):
    """Test that configuration validation errors exit with 1."""
    assert run(['dim', '--space', str(grid_dir / 'space.csv'), '--threads', '0']) == 1


def test_dim_outputs(temp_dir):
    """Test the dimension command outputs."""
    run(['gen', '--kind', 'cantor', '--depth', '4', '--out', str(temp_dir)])
    out = temp_dir / 'dim'
    code = run(['dim', '--space', str(temp_dir / 'space.csv'), '--class', 'balls', '--mode', 'greedy',
                '--out', str(out)])
    assert code == 0
    estimate = read_json(out / 'estimate.json')
    assert estimate['method'] == 'critical_exponent'
    assert 0.0 <= estimate['value'] <= 1.0
    with open(out / 'profile.csv', newline='') as f:
        assert next(csv.reader(f)) == ['s', 'delta', 'cost']


def test_measure_constant_exponent(grid_dir):
    """Test the exact covering count at s = 0."""
    out = grid_dir / 'm'
    code = run(['measure', '--space', str(grid_dir / 'space.csv'), '--s', '0', '--delta', '0.5',
                '--class', 'all_subsets', '--out', str(out)])
    assert code == 0
    estimate = read_json(out / 'measure.json')['estimate']
    assert estimate['value'] == 2.0
    assert estimate['mode'] == 'exact'


def test_config_file_sets_mode(grid_dir):
    """Test that a config file is read and flags still win."""
    config = grid_dir / 'run.yaml'
    with open(config, 'w') as f:
        yaml.dump({'mode': 'greedy', 'covering_class': 'all_subsets'}, f)
    out = grid_dir / 'm'
    code = run(['measure', '--space', str(grid_dir / 'space.csv'), '--s', '1', '--delta', '0.5',
                '--config', str(config), '--out', str(out)])
    assert code == 0
    estimate = read_json(out / 'measure.json')['estimate']
    assert estimate['mode'] == 'greedy'
    assert estimate['covering_class'] == 'all_subsets'

    run(['measure', '--space', str(grid_dir / 'space.csv'), '--s', '1', '--delta', '0.5',
         '--config', str(config), '--mode', 'exact', '--out', str(out)])
    assert read_json(out / 'measure.json')['estimate']['mode'] == 'exact'


def test_bad_config_file(grid_dir):
    """Test that an invalid config file exits with 1."""
    config = grid_dir / 'bad.yaml'
    config.write_text("threads: -3\n", encoding='utf-8')
    assert run(['measure', '--space', str(grid_dir / 'space.csv'), '--s', '1', '--delta', '0.5',
                '--config', str(config)]) == 1


def test_oracle_agrees(grid_dir):
    """Test the exhaustive cross-check."""
    out = grid_dir / 'o'
    code = run(['oracle', '--space', str(grid_dir / 'space.csv'), '--delta', '0.5', '--s', '1',
                '--class', 'all_subsets', '--exhaustive', '--out', str(out)])
    assert code == 0
    data = read_json(out / 'oracle.json')
    assert data['agree'] is True
    assert data['exact'] == pytest.approx(data['exhaustive'])


def test_oracle_covering_number(grid_dir):
    """Test the covering number mode."""
    out = grid_dir / 'o'
    assert run(['oracle', '--space', str(grid_dir / 'space.csv'), '--delta', '0.5', '--count',
                '--out', str(out)]) == 0
    data = read_json(out / 'oracle.json')
    assert data['covering_number'] == 2
    assert data['exact'] is True


def test_oracle_unknown_id(grid_dir):
    """Test that an unknown id in --set exits with 1."""
    assert run(['oracle', '--space', str(grid_dir / 'space.csv'), '--delta', '0.5', '--set', 'g0,zz']) == 1


def test_locdim_then_measure_with_field(grid_dir):
    """Test the field hand-off between locdim and measure."""
    out = grid_dir / 'l'
    assert run(['locdim', '--space', str(grid_dir / 'space.csv'), '--out', str(out)]) == 0
    summary = read_json(out / 'locdim.json')
    assert summary['points'] == 9
    assert summary['flagged'] == 9

    code = run(['measure', '--space', str(grid_dir / 'space.csv'), '--field', str(out / 'field.csv'),
                '--delta', '0.5', '--checks', '--out', str(out)])
    assert code == 0
    data = read_json(out / 'measure.json')
    assert data['estimate']['gauge'] == 'local_dim'
    assert data['normalized'] is True
    assert len(data['probes']) == 2


def test_ahlfors_outputs(temp_dir):
    """Test the certificate command with a constant exponent."""
    run(['gen', '--kind', 'grid', '--n', '33', '--out', str(temp_dir)])
    run(['locdim', '--space', str(temp_dir / 'space.csv'), '--k-min', '64', '--out', str(temp_dir)])
    out = temp_dir / 'a'
    code = run(['ahlfors', '--space', str(temp_dir / 'space.csv'), '--weights', str(temp_dir / 'weights.csv'),
                '--field', str(temp_dir / 'field.csv'), '--q-const', '1', '--out', str(out)])
    assert code == 0
    certificates = read_json(out / 'certificates.json')
    assert certificates['q_source'] == 'constant'
    assert certificates['regularity']['pass'] is True
    assert certificates['log_holder']['C_lh'] == 0.0
    assert (out / 'qfield.csv').exists()


def test_parser_lists_all_commands():
    """Test the subcommand set."""
    parser = build_parser()
    actions = [a for a in parser._actions if a.dest == 'command']
    assert sorted(actions[0].choices) == ['ahlfors', 'dim', 'gen', 'locdim', 'measure', 'oracle', 'verify']


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
