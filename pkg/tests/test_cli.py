import json

import pytest

from bonnetlab.cli import parse_grid, parse_run_config, parse_tolerance, read_run_config
from bonnetlab.cli.lab import cli
from bonnetlab.exception import ConfigError

TORUS = '''
commands = ["analyze", "classify"]

[surface]
name = "product_circles"

[grid]
nu = 16
nv = 16

[output]
dir = "out"
'''

UNEQUAL_CURVES = '''
[surface]
name = "product_curves"
[surface.params]
k1 = [0.0, 1.0]
k2 = [0.0, 2.0]

[grid]
nu = 17
nv = 17

[output]
dir = "out"

[classify]
expect = "strong"
'''


def _write(tmp_path, text):
    path = tmp_path / 'lab.toml'
    path.write_text(text)
    return path


def _summary(capsys):
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


def test_analyze_writes_a_passing_report(tmp_path, capsys):
    path = _write(tmp_path, TORUS)

    assert cli(['analyze', '--config', str(path)]) == 0

    summary = _summary(capsys)
    assert summary['pass'] is True
    assert summary['failed'] == []
    report = json.loads((tmp_path / 'out' / 'report.json').read_text())
    assert report['pass'] is True
    assert report['provenance']['commands'] == ['analyze']
    assert report['provenance']['surface']['name'] == 'product_circles'
    assert 'surface.obj' in report['commands']['analyze']['artifacts']
    assert [check['name'] for check in report['checks']['analyze']] == ['ellipse_inequality']
    assert (tmp_path / 'out' / 'surface.w.csv').exists()
    assert max(abs(x) for x in report['commands']['analyze']['ranges']['K']) < 1e-12


def test_command_line_overrides(tmp_path, capsys):
    path = _write(tmp_path, TORUS)
    out = tmp_path / 'elsewhere'

    status = cli(['analyze', '--config', str(path), '--out', str(out), '--grid', '20x18',
                  '--tol', 'QUADRATURE_TOLERANCE=1e-6'])

    assert status == 0
    provenance = json.loads((out / 'report.json').read_text())['provenance']
    assert (provenance['grid']['nu'], provenance['grid']['nv']) == (20, 18)
    assert provenance['tolerances']['quadrature_tolerance'] == 1e-6
    assert not (tmp_path / 'out').exists()


def test_failed_expectation_exits_with_one(tmp_path, capsys):
    path = _write(tmp_path, UNEQUAL_CURVES)

    assert cli(['classify', '--config', str(path)]) == 1

    summary = _summary(capsys)
    assert summary['pass'] is False
    assert summary['failed'] == ['classify: classification_strong']


def test_numerical_failure_exits_with_three(tmp_path, capsys):
    path = _write(tmp_path, UNEQUAL_CURVES + '\n[global-checks]\ninclude = ["gauss_bonnet"]\n')

    assert cli(['global-checks', '--config', str(path)]) == 3
    assert capsys.readouterr().err.startswith('error: global_checks: ')


def test_run_executes_the_command_list(tmp_path, capsys):
    path = _write(tmp_path, TORUS)

    assert cli(['run', '--config', str(path)]) == 0

    report = json.loads((tmp_path / 'out' / 'report.json').read_text())
    assert report['provenance']['commands'] == ['analyze', 'classify']
    assert sorted(report['commands']) == ['analyze', 'classify']
    assert report['commands']['classify']['summary']['strong'] is True


def test_run_needs_commands(tmp_path, capsys):
    path = _write(tmp_path, UNEQUAL_CURVES)

    assert cli(['run', '--config', str(path)]) == 2
    assert 'lists no commands' in capsys.readouterr().err


@pytest.mark.parametrize('argv', [[], ['analyze'], ['frobnicate']])
def test_usage_errors_exit_with_two(capsys, argv):
    assert cli(argv) == 2


@pytest.mark.parametrize('option', [
    ['--grid', '64'],
    ['--grid', '8x8'],
    ['--tol', 'bogus=1'],
    ['--tol', 'index_tolerance=-1'],
])
def test_bad_overrides_exit_with_two(tmp_path, capsys, option):
    path = _write(tmp_path, TORUS)

    assert cli(['analyze', '--config', str(path)] + option) == 2
    assert not (tmp_path / 'out').exists()


def test_malformed_configuration_reports_its_location(tmp_path, capsys):
    path = _write(tmp_path, 'commands = ["analyze"]\nname value\n')

    assert cli(['analyze', '--config', str(path)]) == 2
    assert f'{path}:2:' in capsys.readouterr().err

    with pytest.raises(ConfigError) as error:
        read_run_config(path)
    assert error.value.line == 2


def test_missing_configuration(tmp_path, capsys):
    assert cli(['analyze', '--config', str(tmp_path / 'absent.toml')]) == 2


def test_unknown_surface(tmp_path, capsys):
    path = _write(tmp_path, '[surface]\nname = "klein_bottle"\n')

    assert cli(['analyze', '--config', str(path)]) == 2
    assert 'klein_bottle' in capsys.readouterr().err


@pytest.mark.parametrize('data,message', [
    ({'surface': {'name': 'plane'}, 'colour': 1}, 'unknown key'),
    ({'surface': {}}, 'exactly one'),
    ({'surface': {'name': 'plane', 'callable': 'x:y'}}, 'exactly one'),
    ({'surface': {'callable': 'x:y'}}, 'need a domain'),
    ({'surface': {'name': 'plane'}, 'commands': 'analyze'}, 'list'),
    ({'surface': {'name': 'plane'}, 'commands': ['explode']}, 'unknown command'),
    ({'surface': {'name': 'plane'}, 'grid': {'domain': [1, 0, 0, 1]}}, 'u0 < u1'),
    ({'surface': {'name': 'plane'}, 'tolerances': {'eps_scale': 0}}, 'positive'),
])
def test_configuration_validation(data, message):
    with pytest.raises(ConfigError, match=message):
        parse_run_config(data)


def test_relative_output_directory_follows_the_configuration(tmp_path):
    config = parse_run_config({'surface': {'name': 'plane'}, 'output': {'dir': 'res'}},
                              tmp_path / 'lab.toml')

    assert config.output_dir == tmp_path / 'res'
    assert config.grid.nu == 64


def test_argument_parsers():
    assert parse_grid('32x48') == (32, 48)
    assert parse_tolerance(' Index_Tolerance = 0.1') == ('index_tolerance', 0.1)
    with pytest.raises(ConfigError):
        parse_tolerance('index_tolerance')
    with pytest.raises(ConfigError):
        parse_tolerance('index_tolerance=abc')


@pytest.mark.parametrize('threads', ['many', '0'])
def test_bad_thread_count_exits_with_two(tmp_path, capsys, monkeypatch, threads):
    path = _write(tmp_path, TORUS)
    monkeypatch.setenv('BONNETLAB_THREADS', threads)

    assert cli(['analyze', '--config', str(path)]) == 2
    assert 'BONNETLAB_THREADS' in capsys.readouterr().err


def test_thread_count_from_the_command_line(tmp_path, capsys):
    path = _write(tmp_path, TORUS)

    assert cli(['analyze', '--config', str(path), '--threads', '2']) == 0
    assert cli(['analyze', '--config', str(path), '--threads', 'two']) == 2


def test_mates_report_ellipse_and_distortion_checks(tmp_path, capsys):
    path = _write(tmp_path, '''
[surface]
name = "product_curves"

[grid]
nu = 33
nv = 33

[output]
dir = "out"

[mates]
sign = "-"
thetas = [3.141592653589793]
''')

    assert cli(['mates', '--config', str(path)]) == 0

    report = json.loads((tmp_path / 'out' / 'report.json').read_text())
    names = [check['name'] for check in report['checks']['mates']]
    assert 'mate_ellipse[0]' in names
    assert 'distortion_holomorphy[0]' in names
    assert all(check['pass'] for check in report['checks']['mates'])
