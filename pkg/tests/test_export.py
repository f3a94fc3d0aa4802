import json
import math

import numpy as np

from bonnetlab.dataobjects import CheckResult, SampleGrid
from bonnetlab.dataobjects.run import Report
from bonnetlab.export import (
    artifact_names,
    downsample,
    grid_triangles,
    read_polylines,
    report_json,
    to_jsonable,
    write_grid_csv,
    write_obj,
    write_polylines,
    write_report,
)


def test_open_grid_triangles():
    faces = grid_triangles(3, 4)

    assert faces.shape == (2 * 2 * 3, 3)
    assert faces.min() == 0 and faces.max() == 11
    assert tuple(faces[0]) == (0, 4, 5)
    assert tuple(faces[1]) == (0, 5, 1)


def test_periodic_grid_triangles_wrap_around():
    faces = grid_triangles(3, 4, periodic_u=True, periodic_v=True)

    assert faces.shape == (2 * 3 * 4, 3)
    assert faces.max() == 11
    # last cell closes onto vertex (0, 0)
    assert tuple(faces[-2]) == (11, 3, 0)


def test_obj_with_fourth_coordinate_sidecar(tmp_path):
    grid = SampleGrid(2, 3)
    positions = np.arange(24, dtype=float).reshape(2, 3, 4)

    obj, sidecar = write_obj(tmp_path / 'mesh' / 'surface.obj', positions, grid)

    lines = obj.read_text().splitlines()
    assert lines[0] == '# bonnetlab mesh 2x3'
    assert lines[1] == 'v 0 1 2'
    assert sum(line.startswith('v ') for line in lines) == 6
    assert sum(line.startswith('f ') for line in lines) == 4
    assert lines[-1] == 'f 2 6 3'
    assert sidecar.name == 'surface.w.csv'
    assert sidecar.read_text().splitlines() == ['vertex,w', '1,3', '2,7', '3,11', '4,15',
                                               '5,19', '6,23']


def test_grid_csv_leaves_masked_cells_empty(tmp_path):
    grid = SampleGrid(2, 2)
    path = write_grid_csv(tmp_path / 'b.csv', grid, np.array([[1.0, np.nan], [0.5, 2.0]]))

    assert path.read_text().splitlines() == ['u,v,value', '0,0,1', '0,1,', '1,0,0.5', '1,1,2']


def test_polylines_round_trip(tmp_path):
    lines = [np.array([[0.0, 0.25], [0.5, 0.75]]), np.array([[1.0, 1.5]])]
    path = write_polylines(tmp_path / 'lines.csv', lines)

    read = read_polylines(path)
    assert len(read) == 2
    for a, b in zip(read, lines):
        np.testing.assert_allclose(a, b)


def test_jsonable_conversion():
    assert to_jsonable(np.float64(math.nan)) is None
    assert to_jsonable(math.inf) is None
    assert to_jsonable(np.array([1, 2])) == [1, 2]
    assert to_jsonable(np.bool_(True)) is True
    assert to_jsonable(1.5 - 2.0j) == [1.5, -2.0]
    assert to_jsonable({1: (np.int64(3),)}) == {'1': [3]}


def test_downsample_keeps_at_most_the_limit():
    values = np.zeros((300, 50))

    assert downsample(values, 128).shape == (100, 50)
    assert downsample(np.zeros(7), 2).shape == (7,)


def test_report_json(tmp_path):
    report = Report(
        provenance={'grid': [8, 8]},
        blocks={'analyze': {'sup_B_minus': math.nan}},
        checks={'analyze': [CheckResult.bound('gauss_residual', 2e-9, 1e-5)],
                'verify': [CheckResult.compare('index_sum', 1.5, 2.0, 0.05)]},
    )

    payload = json.loads(report_json(report))
    assert payload['pass'] is False
    assert payload['commands']['analyze']['sup_B_minus'] is None
    index_sum = payload['checks']['verify'][0]
    assert index_sum['pass'] is False
    assert index_sum['abs_error'] == 0.5
    assert index_sum['kind'] == 'abs'

    path = write_report(report, tmp_path / 'out')
    assert path.name == 'report.json'
    assert path.read_text() == report_json(report)


def test_artifact_names_are_relative_and_sorted(tmp_path):
    paths = [tmp_path / 'surface.obj', tmp_path / 'csv' / 'B.csv']

    assert artifact_names(paths, tmp_path) == ['csv/B.csv', 'surface.obj']
