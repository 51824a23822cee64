import numpy as np
import pytest

from robin_ssn.vtk import read_point_data, write_boundary_vtk, write_volume_vtk


def test_volume_roundtrip(tmp_path, mesh2):
    y = np.random.default_rng(0).standard_normal(mesh2.n_vertices)
    path = tmp_path / "v.vtk"
    write_volume_vtk(path, mesh2, {"y": y})
    pts, cells, fields = read_point_data(path)
    np.testing.assert_array_equal(pts, mesh2.vertices)
    np.testing.assert_array_equal(cells, mesh2.tets)
    np.testing.assert_array_equal(fields["y"], y)
    text = path.read_text()
    assert text.startswith("# vtk DataFile Version 3.0\n")
    assert text.count("\n10\n") >= 1 and "\r" not in text


def test_boundary_roundtrip(tmp_path, mesh2):
    u = np.linspace(0, 1, mesh2.n_boundary)
    path = tmp_path / "b.vtk"
    write_boundary_vtk(path, mesh2, {"u": u})
    pts, cells, fields = read_point_data(path)
    assert pts.shape == (mesh2.n_boundary, 3)
    assert cells.shape == (len(mesh2.boundary_faces), 3)
    np.testing.assert_array_equal(pts[cells], mesh2.vertices[mesh2.boundary_faces])
    np.testing.assert_array_equal(fields["u"], u)


def test_wrong_field_length(tmp_path, mesh2):
    with pytest.raises(ValueError):
        write_volume_vtk(tmp_path / "x.vtk", mesh2, {"y": np.zeros(3)})
