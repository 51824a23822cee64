"""Legacy ASCII VTK output for inspection in ParaView/VisIt."""

from __future__ import annotations

import numpy as np

from .mesh import Mesh

VTK_TRIANGLE = 5
VTK_TETRA = 10


def _write(path, title, points, cells, cell_type, point_data):
    npts = len(points)
    with open(path, "w", newline="\n") as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write(f"{title}\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {npts} double\n")
        for p in points:
            f.write(f"{p[0]:.17g} {p[1]:.17g} {p[2]:.17g}\n")
        k = cells.shape[1]
        f.write(f"CELLS {len(cells)} {len(cells) * (k + 1)}\n")
        for c in cells:
            f.write(f"{k} " + " ".join(str(int(i)) for i in c) + "\n")
        f.write(f"CELL_TYPES {len(cells)}\n")
        f.write(f"{cell_type}\n" * len(cells))
        if point_data:
            f.write(f"POINT_DATA {npts}\n")
            for name, values in point_data.items():
                values = np.asarray(values, dtype=float)
                if values.shape != (npts,):
                    raise ValueError(f"field {name!r} has {values.shape} values, expected {npts}")
                f.write(f"SCALARS {name} double 1\n")
                f.write("LOOKUP_TABLE default\n")
                for v in values:
                    f.write(f"{v:.17g}\n")


def write_volume_vtk(path, mesh: Mesh, point_data=None, title="robin_ssn volume fields"):
    """Tetrahedral mesh with nodal volume fields."""
    _write(path, title, mesh.vertices, mesh.tets, VTK_TETRA, point_data or {})


def write_boundary_vtk(path, mesh: Mesh, point_data=None, title="robin_ssn boundary fields"):
    """Boundary triangulation with nodal boundary fields (e.g. the control)."""
    faces = mesh.boundary_slot[mesh.boundary_faces]
    _write(path, title, mesh.boundary_coordinates(), faces, VTK_TRIANGLE, point_data or {})


def read_point_data(path):
    """Minimal reader for files written by this module: returns points, cells and fields."""
    with open(path) as f:
        tokens = f.read().split("\n")
    it = iter(tokens)
    points, cells, fields = None, None, {}
    for line in it:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "POINTS":
            n = int(parts[1])
            points = np.array([[float(t) for t in next(it).split()] for _ in range(n)])
        elif parts[0] == "CELLS":
            n = int(parts[1])
            cells = np.array([[int(t) for t in next(it).split()[1:]] for _ in range(n)])
        elif parts[0] == "SCALARS":
            next(it)  # lookup table
            fields[parts[1]] = np.array([float(next(it)) for _ in range(len(points))])
    return points, cells, fields
