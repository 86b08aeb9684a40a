"""Tests for the cubical complex: enumeration, incidence, measures.

The incidence matrices are checked against a brute-force oracle that
enumerates cells explicitly and walks each cell boundary with the stated
orientation convention, independent of the Kronecker assembly.
"""

import numpy as np
import pytest

from fracdec import grid as gridmod
from fracdec.grid import Grid3, InvalidGridError, build_grid


def _nonuniform():
    return Grid3(
        np.array([0.0, 0.3, 1.0]),
        np.array([0.0, 0.25, 0.5, 1.0]),
        np.array([0.0, 0.7, 1.0]),
    )


def _node(g, i, j, k):
    return (i * (g.n_y + 1) + j) * (g.n_z + 1) + k


def _edge(g, direction, i, j, k):
    nx, ny, nz = g.n_x, g.n_y, g.n_z
    n1x, n1y, _ = g.edge_counts
    if direction == "x":
        return (i * (ny + 1) + j) * (nz + 1) + k
    if direction == "y":
        return n1x + (i * ny + j) * (nz + 1) + k
    return n1x + n1y + (i * (ny + 1) + j) * nz + k


def _face(g, plane, i, j, k):
    nx, ny, nz = g.n_x, g.n_y, g.n_z
    n2yz, n2xz, _ = g.face_counts
    if plane == "yz":
        return (i * ny + j) * nz + k
    if plane == "xz":
        return n2yz + (i * (ny + 1) + j) * nz + k
    return n2yz + n2xz + (i * ny + j) * (nz + 1) + k


def _volume(g, i, j, k):
    return (i * g.n_y + j) * g.n_z + k


@pytest.mark.parametrize("shape", [(1, 1, 1), (2, 3, 2), (3, 1, 4)])
def test_cell_counts(shape):
    nx, ny, nz = shape
    g = build_grid(((0, 1), (0, 2), (0, 3)), shape)
    assert g.num_cells(0) == (nx + 1) * (ny + 1) * (nz + 1)
    assert g.num_cells(1) == (
        nx * (ny + 1) * (nz + 1) + (nx + 1) * ny * (nz + 1) + (nx + 1) * (ny + 1) * nz
    )
    assert g.num_cells(2) == (
        (nx + 1) * ny * nz + nx * (ny + 1) * nz + nx * ny * (nz + 1)
    )
    assert g.num_cells(3) == nx * ny * nz


def test_incidence_d0_brute_force():
    g = _nonuniform()
    d0 = gridmod.incidence(g, 0).toarray()
    want = np.zeros_like(d0)
    for direction, bump in (("x", (1, 0, 0)), ("y", (0, 1, 0)), ("z", (0, 0, 1))):
        ni = g.n_x if direction == "x" else g.n_x + 1
        nj = g.n_y if direction == "y" else g.n_y + 1
        nk = g.n_z if direction == "z" else g.n_z + 1
        for i in range(ni):
            for j in range(nj):
                for k in range(nk):
                    row = _edge(g, direction, i, j, k)
                    want[row, _node(g, i, j, k)] -= 1
                    want[row, _node(g, i + bump[0], j + bump[1], k + bump[2])] += 1
    np.testing.assert_array_equal(d0, want)


def test_incidence_d1_brute_force():
    g = _nonuniform()
    d1 = gridmod.incidence(g, 1).toarray()
    want = np.zeros_like(d1)
    # counterclockwise boundary loop about the positive face normal
    for i in range(g.n_x + 1):
        for j in range(g.n_y):
            for k in range(g.n_z):
                row = _face(g, "yz", i, j, k)
                want[row, _edge(g, "y", i, j, k)] += 1
                want[row, _edge(g, "z", i, j + 1, k)] += 1
                want[row, _edge(g, "y", i, j, k + 1)] -= 1
                want[row, _edge(g, "z", i, j, k)] -= 1
    for i in range(g.n_x):
        for j in range(g.n_y + 1):
            for k in range(g.n_z):
                row = _face(g, "xz", i, j, k)
                want[row, _edge(g, "z", i, j, k)] += 1
                want[row, _edge(g, "x", i, j, k + 1)] += 1
                want[row, _edge(g, "z", i + 1, j, k)] -= 1
                want[row, _edge(g, "x", i, j, k)] -= 1
    for i in range(g.n_x):
        for j in range(g.n_y):
            for k in range(g.n_z + 1):
                row = _face(g, "xy", i, j, k)
                want[row, _edge(g, "x", i, j, k)] += 1
                want[row, _edge(g, "y", i + 1, j, k)] += 1
                want[row, _edge(g, "x", i, j + 1, k)] -= 1
                want[row, _edge(g, "y", i, j, k)] -= 1
    np.testing.assert_array_equal(d1, want)


def test_incidence_d2_brute_force():
    g = _nonuniform()
    d2 = gridmod.incidence(g, 2).toarray()
    want = np.zeros_like(d2)
    for i in range(g.n_x):
        for j in range(g.n_y):
            for k in range(g.n_z):
                row = _volume(g, i, j, k)
                want[row, _face(g, "yz", i + 1, j, k)] += 1
                want[row, _face(g, "yz", i, j, k)] -= 1
                want[row, _face(g, "xz", i, j + 1, k)] += 1
                want[row, _face(g, "xz", i, j, k)] -= 1
                want[row, _face(g, "xy", i, j, k + 1)] += 1
                want[row, _face(g, "xy", i, j, k)] -= 1
    np.testing.assert_array_equal(d2, want)


@pytest.mark.parametrize("shape", [(1, 1, 1), (2, 2, 2), (2, 3, 4)])
def test_exact_sequence_integer(shape):
    g = build_grid(((0, 1),) * 3, shape)
    d0 = gridmod.incidence(g, 0)
    d1 = gridmod.incidence(g, 1)
    d2 = gridmod.incidence(g, 2)
    assert (d1 @ d0).nnz == 0  # integer arithmetic: exactly zero
    assert (d2 @ d1).nnz == 0


def test_generalized_incidence_sign_products():
    g = _nonuniform()
    d03 = gridmod.generalized_incidence(g, 3).toarray()
    want = np.zeros_like(d03)
    for i in range(g.n_x):
        for j in range(g.n_y):
            for k in range(g.n_z):
                for di in (0, 1):
                    for dj in (0, 1):
                        for dk in (0, 1):
                            sign = (-1) ** (3 - di - dj - dk)
                            col = _node(g, i + di, j + dj, k + dk)
                            want[_volume(g, i, j, k), col] = sign
    np.testing.assert_array_equal(d03, want)
    # each q-cell touches exactly 2^q corner nodes
    d02 = gridmod.generalized_incidence(g, 2)
    assert d02.nnz == 4 * g.num_cells(2)
    assert np.all(np.abs(d02.toarray()).sum(axis=1) == 4)


def test_cell_measures_brute_force():
    g = _nonuniform()
    hx, hy, hz = np.diff(g.xs), np.diff(g.ys), np.diff(g.zs)
    v3 = gridmod.cell_measure_diagonal(g, 3)
    for i in range(g.n_x):
        for j in range(g.n_y):
            for k in range(g.n_z):
                assert v3[_volume(g, i, j, k)] == hx[i] * hy[j] * hz[k]
    v1 = gridmod.cell_measure_diagonal(g, 1)
    assert v1[_edge(g, "y", 2, 1, 0)] == hy[1]
    v2 = gridmod.cell_measure_diagonal(g, 2)
    assert v2[_face(g, "xz", 1, 0, 1)] == hx[1] * hz[1]
    assert np.all(gridmod.cell_measure_diagonal(g, 0) == 1.0)
    total = gridmod.cell_measure_diagonal(g, 3).sum()
    assert total == pytest.approx(1.0)  # unit box volume


def test_measures_match_diagonal_matrix():
    g = _nonuniform()
    for p in range(4):
        np.testing.assert_array_equal(
            gridmod.cell_measures(g, p).diagonal(), gridmod.cell_measure_diagonal(g, p)
        )


def test_grid_validation():
    with pytest.raises(InvalidGridError):
        Grid3(np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(InvalidGridError):
        Grid3(np.array([1.0]), np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    with pytest.raises(InvalidGridError):
        build_grid(((0, 0),) * 3, (2, 2, 2))
    with pytest.raises(InvalidGridError):
        build_grid(((0, 1),) * 3, (2, 0, 2))


def test_dump_incidence_csv(tmp_path):
    from fracdec import sparsekit

    g = build_grid(((0, 1),) * 3, (2, 2, 2))
    path = tmp_path / "d0.csv"
    gridmod.dump_incidence_csv(g, 0, path)
    back = sparsekit.load_triplets_csv(path, (g.num_cells(1), g.num_cells(0)))
    assert (back != gridmod.incidence(g, 0)).nnz == 0
