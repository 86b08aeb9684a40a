"""3D regular cubical complex: cell enumeration, incidence, and measures.

Cell ordering convention (fixed, relied on by the Kronecker assembly in
:mod:`fracdec.operators`):

* nodes: lexicographic with x slowest and z fastest,
  ``index(i,j,k) = (i*(n_y+1) + j)*(n_z+1) + k`` (0-based);
* edges: three blocks ``[x-edges; y-edges; z-edges]``, each block
  lexicographic in (i,j,k) with x slowest;
* faces: three blocks ``[yz; xz; xy]`` (normals along +x, +y, +z), each
  block lexicographic;
* volumes: lexicographic.

Orientation convention: edges point along the positive axis, faces carry
the normal along the positive missing axis with counterclockwise boundary,
volumes are oriented outward.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import sparsekit

__all__ = [
    "InvalidGridError",
    "Grid3",
    "build_grid",
    "incidence",
    "generalized_incidence",
    "cell_measures",
    "cell_measure_diagonal",
    "node_difference_blocks",
    "face_corner_blocks",
    "volume_corner_block",
    "dump_incidence_csv",
]


class InvalidGridError(ValueError):
    """Raised for non-increasing axis arrays or degenerate bounds."""


def _validate_axis(name, arr):
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise InvalidGridError(f"axis {name} must be a 1D array of length >= 2")
    if np.any(np.diff(arr) <= 0.0):
        raise InvalidGridError(f"axis {name} must be strictly increasing")
    return arr


@dataclass(frozen=True)
class Grid3:
    """Axis partitions of a box into a regular cubical complex."""

    xs: np.ndarray
    ys: np.ndarray
    zs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "xs", _validate_axis("xs", self.xs))
        object.__setattr__(self, "ys", _validate_axis("ys", self.ys))
        object.__setattr__(self, "zs", _validate_axis("zs", self.zs))

    @property
    def n_x(self):
        return self.xs.size - 1

    @property
    def n_y(self):
        return self.ys.size - 1

    @property
    def n_z(self):
        return self.zs.size - 1

    @property
    def edge_counts(self):
        """(n_1x, n_1y, n_1z) following the block ordering [x; y; z]."""
        nx, ny, nz = self.n_x, self.n_y, self.n_z
        return (
            nx * (ny + 1) * (nz + 1),
            (nx + 1) * ny * (nz + 1),
            (nx + 1) * (ny + 1) * nz,
        )

    @property
    def face_counts(self):
        """(n_2yz, n_2xz, n_2xy) following the block ordering [yz; xz; xy]."""
        nx, ny, nz = self.n_x, self.n_y, self.n_z
        return (
            (nx + 1) * ny * nz,
            nx * (ny + 1) * nz,
            nx * ny * (nz + 1),
        )

    def num_cells(self, p):
        nx, ny, nz = self.n_x, self.n_y, self.n_z
        if p == 0:
            return (nx + 1) * (ny + 1) * (nz + 1)
        if p == 1:
            return sum(self.edge_counts)
        if p == 2:
            return sum(self.face_counts)
        if p == 3:
            return nx * ny * nz
        raise ValueError(f"p must be in 0..3, got {p}")

    @property
    def domain(self):
        return (
            (self.xs[0], self.xs[-1]),
            (self.ys[0], self.ys[-1]),
            (self.zs[0], self.zs[-1]),
        )

    def axis(self, name):
        return {"x": self.xs, "y": self.ys, "z": self.zs}[name]


def build_grid(bounds, subdivisions):
    """Uniformly subdivide a box; ``bounds`` is ((x0,x1),(y0,y1),(z0,z1))."""
    axes = []
    for (lo, hi), n in zip(bounds, subdivisions):
        if hi <= lo:
            raise InvalidGridError(f"degenerate bounds [{lo}, {hi}]")
        if n < 1:
            raise InvalidGridError(f"subdivisions must be >= 1, got {n}")
        axes.append(np.linspace(lo, hi, n + 1))
    return Grid3(*axes)


def _diff1d(n):
    """1D node-difference matrix, shape (n, n+1), rows (-1, +1)."""
    rows = np.repeat(np.arange(n), 2)
    cols = np.empty(2 * n, dtype=int)
    cols[0::2] = np.arange(n)
    cols[1::2] = np.arange(1, n + 1)
    vals = np.tile(np.array([-1, 1]), n)
    return sparsekit.from_triplets(rows, cols, vals, (n, n + 1))


def _eye(n):
    return sp.identity(n, dtype=int, format="csr")


def node_difference_blocks(grid):
    """The three row blocks (B_1x, B_1y, B_1z) of D_0, one per edge direction."""
    nx, ny, nz = grid.n_x, grid.n_y, grid.n_z
    dx, dy, dz = _diff1d(nx), _diff1d(ny), _diff1d(nz)
    ix, iy, iz = _eye(nx + 1), _eye(ny + 1), _eye(nz + 1)
    bx = sparsekit.kron(dx, sparsekit.kron(iy, iz))
    by = sparsekit.kron(ix, sparsekit.kron(dy, iz))
    bz = sparsekit.kron(ix, sparsekit.kron(iy, dz))
    return bx, by, bz


def face_corner_blocks(grid):
    """The row blocks (B_2yz, B_2xz, B_2xy) of the face-node incidence D_{0->2}."""
    nx, ny, nz = grid.n_x, grid.n_y, grid.n_z
    dx, dy, dz = _diff1d(nx), _diff1d(ny), _diff1d(nz)
    ix, iy, iz = _eye(nx + 1), _eye(ny + 1), _eye(nz + 1)
    byz = sparsekit.kron(ix, sparsekit.kron(dy, dz))
    bxz = sparsekit.kron(dx, sparsekit.kron(iy, dz))
    bxy = sparsekit.kron(dx, sparsekit.kron(dy, iz))
    return byz, bxz, bxy


def volume_corner_block(grid):
    """Volume-node incidence D_{0->3} with the tensor corner sign pattern."""
    dx, dy, dz = _diff1d(grid.n_x), _diff1d(grid.n_y), _diff1d(grid.n_z)
    return sparsekit.kron(dx, sparsekit.kron(dy, dz))


def incidence(grid, p):
    """Signed incidence matrix D_p (integer entries), p in {0, 1, 2}."""
    nx, ny, nz = grid.n_x, grid.n_y, grid.n_z
    dx, dy, dz = _diff1d(nx), _diff1d(ny), _diff1d(nz)
    ix, iy, iz = _eye(nx + 1), _eye(ny + 1), _eye(nz + 1)
    jx, jy, jz = _eye(nx), _eye(ny), _eye(nz)
    if p == 0:
        return sparsekit.vstack(node_difference_blocks(grid))
    if p == 1:
        n1x, n1y, n1z = grid.edge_counts
        zero = lambda m, n: sp.csr_matrix((m, n), dtype=int)
        n2yz, n2xz, n2xy = grid.face_counts
        # face normal +x: curl_x = d/dy Ez - d/dz Ey
        row_yz = sp.hstack(
            [
                zero(n2yz, n1x),
                -sparsekit.kron(ix, sparsekit.kron(jy, dz)),
                sparsekit.kron(ix, sparsekit.kron(dy, jz)),
            ]
        )
        # face normal +y: curl_y = d/dz Ex - d/dx Ez
        row_xz = sp.hstack(
            [
                sparsekit.kron(jx, sparsekit.kron(iy, dz)),
                zero(n2xz, n1y),
                -sparsekit.kron(dx, sparsekit.kron(iy, jz)),
            ]
        )
        # face normal +z: curl_z = d/dx Ey - d/dy Ex
        row_xy = sp.hstack(
            [
                -sparsekit.kron(jx, sparsekit.kron(dy, iz)),
                sparsekit.kron(dx, sparsekit.kron(jy, iz)),
                zero(n2xy, n1z),
            ]
        )
        return sparsekit.vstack([row_yz, row_xz, row_xy])
    if p == 2:
        return sparsekit.finalize(
            sp.hstack(
                [
                    sparsekit.kron(dx, sparsekit.kron(jy, jz)),
                    sparsekit.kron(jx, sparsekit.kron(dy, jz)),
                    sparsekit.kron(jx, sparsekit.kron(jy, dz)),
                ]
            )
        )
    raise ValueError(f"incidence is defined for p in {{0,1,2}}, got {p}")


def generalized_incidence(grid, q):
    """Node-to-q-cell signed incidence D_{0->q}, q in {2, 3}."""
    if q == 2:
        return sparsekit.vstack(face_corner_blocks(grid))
    if q == 3:
        return volume_corner_block(grid)
    raise ValueError(f"generalized incidence is defined for q in {{2,3}}, got {q}")


def cell_measure_diagonal(grid, p):
    """Lengths/areas/volumes of the p-cells as a vector in module ordering."""
    hx, hy, hz = np.diff(grid.xs), np.diff(grid.ys), np.diff(grid.zs)
    ox = np.ones(grid.n_x + 1)
    oy = np.ones(grid.n_y + 1)
    oz = np.ones(grid.n_z + 1)

    def tensor(a, b, c):
        return np.einsum("i,j,k->ijk", a, b, c).ravel()

    if p == 1:
        return np.concatenate(
            [tensor(hx, oy, oz), tensor(ox, hy, oz), tensor(ox, oy, hz)]
        )
    if p == 2:
        return np.concatenate(
            [tensor(ox, hy, hz), tensor(hx, oy, hz), tensor(hx, hy, oz)]
        )
    if p == 3:
        return tensor(hx, hy, hz)
    if p == 0:
        return np.ones(grid.num_cells(0))
    raise ValueError(f"cell measures are defined for p in {{0,1,2,3}}, got {p}")


def cell_measures(grid, p):
    """Diagonal matrix V_p of the p-cell measures."""
    return sp.diags(cell_measure_diagonal(grid, p)).tocsr()


def dump_incidence_csv(grid, p, path):
    """Debug dump of D_p as coordinate triplets."""
    sparsekit.save_triplets_csv(incidence(grid, p), path)
