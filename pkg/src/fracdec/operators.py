"""Assembly and application of the fractional discrete exterior calculus.

The discrete fractional integral on p-cochains factors as

    dI_p^beta = B_p  M_p^(1+beta)  V_p^(-1),

where B_p collects signed node sums per cell, M_p^(1+beta) is a Kronecker
product of 1D kernel matrices (one per axis in each cell's index set), and
V_p holds the cell measures.  Under the fixed cell ordering dI_p^beta is
lower triangular with positive diagonal, so its inverse is only ever
applied through forward substitution.  The fractional discrete exterior
derivative is

    apply_fdec(p, c) = dI_{p+1}^{1-alpha} D_p (dI_p^{1-alpha})^{-1} c.
"""

from __future__ import annotations

import warnings
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from . import grid as gridmod
from . import sparsekit
from .fraccalc import (
    AXES,
    DEFAULT_QUAD,
    FracOrderError,
    gamma_fn,
    rl_partial_batch,
    rl_integral_batch,
)
from .forms import COMPONENT_AXES, _DerivedForm, de_rham

__all__ = [
    "kernel_matrix_1d",
    "assemble_B",
    "assemble_M",
    "assemble_V",
    "assemble_dI",
    "assemble_drlD",
    "OperatorSet",
    "apply_fdec",
    "apply_fdec_variant",
    "fractional_de_rham",
    "BoundaryTraceError",
    "operator_metadata",
]

VARIANTS = ("paper", "drlD-right", "drlD-both")

# (axis membership pattern, block labels) per degree: which axes each
# cell-block integrates over.  Matches COMPONENT_AXES and the cell ordering.
_BLOCK_AXES = {
    1: (("x",), ("y",), ("z",)),
    2: (("y", "z"), ("x", "z"), ("x", "y")),
    3: (("x", "y", "z"),),
}


class BoundaryTraceError(ValueError):
    """Raised when the fractional de Rham map needs a vanishing trace."""


def kernel_matrix_1d(coords, order):
    """1D fractional-integration kernel matrix of the given exponent.

    Shape (n+1, n); entry (i, i') for i' < i equals
    ((a_i - a_{i'})^order - (a_i - a_{i'+1})^order) / Gamma(order + 1),
    strictly lower triangular with positive entries.
    """
    if order <= 0.0:
        raise FracOrderError(f"kernel exponent must be positive, got {order}")
    coords = np.asarray(coords, dtype=float)
    n = coords.size - 1
    rows, cols, vals = [], [], []
    gam = gamma_fn(order + 1.0)
    for i in range(1, n + 1):
        left = (coords[i] - coords[:i]) ** order
        right = (coords[i] - coords[1 : i + 1]) ** order
        v = (left - right) / gam
        rows.extend([i] * i)
        cols.extend(range(i))
        vals.extend(v)
    return sparsekit.from_triplets(rows, cols, vals, (n + 1, n))


def _identity(n):
    return sp.identity(n, format="csr")


def _axis_factors(grid, axes, order):
    """Kronecker factors (one per axis): kernel matrix on axes in ``axes``,
    node-sized identity elsewhere."""
    factors = []
    for axis in AXES:
        coords = grid.axis(axis)
        if axis in axes:
            factors.append(kernel_matrix_1d(coords, order))
        else:
            factors.append(_identity(coords.size))
    return factors


def _kron3(a, b, c):
    return sparsekit.kron(a, sparsekit.kron(b, c))


def assemble_M(grid, p, beta, order=None):
    """The M_p matrix with kernel exponent ``order`` (default 1 + beta).

    p=1, 2: block diagonal over the three cell directions; p=3: a single
    Kronecker product of the three 1D kernel matrices.
    """
    if p not in (1, 2, 3):
        raise ValueError(f"assemble_M is defined for p in {{1,2,3}}, got {p}")
    if order is None:
        if beta < 0.0:
            raise FracOrderError(f"integral order beta must be >= 0, got {beta}")
        order = 1.0 + beta
    blocks = [
        _kron3(*_axis_factors(grid, axes, order)) for axes in _BLOCK_AXES[p]
    ]
    return blocks[0] if p == 3 else sparsekit.block_diag(blocks)


def assemble_B(grid, p):
    """The B_p matrix: block-diagonal signed node sums per p-cell."""
    if p == 1:
        return sparsekit.block_diag(gridmod.node_difference_blocks(grid))
    if p == 2:
        return sparsekit.block_diag(gridmod.face_corner_blocks(grid))
    if p == 3:
        return gridmod.volume_corner_block(grid)
    raise ValueError(f"assemble_B is defined for p in {{1,2,3}}, got {p}")


def assemble_V(grid, p):
    """Diagonal of the cell-measure matrix V_p as a vector."""
    return gridmod.cell_measure_diagonal(grid, p)


def assemble_dI(grid, p, beta):
    """Discrete fractional integral dI_p^beta = B_p M_p^(1+beta) V_p^(-1)."""
    if p == 0:
        return _identity(grid.num_cells(0))
    bm = sparsekit.matmul(assemble_B(grid, p), assemble_M(grid, p, beta))
    return sparsekit.scale_cols_by_inverse_diagonal(bm, assemble_V(grid, p))


def assemble_drlD(grid, p, beta):
    """Discrete RL derivative variant: kernel exponent 1 - beta per axis."""
    if not 0.0 < beta < 1.0:
        raise FracOrderError(f"drlD requires beta in (0, 1), got {beta}")
    if p == 0:
        return _identity(grid.num_cells(0))
    if p not in (1, 2, 3):
        raise ValueError(f"assemble_drlD is defined for p in {{0,1,2,3}}, got {p}")
    bm = sparsekit.matmul(
        assemble_B(grid, p), assemble_M(grid, p, beta, order=1.0 - beta)
    )
    diag = bm.diagonal()
    if np.any(np.abs(diag) < 1e-12):
        warnings.warn(
            "drlD diagonal below 1e-12; the variant operators are ill-conditioned",
            RuntimeWarning,
        )
    return sparsekit.scale_cols_by_inverse_diagonal(bm, assemble_V(grid, p))


class OperatorSet:
    """All assembled matrices for one grid and one integral order beta."""

    def __init__(self, grid, beta):
        if beta < 0.0:
            raise FracOrderError(f"beta must be >= 0, got {beta}")
        self.grid = grid
        self.beta = float(beta)
        self._cache = {}

    def _get(self, key, builder):
        if key not in self._cache:
            self._cache[key] = builder()
        return self._cache[key]

    def D(self, p):
        return self._get(("D", p), lambda: gridmod.incidence(self.grid, p))

    def B(self, p):
        return self._get(("B", p), lambda: assemble_B(self.grid, p))

    def M(self, p):
        return self._get(("M", p), lambda: assemble_M(self.grid, p, self.beta))

    def V(self, p):
        return self._get(("V", p), lambda: assemble_V(self.grid, p))

    def dI(self, p):
        return self._get(("dI", p), lambda: assemble_dI(self.grid, p, self.beta))

    def drlD(self, p):
        return self._get(
            ("drlD", p), lambda: assemble_drlD(self.grid, p, self.beta)
        )

    def solve_dI(self, p, c):
        if p == 0:
            return np.asarray(c, dtype=float)
        return sparsekit.lower_triangular_solve(self.dI(p), c)


def apply_fdec(opset, p, c):
    """Apply the fractional discrete exterior derivative D_p^alpha.

    ``opset`` must be assembled at beta = 1 - alpha.
    """
    if p not in (0, 1, 2):
        raise ValueError(f"apply_fdec is defined for p in {{0,1,2}}, got {p}")
    u = opset.solve_dI(p, c)
    return opset.dI(p + 1) @ (opset.D(p) @ u)


def apply_fdec_variant(opset, variant, p, c):
    """Apply one of the three FDEC constructions (see module docstring)."""
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if variant == "paper":
        return apply_fdec(opset, p, c)
    u = np.asarray(c, dtype=float) if p == 0 else opset.drlD(p) @ np.asarray(c, float)
    w = opset.D(p) @ u
    if variant == "drlD-right":
        return opset.dI(p + 1) @ w
    return sparsekit.lower_triangular_solve(opset.drlD(p + 1), w)


def _sample_trace(component, axis, domain, samples=5):
    """Max |component| on the lower boundary face of ``axis``."""
    grids = []
    for ax, (lo, hi) in zip(AXES, domain):
        if ax == axis:
            grids.append(np.array([lo]))
        else:
            grids.append(np.linspace(lo, hi, samples))
    X, Y, Z = np.meshgrid(*grids, indexing="ij")
    return float(np.max(np.abs(component(X, Y, Z))))


def _iterated_rl_component(omega, i, axes, beta, quad):
    """Pointwise evaluator of the iterated RL derivative of order ``beta``
    over ``axes`` applied to component ``i`` of ``omega``.

    Single-axis case handles a nonzero lower-boundary trace through the
    Caputo-plus-boundary-term relation.  The multi-axis case requires
    vanishing traces, where the iterated derivative reduces to the tensor
    fractional integral of the mixed partial.
    """
    axes = tuple(axes)
    comp = omega.components[i]
    if len(axes) == 1:
        axis = axes[0]
        dg = omega.partial(i, axes)
        lower = omega.lower_bound(axis)

        def ev(x, y, z):
            return rl_partial_batch(comp, dg, axis, beta, x, y, z, lower, quad)

        return ev

    for axis in axes:
        trace = _sample_trace(comp, axis, omega.domain)
        if trace > 1e-12:
            raise BoundaryTraceError(
                f"component {i} has nonzero trace ({trace:.2e}) on the lower "
                f"{axis} boundary; the iterated RL derivative diverges there"
            )
    mixed = omega.partial(i, axes)
    lowers = {axis: omega.lower_bound(axis) for axis in axes}

    nodes_per_axis = quad.points * quad.panels

    def ev(x, y, z):
        pts = {"x": np.asarray(x, float), "y": np.asarray(y, float), "z": np.asarray(z, float)}
        shape = np.broadcast_shapes(*(pts[a].shape for a in AXES))
        pts = {a: np.broadcast_to(pts[a], shape).ravel() for a in AXES}
        count = pts["x"].size

        def integrate(remaining, fixed):
            axis = remaining[0]

            def g(nodes):
                # nodes has one extra trailing dim per consumed axis
                args = dict(fixed)
                args[axis] = nodes
                full = {}
                ndim = nodes.ndim
                for a in AXES:
                    arr = args[a]
                    full[a] = arr.reshape(arr.shape + (1,) * (ndim - arr.ndim))
                if len(remaining) == 1:
                    return mixed(full["x"], full["y"], full["z"])
                return integrate(remaining[1:], full)

            return rl_integral_batch(g, 1.0 - beta, lowers[axis], fixed[axis], quad)

        # keep points * nodes^axes bounded: the tensor of quadrature nodes
        # is materialized per block, not for the whole point batch
        block = max(1, (1 << 22) // nodes_per_axis ** len(axes))
        out = np.empty(count)
        for start in range(0, count, block):
            sl = slice(start, start + block)
            out[sl] = integrate(axes, {a: pts[a][sl] for a in AXES})
        return out.reshape(shape)

    return ev


def fractional_de_rham(omega, grid, alpha, quad=DEFAULT_QUAD, opset=None):
    """Fractional de Rham map R_p^alpha = dI_p^(1-alpha) R_p RL_p^(1-alpha)."""
    if not 0.0 < alpha < 1.0:
        raise FracOrderError(f"alpha must be in (0, 1), got {alpha}")
    p = omega.degree
    if p == 0:
        return de_rham(omega, grid, quad)
    beta = 1.0 - alpha
    fns = [
        _iterated_rl_component(omega, i, J, beta, quad)
        for i, J in enumerate(COMPONENT_AXES[p])
    ]
    transformed = _DerivedForm(p, fns, omega.domain)
    c = de_rham(transformed, grid, quad)
    if opset is None:
        opset = OperatorSet(grid, beta)
    return opset.dI(p) @ c


def operator_metadata(grid, p, beta):
    """Sizes and nonzero counts of the assembled matrices, as a dict."""
    b = assemble_B(grid, p)
    m = assemble_M(grid, p, beta)
    return {
        "p": p,
        "beta": beta,
        "n_cells": grid.num_cells(p),
        "B_shape": list(b.shape),
        "B_nnz": int(b.nnz),
        "M_shape": list(m.shape),
        "M_nnz": int(m.nnz),
    }
