"""Analytic differential forms, de Rham maps, and continuous fractional
exterior derivatives used as oracles.

Component bases are fixed: 1-forms as (f_x, f_y, f_z) on (dx, dy, dz) and
2-forms as (f_yz, f_zx, f_xy) on (dy^dz, dz^dx, dx^dy).  With these bases
the wedge-sign bookkeeping of the exterior derivative in 3D reduces to the
familiar grad/curl/div component formulas, which are hardcoded below.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np
from scipy.special import roots_legendre

from .fraccalc import AXES, DEFAULT_QUAD, caputo_partial_batch

__all__ = [
    "MissingPartialError",
    "FormSpec",
    "COMPONENT_AXES",
    "de_rham",
    "continuous_d",
    "continuous_d_alpha",
    "rms_error_cochain",
    "polynomial_form",
    "get_field",
    "FIELD_NAMES",
]

# Index set J of each component, per degree.
COMPONENT_AXES = {
    0: ((),),
    1: (("x",), ("y",), ("z",)),
    2: (("y", "z"), ("z", "x"), ("x", "y")),
    3: (("x", "y", "z"),),
}


class MissingPartialError(KeyError):
    """Raised when a FormSpec lacks an analytic partial an oracle needs."""


def _norm_axes(axes):
    if isinstance(axes, str):
        axes = (axes,)
    return tuple(sorted(axes, key=AXES.index))


@dataclass(frozen=True)
class FormSpec:
    """Analytic p-form: component functions plus analytic partials.

    ``partials`` maps ``(component_index, axes)`` to the mixed partial of
    that component over the (distinct) axes, e.g. ``(0, ('x',))`` or
    ``(2, ('x', 'y'))``.  All callables are vectorized over ndarrays.
    """

    degree: int
    components: tuple
    partials: Mapping
    domain: tuple = (((0.0, 1.0)), ((0.0, 1.0)), ((0.0, 1.0)))
    name: str = ""

    def __post_init__(self):
        if self.degree not in COMPONENT_AXES:
            raise ValueError(f"degree must be in 0..3, got {self.degree}")
        if len(self.components) != len(COMPONENT_AXES[self.degree]):
            raise ValueError(
                f"degree {self.degree} needs {len(COMPONENT_AXES[self.degree])} components"
            )

    def component_values(self, i, x, y, z):
        return np.broadcast_to(
            np.asarray(self.components[i](x, y, z), dtype=float),
            np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z)),
        )

    def partial(self, i, axes):
        key = (i, _norm_axes(axes))
        try:
            return self.partials[key]
        except KeyError:
            raise MissingPartialError(
                f"form {self.name or '<anonymous>'} has no partial {key}"
            ) from None

    def lower_bound(self, axis):
        return self.domain[AXES.index(axis)][0]


def _check_grid_in_domain(omega, grid):
    for axis, (lo, hi) in zip(AXES, omega.domain):
        coords = grid.axis(axis)
        if coords[0] < lo - 1e-12 or coords[-1] > hi + 1e-12:
            raise ValueError(f"grid exceeds the form's domain along {axis}")


def _eval_chunked(fn, x, y, z, chunk=1 << 17):
    out = np.empty(x.size, dtype=float)
    for s in range(0, x.size, chunk):
        sl = slice(s, s + chunk)
        out[sl] = fn(x[sl], y[sl], z[sl])
    return out


def _axis_nodes(coords, points):
    """Gauss-Legendre nodes/weights on each interval of an axis partition."""
    xi, w = roots_legendre(points)
    lo, hi = coords[:-1], coords[1:]
    half = (hi - lo) / 2.0
    nodes = (lo + hi)[:, None] / 2.0 + half[:, None] * xi
    weights = half[:, None] * w
    return nodes, weights


def _tensor_rule(specs):
    """Flattened evaluation points and per-cell weights for a tensor rule.

    ``specs`` is one (nodes, weights) pair per axis, each of shape
    (cells_along_axis, nodes_per_cell); point axes use a single node of
    weight one.  Cells are ordered with x slowest, matching the complex.
    """
    (ax, wx), (ay, wy), (az, wz) = specs
    na, qa = ax.shape
    nb, qb = ay.shape
    nc, qc = az.shape
    shape = (na, nb, nc, qa, qb, qc)
    X = np.broadcast_to(ax[:, None, None, :, None, None], shape).ravel()
    Y = np.broadcast_to(ay[None, :, None, None, :, None], shape).ravel()
    Z = np.broadcast_to(az[None, None, :, None, None, :], shape).ravel()
    W = (
        wx[:, None, None, :, None, None]
        * wy[None, :, None, None, :, None]
        * wz[None, None, :, None, None, :]
    )
    W = np.broadcast_to(W, shape).reshape(na * nb * nc, qa * qb * qc)
    return X, Y, Z, W


def _point_spec(coords):
    return coords[:, None], np.ones((coords.size, 1))


def de_rham(omega, grid, quad=DEFAULT_QUAD):
    """Integrate a p-form over every p-cell (tensor Gauss-Legendre)."""
    p = omega.degree
    if hasattr(omega, "domain"):
        _check_grid_in_domain(omega, grid)
    axes_coords = {"x": grid.xs, "y": grid.ys, "z": grid.zs}
    pieces = []
    for i, J in enumerate(COMPONENT_AXES[p]):
        specs = []
        for axis in AXES:
            coords = axes_coords[axis]
            if axis in J:
                specs.append(_axis_nodes(coords, quad.points))
            else:
                specs.append(_point_spec(coords))
        X, Y, Z, W = _tensor_rule(specs)
        vals = _eval_chunked(lambda x, y, z: omega.component_values(i, x, y, z), X, Y, Z)
        pieces.append((vals.reshape(W.shape) * W).sum(axis=1))
    return np.concatenate(pieces)


class _DerivedForm:
    """(p+1)-form whose components are built from another form's partials."""

    def __init__(self, degree, component_fns, domain):
        self.degree = degree
        self._fns = component_fns
        self.domain = domain

    def component_values(self, i, x, y, z):
        return np.broadcast_to(
            np.asarray(self._fns[i](x, y, z), dtype=float),
            np.broadcast_shapes(np.shape(x), np.shape(y), np.shape(z)),
        )


def continuous_d(omega):
    """Classical exterior derivative d_p as an evaluator (grad/curl/div)."""
    p = omega.degree

    def dc(i, axis):
        return omega.partial(i, (axis,))

    if p == 0:
        fns = [dc(0, "x"), dc(0, "y"), dc(0, "z")]
    elif p == 1:
        fns = [
            lambda x, y, z: dc(2, "y")(x, y, z) - dc(1, "z")(x, y, z),
            lambda x, y, z: dc(0, "z")(x, y, z) - dc(2, "x")(x, y, z),
            lambda x, y, z: dc(1, "x")(x, y, z) - dc(0, "y")(x, y, z),
        ]
    elif p == 2:
        fns = [
            lambda x, y, z: dc(0, "x")(x, y, z)
            + dc(1, "y")(x, y, z)
            + dc(2, "z")(x, y, z)
        ]
    else:
        raise ValueError("continuous_d is defined for p in {0,1,2}")
    return _DerivedForm(p + 1, fns, omega.domain)


def continuous_d_alpha(omega, alpha, quad=DEFAULT_QUAD):
    """Caputo fractional exterior derivative d_p^alpha as an evaluator."""
    p = omega.degree

    def cap(i, axis):
        dg = omega.partial(i, (axis,))
        lower = omega.lower_bound(axis)

        def ev(x, y, z):
            return caputo_partial_batch(dg, axis, alpha, x, y, z, lower, quad)

        return ev

    if p == 0:
        fns = [cap(0, "x"), cap(0, "y"), cap(0, "z")]
    elif p == 1:
        cyx = cap(2, "y")
        czy = cap(1, "z")
        cxz = cap(0, "z")
        czx = cap(2, "x")
        cxy = cap(1, "x")
        cyz = cap(0, "y")
        fns = [
            lambda x, y, z: cyx(x, y, z) - czy(x, y, z),
            lambda x, y, z: cxz(x, y, z) - czx(x, y, z),
            lambda x, y, z: cxy(x, y, z) - cyz(x, y, z),
        ]
    elif p == 2:
        c0 = cap(0, "x")
        c1 = cap(1, "y")
        c2 = cap(2, "z")
        fns = [lambda x, y, z: c0(x, y, z) + c1(x, y, z) + c2(x, y, z)]
    else:
        raise ValueError("continuous_d_alpha is defined for p in {0,1,2}")
    return _DerivedForm(p + 1, fns, omega.domain)


def rms_error_cochain(a, b, v):
    """RMS of V^{-1}(a - b) for cochains a, b and positive measures v."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    if a.shape != b.shape or a.shape != v.shape:
        raise ValueError("cochain/measure length mismatch")
    if np.any(v <= 0.0):
        raise ValueError("measures must be strictly positive")
    r = (a - b) / v
    return float(np.sqrt(np.mean(r * r)))


# ---------------------------------------------------------------------------
# Field registry


def _poly_eval(terms):
    def ev(x, y, z):
        x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
        acc = 0.0
        for c, px, py, pz in terms:
            acc = acc + c * x**px * y**py * z**pz
        return acc * np.ones(np.broadcast_shapes(x.shape, y.shape, z.shape))

    return ev


def _poly_diff(terms, axis):
    k = AXES.index(axis)
    out = []
    for c, *powers in terms:
        if powers[k] == 0:
            continue
        new = list(powers)
        new[k] -= 1
        out.append((c * powers[k], *new))
    return out


def polynomial_form(degree, component_terms, domain=((0, 1), (0, 1), (0, 1)), name=""):
    """Build a FormSpec from polynomial components.

    ``component_terms`` is one list of ``(coeff, px, py, pz)`` tuples per
    component.  All distinct-axis mixed partials are generated, so these
    forms can feed every oracle including the fractional de Rham map.
    """
    components = tuple(_poly_eval(t) for t in component_terms)
    partials = {}
    subsets = [
        ("x",), ("y",), ("z",),
        ("x", "y"), ("x", "z"), ("y", "z"),
        ("x", "y", "z"),
    ]
    for i, terms in enumerate(component_terms):
        for axes in subsets:
            t = terms
            for ax in axes:
                t = _poly_diff(t, ax)
            partials[(i, axes)] = _poly_eval(t)
    return FormSpec(degree, components, partials, domain, name)


def _paper_scalar():
    def u(x, y, z):
        return 20.0 * (x - 0.5) * (y - 1.0) * z

    def f(x, y, z):
        return (
            -8.0 * x * y**2 * z
            - 3.0 * np.cos(u(x, y, z))
            + 4.0 * (x - 0.5) ** 2
            + (y - 0.5) ** 2
        )

    ux = lambda x, y, z: 20.0 * (y - 1.0) * z
    uy = lambda x, y, z: 20.0 * (x - 0.5) * z
    uz = lambda x, y, z: 20.0 * (x - 0.5) * (y - 1.0)

    def fx(x, y, z):
        return -8.0 * y**2 * z + 3.0 * np.sin(u(x, y, z)) * ux(x, y, z) + 8.0 * (x - 0.5)

    def fy(x, y, z):
        return -16.0 * x * y * z + 3.0 * np.sin(u(x, y, z)) * uy(x, y, z) + 2.0 * (y - 0.5)

    def fz(x, y, z):
        return -8.0 * x * y**2 + 3.0 * np.sin(u(x, y, z)) * uz(x, y, z)

    def fxy(x, y, z):
        w = u(x, y, z)
        return (
            -16.0 * y * z
            + 3.0 * np.cos(w) * ux(x, y, z) * uy(x, y, z)
            + 60.0 * z * np.sin(w)
        )

    def fxz(x, y, z):
        w = u(x, y, z)
        return (
            -8.0 * y**2
            + 3.0 * np.cos(w) * ux(x, y, z) * uz(x, y, z)
            + 60.0 * (y - 1.0) * np.sin(w)
        )

    def fyz(x, y, z):
        w = u(x, y, z)
        return (
            -16.0 * x * y
            + 3.0 * np.cos(w) * uy(x, y, z) * uz(x, y, z)
            + 60.0 * (x - 0.5) * np.sin(w)
        )

    partials = {
        (0, ("x",)): fx,
        (0, ("y",)): fy,
        (0, ("z",)): fz,
        (0, ("x", "y")): fxy,
        (0, ("x", "z")): fxz,
        (0, ("y", "z")): fyz,
    }
    return FormSpec(0, (f,), partials, name="paper-f")


def _paper_vector(degree):
    def F1(x, y, z):
        return y * np.sin(5 * x * y + z) + 3.0 * (x * z - 0.5) ** 2 - 3.0 * (y - 0.5) ** 2

    def F2(x, y, z):
        return z * np.cos(10 * x * y * z) + x * z - y**3

    def F3(x, y, z):
        return (
            2.0 * np.sin(5 * x**3 * y)
            + x * y * (z - 0.25)
            + np.cos(2 * x * y * z)
            - x
            + y**3 * z
        )

    def F1x(x, y, z):
        return 5.0 * y**2 * np.cos(5 * x * y + z) + 6.0 * z * (x * z - 0.5)

    def F1y(x, y, z):
        return (
            np.sin(5 * x * y + z)
            + 5.0 * x * y * np.cos(5 * x * y + z)
            - 6.0 * (y - 0.5)
        )

    def F1z(x, y, z):
        return y * np.cos(5 * x * y + z) + 6.0 * x * (x * z - 0.5)

    def F2x(x, y, z):
        return -10.0 * y * z**2 * np.sin(10 * x * y * z) + z

    def F2y(x, y, z):
        return -10.0 * x * z**2 * np.sin(10 * x * y * z) - 3.0 * y**2

    def F2z(x, y, z):
        return (
            np.cos(10 * x * y * z)
            - 10.0 * x * y * z * np.sin(10 * x * y * z)
            + x
        )

    def F3x(x, y, z):
        return (
            30.0 * x**2 * y * np.cos(5 * x**3 * y)
            + y * (z - 0.25)
            - 2.0 * y * z * np.sin(2 * x * y * z)
            - 1.0
        )

    def F3y(x, y, z):
        return (
            10.0 * x**3 * np.cos(5 * x**3 * y)
            + x * (z - 0.25)
            - 2.0 * x * z * np.sin(2 * x * y * z)
            + 3.0 * y**2 * z
        )

    def F3z(x, y, z):
        return x * y - 2.0 * x * y * np.sin(2 * x * y * z) + y**3

    comps = (F1, F2, F3)
    grads = ((F1x, F1y, F1z), (F2x, F2y, F2z), (F3x, F3y, F3z))
    partials = {}
    for i in range(3):
        for k, axis in enumerate(AXES):
            partials[(i, (axis,))] = grads[i][k]
    return FormSpec(degree, comps, partials, name="paper-F")


FIELD_NAMES = ("paper-f", "paper-F", "poly-vanish")


def get_field(name, degree):
    """Look up a registered test field at the requested form degree."""
    if name == "paper-f":
        if degree != 0:
            raise ValueError("paper-f is a scalar field (degree 0)")
        return _paper_scalar()
    if name == "paper-F":
        if degree not in (1, 2):
            raise ValueError("paper-F is used as a 1- or 2-form")
        return _paper_vector(degree)
    if name == "poly-vanish":
        # smooth components with vanishing lower-boundary traces on [0,1]^3
        terms = [
            [(1.0, 2, 2, 2), (0.5, 3, 1, 1)],
            [(1.0, 1, 3, 1), (-0.25, 2, 2, 1)],
            [(1.0, 1, 1, 2), (0.5, 1, 2, 2)],
        ]
        if degree == 0:
            return polynomial_form(0, [terms[0]], name="poly-vanish")
        if degree in (1, 2):
            return polynomial_form(degree, terms, name="poly-vanish")
        return polynomial_form(3, [terms[0]], name="poly-vanish")
    raise ValueError(f"unknown field {name!r}; known: {FIELD_NAMES}")
