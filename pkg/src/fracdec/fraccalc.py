"""Scalar fractional-calculus kernel: gamma, singular quadrature, oracles.

The Riemann-Liouville integral of order ``beta`` from ``a`` to ``x`` is
computed with a composite rule on ``[a, x]``: Gauss-Legendre on the
interior panels and Gauss-Jacobi with the exact kernel exponent on the
panel touching the singular endpoint ``x``.  Because the panels scale
with ``x - a``, the rule reduces to fixed reference nodes ``sigma`` in
``[0, 1]`` and weights ``w`` with

    I^beta g (x) = (x - a)^beta / Gamma(beta) * sum_k w_k g(a + (x-a) sigma_k),

which lets a single rule evaluate the integral at many points at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gamma as _scipy_gamma
from scipy.special import roots_jacobi, roots_legendre

__all__ = [
    "FracOrderError",
    "SingularityError",
    "QuadratureSpec",
    "gamma_fn",
    "rl_integral_1d",
    "rl_integral_batch",
    "caputo_partial",
    "caputo_partial_batch",
    "rl_partial",
    "rl_partial_batch",
]

AXES = ("x", "y", "z")


class FracOrderError(ValueError):
    """Raised for fractional orders outside the supported range."""


class SingularityError(ValueError):
    """Raised when an RL derivative is evaluated at a divergent point."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite quadrature budget for the fractional integrals."""

    points: int = 16
    panels: int = 4

    def __post_init__(self):
        if self.points < 2:
            raise ValueError("quadrature needs at least 2 points per panel")
        if self.panels < 1:
            raise ValueError("quadrature needs at least 1 panel")


DEFAULT_QUAD = QuadratureSpec()


def gamma_fn(x):
    """Gamma function for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise FracOrderError("gamma_fn requires x > 0")
    out = _scipy_gamma(x)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=256)
def _reference_rule(beta, lam, points, panels):
    """Reference nodes/weights on [0, 1] for the scaled kernel.

    Integrates (1 - sigma)^(beta - 1) g(sigma) with Gauss-Jacobi on the last
    panel and Gauss-Legendre elsewhere.  A nonzero ``lam`` declares that
    ``g(sigma) ~ sigma^lam`` near 0; the first panel then uses Gauss-Jacobi
    with weight sigma^lam, folding the sigma^(-lam) factor into the weights.
    """
    if lam != 0.0 and panels < 2:
        raise ValueError("a singular lower endpoint needs at least 2 panels")
    sigmas = []
    weights = []
    first_interior = 0
    if lam != 0.0:
        xj0, wj0 = roots_jacobi(points, 0.0, lam)
        s = (xj0 + 1.0) / (2.0 * panels)
        sigmas.append(s)
        weights.append(
            wj0 * (2.0 * panels) ** (-1.0 - lam) * (1.0 - s) ** (beta - 1.0) * s ** (-lam)
        )
        first_interior = 1
    if panels - 1 > first_interior:
        xi, wl = roots_legendre(points)
        for q in range(first_interior, panels - 1):
            s = (q + (xi + 1.0) / 2.0) / panels
            sigmas.append(s)
            weights.append(wl / (2.0 * panels) * (1.0 - s) ** (beta - 1.0))
    xj, wj = roots_jacobi(points, beta - 1.0, 0.0)
    s = (panels - 1 + (xj + 1.0) / 2.0) / panels
    sigmas.append(s)
    weights.append(wj * (2.0 * panels) ** (-beta))
    return np.concatenate(sigmas), np.concatenate(weights)


def rl_integral_batch(g, beta, a, xs, quad=DEFAULT_QUAD, lower_exponent=0.0):
    """Left-sided RL integral of order ``beta`` at every point of ``xs``.

    ``g`` must accept an ndarray of evaluation points; ``xs >= a``.
    ``lower_exponent`` declares a known algebraic behavior
    ``g(t) ~ (t - a)^lower_exponent`` at the lower endpoint (must be > -1).
    """
    if beta <= 0.0:
        raise FracOrderError(f"integral order must be positive, got {beta}")
    if lower_exponent <= -1.0:
        raise FracOrderError("lower endpoint exponent must be > -1 to be integrable")
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < a):
        raise FracOrderError("evaluation points must satisfy x >= a")
    sigma, w = _reference_rule(
        float(beta), float(lower_exponent), quad.points, quad.panels
    )
    nodes = a + (xs[..., None] - a) * sigma
    vals = np.asarray(g(nodes), dtype=float)
    vals = np.broadcast_to(vals, np.broadcast_shapes(vals.shape, nodes.shape))
    scale = (xs - a) ** beta / gamma_fn(beta)
    return scale * (vals @ w)


def rl_integral_1d(g, beta, a, x, quad=DEFAULT_QUAD, lower_exponent=0.0):
    """Left-sided RL integral (1/Gamma(beta)) int_a^x (x-t)^(beta-1) g(t) dt."""
    return float(
        rl_integral_batch(g, beta, a, np.asarray(float(x)), quad, lower_exponent)
    )


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise FracOrderError(f"derivative order must be in (0, 1), got {alpha}")


def _axis_points(axis, x, y, z):
    pts = {"x": x, "y": y, "z": z}
    if axis not in pts:
        raise ValueError(f"axis must be one of {AXES}, got {axis!r}")
    return pts


def caputo_partial_batch(dg, axis, alpha, x, y, z, lower, quad=DEFAULT_QUAD):
    """Caputo partial derivative along ``axis`` at batched points.

    ``dg(x, y, z)`` is the analytic first partial of the field along
    ``axis``; ``lower`` is the domain lower bound on that axis.
    """
    _check_alpha(alpha)
    pts = _axis_points(axis, x, y, z)
    coord = np.asarray(pts[axis], dtype=float)
    others = {ax: np.asarray(pts[ax], dtype=float)[..., None] for ax in AXES if ax != axis}

    def g(nodes):
        args = {axis: nodes, **others}
        return dg(args["x"], args["y"], args["z"])

    return rl_integral_batch(g, 1.0 - alpha, lower, coord, quad)


def caputo_partial(dg, axis, alpha, point, lower, quad=DEFAULT_QUAD):
    """Scalar-point version of :func:`caputo_partial_batch`."""
    x, y, z = (np.asarray(float(c)) for c in point)
    return float(caputo_partial_batch(dg, axis, alpha, x, y, z, lower, quad))


def rl_partial_batch(g, dg, axis, alpha, x, y, z, lower, quad=DEFAULT_QUAD):
    """Riemann-Liouville partial derivative along ``axis`` at batched points.

    Computed as Caputo plus the boundary term
    ``g(lower) (x - lower)^(-alpha) / Gamma(1 - alpha)``; singular at the
    axis lower bound when the trace there is nonzero.
    """
    _check_alpha(alpha)
    pts = _axis_points(axis, x, y, z)
    coord = np.asarray(pts[axis], dtype=float)
    args = {ax: np.asarray(pts[ax], dtype=float) for ax in AXES}
    args[axis] = np.broadcast_to(np.asarray(float(lower)), coord.shape)
    trace = np.broadcast_to(np.asarray(g(args["x"], args["y"], args["z"]), dtype=float), coord.shape)

    at_lower = coord == lower
    if np.any(at_lower & (trace != 0.0)):
        raise SingularityError(
            "RL derivative diverges at the axis lower bound for nonzero trace"
        )
    cap = caputo_partial_batch(dg, axis, alpha, x, y, z, lower, quad)
    dist = np.where(at_lower, 1.0, coord - lower)
    boundary = np.where(at_lower, 0.0, trace * dist ** (-alpha) / gamma_fn(1.0 - alpha))
    return cap + boundary


def rl_partial(g, dg, axis, alpha, point, lower, quad=DEFAULT_QUAD):
    """Scalar-point version of :func:`rl_partial_batch`."""
    x, y, z = (np.asarray(float(c)) for c in point)
    return float(rl_partial_batch(g, dg, axis, alpha, x, y, z, lower, quad))
