"""Walkthrough: the fractional exterior derivative keeps d o d = 0.

The classical incidence matrices of a cubical grid form an exact sequence:
applying the derivative twice gives exactly zero.  This script shows that
the fractional-order derivative built here inherits that property to
machine precision, and that a naive one-sided construction does not.

Run:  python3 demos/01_exact_sequence.py
"""

import numpy as np

from fracdec import (
    ExperimentConfig,
    OperatorSet,
    QuadratureSpec,
    apply_fdec_variant,
    assemble_V,
    build_grid,
    de_rham,
    get_field,
    rms_error_cochain,
    run_variants,
)

quad = QuadratureSpec(points=16, panels=4)
alpha = 0.5
n = 8

print(f"Grid: unit cube, {n}^3 cells.  Fractional order alpha = {alpha}.")
grid = build_grid(((0.0, 1.0),) * 3, (n, n, n))

# Integer case first: D_1 D_0 = 0 holds exactly over the integers.
opset = OperatorSet(grid, 1.0 - alpha)
product = (opset.D(1) @ opset.D(0)).toarray()
print(f"Integer incidence matrices: max |D_1 D_0| = {np.abs(product).max():g}")

# Fractional case: sample a smooth scalar field on the nodes and apply the
# fractional derivative twice (gradient-like, then curl-like).
omega = get_field("paper-f", 0)
cochain = de_rham(omega, grid, quad)
once = apply_fdec_variant(opset, "paper", 0, cochain)
twice = apply_fdec_variant(opset, "paper", 1, once)
residual = rms_error_cochain(twice, np.zeros_like(twice), assemble_V(grid, 2))
print(f"Fractional composition on a smooth field: RMS residual = {residual:.3e}")

# The same composition with the three constructions side by side.  The
# "paper" and "drlD-both" variants are exact by design; "drlD-right"
# replaces the inverse-integral factor with a one-sided derivative matrix
# and loses the property.
print("\nVariant comparison (RMS of the composed derivative, smaller is better):")
rows = run_variants(ExperimentConfig(ps=(0,), alphas=(alpha,), ns=(4, 8, 16), quad=quad))
for r in rows:
    print(f"  {r.experiment:22s} n={r.n:<3d} residual={r.rms_error:.3e}")
print("\nThe one-sided residual shrinks under refinement but never reaches")
print("roundoff; the structure-preserving forms stay at ~1e-15 on every grid.")
