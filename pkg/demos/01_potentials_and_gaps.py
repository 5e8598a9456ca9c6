"""Matrix potentials, tracked eigenvalue branches, and the projector calculus.

Three two-level families:

  constant-direction   W ∝ [[1, 1], [1, -1]] · ⟨x⟩⁻¹   (eigenvectors fixed)
  rotating             W = ⟨x⟩⁻¹ [[cos x, sin x], [sin x, -cos x]]
  crossing diagonal    D = diag(x, -x)                  (smooth renumbering)

For each: branch values, the minimum gap and its power-law fit
gap ≈ c0 ⟨x⟩^(-n0), the five projector-identity residuals at two stencil
steps (they shrink by 4 when h is halved), and the growth-ratio scans for the
inverse gap and the projector derivatives.
"""

import numpy as np

from adiapack.grids import make_grid
from adiapack.potentials import (MatrixPotentialSpec, decompose, gap_report,
                                 growth_scan, projector_identity_residuals)

JB_INV = "(1+x^2)^(-1/2)"

FAMILIES = {
    "constant-direction": MatrixPotentialSpec.from_strings(
        ["x^2/2", "x^2/2"], [JB_INV, JB_INV, f"-({JB_INV})"]),
    "rotating": MatrixPotentialSpec.from_strings(
        ["x^2/2", "x^2/2"],
        [f"cos(x)*{JB_INV}", f"sin(x)*{JB_INV}", f"-cos(x)*{JB_INV}"]),
    "crossing diagonal": MatrixPotentialSpec.from_strings(
        ["x", "-x"], ["0", "0", "0"]),
}

grid = make_grid(-20.0, 20.0, 2048)

for name, spec in FAMILIES.items():
    print(f"\n=== {name} ===")
    data = decompose(spec, grid)
    mid = grid.n // 2
    print(f"branches at x=0: "
          f"{[float(b[mid]) for b in data.branches]}")
    rep = gap_report(data, 0, 1)
    print(f"min gap {rep.min_gap:.4f}   fit: c0 = {rep.fitted_c0:.4f}, "
          f"n0 = {rep.fitted_n0:.4f}   violated: {rep.violated}")

print("\n=== projector identities (rotating family, x = 0.3) ===")
spec = FAMILIES["rotating"]
print(f"{'h':>8} {'sandwich':>10} {'leibniz':>10} {'expansion':>10} "
      f"{'gap_right':>10} {'gap_left':>10}")
for h in (2e-2, 1e-2, 5e-3):
    r = projector_identity_residuals(spec, 0.3, h)
    print(f"{h:8.0e} {r.sandwich:10.2e} {r.leibniz:10.2e} "
          f"{r.offdiag_expansion:10.2e} {r.gap_right:10.2e} {r.gap_left:10.2e}")
print("(each column shrinks by ~4 per halving: the stencil is second order)")

r = projector_identity_residuals(FAMILIES["constant-direction"], 0.3, 1e-2)
print(f"\nconstant-direction family: max residual {r.max:.2e} "
      f"(projectors do not depend on x)")

print("\n=== growth scans (rotating family, n0 = 1) ===")
xs = np.linspace(-20.0, 20.0, 41)
for beta in (0, 1, 2):
    scan = growth_scan(spec, 0, 1, beta, xs, n0=1.0)
    print(f"beta = {beta}: max gamma ratio (weight <x>^(n0+beta(1+n0))) = "
          f"{scan.max_gamma_ratio:.4f}, max projector ratio "
          f"(weight <x>^(beta(1+n0))) = {scan.max_projector_ratio:.4f}")
print("(bounded ratios out to the domain edge: the gap controls every "
      "derivative)")
