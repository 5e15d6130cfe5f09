"""Exact polytope combinatorics: the raw material for everything else.

Builds the standard fixtures, checks the smoothness (Delzant) condition,
counts lattice points, and shows the boundary measures whose exactness the
asymptotic checks later rely on.
"""

from fractions import Fraction

import toricdensity as td

F = Fraction

print("=== the 2-simplex (projective plane fixture) ===")
simplex = td.standard_simplex(2)
print("vertices:", simplex.vertices)
print("volume:", simplex.volume())
print("boundary Leray volume:", simplex.boundary_leray_volume(),
      " (hypotenuse counts with density 1/sqrt(2) * length sqrt(2) = 1)")

rep = td.check_delzant(simplex)
print("Delzant:", rep.is_delzant, "| integral:", rep.is_integral)

print("\nlattice counts N(kP) = (k+1)(k+2)/2:")
for k in (1, 2, 5, 10):
    print(f"  k={k:2d}: {td.count_lattice_points(simplex, k)}")

print("\n=== a triangle that is NOT Delzant ===")
bad = td.Polytope(2, [td.AffineFunctional([0, 1], 0),
                      td.AffineFunctional([1, 0], 0),
                      td.AffineFunctional([-1, -2], -2)])
rep = td.check_delzant(bad)
for cert in rep.certificates:
    status = "ok" if cert.ok else f"FAILS ({cert.reason})"
    print(f"  vertex {cert.vertex}: det={cert.determinant} {status}")

print("\n=== a moving family: the unit square with corner cuts x1, x2 ===")
square = td.box([1, 1])
family = td.MovingFamily(square, [td.AffineFunctional([1, 0], 0),
                                  td.AffineFunctional([0, 1], 0)])
print("critical values of t:", family.critical_values())
sl = family.slice(F(1, 4))
print("P(1/4) vertices:", sl.polytope.vertices)
print("new facets (active cuts):", sl.active_cuts,
      "| old facets:", len(sl.old_facets))

print("\n=== its test-configuration polytope in R^3 ===")
cfg = td.build_test_config(family)
print("Gamma vertices:", cfg.gamma.vertices)
print("Vol(Gamma):", cfg.gamma.volume())
print("roof facets:", len(cfg.roof_facets), "| sides:", len(cfg.side_facets))
ridge = cfg.roof_skeleton[0]
print("roof ridge between cuts", (ridge.cut_a, ridge.cut_b),
      "| horizontal:", ridge.horizontal)

print("\nSeshadri constant of the corner cut x1+x2 on the simplex:",
      td.seshadri_constant(simplex, td.AffineFunctional([1, 1], 0)))
