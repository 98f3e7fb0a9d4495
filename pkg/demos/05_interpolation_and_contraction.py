"""Displacement interpolation and exact measure contraction.

Transporting a uniform slice grid toward a single later event slides every
atom along its straight segment. At intermediate times the measure stays
uniform on an affinely shrunk copy of the grid, and slice volumes contract
by exactly (1-t)^d. Restricting an optimal coupling to an intermediate leg
keeps it optimal for its own marginals.
"""

from lorot import (
    DiscreteMeasure,
    Minkowski,
    TransportProblem,
    contraction_check,
    interpolate,
    restrict,
    solve,
)

mk2 = Minkowski(2)

print("=== Interpolating a uniform grid toward one event ===")
n = 6
atoms = [
    (mk2.make_point([i * 0.2, j * 0.2], 0.0), 1.0 / n**2)
    for i in range(n)
    for j in range(n)
]
mu = DiscreteMeasure.from_atoms(atoms)
target = mk2.make_point([0.5, 0.5], 4.0)
nu = DiscreteMeasure.from_atoms([(target, 1.0)])
coupling, _ = solve(TransportProblem(mk2, mu, nu))

for t in (0.0, 0.25, 0.5, 0.75):
    mid = interpolate(mk2, coupling, t)
    w = mid.weights_array()
    xs = mid.coords_array()
    span = xs[:, 0].max() - xs[:, 0].min()
    print(f"  t={t:.2f}: {mid.n_atoms} atoms, weight ratio max/min = "
          f"{w.max() / w.min():.1f}, spatial span {span:.3f} "
          f"(= {1.0:.0f} at t=0 scaled by (1-t))")

print()
print("=== Slice volumes contract by exactly (1-t)^d ===")
square = [
    mk2.make_point([0.0, 0.0], 0.0),
    mk2.make_point([1.0, 0.0], 0.0),
    mk2.make_point([1.0, 1.0], 0.0),
    mk2.make_point([0.0, 1.0], 0.0),
]
for t in (0.25, 0.5, 0.9):
    measured, predicted = contraction_check(mk2, square, target, t)
    print(f"  t={t:.2f}: measured {measured:.6f}  predicted {predicted:.6f}  "
          f"difference {abs(measured - predicted):.1e}")

print()
print("=== Restriction to an intermediate leg stays optimal ===")
mk1 = Minkowski(1)
mu1 = DiscreteMeasure.from_atoms(
    [(mk1.make_point([0.1 * i], 0.0), 0.25) for i in range(4)]
)
nu1 = DiscreteMeasure.from_atoms(
    [(mk1.make_point([0.1 * i + 0.2], 2.0), 0.25) for i in range(4)]
)
coupling1, _ = solve(TransportProblem(mk1, mu1, nu1))
for s1, s2 in ((0.0, 0.5), (0.25, 0.75), (0.5, 1.0)):
    rprob, rcoup = restrict(mk1, coupling1, s1, s2)  # verifies optimality inside
    print(f"  restrict({s1}, {s2}): cost {rcoup.total_cost:+.6f} "
          f"= {(s2 - s1):.2f} * full cost {coupling1.total_cost:+.6f}")
