"""Why dual potentials can fail to exist: blow-up under refinement.

Uniform mass on [0,1] x {0} must reach [1,2] x {1}. The only coupling with
finite cost shifts every point one unit right and one unit up -- exactly
along the light cone, so the optimal cost is zero and every arc is
lightlike. A candidate dual potential built by chaining support pairs then
picks up sqrt-sized gains at every step: on an n-atom grid its spread is
exactly sqrt(2n - 3), so it diverges as the grid refines. No bounded dual
potential exists in the limit.
"""

from lorot import run_line_counterexample

report = run_line_counterexample(25, levels=4)

print("=== Refinement study ===")
print(f"{'n':>6s} {'spread':>12s} {'sqrt(2n-3)':>12s} {'cost':>8s} {'lightlike':>10s}")
for row in report.tables["levels"]:
    print(f"{row['n']:>6d} {row['spread']:>12.6f} {row['expected_spread']:>12.6f} "
          f"{row['total_cost']:>8.1e} {row['lightlike_fraction']:>10.2f}")

print()
print("Growth per doubling (should approach sqrt(2) ~ 1.414):")
for key, scalar in report.scalars.items():
    if key.startswith("ratio_"):
        print(f"  {key}: {scalar.value:.4f}   window {scalar.window}")
slope = report.scalars["log_log_slope"]
print(f"  fitted log-log slope: {slope.value:.4f}   window {slope.window}")

print()
print("Contrast: shift the sources back in time by 0.5 and the same grids")
print("become uniformly timelike; the potential spread then stays bounded:")
from lorot import chain_potential, solve, strictified_line_problem  # noqa: E402

for n in (25, 50, 100, 200):
    problem = strictified_line_problem(n, eps=0.5)
    coupling, _ = solve(problem)
    psi = chain_potential(problem.model, coupling)
    print(f"  n={n:>4d}  spread={float(psi.max() - psi.min()):.6f}")
