"""Displacement interpolation, measure contraction, and the Monge map.

An optimal coupling in a flat model moves mass along straight causal
segments. Interpolation pushes each entry's mass to the time-affine point of
its segment. The support of a cyclically monotone coupling decomposes into
transport rays (maximal causal lines carrying one-dimensional transport);
along a ray the cost depends only on the marginals, so mass may be
rearranged monotonically in the time coordinate, which yields a transport
map whenever no atom has to split.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import MonotonicityViolation, NotCausalPair
from .measures import DiscreteMeasure
from .solver import Coupling, TransportProblem, solve
from .spacetime import CausalClass, Point, SpacetimeModel

COLLINEARITY_RTOL = 1e-10


@dataclass(frozen=True)
class RayCDF:
    """Right-continuous step function: mass at time levels <= a on one ray."""

    taus: tuple[float, ...]
    cumulative: tuple[float, ...]

    def __call__(self, a: float) -> float:
        k = bisect_right(self.taus, a)
        return 0.0 if k == 0 else self.cumulative[k - 1]

    @property
    def total(self) -> float:
        return self.cumulative[-1]


@dataclass(frozen=True)
class TransportRay:
    """A maximal causal segment carrying part of a coupling.

    ``entry_indices`` index into the coupling's entry list; ``mu_atoms`` and
    ``nu_atoms`` are atom indices sorted by time along the ray, with the
    per-ray masses they carry (a nu-atom may also receive mass from other
    rays). ``identical`` marks a degenerate stay-put ray.
    """

    entry_indices: tuple[int, ...]
    mu_atoms: tuple[int, ...]
    nu_atoms: tuple[int, ...]
    mu_taus: tuple[float, ...]
    nu_taus: tuple[float, ...]
    mu_masses: tuple[float, ...]
    nu_masses: tuple[float, ...]
    identical: bool = False

    def cdf_mu(self) -> RayCDF:
        return RayCDF(self.mu_taus, tuple(np.cumsum(self.mu_masses)))

    def cdf_nu(self) -> RayCDF:
        return RayCDF(self.nu_taus, tuple(np.cumsum(self.nu_masses)))


@dataclass(frozen=True)
class MongeMap:
    """Assignment of every mu-atom to a nu-atom realizing the optimal cost."""

    assignment: tuple[int, ...]
    total_cost: float
    rays: tuple[TransportRay, ...]

    def as_rows(self):
        return [(i, j) for i, j in enumerate(self.assignment)]


@dataclass(frozen=True)
class AtomSplit:
    """Outcome when some mu-atom's mass cannot ride a single arc.

    Not a failure: discrete measures need not admit a transport map. The
    caller may refine mu (more atoms of smaller weight) and retry.
    """

    mu_index: int
    detail: str


def interpolate(model: SpacetimeModel, coupling: Coupling, t: float) -> DiscreteMeasure:
    """Push each entry's mass to the time-affine point of its segment.

    t=0 reproduces mu and t=1 reproduces nu exactly (atom positions are
    returned bitwise, weights re-accumulate per atom).
    """
    atoms = []
    for i, j, mass in coupling.entries:
        x, y = coupling.mu.points[i], coupling.nu.points[j]
        atoms.append((model.geodesic_point(x, y, t), mass))
    return DiscreteMeasure.from_atoms(atoms)


def restrict(model: SpacetimeModel, coupling: Coupling, s1: float, s2: float,
             verify: bool = True, tol: float = 1e-9):
    """Intermediate transport between the s1- and s2-interpolants.

    Each entry's mass moves between its two interpolated points. Returns
    ``(problem, coupling)`` for the restricted transport; with ``verify`` the
    restricted coupling is checked to be optimal for its own marginals
    against a fresh solve.
    """
    if not 0.0 <= s1 <= s2 <= 1.0:
        raise ValueError(f"need 0 <= s1 <= s2 <= 1, got {s1}, {s2}")
    pairs1 = []
    pairs2 = []
    for i, j, mass in coupling.entries:
        x, y = coupling.mu.points[i], coupling.nu.points[j]
        pairs1.append((model.geodesic_point(x, y, s1), mass))
        pairs2.append((model.geodesic_point(x, y, s2), mass))
    m1, map1 = DiscreteMeasure.from_atoms_with_index_map(pairs1)
    m2, map2 = DiscreteMeasure.from_atoms_with_index_map(pairs2)
    merged: dict[tuple[int, int], float] = {}
    for k, (_, _, mass) in enumerate(coupling.entries):
        key = (map1[k], map2[k])
        merged[key] = merged.get(key, 0.0) + mass
    entries = [(i, j, m) for (i, j), m in merged.items()]
    problem = TransportProblem(model, m1, m2)
    restricted = Coupling.from_entries(model, m1, m2, entries)
    if verify:
        solved, _ = solve(problem)
        if abs(restricted.total_cost - solved.total_cost) > tol * (1 + abs(solved.total_cost)):
            raise MonotonicityViolation(
                "restricted coupling is not optimal for its own marginals: "
                f"{restricted.total_cost!r} vs {solved.total_cost!r}"
            )
    return problem, restricted


def polytope_volume(model: SpacetimeModel, vertices) -> float:
    """Volume of the convex hull of slice points, in the slice dimension."""
    spatial = np.array([v.spatial for v in vertices], dtype=float)
    d = model.spatial_dim
    if d == 1:
        return float(spatial[:, 0].max() - spatial[:, 0].min())
    from scipy.spatial import ConvexHull

    return float(ConvexHull(spatial).volume)


def contraction_check(model: SpacetimeModel, vertices, y: Point, t: float):
    """Contract a slice polytope toward a target and compare volumes.

    ``vertices`` span a convex polytope inside one time slice; every vertex
    must causally precede y. The map x -> geodesic_point(x, y, t) is affine
    on the slice with Jacobian (1-t)**d, so the measured image volume equals
    the predicted one exactly up to rounding.

    On the cylinder the polytope must not straddle the seam (volumes are
    taken in the stored coordinates). Returns ``(measured, predicted)``.
    """
    vertices = list(vertices)
    if len(vertices) < 2:
        raise ValueError("polytope needs at least two vertices")
    times = {v.time for v in vertices}
    if len(times) != 1:
        raise ValueError("polytope vertices must lie in a single time slice")
    for v in vertices:
        if model.causal_class(v, y) is CausalClass.NOT_CAUSAL:
            raise NotCausalPair(f"vertex {v} does not causally precede {y}")
    d = model.spatial_dim
    vol = polytope_volume(model, vertices)
    predicted = (1.0 - t) ** d * vol
    if t == 1.0:
        return 0.0, predicted
    image = [model.geodesic_point(v, y, t) for v in vertices]
    measured = polytope_volume(model, image)
    return measured, predicted


def _check_two_cycles(model: SpacetimeModel, coupling: Coupling, tol: float = 1e-9):
    """All-pairs two-cycle audit of the support; raises on a violation."""
    C = model.cost_matrix(coupling.mu.coords_array(), coupling.nu.coords_array())
    ii, jj, _ = coupling.index_arrays()
    own = C[ii, jj]
    lhs = own[:, None] + own[None, :]
    cross_ef = C[ii[:, None], jj[None, :]]  # cost(x_e, y_f) for all entry pairs
    total_swap = cross_ef + cross_ef.T
    bad = np.isfinite(total_swap) & (lhs > total_swap + tol)
    if bad.any():
        e, f = np.argwhere(bad)[0]
        raise MonotonicityViolation(
            f"two-cycle improvement between entries {int(e)} and {int(f)}: "
            f"{lhs[e, f]!r} > {total_swap[e, f]!r}"
        )


def ray_decomposition(model: SpacetimeModel, coupling: Coupling):
    """Group support entries into transport rays.

    Entries whose segments are collinear (cross-displacement below
    ``COLLINEARITY_RTOL`` times the segment length) and whose time intervals
    intersect share a ray; stay-put entries form singleton rays. Raises
    :class:`MonotonicityViolation` when the support fails the two-cycle
    audit, or when one mu-atom feeds two non-collinear moving segments (a
    branch, for which no discrete prescription exists).
    """
    _check_two_cycles(model, coupling)
    entries = coupling.entries
    k = len(entries)
    xs = [coupling.mu.points[i] for i, _, _ in entries]
    ys = [coupling.nu.points[j] for _, j, _ in entries]
    identical = np.array([x == y for x, y in zip(xs, ys)])

    moving = np.nonzero(~identical)[0]
    parent = list(range(k))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    if len(moving):
        xc = np.array([xs[e].coords() for e in moving])
        yc = np.array([ys[e].coords() for e in moving])
        # spacetime direction of each segment, wrap-aware in the spatial part
        dirs = np.concatenate(
            [
                np.array(
                    [model.spatial_delta(xs[e], ys[e]) for e in moving]
                ),
                (yc[:, -1:] - xc[:, -1:]),
            ],
            axis=1,
        )
        lens = np.linalg.norm(dirs, axis=1)
        unit = dirs / lens[:, None]
        # displacement of every segment endpoint from every base point
        dx = model.spatial_delta_matrix(xc[:, :-1], xc[:, :-1])
        dy = model.spatial_delta_matrix(xc[:, :-1], yc[:, :-1])
        wx = np.concatenate([dx, xc[None, :, -1:] - xc[:, None, -1:]], axis=2)
        wy = np.concatenate([dy, yc[None, :, -1:] - xc[:, None, -1:]], axis=2)

        def perp_norm(w):
            along = np.einsum("efc,ec->ef", w, unit)
            perp = w - along[:, :, None] * unit[:, None, :]
            return np.linalg.norm(perp, axis=2)

        off_line = np.maximum(perp_norm(wx), perp_norm(wy))
        collinear = off_line <= COLLINEARITY_RTOL * lens[:, None]
        lo = np.maximum(xc[:, -1][:, None], xc[:, -1][None, :])
        hi = np.minimum(yc[:, -1][:, None], yc[:, -1][None, :])
        overlap = lo <= hi
        join = collinear & collinear.T & overlap
        for a in range(len(moving)):
            for b in np.nonzero(join[a, a + 1:])[0]:
                union(moving[a], moving[a + b + 1])

    groups: dict[int, list[int]] = {}
    for e in range(k):
        groups.setdefault(find(e) if not identical[e] else -1 - e, []).append(e)

    rays = []
    for key in sorted(groups, key=lambda g: min(groups[g])):
        members = groups[key]
        is_identical = key < 0
        mu_mass: dict[int, float] = {}
        nu_mass: dict[int, float] = {}
        for e in members:
            i, j, mass = entries[e]
            mu_mass[i] = mu_mass.get(i, 0.0) + mass
            nu_mass[j] = nu_mass.get(j, 0.0) + mass
        mu_atoms = sorted(mu_mass, key=lambda i: coupling.mu.points[i].time)
        nu_atoms = sorted(nu_mass, key=lambda j: coupling.nu.points[j].time)
        rays.append(
            TransportRay(
                entry_indices=tuple(members),
                mu_atoms=tuple(mu_atoms),
                nu_atoms=tuple(nu_atoms),
                mu_taus=tuple(coupling.mu.points[i].time for i in mu_atoms),
                nu_taus=tuple(coupling.nu.points[j].time for j in nu_atoms),
                mu_masses=tuple(mu_mass[i] for i in mu_atoms),
                nu_masses=tuple(nu_mass[j] for j in nu_atoms),
                identical=is_identical,
            )
        )

    moving_rays_of_atom: dict[int, list[int]] = {}
    for r, ray in enumerate(rays):
        if ray.identical:
            continue
        for i in ray.mu_atoms:
            moving_rays_of_atom.setdefault(i, []).append(r)
    for i, rs in moving_rays_of_atom.items():
        if len(rs) > 1:
            raise MonotonicityViolation(
                f"mu-atom {i} feeds non-collinear segments (rays {rs}); "
                "branching support has no discrete ray decomposition"
            )
    return tuple(rays)


def _ray_rearrangement(ray: TransportRay, mu_cum, nu_cum):
    """Monotone CDF matching on one ray with exact cumulative masses.

    ``mu_cum``/``nu_cum`` are cumulative masses (ints or Fractions) aligned
    with the ray's sorted atoms. Returns atom assignment or the index of an
    atom that must split.
    """
    assignment = {}
    for k, i in enumerate(ray.mu_atoms):
        lo = mu_cum[k - 1] if k else 0
        hi = mu_cum[k]
        b = bisect_left(nu_cum, hi)
        if b == len(nu_cum):  # numeric guard; totals match by construction
            b = len(nu_cum) - 1
        prev = nu_cum[b - 1] if b else 0
        if prev > lo:
            return None, i
        assignment[i] = ray.nu_atoms[b]
    return assignment, None


def monge_map(model: SpacetimeModel, problem: TransportProblem):
    """Solve, decompose into rays, and rearrange monotonically per ray.

    Returns a :class:`MongeMap` when every mu-atom's mass lands on a single
    nu-atom, in which case its cost matches the solver optimum within 1e-9;
    otherwise returns :class:`AtomSplit` naming the obstructing atom.
    """
    coupling, _ = solve(problem)
    rays = ray_decomposition(model, coupling)

    rays_of_atom: dict[int, set[int]] = {}
    for r, ray in enumerate(rays):
        for i in ray.mu_atoms:
            rays_of_atom.setdefault(i, set()).add(r)
    for i, rs in sorted(rays_of_atom.items()):
        if len(rs) > 1:
            return AtomSplit(i, "atom mass is split across rays")

    exact = coupling.exact_mass_fractions()
    entry_mass = (
        {e: exact[idx] for idx, e in enumerate(coupling.entries)}
        if exact is not None
        else None
    )

    assignment = np.full(problem.mu.n_atoms, -1, dtype=np.int64)
    for ray in rays:
        if entry_mass is not None:
            mu_m = {i: Fraction(0) for i in ray.mu_atoms}
            nu_m = {j: Fraction(0) for j in ray.nu_atoms}
            for e in ray.entry_indices:
                entry = coupling.entries[e]
                mu_m[entry[0]] += entry_mass[entry]
                nu_m[entry[1]] += entry_mass[entry]
            mu_cum = list(np.cumsum([mu_m[i] for i in ray.mu_atoms]))
            nu_cum = list(np.cumsum([nu_m[j] for j in ray.nu_atoms]))
        else:
            mu_cum = list(np.cumsum(ray.mu_masses))
            nu_cum = list(np.cumsum(ray.nu_masses))
        got, split_atom = _ray_rearrangement(ray, mu_cum, nu_cum)
        if got is None:
            return AtomSplit(int(split_atom), "mass interval straddles a nu-atom boundary")
        for i, j in got.items():
            assignment[i] = j

    if (assignment < 0).any():
        missing = int(np.nonzero(assignment < 0)[0][0])
        return AtomSplit(missing, "atom not covered by any ray")

    C = model.cost_matrix(problem.mu.coords_array(), problem.nu.coords_array())
    w = problem.mu.weights_array()
    map_cost = float(np.dot(w, C[np.arange(len(w)), assignment]))
    if not math.isfinite(map_cost):
        raise MonotonicityViolation("rearranged map uses a non-causal arc")
    if abs(map_cost - coupling.total_cost) > 1e-9 * (1 + abs(coupling.total_cost)):
        raise MonotonicityViolation(
            f"rearranged map cost {map_cost!r} differs from optimum "
            f"{coupling.total_cost!r}"
        )
    return MongeMap(tuple(int(j) for j in assignment), map_cost, rays)
