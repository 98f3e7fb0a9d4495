"""Turn-key experiments and shipped instance families.

Two quantitative stories ship with the toolkit:

* The line counterexample. Uniform mass on a unit interval of a spatial
  slice is pushed to the unit-shifted interval one time unit up. Every
  feasible coupling is the index shift, all transport is lightlike, and the
  chain-constructed dual potential has spread exactly sqrt(2n-3) on an
  n-atom endpoint grid, so it blows up like sqrt(n) under refinement: no
  bounded dual potential survives the continuum limit.

* The cylinder example. A height profile on the circle, flat on part of it
  and dipping through zero with a square-root cusp, induces a dual potential
  whose subdifferential transport comes arbitrarily close to the light cone
  on a set of positive measure while staying uniformly away from the
  opposite cone edge.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .diagnostics import audit
from .dual import chain_potential, PositiveCycle
from .errors import InsufficientMeasure, RootNotBracketed, ValidationFailed
from .measures import DiscreteMeasure, grid_segment, strictify
from .solver import TransportProblem, solve
from .spacetime import Cylinder, Minkowski, Point


@dataclass(frozen=True)
class ScalarResult:
    """A named result together with how it was checked.

    ``tolerance`` is the absolute tolerance of an equality check against
    ``target``; ``window`` is an inclusive (lo, hi) range check. Both may be
    None for values that are reported without assertion.
    """

    value: float
    tolerance: float | None = None
    target: float | None = None
    window: tuple[float, float] | None = None

    def as_dict(self):
        out = {"value": self.value}
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.target is not None:
            out["target"] = self.target
        if self.window is not None:
            out["window"] = list(self.window)
        return out


@dataclass
class ExperimentReport:
    name: str
    scalars: dict[str, ScalarResult] = field(default_factory=dict)
    tables: dict[str, list[dict]] = field(default_factory=dict)

    def as_dict(self):
        return {
            "name": self.name,
            "scalars": {k: v.as_dict() for k, v in self.scalars.items()},
            "tables": {k: len(v) for k, v in self.tables.items()},
        }


def _check(condition, message):
    if not condition:
        raise RuntimeError(f"experiment check failed: {message}")


# ---------------------------------------------------------------------------
# instance families


def line_blowup_problem(n: int) -> TransportProblem:
    """Uniform n-atom grid on [0,1]x{0} vs the shifted grid on [1,2]x{1}."""
    model = Minkowski(1)
    mu = grid_segment(model, model.make_point([0.0], 0.0), model.make_point([1.0], 0.0), n)
    nu = grid_segment(model, model.make_point([1.0], 1.0), model.make_point([2.0], 1.0), n)
    return TransportProblem(model, mu, nu)


def strictified_line_problem(n: int, eps: float = 0.5) -> TransportProblem:
    """The line instance with the source flowed back in time by eps."""
    p = line_blowup_problem(n)
    return TransportProblem(p.model, strictify(p.model, p.mu, eps), p.nu, p.options)


def random_strict_problem(seed: int, eps: float = 0.1,
                          max_side: int = 80) -> TransportProblem:
    """Random strictly timelike instance with connected grid supports.

    Both marginals are endpoint grids on spatial slices, sized and placed so
    every ordered pair is causal; the source is then strictified by eps, so
    every margin is at least eps. Each side gets between 8 and max_side
    atoms.
    """
    rng = np.random.default_rng(seed)
    model = Minkowski(1)
    n = int(rng.integers(8, max_side + 1))
    m = int(rng.integers(8, max_side + 1))
    x0 = float(rng.uniform(-1, 1))
    w1 = float(rng.uniform(0.5, 2.0))
    x1 = x0 + float(rng.uniform(-0.5, 0.5))
    w2 = float(rng.uniform(0.5, 2.0))
    reach = max(abs(x1 + w2 - x0), abs(x0 + w1 - x1), abs(x1 - x0))
    T = reach + float(rng.uniform(0.05, 0.35))
    mu = grid_segment(model, model.make_point([x0], 0.0), model.make_point([x0 + w1], 0.0), n)
    nu = grid_segment(model, model.make_point([x1], T), model.make_point([x1 + w2], T), m)
    return TransportProblem(model, strictify(model, mu, eps), nu)


def separated_rays_problem(seed: int) -> TransportProblem:
    """Random multi-ray instance engineered so a Monge map exists.

    Several vertical lines, far enough apart that vertical transport is
    strictly optimal but close enough that every pair is causal (keeping the
    chain graph connected). Per line, the source carries k atoms for each
    target atom and all weights are dyadic, so the per-ray rearrangement
    never has to split an atom.
    """
    rng = np.random.default_rng(seed)
    model = Minkowski(1)
    n_rays = int(rng.integers(2, 5))
    M = int(rng.choice([4, 8]))
    k = int(rng.choice([2, 4]))
    # random composition of M target atoms over the rays, each ray >= 1
    cuts = np.sort(rng.choice(np.arange(1, M), size=n_rays - 1, replace=False))
    per_ray = np.diff(np.concatenate([[0], cuts, [M]])).astype(int)
    N = k * M
    mu_atoms = []
    nu_atoms = []
    for r, m_r in enumerate(per_ray):
        pos = [r * 0.25]
        lo_times = np.sort(rng.uniform(0.0, 0.2, size=k * int(m_r)))
        hi_times = np.sort(rng.uniform(1.0, 1.2, size=int(m_r)))
        for t in lo_times:
            mu_atoms.append((model.make_point(pos, float(t)), 1.0 / N))
        for t in hi_times:
            nu_atoms.append((model.make_point(pos, float(t)), 1.0 / M))
    mu = DiscreteMeasure.from_atoms(mu_atoms)
    nu = DiscreteMeasure.from_atoms(nu_atoms)
    return TransportProblem(model, mu, nu)


#: Families used by the refinement dichotomy checks: level L gets a grid
#: 2**L times finer than the base.
SHIPPED_FAMILIES = {
    "line_blowup": lambda level: line_blowup_problem(50 << level),
    "strictified_line": lambda level: strictified_line_problem(50 << level),
}


# ---------------------------------------------------------------------------
# the line counterexample


def _line_level(n: int) -> dict:
    problem = line_blowup_problem(n)
    coupling, duals = solve(problem)
    shift = [(i, j) for i, j, _ in coupling.entries]
    _check(shift == [(i, i) for i in range(n)],
           f"support at n={n} is not the index-shift pairing")
    _check(abs(coupling.total_cost) <= 1e-12,
           f"total cost at n={n} is {coupling.total_cost!r}, not 0")
    psi = chain_potential(problem.model, coupling)
    _check(not isinstance(psi, PositiveCycle), "unexpected positive cycle")
    spread = float(psi.max() - psi.min())
    expected = math.sqrt(2 * n - 3)
    _check(abs(spread - expected) <= 1e-6,
           f"spread at n={n} is {spread!r}, expected {expected!r}")
    report = audit(problem.model, problem, coupling, duals)
    return {
        "n": n,
        "spread": spread,
        "expected_spread": expected,
        "total_cost": coupling.total_cost,
        "lightlike_fraction": report.lightlike_fraction,
        "dual_gap": report.dual_gap,
    }


def run_line_counterexample(n: int, levels: int = 3, workers: int = 1) -> ExperimentReport:
    """Grid refinement study of the line instance.

    Builds endpoint grids of n, 2n, ..., 2**(levels-1) * n atoms. At each
    level the solved coupling must be exactly the index-shift pairing with
    zero cost, and the chain-potential spread must equal sqrt(2n-3) within
    1e-6. Reports the spread growth ratios and the fitted log-log slope.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    ns = [n << level for level in range(levels)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_line_level, ns))
    else:
        rows = [_line_level(k) for k in ns]

    report = ExperimentReport(name="line-counterexample")
    report.tables["levels"] = rows
    for row in rows:
        report.scalars[f"spread_n{row['n']}"] = ScalarResult(
            row["spread"], tolerance=1e-6, target=row["expected_spread"]
        )
        report.scalars[f"cost_n{row['n']}"] = ScalarResult(
            row["total_cost"], tolerance=1e-12, target=0.0
        )
        report.scalars[f"lightlike_fraction_n{row['n']}"] = ScalarResult(
            row["lightlike_fraction"]
        )
    for a, b in zip(rows, rows[1:]):
        ratio = b["spread"] / a["spread"]
        report.scalars[f"ratio_n{a['n']}_to_n{b['n']}"] = ScalarResult(
            ratio, window=(1.30, 1.48)
        )
    if len(rows) >= 2:
        slope = float(np.polyfit(np.log([r["n"] for r in rows]),
                                 np.log([r["spread"] for r in rows]), 1)[0])
        report.scalars["log_log_slope"] = ScalarResult(slope, window=(0.45, 0.55))
    return report


# ---------------------------------------------------------------------------
# spaced point selection inside a set of positive measure


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(float(x))  # exact: every binary64 is rational


def select_spaced_points(intervals, a, b, eps, n: int):
    """Pick n points of B, each in B, with gaps at least eps*(b-a)/(2n).

    ``intervals`` is a finite union of disjoint closed intervals B inside
    [a, b] with total length at least eps*(b-a). The rule is deterministic:
    with beta = eps*(b-a)/(2n), the next point is the smallest t in B that
    accumulates measure beta/2 of B past the previous cursor, and the cursor
    then jumps beta past it. All arithmetic is exact over the rationals, so
    the gap guarantee holds exactly; the returned points are Fractions.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    a, b = _to_fraction(a), _to_fraction(b)
    eps = _to_fraction(eps)
    if not (b > a and eps > 0):
        raise ValueError("need b > a and eps > 0")
    ivs = sorted(
        ((_to_fraction(lo), _to_fraction(hi)) for lo, hi in intervals),
        key=lambda p: p[0],
    )
    if not ivs:
        raise InsufficientMeasure("empty interval union")
    prev_hi = None
    for lo, hi in ivs:
        if lo < a or hi > b or lo >= hi:
            raise ValueError(f"bad interval [{lo}, {hi}] for range [{a}, {b}]")
        if prev_hi is not None and lo < prev_hi:
            raise ValueError("intervals must be disjoint")
        prev_hi = hi
    total = sum(hi - lo for lo, hi in ivs)
    if total < eps * (b - a):
        raise InsufficientMeasure(
            f"measure {total} is below eps*(b-a) = {eps * (b - a)}"
        )

    beta = eps * (b - a) / (2 * n)
    half = beta / 2
    points = []
    cursor = a
    for _ in range(n):
        acc = Fraction(0)
        t = None
        for lo, hi in ivs:
            seg_lo = max(lo, cursor)
            if seg_lo >= hi:
                continue
            avail = hi - seg_lo
            if acc + avail >= half:
                t = seg_lo + (half - acc)
                break
            acc += avail
        if t is None:
            raise InsufficientMeasure("ran out of measure while selecting points")
        points.append(t)
        cursor = t + beta
    return points


# ---------------------------------------------------------------------------
# the cylinder profile and its subdifferential field


@dataclass(frozen=True)
class ProfileFunction:
    """Periodic height profile on the circle of circumference 5.

    Piecewise on [0, 5]: the constant 1+eps on [0,1]; (1+eps) times the
    upper light-cone arch sqrt(x(2-x)) on [1,2]; minus (1-eps) times the
    lower arch sqrt((x-2)(4-x)) on [2,3]; the constant eps-1 on [3,4]; and
    eps - cos(pi(x-4)) on [4,5]. Continuous, smooth except at 2 where it has
    a square-root (Hoelder-1/2) cusp through zero, and C^1 at the other
    junctions.
    """

    eps: float

    def __post_init__(self):
        if not 0.0 < self.eps < 0.5:
            raise ValueError("eps must lie in (0, 1/2)")

    def __call__(self, x):
        x = np.asarray(x, dtype=float) % 5.0
        e = self.eps
        arch_up = np.sqrt(np.clip(x * (2.0 - x), 0.0, None))
        arch_dn = np.sqrt(np.clip((x - 2.0) * (4.0 - x), 0.0, None))
        out = np.select(
            [x <= 1.0, x <= 2.0, x <= 3.0, x <= 4.0],
            [1.0 + e, (1.0 + e) * arch_up, -(1.0 - e) * arch_dn, e - 1.0],
            default=e - np.cos(np.pi * (x - 4.0)),
        )
        return out if out.ndim else float(out)

    def derivative(self, x):
        """dF/dx away from the cusp; NaN at exactly x = 2."""
        x = np.asarray(x, dtype=float) % 5.0
        e = self.eps
        with np.errstate(divide="ignore", invalid="ignore"):
            d_up = (1.0 + e) * (1.0 - x) / np.sqrt(np.clip(x * (2.0 - x), 1e-300, None))
            d_dn = -(1.0 - e) * (3.0 - x) / np.sqrt(
                np.clip((x - 2.0) * (4.0 - x), 1e-300, None)
            )
        out = np.select(
            [x <= 1.0, x < 2.0, x == 2.0, x <= 3.0, x <= 4.0],
            [0.0, d_up, np.nan, d_dn, 0.0],
            default=np.pi * np.sin(np.pi * (x - 4.0)),
        )
        return out if out.ndim else float(out)


def _validate_profile(f: ProfileFunction):
    e = f.eps
    grid = np.linspace(0.0, 5.0, 10001)
    x = grid[(grid >= 0) & (grid <= 1)]
    if not np.all(f(x) == 1.0 + e):
        raise ValidationFailed(1)
    x = grid[(grid >= 1) & (grid < 2)]
    if not np.all(f(x) > np.sqrt(x * (2.0 - x))):
        raise ValidationFailed(2)
    if f(2.0) != 0.0:
        raise ValidationFailed(3)
    x = grid[(grid > 2) & (grid <= 3)]
    if not np.all(f(x) > -np.sqrt((x - 2.0) * (4.0 - x))):
        raise ValidationFailed(4)
    delta = 0.1
    x = np.concatenate([
        np.linspace(2.0 - delta, 2.0, 200, endpoint=False),
        np.linspace(2.0 + 1e-9, 2.0 + delta, 200),
    ])
    x = x[x != 2.0]
    if not np.all(f.derivative(x) < 0):
        raise ValidationFailed(5)
    x = grid[(grid >= 3) & (grid <= 4)]
    if not np.all(f(x) == e - 1.0):
        raise ValidationFailed(6)
    # square-root modulus at the cusp: |f(2 +- h)| / sqrt(h) stays bounded
    h = 2.0 ** -np.arange(1, 41)
    holder = max(
        np.max(np.abs(f(2.0 + h)) / np.sqrt(h)),
        np.max(np.abs(f(2.0 - h)) / np.sqrt(h)),
    )
    if not holder < 4.0:
        raise ValidationFailed("holder")
    # continuity across junctions and the period seam
    for junction in (1.0, 2.0, 3.0, 4.0, 5.0):
        jump = abs(float(f(junction - 1e-12)) - float(f(junction + 1e-12)))
        if jump > 1e-5:
            raise ValidationFailed("continuity")


def build_profile(eps: float) -> ProfileFunction:
    """Construct the cusp profile and validate its defining conditions."""
    f = ProfileFunction(eps)
    _validate_profile(f)
    return f


def cylinder_potential(profile: ProfileFunction, y: Point, theta_grid: int = 100000) -> float:
    """inf over the circle of profile(theta) + cost((theta, 0), y).

    Grid infimum over equispaced theta values (plus y's own angle, which is
    the only causal source when y lies on the slice t=0), refined by ternary
    search around the grid argmin to width 1e-10.
    """
    model = Cylinder(5.0)
    if y.time < 0:
        raise ValueError("target must lie at time >= 0")

    def objective(theta):
        c = model.cost(model.make_point([theta], 0.0), y)
        return profile(theta) + c.value  # +inf outside the causal past

    thetas = np.concatenate([np.arange(theta_grid) * (5.0 / theta_grid), [y.spatial[0]]])
    xs = np.column_stack([thetas, np.zeros_like(thetas)])
    C = model.cost_matrix(xs, np.array([[y.spatial[0], y.time]]))[:, 0]
    vals = profile(thetas) + C
    best = int(np.argmin(vals))
    if not np.isfinite(vals[best]):
        return math.inf
    h = 5.0 / theta_grid
    lo, hi = thetas[best] - h, thetas[best] + h
    while hi - lo > 1e-10:
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        if objective(m1) <= objective(m2):
            hi = m2
        else:
            lo = m1
    return float(min(vals[best], objective((lo + hi) / 2.0)))

def _wrap_distance(z, circumference=5.0):
    w = np.asarray(z, dtype=float) % circumference
    return np.minimum(w, circumference - w)


def subdifferential_field(profile: ProfileFunction, t: float, theta_grid: int):
    """Solve the critical-point equation of the potential's subdifferential.

    For each theta on a cell-centered grid (which provably never hits the
    cusp at 2), find the displacement u in (-t, t) with
    u / sqrt(t**2 - u**2) = profile'(theta) by bisection on that strictly
    increasing function, to absolute tolerance 1e-10. The matched target is
    y_theta = (theta + u, t).

    Returns (thetas, u, skipped) where skipped counts grid points whose root
    could not be bracketed (reported, never silently dropped).
    """
    if not 0.0 < t <= 1.0:
        raise ValueError("need t in (0, 1]")
    N = int(theta_grid)
    thetas = (np.arange(N) + 0.5) * (5.0 / N)
    fp = profile.derivative(thetas)

    def g(u):
        return u / np.sqrt(t * t - u * u)

    lo = np.full(N, -t * (1.0 - 1e-14))
    hi = np.full(N, t * (1.0 - 1e-14))
    bad = ~np.isfinite(fp) | (g(lo) > fp) | (g(hi) < fp)
    skipped = int(np.count_nonzero(bad))
    if skipped == N:
        raise RootNotBracketed("no grid point admits a bracketed root")
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = g(mid) < fp
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    u = 0.5 * (lo + hi)
    u[bad] = np.nan
    return thetas, u, skipped


def run_cylinder_example(eps: float, theta_grid: int, t: float,
                         etas=(0.1, 0.05, 0.01)) -> ExperimentReport:
    """Measure how close the cylinder transport comes to the light cone.

    For every source (theta, 0) on a grid avoiding the cusp, the matched
    target y_theta at time t is computed from the critical-point equation.
    Reported and asserted:

    (a) for each threshold eta, the measure of sources whose cone margin is
        below eta -- positive, because the profile's derivative diverges at
        the cusp and drags the transport onto the cone;
    (b) the minimum distance from the trailing cone point (theta - t, t) to
        y_theta -- positive on any finite grid; the distance to the leading
        cone point (theta + t, t) is reported too, and that one stays
        bounded away from zero uniformly in the grid.
    """
    profile = build_profile(eps)
    thetas, u, skipped = subdifferential_field(profile, t, theta_grid)
    ok = np.isfinite(u)
    margins = t - np.abs(u[ok])
    cell = 5.0 / int(theta_grid)

    report = ExperimentReport(name="cylinder-example")
    report.scalars["eps"] = ScalarResult(eps)
    report.scalars["t"] = ScalarResult(t)
    report.scalars["skipped_thetas"] = ScalarResult(float(skipped))
    for eta in etas:
        measure = cell * float(np.count_nonzero(margins < eta))
        _check(measure > 0, f"near-null set at eta={eta} has zero measure")
        report.scalars[f"near_null_measure_eta_{eta}"] = ScalarResult(
            measure, window=(np.nextafter(0.0, 1.0), 5.0)
        )
    dist_trailing = _wrap_distance(u[ok] + t)
    dist_leading = _wrap_distance(u[ok] - t)
    delta = float(np.min(dist_trailing))
    _check(delta > 0, "transport touches the trailing cone point on the grid")
    report.scalars["delta_trailing_cone"] = ScalarResult(
        delta, window=(np.nextafter(0.0, 1.0), math.inf)
    )
    report.scalars["delta_leading_cone"] = ScalarResult(float(np.min(dist_leading)))
    resid = np.abs(
        profile.derivative(thetas[ok]) - u[ok] / np.sqrt(t * t - u[ok] * u[ok])
    )
    report.scalars["critical_equation_residual"] = ScalarResult(float(np.max(resid)))

    # the potential's modulus of continuity across the cusp image, reported
    # only: |phi(2+h) - phi(2-h)| / sqrt(h) over dyadic offsets
    hs = 2.0 ** -np.arange(3, 11)
    modulus = max(
        abs(
            cylinder_potential(profile, Point((float(2.0 + h),), t), 4000)
            - cylinder_potential(profile, Point((float(2.0 - h),), t), 4000)
        )
        / math.sqrt(h)
        for h in hs
    )
    report.scalars["potential_sqrt_modulus_at_cusp"] = ScalarResult(float(modulus))

    rows = [
        {
            "theta": float(th),
            "y_theta": float((th + uu) % 5.0),
            "margin": float(t - abs(uu)),
        }
        for th, uu in zip(thetas[ok], u[ok])
    ]
    report.tables["subdifferential"] = rows
    return report
