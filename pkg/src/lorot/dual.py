"""Dual potentials: c-transforms, chain construction, and tightness checks.

The chain construction builds a candidate dual potential from an optimal
coupling: fix a root support pair, then define psi at a source atom as the
largest total gain of any chain of support pairs leading from the root to
that atom, where stepping from a pair (x', y') to an atom x'' gains
``cost(x', y') - cost(x'', y')``. That supremum is a longest-path value in a
finite graph; a positive-weight cycle certifies that the coupling is not
cyclically monotone, in which case no such potential exists.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import NegativeCycleError, bellman_ford, csgraph_from_dense

from .errors import UnreachableAtom
from .solver import Coupling
from .spacetime import SpacetimeModel

# A cycle must beat this tolerance to count as positive; smaller gains are
# treated as rounding noise from float cost arithmetic.
CYCLE_TOL = 1e-10


@dataclass(frozen=True)
class DualPotential:
    """psi on the mu-atoms and phi on the nu-atoms.

    For a valid potential, ``phi[j] - psi[i] <= cost(i, j)`` on every finite
    arc and phi is the c-transform of psi on the discrete supports; use
    :func:`dkp_verify` to check.
    """

    psi: tuple[float, ...]
    phi: tuple[float, ...]

    @classmethod
    def from_arrays(cls, psi, phi) -> "DualPotential":
        return cls(tuple(float(x) for x in psi), tuple(float(x) for x in phi))

    @classmethod
    def from_psi(cls, model, mu, psi, nu) -> "DualPotential":
        phi = c_transform(model, mu, psi, nu)
        if any(p is None for p in phi):
            raise ValueError("some nu-atom has no causal source; phi is -inf there")
        return cls.from_arrays(psi, phi)

    def psi_array(self) -> np.ndarray:
        return np.asarray(self.psi, dtype=float)

    def phi_array(self) -> np.ndarray:
        return np.asarray(self.phi, dtype=float)


@dataclass(frozen=True)
class ChainGraph:
    """Support pairs of a coupling plus the arcs used by the chain construction.

    Arc k runs from support pair ``pair_index[k]`` to mu-atom ``atom_index[k]``
    and has weight ``cost(pair) - cost(atom, pair.y)``; arcs exist wherever
    that second cost is finite.
    """

    pairs: tuple[tuple[int, int], ...]
    root: tuple[int, int]
    pair_index: np.ndarray
    atom_index: np.ndarray
    weight: np.ndarray


@dataclass(frozen=True)
class PositiveCycle:
    """Certificate that the coupling is not cyclically monotone."""

    atoms: tuple[int, ...]
    gain: float


@dataclass(frozen=True)
class DkpReport:
    feasible: bool
    support_tight: bool
    max_violation: float

    def as_dict(self):
        return {
            "feasible": self.feasible,
            "support_tight": self.support_tight,
            "max_violation": self.max_violation,
        }


def c_transform(model: SpacetimeModel, mu, psi, nu):
    """phi(y) = inf over mu-atoms x of psi(x) + cost(x, y).

    Returns one value per nu-atom; ``None`` marks atoms with no causal
    source at all (the infimum is minus infinity there). The sentinel is an
    explicit tagged value so it never enters float arithmetic.
    """
    C = model.cost_matrix(mu.coords_array(), nu.coords_array())
    psi = np.asarray(psi, dtype=float)
    vals = psi[:, None] + C
    out = []
    for j in range(nu.n_atoms):
        col = vals[:, j]
        finite = np.isfinite(col)
        out.append(float(np.min(col[finite])) if finite.any() else None)
    return out


def c_transform_back(model: SpacetimeModel, mu, phi, nu):
    """psi(x) = sup over nu-atoms y of phi(y) - cost(x, y).

    Reverse transform; ``None`` marks mu-atoms with no causal target.
    """
    C = model.cost_matrix(mu.coords_array(), nu.coords_array())
    phi = np.asarray(phi, dtype=float)
    vals = phi[None, :] - C
    out = []
    for i in range(mu.n_atoms):
        row = vals[i]
        finite = np.isfinite(row)
        out.append(float(np.max(row[finite])) if finite.any() else None)
    return out


def build_chain_graph(model: SpacetimeModel, coupling: Coupling, root=None) -> ChainGraph:
    pairs = tuple((i, j) for i, j, _ in coupling.entries)
    if root is None:
        root = pairs[0]  # entries are sorted, so this is the lexicographic minimum
    else:
        root = (int(root[0]), int(root[1]))
        if root not in pairs:
            raise ValueError(f"root {root} is not a support pair")
    C = model.cost_matrix(coupling.mu.coords_array(), coupling.nu.coords_array())
    pair_idx = []
    atom_idx = []
    weight = []
    for k, (i, j) in enumerate(pairs):
        w = C[i, j] - C[:, j]
        for a in np.nonzero(np.isfinite(w))[0]:
            pair_idx.append(k)
            atom_idx.append(int(a))
            weight.append(float(w[a]))
    return ChainGraph(
        pairs,
        root,
        np.asarray(pair_idx, dtype=np.int64),
        np.asarray(atom_idx, dtype=np.int64),
        np.asarray(weight, dtype=float),
    )


def _atom_arc_matrix(model: SpacetimeModel, coupling: Coupling) -> np.ndarray:
    """Condense the chain graph onto mu-atoms.

    W[u, k] is the best single-step gain from atom u to atom k over all
    support pairs (u, y); -inf where no step exists.
    """
    n = coupling.mu.n_atoms
    C = model.cost_matrix(coupling.mu.coords_array(), coupling.nu.coords_array())
    W = np.full((n, n), -np.inf)
    for i, j, _ in coupling.entries:
        W[i] = np.maximum(W[i], C[i, j] - C[:, j])
    np.fill_diagonal(W, -np.inf)
    return W


def _bellman_with_tolerance(W: np.ndarray, root: int):
    """Longest-path Bellman relaxation with an explicit improvement pass.

    Runs |V| rounds, then checks for any residual improvement above
    CYCLE_TOL; if found, extracts and returns a positive cycle, otherwise
    returns the converged distances.
    """
    n = W.shape[0]
    us, ks = np.nonzero(np.isfinite(W))
    ws = W[us, ks]
    dist = np.full(n, -np.inf)
    dist[root] = 0.0
    for _ in range(n):
        cand = dist[us] + ws
        new = dist.copy()
        np.maximum.at(new, ks, cand)
        if np.array_equal(new, dist):
            break
        dist = new
    gains = (dist[us] + ws) - dist[ks]
    gains = np.where(np.isfinite(gains), gains, -np.inf)
    worst = int(np.argmax(gains)) if len(gains) else -1
    if worst >= 0 and gains[worst] > CYCLE_TOL:
        # walk best predecessors until a node repeats; that loop is the cycle
        seq = [int(us[worst])]
        seen = {seq[0]: 0}
        for _ in range(n + 1):
            node = seq[-1]
            into = np.nonzero(ks == node)[0]
            if len(into) == 0:
                break
            best = into[np.argmax(dist[us[into]] + ws[into])]
            prev = int(us[best])
            if prev in seen:
                cycle = seq[seen[prev]:]
                cycle_gain = float(gains[worst])
                return None, PositiveCycle(tuple(reversed(cycle)), cycle_gain)
            seen[prev] = len(seq)
            seq.append(prev)
        return None, PositiveCycle(tuple(seq), float(gains[worst]))
    return dist, None


def chain_potential(model: SpacetimeModel, coupling: Coupling, root=None):
    """Longest-path potential psi on the mu-support, rooted at a support pair.

    Returns a numpy array with psi(root atom) = 0, or a
    :class:`PositiveCycle` when the chain graph contains a cycle of positive
    total weight (the coupling is then not cyclically monotone). Raises
    :class:`UnreachableAtom` when some mu-atom cannot be reached by any chain
    from the root; the construction needs a connected support.
    """
    graph = build_chain_graph(model, coupling, root)
    root_atom = graph.root[0]
    W = _atom_arc_matrix(model, coupling)
    n = W.shape[0]

    psi = None
    try:
        G = csgraph_from_dense(-W, null_value=np.inf)
        dist = bellman_ford(G, directed=True, indices=root_atom)
        psi = -np.asarray(dist).ravel()
    except NegativeCycleError:
        dist, cycle = _bellman_with_tolerance(W, root_atom)
        if cycle is not None:
            return cycle
        psi = dist

    unreachable = np.nonzero(~np.isfinite(psi))[0]
    if len(unreachable):
        raise UnreachableAtom(int(unreachable[0]))
    return psi + 0.0  # turn -0.0 into +0.0


def dkp_verify(model: SpacetimeModel, coupling: Coupling, potential: DualPotential,
               tol: float = 1e-8) -> DkpReport:
    """Check dual feasibility on all finite arcs and tightness on the support.

    ``feasible``: phi[j] - psi[i] <= cost(i, j) + tol everywhere the cost is
    finite. ``support_tight``: |phi[j] - psi[i] - cost(i, j)| <= tol on every
    support entry. ``max_violation`` is the larger of the worst feasibility
    excess (clipped at zero) and the worst support residual.
    """
    C = model.cost_matrix(coupling.mu.coords_array(), coupling.nu.coords_array())
    psi = potential.psi_array()
    phi = potential.phi_array()
    slack = phi[None, :] - psi[:, None] - C
    finite = np.isfinite(C)
    worst_feas = float(np.max(slack[finite])) if finite.any() else 0.0
    ii, jj, _ = coupling.index_arrays()
    support_res = np.abs(slack[ii, jj])
    worst_support = float(np.max(support_res))
    return DkpReport(
        feasible=worst_feas <= tol,
        support_tight=worst_support <= tol,
        max_violation=max(max(worst_feas, 0.0), worst_support),
    )
