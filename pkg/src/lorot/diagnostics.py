"""Quantitative probes of a solved coupling.

The interesting dichotomy is between mass transported along the light cone
(zero cost, margin zero) and transport with a uniform timelike margin. A
coupling with a large lightlike fraction is exactly the regime where dual
potentials blow up under refinement; a positive minimum margin is the
discrete form of strict timelikeness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .solver import Coupling, TransportProblem, dual_objective
from .spacetime import SpacetimeModel

NULL_CLASS_TOL = 1e-9


@dataclass(frozen=True)
class DiagnosticsReport:
    lightlike_fraction: float
    min_margin: float
    dual_gap: float
    monotonicity_violations: int

    def as_dict(self):
        return {
            "lightlike_fraction": self.lightlike_fraction,
            "min_margin": self.min_margin,
            "dual_gap": self.dual_gap,
            "monotonicity_violations": self.monotonicity_violations,
        }


def _entry_margins(model: SpacetimeModel, coupling: Coupling):
    margins = model.margin_matrix(
        coupling.mu.coords_array(), coupling.nu.coords_array()
    )
    ii, jj, mm = coupling.index_arrays()
    identical = np.array(
        [coupling.mu.points[i] == coupling.nu.points[j] for i, j, _ in coupling.entries]
    )
    return margins[ii, jj], mm, identical


def class_fractions(model: SpacetimeModel, coupling: Coupling, tol: float = NULL_CLASS_TOL):
    """Mass fractions by causal class of the support entries.

    The three fractions sum to one over the coupling mass.
    """
    margins, masses, identical = _entry_margins(model, coupling)
    total = masses.sum()
    null = ~identical & (np.abs(margins) <= tol)
    chrono = ~identical & (margins > tol)
    return {
        "lightlike": float(masses[null].sum() / total),
        "chronological": float(masses[chrono].sum() / total),
        "identical": float(masses[identical].sum() / total),
    }


def lightlike_fraction(model: SpacetimeModel, coupling: Coupling,
                       tol: float = NULL_CLASS_TOL) -> float:
    """Fraction of mass moved along the cone boundary (x != y, margin ~ 0)."""
    return class_fractions(model, coupling, tol)["lightlike"]


def strict_margin(model: SpacetimeModel, coupling: Coupling) -> float:
    """Minimum cone margin over support entries with x != y.

    Returns +inf when every entry is a stay-put pair; a strictly positive
    value is the discrete strict-timelikeness certificate.
    """
    margins, _, identical = _entry_margins(model, coupling)
    moving = margins[~identical]
    if len(moving) == 0:
        return math.inf
    return float(np.min(moving))


def count_monotonicity_violations(model: SpacetimeModel, coupling: Coupling,
                                  samples: int = 1000, tol: float = 1e-9,
                                  seed: int = 0) -> int:
    """Sample pairs of support entries and count two-cycle improvements.

    A violation is a pair of entries (x1,y1), (x2,y2) with
    cost(x1,y1) + cost(x2,y2) > cost(x1,y2) + cost(x2,y1) + tol; an infinite
    right-hand side never violates.
    """
    C = model.cost_matrix(coupling.mu.coords_array(), coupling.nu.coords_array())
    ii, jj, _ = coupling.index_arrays()
    rng = np.random.default_rng(seed)
    k = len(ii)
    e1 = rng.integers(0, k, size=samples)
    e2 = rng.integers(0, k, size=samples)
    lhs = C[ii[e1], jj[e1]] + C[ii[e2], jj[e2]]
    rhs = C[ii[e1], jj[e2]] + C[ii[e2], jj[e1]]
    bad = np.isfinite(rhs) & (lhs > rhs + tol)
    return int(np.count_nonzero(bad))


def audit(model: SpacetimeModel, problem: TransportProblem, coupling: Coupling,
          lp_duals, samples: int = 1000, seed: int = 0,
          null_tol: float = NULL_CLASS_TOL) -> DiagnosticsReport:
    """Assemble the standard report for a solved instance."""
    gap = abs(coupling.total_cost - dual_objective(coupling, lp_duals))
    return DiagnosticsReport(
        lightlike_fraction=lightlike_fraction(model, coupling, null_tol),
        min_margin=strict_margin(model, coupling),
        dual_gap=float(gap),
        monotonicity_violations=count_monotonicity_violations(
            model, coupling, samples=samples, seed=seed
        ),
    )
