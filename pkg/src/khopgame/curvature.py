"""Curvature-style bounds and approximation-ratio diagnostics.

The benefit function is not submodular, but the violation of diminishing
returns is bounded: a conditioning step can inflate a marginal benefit by
at most a factor delta computed from the revenue schedule (and optionally
the graph). From delta follow guarantees of the form 1 - e^(-1/delta) for
the adaptive greedy policies, with a sharper finite-budget variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import _backend
from .errors import UndefinedBoundError, UndefinedRatioError, ValidationError
from .estimator import ENUMERATION_CAP, exact_marginal
from .game import PartialRealization
from .network import GameParams, Graph


def delta_global(n: int, revenue) -> float:
    """Worst-case inflation factor from the revenue schedule alone.

    (R0 + (n-1) R1) / (R0 - R1) for an n-node instance. Undefined when the
    schedule is flat at the top or has a single level.
    """
    revenue = tuple(int(x) for x in revenue)
    if n < 1:
        raise ValidationError(f"need n >= 1, got {n}")
    if len(revenue) < 2:
        raise UndefinedBoundError("needs at least two revenue levels")
    r0, r1 = revenue[0], revenue[1]
    if r0 <= r1:
        raise UndefinedBoundError(f"undefined for R0 <= R1 (got R0={r0}, R1={r1})")
    return (r0 + (n - 1) * r1) / (r0 - r1)


def potential_vector(graph: Graph, params: GameParams) -> dict:
    """Best-case revenue reach per node: sum over hops j of R_j times the
    number of nodes at structural distance j, ignoring probabilities."""
    pot = _backend.kernels.potentials(
        graph.indptr, graph.indices, params.k, params.revenue_array()
    )
    return {graph.node_ids[i]: int(pot[i]) for i in range(graph.n)}


def delta_data(graph: Graph, params: GameParams) -> float:
    """Instance-aware inflation factor: max potential over (R0 - R1).

    Never exceeds delta_global on the same instance.
    """
    if graph.n < 1:
        raise UndefinedBoundError("undefined on an empty graph")
    revenue = params.revenue
    if len(revenue) < 2:
        raise UndefinedBoundError("needs at least two revenue levels")
    r0, r1 = revenue[0], revenue[1]
    if r0 <= r1:
        raise UndefinedBoundError(f"undefined for R0 <= R1 (got R0={r0}, R1={r1})")
    pot = _backend.kernels.potentials(
        graph.indptr, graph.indices, params.k, params.revenue_array()
    )
    return int(pot.max()) / (r0 - r1)


def approx_ratio(delta: float) -> float:
    """Greedy guarantee 1 - e^(-1/delta) for inflation factor delta."""
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    return 1.0 - math.exp(-1.0 / delta)


def finite_budget_ratio(delta: float, b: int) -> float:
    """Budget-b guarantee 1 - (1 - 1/(b delta))^b; tends to approx_ratio."""
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    if not isinstance(b, int) or b < 1:
        raise ValidationError(f"budget must be a positive integer, got {b!r}")
    return 1.0 - (1.0 - 1.0 / (b * delta)) ** b


def empirical_gamma(
    graph: Graph,
    psi: PartialRealization,
    psi_prime: PartialRealization,
    u: str,
    params: GameParams,
    cap: int = ENUMERATION_CAP,
) -> float:
    """Observed inflation Delta(u | psi') / Delta(u | psi) for psi <= psi'.

    Both marginals are computed exactly. Values above 1 witness a failure
    of diminishing returns; the theory promises the ratio stays below the
    delta bounds.
    """
    if not psi.is_subrealization_of(psi_prime):
        raise ValidationError("psi is not a subrealization of psi_prime")
    base = exact_marginal(graph, psi, u, params, cap=cap).value
    conditioned = exact_marginal(graph, psi_prime, u, params, cap=cap).value
    if base == 0.0:
        raise UndefinedRatioError(f"marginal of {u!r} under the smaller realization is zero")
    return conditioned / base


def greedy_increment_gate(increments, b: int, delta: float) -> bool:
    """Decide whether a greedy gain sequence decays fast enough.

    increments holds the b+1 greedy marginal gains rho_0..rho_b; the test
    is rho_b <= (1 - 1/(b delta))^b * rho_0.
    """
    increments = [float(x) for x in increments]
    if not isinstance(b, int) or b < 1:
        raise ValidationError(f"budget must be a positive integer, got {b!r}")
    if len(increments) != b + 1:
        raise ValidationError(f"expected {b + 1} increments for budget {b}, got {len(increments)}")
    if delta <= 0:
        raise ValidationError(f"delta must be positive, got {delta}")
    threshold = (1.0 - 1.0 / (b * delta)) ** b * increments[0]
    return increments[b] <= threshold


@dataclass(frozen=True)
class CurvatureReport:
    n: int
    k: int
    revenue: tuple
    delta_global: float
    delta_data: float
    ratio_global: float
    ratio_data: float

    def as_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "revenue": list(self.revenue),
            "delta_global": self.delta_global,
            "delta_data": self.delta_data,
            "ratio_global": self.ratio_global,
            "ratio_data": self.ratio_data,
        }


def curvature_report(graph: Graph, params: GameParams) -> CurvatureReport:
    """Both delta bounds and the greedy ratios they imply for an instance."""
    dg = delta_global(graph.n, params.revenue)
    dd = delta_data(graph, params)
    return CurvatureReport(
        n=graph.n,
        k=params.k,
        revenue=params.revenue,
        delta_global=dg,
        delta_data=dd,
        ratio_global=approx_ratio(dg),
        ratio_data=approx_ratio(dd),
    )
