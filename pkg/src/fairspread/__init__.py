"""Group-fair influence maximization on attributed social networks.

The package provides an independent-cascade simulator, a lazy-greedy
baseline, stochastic gradient oracles for multilinear extensions of
group-influence objectives, a multiobjective submodular maximizer
(continuous Frank-Wolfe with a saddle-point mirror-descent inner loop
plus swap rounding), and two fairness solvers built on top of it:
maximin (largest minimum per-group influence fraction) and diversity
constraints (every group gets at least what it could achieve on its own
with a proportional seed budget).
"""

from .graph import (AttributedGraph, SeedSet, GraphFormatError, GraphValidationError,
                    load_graph, save_graph, graph_to_json, from_edges,
                    induced_subgraph, fair_allocation)
from .cascade import (LiveEdgeSample, SpreadEstimate, sample_live_edges, reachable,
                      estimate_spread, exact_spread)
from .config import SolverParams
from .greedy import lazy_greedy, naive_greedy, spread_objective, group_demand, GreedyResult
from .oracles import (FractionalSeedVector, GradientSample, InfluenceObjectives,
                      cohen_estimate)
from .multiobjective import (ObjectiveSet, ConvexDecomposition, SaddleState,
                             InfeasibleBudgetError, threshold_include, ssp_md,
                             multi_fw, decompose, swap_round, multiobjective_maximize)
from .fairness import (SolveResult, solve_maximin, solve_diversity, solve_greedy,
                       evaluate_fairness, price_of_fairness,
                       exact_maximin_utility, exact_rational_utility)

__version__ = "0.1.0"

__all__ = [
    "AttributedGraph", "SeedSet", "GraphFormatError", "GraphValidationError",
    "load_graph", "save_graph", "graph_to_json", "from_edges",
    "induced_subgraph", "fair_allocation",
    "LiveEdgeSample", "SpreadEstimate", "sample_live_edges", "reachable",
    "estimate_spread", "exact_spread",
    "SolverParams",
    "lazy_greedy", "naive_greedy", "spread_objective", "group_demand", "GreedyResult",
    "FractionalSeedVector", "GradientSample", "InfluenceObjectives", "cohen_estimate",
    "ObjectiveSet", "ConvexDecomposition", "SaddleState", "InfeasibleBudgetError",
    "threshold_include", "ssp_md", "multi_fw", "decompose", "swap_round",
    "multiobjective_maximize",
    "SolveResult", "solve_maximin", "solve_diversity", "solve_greedy",
    "evaluate_fairness", "price_of_fairness",
    "exact_maximin_utility", "exact_rational_utility",
]
