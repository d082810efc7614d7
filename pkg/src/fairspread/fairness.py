"""Group-fairness solvers built on the multiobjective maximizer.

Maximin fairness searches for the largest W such that every group can
receive at least a W fraction of itself; diversity constraints fix each
group's target at what it could achieve on its own subgraph with its
proportional seed budget and then search for the largest achievable total
influence on top. Both reductions binary-search the target level, solving
a multiobjective instance per probe.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .cascade import estimate_spread, exact_spread
from .config import SolverParams
from .graph import AttributedGraph, SeedSet, fair_allocation, induced_subgraph
from .greedy import group_demand, lazy_greedy, spread_objective
from .multiobjective import InfeasibleBudgetError, multiobjective_maximize
from .oracles import InfluenceObjectives
from .rng import derive_seed


@dataclass
class SolveResult:
    """Chosen seeds with fairness diagnostics.

    fractions are per-group influence divided by group size; maximin_value
    is their minimum. violations compare achieved group influence against
    the demands vector (diversity targets), as max(0, (W_i - got_i) / W_i).
    """
    algorithm: str
    seeds: SeedSet
    total: float
    total_stderr: float
    per_group: np.ndarray
    group_stderr: np.ndarray
    fractions: np.ndarray
    maximin_value: float
    demands: np.ndarray | None = None
    violations: np.ndarray | None = None
    mean_violation_pct: float | None = None
    search_trace: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)


def _violations(demands: np.ndarray, achieved: np.ndarray) -> np.ndarray:
    out = np.zeros_like(demands, dtype=np.float64)
    pos = demands > 0
    out[pos] = np.maximum(0.0, (demands[pos] - achieved[pos]) / demands[pos])
    return out


def _result(G: AttributedGraph, S, k: int, num_samples: int, master_seed,
            algorithm: str, demands=None, trace=None, diagnostics=None) -> SolveResult:
    members = frozenset(int(v) for v in S)
    est = estimate_spread(G, sorted(members), num_samples, master_seed)
    sizes = G.group_sizes().astype(np.float64)
    fractions = est.per_group / sizes
    res = SolveResult(
        algorithm=algorithm,
        seeds=SeedSet(members, k),
        total=est.total,
        total_stderr=est.total_stderr,
        per_group=est.per_group,
        group_stderr=est.group_stderr,
        fractions=fractions,
        maximin_value=float(fractions.min()) if fractions.size else 0.0,
        search_trace=trace or [],
        diagnostics=diagnostics or {},
    )
    if demands is not None:
        demands = np.asarray(demands, dtype=np.float64)
        res.demands = demands
        res.violations = _violations(demands, est.per_group)
        res.mean_violation_pct = float(res.violations.mean() * 100.0)
    return res


def compute_demands(G: AttributedGraph, k: int, params: SolverParams, master_seed: int) -> np.ndarray:
    """W_i for every group: greedy value on its own subgraph with its fair
    seed share (brute force instead when params.exact_demand is set)."""
    out = np.zeros(G.m)
    for i in range(G.m):
        k_i = fair_allocation(G, k, i)
        out[i] = group_demand(G, i, k_i, params.samples_probe,
                              derive_seed(master_seed, "demand"), exact=params.exact_demand,
                              cap=params.enum_cap)
    return out


def evaluate_fairness(G: AttributedGraph, S, demands=None, num_samples: int = 10000,
                      master_seed: int = 0, k: int | None = None,
                      params: SolverParams | None = None) -> SolveResult:
    """Fairness diagnostics for an externally supplied seed set."""
    params = params or SolverParams()
    members = frozenset(int(v) for v in S)
    if k is None:
        k = max(len(members), 1)
    if demands is None:
        demands = compute_demands(G, k, params, derive_seed(master_seed, "eval-demands"))
    return _result(G, members, k, num_samples, derive_seed(master_seed, "evaluate"),
                   "evaluate", demands=demands)


def solve_greedy(G: AttributedGraph, k: int, params: SolverParams | None = None,
                 master_seed: int = 0, demands=None) -> SolveResult:
    """Unconstrained influence maximization baseline (CELF)."""
    params = params or SolverParams()
    res = lazy_greedy(spread_objective(G, params.samples_probe, derive_seed(master_seed, "greedy")),
                      G.n, k)
    if demands is None:
        demands = compute_demands(G, k, params, derive_seed(master_seed, "greedy-demands"))
    out = _result(G, res.seeds, k, params.samples_final, derive_seed(master_seed, "greedy-final"),
                  "greedy", demands=demands)
    out.diagnostics["gain_trace"] = res.gains
    return out


def _probe_count(params: SolverParams) -> int:
    return max(1, math.ceil(math.log2(1.0 / params.bs_tol)))


def solve_maximin(G: AttributedGraph, k: int, params: SolverParams | None = None,
                  master_seed: int = 0, demands=None) -> SolveResult:
    """Largest W such that every group receives at least a W fraction of its
    size, found by binary search; each probe runs the multiobjective solver
    on the raw group-count objectives with targets W * |C_i|.
    """
    params = params or SolverParams()
    sizes = G.group_sizes().astype(np.float64)
    objectives = InfluenceObjectives(G, G.member_mask.astype(np.float64), budget=k,
                                     delta=params.delta, cohen_mult=params.cohen_mult)
    # one singleton table backs every probe's threshold pass
    objectives.singleton_table(params.samples_singleton, derive_seed(master_seed, "singletons"))
    alpha = params.accept_level()
    lo, hi = 0.0, 1.0
    trace = []
    best = None  # (maximin_value, members, diagnostics)
    for probe in range(_probe_count(params)):
        W = 0.5 * (lo + hi)
        probe_seed = derive_seed(master_seed, "probe", probe)
        try:
            S, diag = multiobjective_maximize(objectives.with_targets(W * sizes), k,
                                              params, probe_seed)
        except InfeasibleBudgetError:
            trace.append({"target": W, "feasible": False, "infeasible_budget": True})
            hi = W
            continue
        est = estimate_spread(G, sorted(S), params.samples_probe, derive_seed(probe_seed, "check"))
        fracs = est.per_group / sizes
        achieved_min = float(fracs.min())
        feasible = achieved_min >= alpha * W - params.bs_tol
        trace.append({"target": W, "feasible": bool(feasible),
                      "achieved_min_fraction": achieved_min, "total": est.total})
        if best is None or achieved_min > best[0]:
            best = (achieved_min, S, diag)
        if feasible:
            lo = W
        else:
            hi = W
    if best is None:
        best = (0.0, frozenset(), {})
    if demands is None:
        demands = compute_demands(G, k, params, derive_seed(master_seed, "maximin-demands"))
    out = _result(G, best[1], k, params.samples_final, derive_seed(master_seed, "maximin-final"),
                  "maximin", demands=demands, trace=trace, diagnostics=best[2])
    return out


def solve_diversity(G: AttributedGraph, k: int, params: SolverParams | None = None,
                    master_seed: int = 0, demands=None) -> SolveResult:
    """Diversity-constrained maximization: group targets are the demands
    (what each group achieves on its own with its fair seed share); a total
    influence objective rides on top and its target is binary searched.
    """
    params = params or SolverParams()
    if demands is None:
        demands = compute_demands(G, k, params, derive_seed(master_seed, "demands"))
    demands = np.asarray(demands, dtype=np.float64)
    weights = np.vstack([G.member_mask.astype(np.float64), np.ones((1, G.n))])
    objectives = InfluenceObjectives(G, weights, budget=k,
                                     delta=params.delta, cohen_mult=params.cohen_mult)
    objectives.singleton_table(params.samples_singleton, derive_seed(master_seed, "singletons"))
    alpha = params.accept_level()
    slack = params.bs_tol * G.n
    lo, hi = 0.0, float(G.n)
    trace = []
    best_feasible = None   # (total, members, diag) among demand-satisfying probes
    best_fallback = None   # (mean violation, -total, members, diag) otherwise
    for probe in range(_probe_count(params)):
        W_total = 0.5 * (lo + hi)
        probe_seed = derive_seed(master_seed, "probe", probe)
        targets = np.concatenate([demands, [W_total]])
        try:
            S, diag = multiobjective_maximize(objectives.with_targets(targets), k,
                                              params, probe_seed)
        except InfeasibleBudgetError:
            trace.append({"target": W_total, "feasible": False, "infeasible_budget": True})
            hi = W_total
            continue
        est = estimate_spread(G, sorted(S), params.samples_probe, derive_seed(probe_seed, "check"))
        demand_ok = bool(np.all(est.per_group >= alpha * demands - slack))
        feasible = demand_ok and est.total >= alpha * W_total - slack
        trace.append({"target": W_total, "feasible": bool(feasible), "demand_ok": demand_ok,
                      "total": est.total})
        if demand_ok:
            if best_feasible is None or est.total > best_feasible[0]:
                best_feasible = (est.total, S, diag)
        else:
            mv = float(_violations(demands, est.per_group).mean())
            if best_fallback is None or (mv, -est.total) < (best_fallback[0], best_fallback[1]):
                best_fallback = (mv, -est.total, S, diag)
        if feasible:
            lo = W_total
        else:
            hi = W_total
    if best_feasible is not None:
        members, diag = best_feasible[1], best_feasible[2]
    elif best_fallback is not None:
        members, diag = best_fallback[2], best_fallback[3]
    else:
        members, diag = frozenset(), {}
    return _result(G, members, k, params.samples_final, derive_seed(master_seed, "dc-final"),
                   "dc", demands=demands, trace=trace, diagnostics=diag)


def price_of_fairness(G: AttributedGraph, k: int, concept: str,
                      params: SolverParams | None = None, master_seed: int = 0,
                      details: bool = False):
    """Ratio of the greedy (unconstrained) influence estimate to the fair
    solver's total influence; +inf when the fair total is zero.
    """
    params = params or SolverParams()
    if concept not in ("maximin", "rational"):
        raise ValueError("concept must be 'maximin' or 'rational'")
    greedy_res = solve_greedy(G, k, params, derive_seed(master_seed, "pof-greedy"))
    if concept == "maximin":
        fair = solve_maximin(G, k, params, derive_seed(master_seed, "pof-fair"))
    else:
        fair = solve_diversity(G, k, params, derive_seed(master_seed, "pof-fair"))
    pof = float(greedy_res.total / fair.total) if fair.total > 0 else float("inf")
    if details:
        return pof, {"opt_total": greedy_res.total, "fair_total": fair.total,
                     "greedy": greedy_res, "fair": fair}
    return pof


# -- exact utilities for the worst-case fixtures -------------------------------

def exact_maximin_utility(G: AttributedGraph, S, cap: int = 25) -> float:
    """min_i exact group influence of S divided by group size."""
    est = exact_spread(G, S, cap=cap)
    sizes = G.group_sizes().astype(np.float64)
    return float((est.per_group / sizes).min())


def exact_group_demand(G: AttributedGraph, i: int, k_i: int, cap: int = 25) -> float:
    """Exact optimum influence of group i on its own subgraph with k_i seeds."""
    sub, _ = induced_subgraph(G, G.groups[i])
    k_i = min(k_i, sub.n)
    best = 0.0
    for combo in itertools.combinations(range(sub.n), k_i):
        val = exact_spread(sub, np.array(combo, dtype=np.int64), cap=cap).total
        best = max(best, val)
    return best


def exact_rational_utility(G: AttributedGraph, S, k: int, cap: int = 25) -> float:
    """Total influence of S when every group's demand is met exactly, else 0."""
    est = exact_spread(G, S, cap=cap)
    for i in range(G.m):
        demand = exact_group_demand(G, i, fair_allocation(G, k, i), cap=cap)
        if est.per_group[i] < demand - 1e-12:
            return 0.0
    return float(est.total)
