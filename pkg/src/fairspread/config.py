"""Solver configuration shared by the optimizer, fairness layer, and CLI."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass
class SolverParams:
    """Tunable knobs for the multiobjective solver and fairness reductions.

    The iteration counts implied by the approximation theory are far too
    large to run, so fw_iters/md_iters default to workable values and the
    solver reports achieved-vs-target ratios instead of promising the
    theoretical bound.
    """

    epsilon: float = 0.5          # solve precision: active-set gate, thresholds, step sizes
    eps_prime: float = 0.2        # singleton-estimate accuracy margin in the include threshold
    fw_iters: int = 100           # outer Frank-Wolfe steps
    md_iters: int = 500           # saddle-point mirror-descent iterations per step
    eta: float | None = None      # mirror-descent step size; None = diameter-based default
    delta: float = 0.01           # oracle failure probability
    cohen_mult: float = 8.0       # repetitions multiplier: l = ceil(mult * ln(n/delta))
    samples_probe: int = 1000     # Monte Carlo samples inside the optimization loop
    samples_final: int = 100000   # Monte Carlo samples for final reporting
    samples_singleton: int = 400  # samples behind the singleton-value table
    swap_delta: float = 0.05      # swap rounding repeats ceil(log2(1/swap_delta)) times
    bs_tol: float = 0.01          # binary search precision (fraction scale; total scale is *n)
    alpha_accept: float | None = None  # feasibility acceptance level; None = (1-1/e)(1-epsilon)
    threshold_fallback: bool = True    # on overfull threshold set, retry with an empty one
    exact_demand: bool = False    # brute-force group demands when the subgraph is small enough
    enum_cap: int = 25            # max relevant arcs for exact enumeration
    threads: int | None = None    # worker cap for sampling kernels; None = numba default

    def with_overrides(self, **kwargs) -> "SolverParams":
        return replace(self, **kwargs)

    def accept_level(self) -> float:
        if self.alpha_accept is not None:
            return self.alpha_accept
        return (1.0 - 1.0 / math.e) * (1.0 - self.epsilon)
