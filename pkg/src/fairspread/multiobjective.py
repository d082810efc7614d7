"""Simultaneous target satisfaction for several monotone submodular objectives.

Given objectives f_1..f_m with targets W_1..W_m and a cardinality budget k
(under the promise that some k-set meets every target), the maximizer:

1. includes every item whose singleton value clears a per-objective
   threshold (large items must be locked in for rounding to concentrate);
2. optimizes the multilinear extensions over the residual-budget matroid
   polytope with Frank-Wolfe steps, where each step direction comes from a
   stochastic saddle-point mirror-descent game between a max player moving
   mass inside the polytope and a min player reweighting objectives;
3. decomposes the fractional point exactly into bases and swap-rounds the
   decomposition, keeping the repetition with the best worst-case
   target ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import SolverParams
from .oracles import FractionalSeedVector, GradientSample
from .rng import derive_seed, spawn_rng


class InfeasibleBudgetError(RuntimeError):
    """More items clear the inclusion threshold than the budget can hold."""


@dataclass
class SaddleState:
    """Final inner-loop state, kept for diagnostics."""
    v: np.ndarray
    y: np.ndarray
    active: np.ndarray
    eta_v: float
    eta_y: float
    iterations: int


@dataclass
class ConvexDecomposition:
    """Convex combination of equal-size bases representing a fractional point.

    Coordinates >= n are padding dummies that absorb slack up to the budget;
    they are dropped at rounding time. Weights are kept as exact rationals so
    re-mixing reproduces the decomposed point with zero error.
    """
    entries: list[tuple[float, frozenset[int]]]
    exact_weights: list[Fraction]
    k_prime: int
    n: int

    def mixed_exact(self) -> list[Fraction]:
        acc = [Fraction(0)] * self.n
        for w, (_, base) in zip(self.exact_weights, self.entries):
            for j in base:
                if j < self.n:
                    acc[j] += w
        return acc

    def mixed(self) -> np.ndarray:
        return np.array([float(v) for v in self.mixed_exact()])


class ObjectiveSet:
    """Generic oracle bundle; exact callables make deterministic test objectives.

    The optimizer only needs the method surface below, which
    InfluenceObjectives implements with cascade-backed estimators:
    value_all / set_value_all return (means, stderrs) for all objectives,
    grad_full returns a GradientSample over items for one objective,
    grad_item returns the per-objective marginal vector of one item, and
    singleton_table returns ({f_i({j})}, stderrs).
    """

    def __init__(self, n, targets, value_fn, grad_fn, item_fn, singleton_fn,
                 base=(), b=None):
        self.n = int(n)
        self.targets = np.asarray(targets, dtype=np.float64)
        self.m = self.targets.shape[0]
        self._value_fn = value_fn
        self._grad_fn = grad_fn
        self._item_fn = item_fn
        self._singleton_fn = singleton_fn
        base = list(base)
        self.base = np.unique(np.asarray(base, dtype=np.int64)) if base else np.empty(0, dtype=np.int64)
        self.b = b

    def with_targets(self, targets) -> "ObjectiveSet":
        return ObjectiveSet(self.n, targets, self._value_fn, self._grad_fn,
                            self._item_fn, self._singleton_fn, self.base, self.b)

    def conditioned(self, base) -> "ObjectiveSet":
        merged = sorted(set(int(v) for v in self.base) | set(int(v) for v in base))
        return ObjectiveSet(self.n, self.targets, self._value_fn, self._grad_fn,
                            self._item_fn, self._singleton_fn, merged, self.b)

    def singleton_table(self, num_samples, master_seed):
        table = np.asarray(self._singleton_fn(), dtype=np.float64)
        if self.b is None:
            self.b = float(max(table.max(initial=0.0), 1e-12))
        return table, np.zeros_like(table)

    def value_all(self, x, num_samples, master_seed):
        x = x.x if isinstance(x, FractionalSeedVector) else np.asarray(x, dtype=np.float64)
        vals = np.asarray(self._value_fn(x, self.base), dtype=np.float64)
        return vals, np.zeros(self.m)

    def set_value_all(self, S, num_samples, master_seed):
        ind = np.zeros(self.n)
        S = list(S)
        if S:
            ind[np.asarray(S, dtype=np.int64)] = 1.0
        return self.value_all(ind, num_samples, master_seed)

    def _ensure_b(self):
        if self.b is None:
            self.singleton_table(0, 0)
        return self.b

    def grad_full(self, x, i, master_seed, delta=None):
        x = x.x if isinstance(x, FractionalSeedVector) else np.asarray(x, dtype=np.float64)
        g = np.asarray(self._grad_fn(x, int(i), self.base, spawn_rng(master_seed)), dtype=np.float64)
        b2 = 2.0 * self._ensure_b()
        return GradientSample("full", int(i), g, b2, bool(g.max(initial=0.0) <= b2 + 1e-9))

    def grad_item(self, x, j, master_seed):
        x = x.x if isinstance(x, FractionalSeedVector) else np.asarray(x, dtype=np.float64)
        return np.asarray(self._item_fn(x, int(j), self.base, spawn_rng(master_seed)), dtype=np.float64)


def threshold_include(objectives, epsilon: float, eps_prime: float, k: int,
                      num_samples: int = 400, master_seed: int = 0) -> np.ndarray:
    """Items whose estimated singleton value clears (1+eps')*eps^3*W_i for
    some objective with a positive target. Raises InfeasibleBudgetError when
    more items qualify than the budget can hold.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    table, _ = objectives.singleton_table(num_samples, master_seed)
    targets = objectives.targets
    include = np.zeros(objectives.n, dtype=bool)
    positive = np.flatnonzero(targets > 0)
    for i in positive:
        include |= table[i] >= (1.0 + eps_prime) * (epsilon ** 3) * targets[i]
    chosen = np.flatnonzero(include).astype(np.int64)
    if chosen.size > k:
        raise InfeasibleBudgetError(
            f"{chosen.size} items clear the inclusion threshold but the budget is {k}")
    if positive.size:
        cap = positive.size / ((1.0 + eps_prime) * epsilon ** 3)
        assert chosen.size <= cap + 1e-9, "threshold set exceeds its theoretical size bound"
    return chosen


def project_capped_simplex(w: np.ndarray, k: int, allowed: np.ndarray) -> np.ndarray:
    """Scale-then-cap projection onto {0 <= v <= 1, sum v = k} over allowed
    coordinates: find theta with sum min(1, theta*w) = k by iterated capping.
    """
    v = np.zeros_like(w, dtype=np.float64)
    free = allowed.copy()
    n_allowed = int(allowed.sum())
    if k >= n_allowed:
        v[allowed] = 1.0
        return v
    w = np.where(allowed, np.maximum(w, 0.0), 0.0)
    capped = np.zeros_like(allowed)
    for _ in range(n_allowed + 1):
        rem = k - int(capped.sum())
        free = allowed & ~capped
        if rem <= 0:
            v[:] = 0.0
            v[capped] = 1.0
            return v
        denom = w[free].sum()
        if denom <= 0.0:
            v[capped] = 1.0
            v[free] = rem / int(free.sum())
            return v
        theta = rem / denom
        newly = free & (w * theta >= 1.0)
        if not newly.any():
            v = np.where(free, w * theta, 0.0)
            v[capped] = 1.0
            return v
        capped |= newly
    raise AssertionError("capped-simplex projection failed to terminate")


def ssp_md(objectives, x, active: np.ndarray, gaps: np.ndarray, k_prime: int,
           md_iters: int, epsilon: float, delta: float, allowed: np.ndarray,
           master_seed: int, eta: float | None = None) -> tuple[np.ndarray, SaddleState]:
    """Stochastic saddle-point mirror descent for one Frank-Wolfe direction.

    Plays the max player (mass vector v in the capped simplex of size
    k_prime) against the min player (distribution y over the active
    objectives) on the game v . grad F_i(x) / gap_i. Each round samples an
    objective i ~ y for the v-gradient and an item j ~ v/k' for the
    y-gradient, then takes exponentiated updates. Returns the averaged
    iterate, which is what the convergence guarantee is about.
    """
    n = objectives.n
    vbar = np.zeros(n)
    if active.size == 0 or k_prime <= 0:
        return vbar, SaddleState(vbar.copy(), np.empty(0), active, 0.0, 0.0, 0)
    n_allowed = int(allowed.sum())
    if n_allowed == 0:
        return vbar, SaddleState(vbar.copy(), np.empty(0), active, 0.0, 0.0, 0)
    if k_prime >= n_allowed:
        vbar[allowed] = 1.0
        return vbar, SaddleState(vbar.copy(), np.empty(0), active, 0.0, 0.0, 0)
    # adaptive (diameter over accumulated gradient norm) steps by default;
    # a fixed eta from the worst-case analysis is far too small to move the
    # averaged iterate at practical iteration counts
    diam_v = math.sqrt(k_prime * math.log(max(n_allowed, 2)))
    diam_y = math.sqrt(math.log(max(active.size, 2)))
    acc_v, acc_y = 1e-12, 1e-12
    v = np.where(allowed, k_prime / n_allowed, 0.0)
    y = np.full(active.size, 1.0 / active.size)
    rng = spawn_rng(master_seed, "choices")
    eta_v = eta_y = 0.0
    for t in range(md_iters):
        i_loc = int(rng.choice(active.size, p=y))
        i = int(active[i_loc])
        gs = objectives.grad_full(x, i, derive_seed(master_seed, "grad", t), delta)
        ghat = np.where(allowed, gs.values, 0.0) / gaps[i_loc]
        j = int(rng.choice(n, p=v / v.sum()))
        item = objectives.grad_item(x, j, derive_seed(master_seed, "item", t))
        yhat = k_prime * item[active] / gaps
        if eta is not None:
            eta_v = eta_y = eta
        else:
            acc_v += float(np.abs(ghat).max()) ** 2
            acc_y += float(np.abs(yhat).max()) ** 2
            eta_v = diam_v / math.sqrt(acc_v)
            eta_y = diam_y / math.sqrt(acc_y)
        # exponentiated descent for y (shift-invariant under normalization)
        ye = y * np.exp(-eta_y * (yhat - yhat.min()))
        y = ye / ye.sum()
        # exponentiated ascent for v, then exact projection back to the polytope
        logits = eta_v * ghat
        logits -= logits[allowed].max()
        v = project_capped_simplex(v * np.exp(logits), k_prime, allowed)
        vbar += v
    vbar /= md_iters
    return vbar, SaddleState(v, y, active, eta_v, eta_y, md_iters)


def multi_fw(objectives, k_prime: int, params: SolverParams, master_seed: int,
             allowed: np.ndarray | None = None) -> tuple[FractionalSeedVector, list[dict]]:
    """Frank-Wolfe over the budget-k' matroid polytope, one saddle-point
    solve per step on the objectives still short of their targets.
    """
    n = objectives.n
    if allowed is None:
        allowed = np.ones(n, dtype=bool)
    x = np.zeros(n)
    T = max(1, params.fw_iters)
    trace = []
    for t in range(1, T + 1):
        vals, ses = objectives.value_all(x, params.samples_probe, derive_seed(master_seed, "fw-value", t))
        gaps_all = objectives.targets - vals
        active = np.flatnonzero(gaps_all >= params.epsilon).astype(np.int64)
        if active.size:
            vbar, _ = ssp_md(objectives, FractionalSeedVector(x, k_prime), active,
                             gaps_all[active], k_prime, params.md_iters, params.epsilon,
                             params.delta, allowed, derive_seed(master_seed, "md", t),
                             params.eta)
            x = x + vbar / T
        assert x.sum() <= k_prime * t / T + 1e-6, "Frank-Wolfe iterate left the polytope"
        assert x.max(initial=0.0) <= 1.0 + 1e-9
        trace.append({"step": t, "values": vals.tolist(), "active": int(active.size)})
    return FractionalSeedVector(np.clip(x, 0.0, 1.0), k_prime), trace


def _exact_fraction(value: float) -> Fraction:
    return min(max(Fraction(float(value)), Fraction(0)), Fraction(1))


def decompose(x, k_prime: int | None = None, tol: float = 0.0) -> ConvexDecomposition:
    """Exact convex decomposition of x into bases of the rank-k' uniform matroid.

    Pads x with up to k' dummy coordinates to land exactly on the base
    polytope, then greedily peels bases of the k' largest coordinates in
    exact rational arithmetic; re-mixing the result reproduces x with zero
    error. ``tol`` is accepted for interface compatibility and unused
    because the decomposition is exact.
    """
    if isinstance(x, FractionalSeedVector):
        arr, k_prime = x.x, x.k if k_prime is None else k_prime
    else:
        arr = np.asarray(x, dtype=np.float64)
        if k_prime is None:
            raise ValueError("k_prime is required when x is a bare array")
    n = arr.shape[0]
    if arr.min(initial=0.0) < -1e-9 or arr.max(initial=0.0) > 1.0 + 1e-9 or arr.sum() > k_prime + 1e-6:
        raise ValueError("point lies outside the budgeted polytope")
    z = [_exact_fraction(v) for v in arr]
    total = sum(z, Fraction(0))
    deficit = Fraction(k_prime) - total
    if deficit < 0:
        # only reachable through float round-off at the polytope boundary
        scale = Fraction(k_prime) / total
        z = [v * scale for v in z]
        deficit = Fraction(0)
    for _ in range(k_prime):
        d = min(Fraction(1), deficit)
        z.append(d)
        deficit -= d
    assert deficit == 0
    N = len(z)
    entries: list[tuple[float, frozenset[int]]] = []
    exact: list[Fraction] = []
    remaining = Fraction(1)
    for _ in range(N + k_prime + 2):
        if remaining == 0:
            break
        order = sorted(range(N), key=lambda j: (-z[j], j))
        base = order[:k_prime]
        lam = min(min(z[j] for j in base), remaining)
        if N > k_prime:
            outside_max = max(z[j] for j in order[k_prime:])
            lam = min(lam, remaining - outside_max)
        assert lam > 0, "decomposition stalled; input was not a valid polytope point"
        for j in base:
            z[j] -= lam
        remaining -= lam
        entries.append((float(lam), frozenset(base)))
        exact.append(lam)
    assert remaining == 0, "decomposition did not exhaust the point"
    return ConvexDecomposition(entries, exact, int(k_prime), n)


def swap_round(decomposition: ConvexDecomposition, repetitions: int, selector,
               master_seed: int) -> frozenset[int]:
    """Round a base decomposition to a single set by randomized pairwise merges.

    Two bases are merged by repeatedly picking one mismatched element from
    each side and keeping one of them with probability proportional to the
    base weights; marginals are preserved. With several repetitions the
    candidate maximizing ``selector`` is returned (selector=None or a single
    repetition skips scoring, which keeps marginals unbiased).
    """
    rng = spawn_rng(master_seed, "swap")
    best_score, best = None, None
    for _ in range(max(1, repetitions)):
        bases = [set(base) for _, base in decomposition.entries]
        weights = [w for w, _ in decomposition.entries]
        merged = bases[0]
        wm = weights[0]
        for t in range(1, len(bases)):
            other = bases[t]
            wt = weights[t]
            while merged != other:
                i = min(merged - other)
                j = min(other - merged)
                if rng.random() < wm / (wm + wt):
                    other.remove(j)
                    other.add(i)
                else:
                    merged.remove(i)
                    merged.add(j)
            wm += wt
        cand = frozenset(v for v in merged if v < decomposition.n)
        if repetitions <= 1 or selector is None:
            return cand
        score = selector(cand)
        if best_score is None or score > best_score:
            best_score, best = score, cand
    return best


def multiobjective_maximize(objectives, k: int, params: SolverParams | None = None,
                            master_seed: int = 0) -> tuple[frozenset[int], dict]:
    """Full pipeline: threshold include, continuous solve, rounding.

    Returns the selected set (size at most k) and diagnostics with the
    per-objective achieved values, targets, ratios, and whether the formal
    approximation bound was met. Quality shortfall is reported, never
    raised; an overfull threshold set raises InfeasibleBudgetError only
    when params.threshold_fallback is disabled.
    """
    params = params or SolverParams()
    if k < 1:
        raise ValueError("budget k must be at least 1")
    n = objectives.n
    m = objectives.m
    diag: dict = {"threshold_fallback": False}
    try:
        s1 = threshold_include(objectives, params.epsilon, params.eps_prime, k,
                               params.samples_singleton, derive_seed(master_seed, "threshold"))
    except InfeasibleBudgetError:
        if not params.threshold_fallback:
            raise
        # more qualifying items than budget: leave them all to the continuous
        # solve, whose rounding selector arbitrates between them
        s1 = np.empty(0, dtype=np.int64)
        diag["threshold_fallback"] = True
    diag["s1"] = [int(v) for v in s1]
    k1 = k - s1.size
    targets = objectives.targets
    if s1.size:
        f_s1, _ = objectives.set_value_all(s1, params.samples_probe, derive_seed(master_seed, "s1-value"))
    else:
        f_s1 = np.zeros(m)
    gamma = k1 / k
    residual = np.maximum(gamma * (targets - f_s1), 0.0)
    if k1 > 0 and residual.max(initial=0.0) > 0:
        conditioned = objectives.conditioned(s1).with_targets(residual)
        allowed = np.ones(n, dtype=bool)
        allowed[s1] = False
        x, fw_trace = multi_fw(conditioned, k1, params, derive_seed(master_seed, "fw"), allowed)
        diag["fw_trace"] = fw_trace
        decomposition = decompose(x, k1)
        reps = max(1, math.ceil(math.log2(1.0 / params.swap_delta)))
        counter = [0]
        def selector(candidate):
            counter[0] += 1
            vals, _ = objectives.set_value_all(sorted(set(s1.tolist()) | set(candidate)),
                                               params.samples_probe,
                                               derive_seed(master_seed, "select", counter[0]))
            with np.errstate(divide="ignore"):
                ratios = [vals[i] / targets[i] for i in range(m) if targets[i] > 0]
            return min(ratios) if ratios else float(vals.sum())
        s2 = swap_round(decomposition, reps, selector, derive_seed(master_seed, "swap"))
    else:
        s2 = frozenset()
    S = frozenset(int(v) for v in s1) | s2
    achieved, ses = objectives.set_value_all(sorted(S), params.samples_probe,
                                             derive_seed(master_seed, "achieved"))
    factor = (1.0 - params.epsilon) * (1.0 - m / (k * (1.0 + params.eps_prime) * params.epsilon ** 3)) \
        * (1.0 - 1.0 / math.e)
    per_obj = []
    for i in range(m):
        bound = factor * targets[i] - params.epsilon
        per_obj.append({
            "target": float(targets[i]),
            "achieved": float(achieved[i]),
            "stderr": float(ses[i]),
            "ratio": float(achieved[i] / targets[i]) if targets[i] > 0 else None,
            "bound": bound,
            "bound_met": bool(achieved[i] >= bound),
        })
    diag["objectives"] = per_obj
    diag["k1"] = int(k1)
    diag["gamma"] = float(gamma)
    return S, diag
