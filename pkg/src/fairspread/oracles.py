"""Value and stochastic gradient oracles for multilinear extensions of
group-influence objectives.

An objective is a per-node weight row (a group indicator, or all ones for
total influence); its value at a fractional point x is the expected weight
reached when each node is seeded independently with probability x_j and
arcs go live with probability p. Gradients are estimated from joint
(seed draw, live-edge draw) samples; whole-gradient estimates share one
sample pool per call and price the non-trivial coordinates with an
exponential-rank reachability sketch, so a call costs O(k (V+E) log V)
instead of O(V (V+E)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import AttributedGraph
from .rng import derive_seed, sample_block_rng, spawn_rng

_CHUNK = 4096


@dataclass
class FractionalSeedVector:
    """A point in the budget-k uniform matroid polytope."""
    x: np.ndarray
    k: int

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        if self.x.min(initial=0.0) < -1e-9 or self.x.max(initial=0.0) > 1.0 + 1e-9:
            raise ValueError("fractional seed entries must lie in [0, 1]")
        if self.x.sum() > self.k + 1e-6:
            raise ValueError(f"fractional seed mass {self.x.sum():.6f} exceeds budget {self.k}")

    @property
    def n(self) -> int:
        return self.x.shape[0]


@dataclass
class GradientSample:
    """One stochastic gradient estimate with its advertised bound.

    form "full": values has one entry per node, an unbiased estimate of
    one objective's gradient. form "item": values has one entry per
    objective, the marginal of a single node. ``success`` is False when
    some raw entry exceeded the bound (probability at most delta).
    """
    form: str
    index: int
    values: np.ndarray
    bound: float
    success: bool = True


def _as_point(x, n: int) -> tuple[np.ndarray, int | None]:
    if isinstance(x, FractionalSeedVector):
        return x.x, x.k
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (n,):
        raise ValueError(f"expected a length-{n} vector")
    return x, None


def cohen_estimate(G: AttributedGraph, live: np.ndarray, weights: np.ndarray,
                   ell: int, rng: np.random.Generator, alive: np.ndarray | None = None) -> np.ndarray:
    """Reachable-weight estimates for every node of a live-edge graph.

    Each repetition assigns positive-weight nodes an exponential rank with
    rate equal to their weight and propagates the minimum rank backwards
    along live arcs; the summed minima follow a Gamma(ell, W) law where W
    is the true reachable weight, inverted by the unbiased (ell-1)/sum.
    Nodes outside ``alive`` are removed from the graph entirely.
    """
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n = G.n
    weights = np.asarray(weights, dtype=np.float64)
    if alive is None:
        alive = np.ones(n, dtype=np.uint8)
    else:
        alive = np.asarray(alive, dtype=np.uint8)
    positive = (weights > 0) & (alive > 0)
    acc = np.zeros(n, dtype=np.float64)
    for _ in range(ell):
        draws = rng.exponential(size=n)
        ranks = np.where(positive, draws / np.where(positive, weights, 1.0), np.inf)
        order = np.argsort(ranks, kind="stable")
        rho = _kernels.min_rank_over_reachable(
            G.rev_indptr, G.rev_src, G.rev_arc_ids, live, alive, ranks, order)
        acc += rho
    scale = max(ell - 1, 1)
    with np.errstate(invalid="ignore"):
        est = np.where(np.isfinite(acc) & (acc > 0), scale / np.where(acc > 0, acc, 1.0), 0.0)
    est[alive == 0] = 0.0
    return est


class InfluenceObjectives:
    """Oracle bundle for m influence objectives on one graph.

    weights is an (m, n) matrix of per-node weights, one row per objective
    (group indicator rows, optionally an all-ones row for total spread).
    ``base`` fixes a set of always-on seeds: values and gradients are then
    for the marginal objectives given that base. ``budget`` is the seed
    budget k that sizes the whole-gradient sample pool.
    """

    def __init__(self, G: AttributedGraph, weights: np.ndarray, targets=None,
                 budget: int | None = None, base=(), delta: float = 0.01,
                 cohen_mult: float = 8.0, b: float | None = None):
        self.G = G
        self.weights = np.ascontiguousarray(np.asarray(weights, dtype=np.float64))
        if self.weights.ndim != 2 or self.weights.shape[1] != G.n:
            raise ValueError("weights must have shape (m, n)")
        self.m = self.weights.shape[0]
        self.n = G.n
        self.targets = np.zeros(self.m) if targets is None else np.asarray(targets, dtype=np.float64)
        if self.targets.shape != (self.m,):
            raise ValueError("targets must have one entry per objective")
        self.budget = budget
        base = list(base)
        self.base = np.unique(np.asarray(base, dtype=np.int64)) if base else np.empty(0, dtype=np.int64)
        self.delta = delta
        self.cohen_mult = cohen_mult
        self.b = b
        self._singleton_cache = None

    # -- construction helpers -------------------------------------------------

    def with_targets(self, targets) -> "InfluenceObjectives":
        other = InfluenceObjectives(self.G, self.weights, targets, self.budget,
                                    self.base, self.delta, self.cohen_mult, self.b)
        other._singleton_cache = self._singleton_cache
        return other

    def conditioned(self, base) -> "InfluenceObjectives":
        merged = set(int(v) for v in self.base) | set(int(v) for v in base)
        return InfluenceObjectives(self.G, self.weights, self.targets, self.budget,
                                   sorted(merged), self.delta, self.cohen_mult, self.b)

    def _effective_point(self, x) -> tuple[np.ndarray, int]:
        xv, k = _as_point(x, self.n)
        z = xv.copy()
        if self.base.size:
            z[self.base] = 1.0
        k_eff = self.budget if self.budget is not None else (k if k is not None else max(1, int(round(xv.sum()))))
        return z, k_eff

    # -- value oracles ---------------------------------------------------------

    def singleton_table(self, num_samples: int, master_seed: int):
        """Estimates of f_i({j}) for every objective and node, with stderrs.

        Cached after the first call; repeated calls with different arguments
        reuse the table (it backs one threshold pass per maximization).
        """
        if self._singleton_cache is None:
            gen = sample_block_rng(derive_seed(master_seed, "singleton"))
            sums = np.zeros((self.n, self.m))
            sumsq = np.zeros((self.n, self.m))
            done = 0
            while done < num_samples:
                rows = min(_CHUNK, num_samples - done)
                live = gen.random((rows, self.G.num_arcs)) < self.G.p
                s, s2 = _kernels.singleton_values_batch(self.G.out_indptr, self.G.arc_dst,
                                                        live, self.weights)
                sums += s
                sumsq += s2
                done += rows
            means = sums / num_samples
            if num_samples >= 2:
                var = np.maximum(sumsq - num_samples * means ** 2, 0.0) / (num_samples - 1)
                ses = np.sqrt(var / num_samples)
            else:
                ses = np.zeros_like(means)
            self._singleton_cache = (means.T.copy(), ses.T.copy())
            if self.b is None:
                self.b = float(max(self._singleton_cache[0].max(initial=0.0), 1e-12))
        return self._singleton_cache

    def _ensure_b(self) -> float:
        if self.b is None:
            self.singleton_table(400, derive_seed(0, "auto-bound"))
        return self.b

    def value_all(self, x, num_samples: int, master_seed: int):
        """Estimates of F_i(x | base) for all objectives, with stderrs."""
        xv, _ = _as_point(x, self.n)
        z = xv.copy()
        if self.base.size:
            z[self.base] = 0.0  # base handled separately inside the kernel
        gen = sample_block_rng(derive_seed(master_seed, "value"))
        chunks = []
        done = 0
        A = self.G.num_arcs
        while done < num_samples:
            rows = min(_CHUNK, num_samples - done)
            u = gen.random((rows, self.n + A))
            incl = u[:, :self.n] < z
            live = u[:, self.n:] < self.G.p
            vals = _kernels.fractional_values_batch(self.G.out_indptr, self.G.arc_dst, live,
                                                    incl, self.base, self.weights,
                                                    self.base.size > 0)
            chunks.append(vals)
            done += rows
        vals = np.vstack(chunks)
        mean = vals.mean(axis=0)
        ses = np.sqrt(vals.var(axis=0, ddof=1) / num_samples) if num_samples >= 2 else np.zeros(self.m)
        return mean, ses

    def value_oracle(self, x, i: int, num_samples: int, master_seed: int) -> float:
        """Monte Carlo estimate of the multilinear extension F_i(x | base)."""
        return float(self.value_all(x, num_samples, master_seed)[0][i])

    def set_value_all(self, S, num_samples: int, master_seed: int):
        """Estimates of f_i(S | base) for a discrete set, with stderrs."""
        S = list(S)
        S = np.unique(np.asarray(S, dtype=np.int64)) if S else np.empty(0, dtype=np.int64)
        if S.size == 0 and self.base.size == 0:
            return np.zeros(self.m), np.zeros(self.m)
        gen = sample_block_rng(derive_seed(master_seed, "set-value"))
        chunks = []
        done = 0
        while done < num_samples:
            rows = min(_CHUNK, num_samples - done)
            live = gen.random((rows, self.G.num_arcs)) < self.G.p
            vals = _kernels.set_values_batch(self.G.out_indptr, self.G.arc_dst, live, S,
                                             self.weights, self.base, self.base.size > 0)
            chunks.append(vals)
            done += rows
        vals = np.vstack(chunks)
        mean = vals.mean(axis=0)
        ses = np.sqrt(vals.var(axis=0, ddof=1) / num_samples) if num_samples >= 2 else np.zeros(self.m)
        return mean, ses

    # -- gradient oracles ------------------------------------------------------

    def grad_item(self, x, j: int, master_seed: int) -> np.ndarray:
        """One-sample estimate of [d F_1/d x_j ... d F_m/d x_j] at x."""
        z, _ = self._effective_point(x)
        rng = spawn_rng(master_seed, "item", j)
        u = rng.random(self.n + self.G.num_arcs)
        incl = (u[:self.n] < z).astype(np.uint8)
        live = u[self.n:] < self.G.p
        return _kernels.item_marginal(self.G.out_indptr, self.G.arc_dst, live, incl,
                                      j, self.weights)

    def item_gradient_oracle(self, x, j: int, master_seed: int) -> GradientSample:
        vals = self.grad_item(x, j, master_seed)
        bound = 2.0 * self._ensure_b()
        return GradientSample("item", j, vals, bound, bool(vals.max(initial=0.0) <= bound + 1e-9))

    def _two_point(self, z: np.ndarray, j: int, i: int, rng: np.random.Generator) -> float:
        u = rng.random(self.n + self.G.num_arcs)
        incl = (u[:self.n] < z).astype(np.uint8)
        live = u[self.n:] < self.G.p
        row = self.weights[i:i + 1]
        return float(_kernels.item_marginal(self.G.out_indptr, self.G.arc_dst, live, incl, j, row)[0])

    def grad_full(self, x, i: int, master_seed: int, delta: float | None = None) -> GradientSample:
        """Unbiased whole-gradient estimate of objective i at x.

        Nodes with x_j >= 1 - 1/(k+1) (at most k+1 of them) get individual
        two-point estimates. Everyone else is priced from a joint sample
        pool: the first sample a node is absent from supplies its marginal,
        zero if the sample already reaches it, its own weight if it is
        isolated in the residual graph, and a clamped reachability-sketch
        estimate otherwise.
        """
        delta = self.delta if delta is None else delta
        z, k = self._effective_point(x)
        n, A = self.n, self.G.num_arcs
        b2 = 2.0 * self._ensure_b()
        row = self.weights[i]
        g = np.zeros(n)
        thresh = 1.0 - 1.0 / (k + 1)
        high = np.flatnonzero(z >= thresh)
        for j in high:
            g[j] = self._two_point(z, int(j), i, spawn_rng(master_seed, "high", int(j)))
        assigned = np.zeros(n, dtype=bool)
        assigned[high] = True
        pool_size = max(1, math.ceil((k + 1) * math.log(max(n, 2) / delta)))
        ell = max(2, math.ceil(self.cohen_mult * math.log(max(n, 2) / delta)))
        for escalation in range(4):
            for t in range(pool_size):
                if assigned.all():
                    break
                rng = spawn_rng(master_seed, "pool", escalation, t)
                u = rng.random(n + A)
                incl = u[:n] < z
                live = u[n:] < self.G.p
                todo = ~assigned & ~incl
                if not todo.any():
                    continue
                seeds = np.flatnonzero(incl).astype(np.int64)
                reached = _kernels.reach_from_seeds(self.G.out_indptr, self.G.arc_dst,
                                                    live, seeds, n)
                iso = _kernels.residual_isolated(self.G.out_indptr, self.G.arc_dst, live, reached)
                reached_b = reached.astype(bool)
                iso_b = iso.astype(bool)
                g[todo & reached_b] = 0.0
                sel_iso = todo & iso_b & ~reached_b
                g[sel_iso] = row[sel_iso]
                rest = todo & ~reached_b & ~iso_b
                if rest.any():
                    alive = (~reached_b).astype(np.uint8)
                    est = cohen_estimate(self.G, live, row, ell,
                                         spawn_rng(master_seed, "cohen", escalation, t), alive)
                    g[rest] = np.minimum(est[rest], b2)
                assigned |= todo
            if assigned.all():
                break
        else:
            raise RuntimeError("gradient pool failed to cover every node after 3 escalations")
        success = bool(g.max(initial=0.0) <= b2 + 1e-9)
        return GradientSample("full", i, g, b2, success)

    def full_gradient_oracle(self, x, i: int, delta: float | None = None,
                             master_seed: int = 0) -> GradientSample:
        return self.grad_full(x, i, master_seed, delta)
