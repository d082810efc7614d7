"""Independent brute-force oracles used to pin expected values in tests.

Everything here is deliberately simple pure Python: spreads by complete
enumeration over all arc subsets (no pruning), multilinear values and
gradients by the same enumeration combined with exact inclusion products,
and the complete-graph spread by the classic final-size recursion. These
stay independent of the library's optimized paths.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def _forward_reach(n, adj, live_set, start):
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        for eid, v in adj[u]:
            if eid in live_set and v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def _adjacency(G):
    adj = [[] for _ in range(G.n)]
    for eid, (u, v) in enumerate(zip(G.arc_src, G.arc_dst)):
        adj[int(u)].append((eid, int(v)))
    return adj


def enum_exact_spread(G, seeds):
    """Expected total and per-group spread by enumerating all 2^A arc patterns."""
    seeds = sorted(set(int(v) for v in seeds))
    A = G.num_arcs
    adj = _adjacency(G)
    total = 0.0
    per_group = np.zeros(G.m)
    for pattern in range(1 << A):
        live = {e for e in range(A) if (pattern >> e) & 1}
        w = (G.p ** len(live)) * ((1 - G.p) ** (A - len(live)))
        reached = set()
        for s in seeds:
            reached |= _forward_reach(G.n, adj, live, s)
        total += w * len(reached)
        for gi in range(G.m):
            per_group[gi] += w * sum(1 for v in reached if G.member_mask[gi, v])
    return total, per_group


def enum_multilinear(G, weights_row, z):
    """Exact F(z) and its gradient for one weighted-reach objective.

    For each live-edge pattern, node v is reached iff some seeded node lies
    in v's reverse reachable set; seeds are independent with probabilities
    z, so P(reached) = 1 - prod over that set of (1 - z_u). The gradient
    entry for u is the same expression with u forced seeded minus forced
    unseeded, which reduces to the product over the set minus u.
    """
    z = np.asarray(z, dtype=np.float64)
    w = np.asarray(weights_row, dtype=np.float64)
    A = G.num_arcs
    adj = _adjacency(G)
    value = 0.0
    grad = np.zeros(G.n)
    for pattern in range(1 << A):
        live = {e for e in range(A) if (pattern >> e) & 1}
        pw = (G.p ** len(live)) * ((1 - G.p) ** (A - len(live)))
        reach_from = [_forward_reach(G.n, adj, live, u) for u in range(G.n)]
        for v in range(G.n):
            if w[v] == 0:
                continue
            upstream = [u for u in range(G.n) if v in reach_from[u]]
            prod = 1.0
            for u in upstream:
                prod *= 1.0 - z[u]
            value += pw * w[v] * (1.0 - prod)
            for j in upstream:
                prod_without = 1.0
                for u in upstream:
                    if u != j:
                        prod_without *= 1.0 - z[u]
                grad[j] += pw * w[v] * prod_without
    return value, grad


def clique_spread(n: int, p: float, seeds: int = 1) -> float:
    """Exact expected spread of ``seeds`` seeds in an undirected n-clique.

    Final-size recursion: pi[l] is the probability that a cascade started
    at the seeds of an l-clique activates all l nodes; the chance the final
    set is a given l-subset containing the seeds is pi[l] * (1-p)^(l(n-l)).
    """
    if seeds == 0:
        return 0.0
    if seeds >= n:
        return float(n)
    pi = {seeds: 1.0}
    for size in range(seeds + 1, n + 1):
        acc = 0.0
        for j in range(seeds, size):
            acc += math.comb(size - seeds, j - seeds) * pi[j] * (1 - p) ** (j * (size - j))
        pi[size] = 1.0 - acc
    return sum(size * math.comb(n - seeds, size - seeds) * pi[size] * (1 - p) ** (size * (n - size))
               for size in range(seeds, n + 1))


def brute_force_best_set(G, k, score):
    """Exhaustive maximizer of ``score`` over all k-subsets of nodes."""
    best_val, best_set = -np.inf, None
    for combo in itertools.combinations(range(G.n), k):
        val = score(combo)
        if val > best_val:
            best_val, best_set = val, set(combo)
    return best_val, best_set


def random_small_graph(rng, n, arcs, p, m_groups=1):
    """Random directed multigraph-free instance for enumeration-scale tests."""
    from fairspread import from_edges
    pairs = set()
    guard = 0
    while len(pairs) < arcs and guard < 50 * arcs:
        u, v = rng.integers(0, n, 2)
        guard += 1
        if u != v:
            pairs.add((int(u), int(v)))
    if m_groups == 1:
        groups = [list(range(n))]
    else:
        assign = [rng.integers(0, m_groups) for _ in range(n)]
        groups = [[i for i in range(n) if assign[i] == g] for g in range(m_groups)]
        for g in range(m_groups):
            if not groups[g]:
                groups[g] = [int(rng.integers(0, n))]
    return from_edges(sorted(pairs), p, groups, n=n, directed=True)
