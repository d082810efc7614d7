"""Compiled kernels for cascade simulation and reachability estimation.

Everything here is a pure function of its arguments. Batched kernels write
one output row per Monte Carlo sample, so reductions happen outside in a
fixed order and results are bitwise independent of the thread count.
"""

import os

os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numpy as np
from numba import njit, prange


@njit(cache=True)
def _bfs(out_indptr, arc_dst, live, visited, stack, sp):
    """Drain the stack, following live arcs; marks visited, returns visit count."""
    cnt = 0
    while sp > 0:
        sp -= 1
        u = stack[sp]
        for e in range(out_indptr[u], out_indptr[u + 1]):
            if live[e]:
                v = arc_dst[e]
                if visited[v] == 0:
                    visited[v] = 1
                    stack[sp] = v
                    sp += 1
                    cnt += 1
    return cnt


@njit(cache=True)
def reach_from_seeds(out_indptr, arc_dst, live, seeds, n):
    """Nodes reachable from the seed array via live arcs (seeds included)."""
    visited = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    sp = 0
    for s in seeds:
        if visited[s] == 0:
            visited[s] = 1
            stack[sp] = s
            sp += 1
    _bfs(out_indptr, arc_dst, live, visited, stack, sp)
    return visited


@njit(cache=True, parallel=True)
def spread_batch(out_indptr, arc_dst, live_mat, seeds, member):
    """Per-sample reached counts, total and per group.

    live_mat has one row per live-edge sample; row results are independent,
    so the prange is deterministic.
    """
    C = live_mat.shape[0]
    m = member.shape[0]
    n = member.shape[1]
    totals = np.zeros(C, dtype=np.int64)
    per_group = np.zeros((C, m), dtype=np.int64)
    for r in prange(C):
        visited = np.zeros(n, dtype=np.uint8)
        stack = np.empty(n, dtype=np.int64)
        sp = 0
        cnt = 0
        for s in seeds:
            if visited[s] == 0:
                visited[s] = 1
                stack[sp] = s
                sp += 1
                cnt += 1
        cnt += _bfs(out_indptr, arc_dst, live_mat[r], visited, stack, sp)
        totals[r] = cnt
        for v in range(n):
            if visited[v]:
                for i in range(m):
                    if member[i, v]:
                        per_group[r, i] += 1
    return totals, per_group


@njit(cache=True, parallel=True)
def fractional_values_batch(out_indptr, arc_dst, live_mat, incl_mat, base, weights, subtract_base):
    """Per-sample objective values for seed draws S ~ x united with a base set.

    weights is one row per objective; when subtract_base is true the value of
    the base set alone (same live-edge draw) is subtracted, giving a marginal.
    """
    C = live_mat.shape[0]
    mw = weights.shape[0]
    n = weights.shape[1]
    vals = np.zeros((C, mw), dtype=np.float64)
    for r in prange(C):
        visited = np.zeros(n, dtype=np.uint8)
        stack = np.empty(n, dtype=np.int64)
        sp = 0
        for b in base:
            if visited[b] == 0:
                visited[b] = 1
                stack[sp] = b
                sp += 1
        for j in range(n):
            if incl_mat[r, j] and visited[j] == 0:
                visited[j] = 1
                stack[sp] = j
                sp += 1
        _bfs(out_indptr, arc_dst, live_mat[r], visited, stack, sp)
        for v in range(n):
            if visited[v]:
                for i in range(mw):
                    vals[r, i] += weights[i, v]
        if subtract_base and base.size > 0:
            visited2 = np.zeros(n, dtype=np.uint8)
            sp = 0
            for b in base:
                if visited2[b] == 0:
                    visited2[b] = 1
                    stack[sp] = b
                    sp += 1
            _bfs(out_indptr, arc_dst, live_mat[r], visited2, stack, sp)
            for v in range(n):
                if visited2[v]:
                    for i in range(mw):
                        vals[r, i] -= weights[i, v]
    return vals


@njit(cache=True, parallel=True)
def set_values_batch(out_indptr, arc_dst, live_mat, seeds, weights, base, subtract_base):
    """Per-sample objective values for a fixed seed set united with a base set."""
    C = live_mat.shape[0]
    mw = weights.shape[0]
    n = weights.shape[1]
    vals = np.zeros((C, mw), dtype=np.float64)
    for r in prange(C):
        visited = np.zeros(n, dtype=np.uint8)
        stack = np.empty(n, dtype=np.int64)
        sp = 0
        for b in base:
            if visited[b] == 0:
                visited[b] = 1
                stack[sp] = b
                sp += 1
        for s in seeds:
            if visited[s] == 0:
                visited[s] = 1
                stack[sp] = s
                sp += 1
        _bfs(out_indptr, arc_dst, live_mat[r], visited, stack, sp)
        for v in range(n):
            if visited[v]:
                for i in range(mw):
                    vals[r, i] += weights[i, v]
        if subtract_base and base.size > 0:
            visited2 = np.zeros(n, dtype=np.uint8)
            sp = 0
            for b in base:
                if visited2[b] == 0:
                    visited2[b] = 1
                    stack[sp] = b
                    sp += 1
            _bfs(out_indptr, arc_dst, live_mat[r], visited2, stack, sp)
            for v in range(n):
                if visited2[v]:
                    for i in range(mw):
                        vals[r, i] -= weights[i, v]
    return vals


@njit(cache=True, parallel=True)
def singleton_values_batch(out_indptr, arc_dst, live_mat, weights):
    """Sum and sum-of-squares of every node's singleton value over all samples.

    Output shapes (n, mw); divide by the sample count outside.
    """
    C = live_mat.shape[0]
    mw = weights.shape[0]
    n = weights.shape[1]
    sums = np.zeros((n, mw), dtype=np.float64)
    sumsq = np.zeros((n, mw), dtype=np.float64)
    for j in prange(n):
        visited = np.zeros(n, dtype=np.uint8)
        stack = np.empty(n, dtype=np.int64)
        touched = np.empty(n, dtype=np.int64)
        for r in range(C):
            visited[j] = 1
            stack[0] = j
            touched[0] = j
            sp = 1
            tc = 1
            while sp > 0:
                sp -= 1
                u = stack[sp]
                for e in range(out_indptr[u], out_indptr[u + 1]):
                    if live_mat[r, e]:
                        v = arc_dst[e]
                        if visited[v] == 0:
                            visited[v] = 1
                            stack[sp] = v
                            sp += 1
                            touched[tc] = v
                            tc += 1
            for i in range(mw):
                val = 0.0
                for t in range(tc):
                    val += weights[i, touched[t]]
                sums[j, i] += val
                sumsq[j, i] += val * val
            for t in range(tc):
                visited[touched[t]] = 0
    return sums, sumsq


@njit(cache=True)
def item_marginal(out_indptr, arc_dst, live, incl, j, weights):
    """Per-objective marginal of item j on one sample: f(S + j) - f(S - j)."""
    n = incl.shape[0]
    mw = weights.shape[0]
    visited = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    sp = 0
    for v in range(n):
        if incl[v] and v != j and visited[v] == 0:
            visited[v] = 1
            stack[sp] = v
            sp += 1
    _bfs(out_indptr, arc_dst, live, visited, stack, sp)
    out = np.zeros(mw, dtype=np.float64)
    if visited[j]:
        return out
    visited[j] = 1
    stack[0] = j
    sp = 1
    for i in range(mw):
        out[i] += weights[i, j]
    while sp > 0:
        sp -= 1
        u = stack[sp]
        for e in range(out_indptr[u], out_indptr[u + 1]):
            if live[e]:
                v = arc_dst[e]
                if visited[v] == 0:
                    visited[v] = 1
                    stack[sp] = v
                    sp += 1
                    for i in range(mw):
                        out[i] += weights[i, v]
    return out


@njit(cache=True)
def residual_isolated(out_indptr, arc_dst, live, reached):
    """Mark unreached nodes with no live arc to another unreached node."""
    n = reached.shape[0]
    iso = np.zeros(n, dtype=np.uint8)
    for v in range(n):
        if reached[v]:
            continue
        has_out = False
        for e in range(out_indptr[v], out_indptr[v + 1]):
            if live[e] and reached[arc_dst[e]] == 0:
                has_out = True
                break
        if not has_out:
            iso[v] = 1
    return iso


@njit(cache=True)
def min_rank_over_reachable(rev_indptr, rev_src, rev_arc_ids, live, alive, ranks, order):
    """For every alive node v, the minimum rank among alive nodes reachable from v.

    Processes nodes in ascending rank order and pushes each rank backwards
    through the reverse adjacency; every node is visited once, so one pass
    costs O(|V| + |E|). Nodes reaching no ranked node keep +inf.
    """
    n = alive.shape[0]
    rho = np.full(n, np.inf, dtype=np.float64)
    stack = np.empty(n, dtype=np.int64)
    for oi in range(n):
        u = order[oi]
        ru = ranks[u]
        if ru == np.inf:
            break
        if alive[u] == 0 or rho[u] != np.inf:
            continue
        rho[u] = ru
        stack[0] = u
        sp = 1
        while sp > 0:
            sp -= 1
            z = stack[sp]
            for q in range(rev_indptr[z], rev_indptr[z + 1]):
                if live[rev_arc_ids[q]]:
                    w = rev_src[q]
                    if alive[w] and rho[w] == np.inf:
                        rho[w] = ru
                        stack[sp] = w
                        sp += 1
    return rho


@njit(cache=True)
def exact_spread_enum(indptr, dst, bit, n, num_bits, seeds, member, p):
    """Exact expected reach by enumerating all live/dead patterns of the
    given arcs, weighted p^live * (1-p)^dead. Arcs are addressed by bit id.
    """
    m = member.shape[0]
    total = 0.0
    per_group = np.zeros(m, dtype=np.float64)
    pw_live = np.empty(num_bits + 1, dtype=np.float64)
    pw_dead = np.empty(num_bits + 1, dtype=np.float64)
    pw_live[0] = 1.0
    pw_dead[0] = 1.0
    for i in range(1, num_bits + 1):
        pw_live[i] = pw_live[i - 1] * p
        pw_dead[i] = pw_dead[i - 1] * (1.0 - p)
    pop16 = np.zeros(65536, dtype=np.int64)
    for i in range(1, 65536):
        pop16[i] = pop16[i >> 1] + (i & 1)
    visited = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    touched = np.empty(n, dtype=np.int64)
    for pattern in range(1 << num_bits):
        pop = pop16[pattern & 0xFFFF] + pop16[(pattern >> 16) & 0xFFFF]
        w = pw_live[pop] * pw_dead[num_bits - pop]
        sp = 0
        tc = 0
        for s in seeds:
            if visited[s] == 0:
                visited[s] = 1
                stack[sp] = s
                sp += 1
                touched[tc] = s
                tc += 1
        while sp > 0:
            sp -= 1
            u = stack[sp]
            for e in range(indptr[u], indptr[u + 1]):
                if (pattern >> bit[e]) & 1:
                    v = dst[e]
                    if visited[v] == 0:
                        visited[v] = 1
                        stack[sp] = v
                        sp += 1
                        touched[tc] = v
                        tc += 1
        total += w * tc
        for t in range(tc):
            v = touched[t]
            for i in range(m):
                if member[i, v]:
                    per_group[i] += w
            visited[v] = 0
    return total, per_group
