"""Independent cascade simulation and influence spread estimation.

Spread of a seed set S is the expected number of nodes reachable from S
in a random live-edge graph where every arc survives independently with
probability p. Estimators draw one Bernoulli per arc per sample; sample s
consumes the s-th block of a counter-based stream, so estimates are
reproducible and independent of chunking or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import AttributedGraph, GraphValidationError
from .rng import derive_seed, sample_block_rng

DEFAULT_ENUM_CAP = 25
_CHUNK = 4096


@dataclass
class LiveEdgeSample:
    """One realization of the random live-edge graph."""
    graph: AttributedGraph
    live: np.ndarray  # bool, aligned with the graph's canonical arc order

    def live_arc_count(self) -> int:
        return int(self.live.sum())


@dataclass
class SpreadEstimate:
    """Influence estimate for a seed set: total and per-group expectations."""
    total: float
    per_group: np.ndarray
    samples: int
    total_stderr: float
    group_stderr: np.ndarray
    exact: bool = False


def sample_live_edges(G: AttributedGraph, rng: np.random.Generator) -> LiveEdgeSample:
    """Draw one live-edge realization: each arc kept with probability p."""
    live = rng.random(G.num_arcs) < G.p
    return LiveEdgeSample(G, live)


def reachable(sample: LiveEdgeSample, seeds) -> np.ndarray:
    """Sorted indices of nodes reachable from the seeds via live arcs."""
    G = sample.graph
    seeds = _seed_array(G, seeds)
    if seeds.size == 0:
        return np.empty(0, dtype=np.int64)
    visited = _kernels.reach_from_seeds(G.out_indptr, G.arc_dst, sample.live, seeds, G.n)
    return np.flatnonzero(visited).astype(np.int64)


def _seed_array(G: AttributedGraph, seeds) -> np.ndarray:
    if hasattr(seeds, "as_array"):
        arr = seeds.as_array()
    else:
        lst = list(seeds)
        arr = np.unique(np.asarray(lst, dtype=np.int64)) if lst else np.empty(0, dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= G.n):
        raise GraphValidationError("seed index outside the graph")
    return arr


def _mean_stderr(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column means and standard errors of the mean."""
    C = values.shape[0]
    mean = values.mean(axis=0)
    if C < 2:
        return mean, np.zeros_like(mean, dtype=np.float64)
    var = values.var(axis=0, ddof=1)
    return mean, np.sqrt(var / C)


def estimate_spread(G: AttributedGraph, seeds, num_samples: int, master_seed: int) -> SpreadEstimate:
    """Monte Carlo estimate of total and per-group spread of a seed set."""
    if num_samples < 1:
        raise ValueError("num_samples must be at least 1")
    seeds = _seed_array(G, seeds)
    if seeds.size == 0:
        return SpreadEstimate(0.0, np.zeros(G.m), num_samples, 0.0, np.zeros(G.m))
    gen = sample_block_rng(derive_seed(master_seed, "spread"))
    tot_chunks, grp_chunks = [], []
    done = 0
    while done < num_samples:
        rows = min(_CHUNK, num_samples - done)
        live = gen.random((rows, G.num_arcs)) < G.p
        totals, per_group = _kernels.spread_batch(G.out_indptr, G.arc_dst, live, seeds, G.member_mask)
        tot_chunks.append(totals)
        grp_chunks.append(per_group)
        done += rows
    totals = np.concatenate(tot_chunks)
    per_group = np.vstack(grp_chunks)
    tmean, tse = _mean_stderr(totals[:, None].astype(np.float64))
    gmean, gse = _mean_stderr(per_group.astype(np.float64))
    return SpreadEstimate(float(tmean[0]), gmean, num_samples, float(tse[0]), gse)


def relevant_arcs(G: AttributedGraph, seeds: np.ndarray) -> np.ndarray:
    """Canonical arc ids that can influence the cascade outcome from ``seeds``.

    An arc matters only if its source is activatable at all (reachable from
    the seeds when every arc is live) and its target is not itself a seed;
    the closure under any live-edge draw is unchanged when all other arcs
    are deleted, which shrinks the exact-enumeration space.
    """
    if seeds.size == 0 or G.num_arcs == 0:
        return np.empty(0, dtype=np.int64)
    all_live = np.ones(G.num_arcs, dtype=bool)
    reach_all = _kernels.reach_from_seeds(G.out_indptr, G.arc_dst, all_live, seeds, G.n).astype(bool)
    in_seed = np.zeros(G.n, dtype=bool)
    in_seed[seeds] = True
    keep = reach_all[G.arc_src] & ~in_seed[G.arc_dst]
    return np.flatnonzero(keep).astype(np.int64)


def exact_spread(G: AttributedGraph, seeds, cap: int = DEFAULT_ENUM_CAP) -> SpreadEstimate:
    """Exact expected spread by enumerating live/dead patterns of the arcs
    that can matter for this seed set. Exponential in that arc count; the
    cap guards against runaway enumerations.
    """
    seeds = _seed_array(G, seeds)
    if seeds.size == 0:
        return SpreadEstimate(0.0, np.zeros(G.m), 0, 0.0, np.zeros(G.m), exact=True)
    rel = relevant_arcs(G, seeds)
    r = int(rel.size)
    if r > cap:
        raise ValueError(
            f"exact enumeration needs 2^{r} patterns ({r} relevant arcs > cap {cap}); "
            f"use estimate_spread instead")
    src = G.arc_src[rel]
    dst = G.arc_dst[rel]
    order = np.argsort(src, kind="stable")
    counts = np.bincount(src, minlength=G.n)
    indptr = np.zeros(G.n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    total, per_group = _kernels.exact_spread_enum(
        indptr, np.ascontiguousarray(dst[order]), np.ascontiguousarray(order.astype(np.int64)),
        G.n, r, seeds, G.member_mask, G.p)
    return SpreadEstimate(float(total), per_group, 0, 0.0, np.zeros(G.m), exact=True)
