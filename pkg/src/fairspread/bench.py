"""Worst-case constructions, synthetic attributed networks, and the
experiment harness comparing greedy / diversity-constrained / maximin
seeding.

The constructions come with closed-form influence values for their
interesting seed sets, which double as exact oracles in tests. The
harness writes one CSV row per (instance, run, algorithm).
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .config import SolverParams
from .fairness import (SolveResult, compute_demands, solve_diversity, solve_greedy,
                       solve_maximin)
from .graph import AttributedGraph, from_edges, load_graph, with_probability
from .rng import derive_seed, spawn_rng


@dataclass
class ConstructionRecord:
    """Labels and closed-form influence values for a generated instance."""
    kind: str
    s: int
    p: float
    k: int
    labels: dict[str, int]
    seed_sets: dict[str, frozenset]
    closed_forms: dict[str, float]
    demands: tuple | None = None
    pof: float | None = None


def gen_pof_rational(s: int, p: float) -> tuple[AttributedGraph, ConstructionRecord]:
    """Two-part instance where the diversity-fair and the optimal pair of
    seeds differ: a star of s leaves (group one) against s singletons plus
    one joined pair (group two). Fair pair {x1, x3} spreads
    2 + 2p + (s-1)p^2; optimal pair {x2, x3} spreads 2 + p + p*s.
    """
    if s < 3:
        raise ValueError("construction needs s >= 3 so the second part can hold a joined pair")
    # 0..s-1 star leaves (x1 = 0); s star center (x2); s+1, s+2 joined pair (x3 = s+1);
    # s+3..2s-1 isolated
    n = 2 * s
    edges = [(s, j) for j in range(s)] + [(s + 1, s + 2)]
    groups = [list(range(s)), list(range(s, n))]
    ids = ["x1"] + [f"leaf{j}" for j in range(1, s)] + ["x2", "x3", "x4"] + \
          [f"iso{j}" for j in range(s + 3, n)]
    G = from_edges(edges, p, groups, n=n, directed=False, node_ids=ids,
                   group_names=["star_leaves", "rest"])
    fair = frozenset({0, s + 1})
    opt = frozenset({s, s + 1})
    forms = {
        "fair": 2.0 + 2.0 * p + (s - 1) * p ** 2,
        "opt": 2.0 + p + p * s,
    }
    rec = ConstructionRecord("pof_rational", s, p, 2,
                             {"x1": 0, "x2": s, "x3": s + 1},
                             {"fair": fair, "opt": opt}, forms,
                             demands=(1.0, 1.0 + p), pof=forms["opt"] / forms["fair"])
    return G, rec


def gen_pof_maximin(s: int, p: float) -> tuple[AttributedGraph, ConstructionRecord]:
    """Joined pair plus star where maximin fairness forfeits the star: the
    optimal seed (star center) spreads 1 + p*s but leaves the one-node
    group dry; the fair seed spreads 1 + p.
    """
    if s < 1:
        raise ValueError("star needs at least one leaf")
    # 0 lone-group node; 1 its partner (x1); 2 star center (x2); 3..s+2 leaves
    n = s + 3
    edges = [(0, 1)] + [(2, j) for j in range(3, n)]
    groups = [[0], list(range(1, n))]
    ids = ["y", "x1", "x2"] + [f"leaf{j}" for j in range(s)]
    G = from_edges(edges, p, groups, n=n, directed=False, node_ids=ids,
                   group_names=["pair_side", "rest"])
    forms = {"opt": 1.0 + p * s, "fair": 1.0 + p}
    rec = ConstructionRecord("pof_maximin", s, p, 1, {"y": 0, "x1": 1, "x2": 2},
                             {"opt": frozenset({2}), "fair": frozenset({1})}, forms,
                             pof=forms["opt"] / forms["fair"])
    return G, rec


def gen_overlap_rational(s: int, p: float):
    """Paired instances showing that letting one node join a second group can
    force the diversity-fair seed off the star: same graph, but the overlap
    raises the first group's internal demand from 1 to 1 + p.

    Returns (G, G_overlap, record); the closed forms are the spreads of the
    two candidate seeds, 1 + p*s for the star center and 1 + p for x1.
    """
    if s < 1:
        raise ValueError("star needs at least one leaf")
    # 0 x0 (pair node, group one); 1 x1 (pair node, group two); 2 x2 (star center,
    # group two); 3..s+2 leaves (group one)
    n = s + 3
    edges = [(0, 1)] + [(2, j) for j in range(3, n)]
    ids = ["x0", "x1", "x2"] + [f"leaf{j}" for j in range(s)]
    g1 = [0] + list(range(3, n))
    g2 = [1, 2]
    G = from_edges(edges, p, [g1, g2], n=n, directed=False, node_ids=ids,
                   group_names=["leaves_side", "centers"])
    Gp = from_edges(edges, p, [g1 + [1], g2], n=n, directed=False, node_ids=ids,
                    group_names=["leaves_side", "centers"])
    forms = {"base_fair": 1.0 + p * s, "overlap_fair": 1.0 + p}
    rec = ConstructionRecord("overlap_rational", s, p, 1, {"x0": 0, "x1": 1, "x2": 2},
                             {"base_fair": frozenset({2}), "overlap_fair": frozenset({1})},
                             forms, demands=(1.0, 1.0))
    return G, Gp, rec


def gen_overlap_maximin(s: int, p: float):
    """Two stars where adding the small star's center to the other group
    moves the maximin seed from the big star (1 + p*s) to the small one
    (1 + p*(t+1)), with t = ceil(s / (1 - 3p)); needs p < 1/3.
    """
    if not (0.0 < p < 1.0 / 3.0):
        raise ValueError("construction requires 0 < p < 1/3")
    if s < 1:
        raise ValueError("star needs at least one leaf")
    t = math.ceil(s / (1.0 - 3.0 * p))
    # 0 x1 (big star center); 1..s big star leaves; s+1 x2 (small star center);
    # s+2..s+t+2 small star leaves (t+1 of them)
    n = s + t + 3
    edges = [(0, j) for j in range(1, s + 1)] + [(s + 1, j) for j in range(s + 2, n)]
    ids = ["x1"] + [f"a{j}" for j in range(s)] + ["x2"] + [f"b{j}" for j in range(t + 1)]
    g1 = [0, s + 2]
    g2 = [j for j in range(n) if j not in g1]
    G = from_edges(edges, p, [g1, g2], n=n, directed=False, node_ids=ids,
                   group_names=["pair", "rest"])
    Gp = from_edges(edges, p, [g1 + [s + 1], g2], n=n, directed=False, node_ids=ids,
                    group_names=["pair", "rest"])
    forms = {"base_fair": 1.0 + p * s, "overlap_fair": 1.0 + p * (t + 1),
             "ratio_limit": 1.0 - 3.0 * p}
    rec = ConstructionRecord("overlap_maximin", s, p, 1, {"x1": 0, "x2": s + 1},
                             {"base_fair": frozenset({0}), "overlap_fair": frozenset({s + 1})},
                             forms)
    return G, Gp, rec


@dataclass
class Witness:
    """A fixture on which a fairness utility violates submodularity."""
    graph: AttributedGraph
    A: frozenset
    B: frozenset
    extra: int
    kind: str
    k: int
    expected: dict[str, float]


def nonsubmodularity_witnesses() -> list[Witness]:
    """Fixtures where adding one node to the bigger of two nested seed sets
    helps more than adding it to the smaller one, for both fairness
    utilities. The four isolated nodes split into two pairs; exact utility
    evaluation reproduces the expected values for any p.
    """
    G = from_edges([], 0.1, [[0, 1], [2, 3]], n=4, directed=False,
                   node_ids=["x", "a", "b", "c"], group_names=["c1", "c2"])
    A = frozenset({1, 2})
    B = frozenset({1, 2, 3})
    return [
        Witness(G, A, B, 0, "maximin", 4,
                {"A": 0.5, "B": 0.5, "Ax": 0.5, "Bx": 1.0}),
        Witness(G, A, B, 0, "rational", 4,
                {"A": 0.0, "B": 0.0, "Ax": 0.0, "Bx": 4.0}),
    ]


def gen_attributed_random(n: int, m_groups: int, group_size_profile, homophily: float,
                          mean_degree: float, p: float, master_seed: int) -> AttributedGraph:
    """Synthetic attributed network: block-model wiring where nodes sharing a
    group connect at a rate boosted by ``homophily`` (0 = uniform wiring,
    1 = within-group only), calibrated so the expected mean degree matches
    ``mean_degree`` regardless of homophily.
    """
    profile = [int(v) for v in group_size_profile]
    if len(profile) != m_groups:
        raise ValueError("group_size_profile must have one entry per group")
    if any(v < 1 for v in profile) or any(v > n for v in profile):
        raise ValueError("group sizes must lie in [1, n]")
    if sum(profile) < n:
        raise ValueError("group sizes must sum to at least n so every node has a group")
    if not (0.0 <= homophily <= 1.0):
        raise ValueError("homophily must lie in [0, 1]")
    rng = spawn_rng(master_seed, "attributed")
    perm = rng.permutation(n)
    groups = []
    offset = 0
    for size in profile:
        # circular slices over a shuffled order cover every node once the
        # profile total reaches n; wrapping creates the overlaps
        members = [int(perm[(offset + t) % n]) for t in range(size)]
        groups.append(sorted(set(members)))
        offset += size
    mask = np.zeros((m_groups, n), dtype=bool)
    for gi, members in enumerate(groups):
        mask[gi, members] = True
    shared = (mask.T.astype(np.int64) @ mask.astype(np.int64)) > 0
    iu, ju = np.triu_indices(n, k=1)
    within = shared[iu, ju]
    n_pairs = iu.size
    n_within = int(within.sum())
    c = (n * mean_degree / 2.0) / n_pairs
    q_cross = c * (1.0 - homophily)
    if n_within > 0:
        q_within = q_cross + c * homophily * n_pairs / n_within
    else:
        q_within = 0.0
        q_cross = c
    probs = np.where(within, min(q_within, 1.0), min(q_cross, 1.0))
    draws = rng.random(n_pairs)
    sel = draws < probs
    edges = np.stack([iu[sel], ju[sel]], axis=1)
    return from_edges(edges, p, groups, n=n, directed=False,
                      node_ids=[f"v{i}" for i in range(n)],
                      group_names=[f"g{gi}" for gi in range(m_groups)])


GENERATORS = {
    "attributed": gen_attributed_random,
    "pof_rational": gen_pof_rational,
    "pof_maximin": gen_pof_maximin,
}


def _build_instance(spec: dict, default_p: float | None, master_seed: int) -> AttributedGraph:
    if "graph" in spec:
        G = load_graph(spec["graph"], fmt=spec.get("format", "json"),
                       attrs=spec.get("attrs"), p=spec.get("p", default_p))
        if default_p is not None:
            G = with_probability(G, default_p)
        return G
    gen = dict(spec["generator"])
    name = gen.pop("name")
    if name == "attributed":
        return gen_attributed_random(
            n=gen["n"], m_groups=len(gen["groups"]), group_size_profile=gen["groups"],
            homophily=gen.get("homophily", 0.5), mean_degree=gen.get("mean_degree", 4.0),
            p=gen.get("p", default_p if default_p is not None else 0.1),
            master_seed=gen.get("seed", derive_seed(master_seed, "instance", spec["name"])))
    if name in ("pof_rational", "pof_maximin"):
        G, _ = GENERATORS[name](s=gen["s"], p=gen.get("p", default_p if default_p is not None else 0.1))
        return G
    raise ValueError(f"unknown generator {name!r}")


_CSV_FIXED = ["instance", "run", "algorithm", "total", "maximin_value",
              "mean_violation_pct", "pof", "wall_ms"]


def run_experiment(config, out_path=None):
    """Run every (instance, run, algorithm) cell of an experiment config and
    write the results CSV. Returns (rows, path). wall_ms is measured time
    and is the one column outside the byte-determinism contract.
    """
    if not isinstance(config, dict):
        with open(config, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    k = int(config["k"])
    algorithms = list(config.get("algorithms", ["greedy", "dc", "maximin"]))
    for algo in algorithms:
        if algo not in ("greedy", "dc", "maximin"):
            raise ValueError(f"unknown algorithm {algo!r}")
    runs = int(config.get("runs", 1))
    master_seed = int(config.get("seed", 0))
    default_p = config.get("p")
    samples = config.get("samples", {})
    params = SolverParams().with_overrides(**config.get("solver", {}))
    if "probe" in samples:
        params = params.with_overrides(samples_probe=int(samples["probe"]))
    if "final" in samples:
        params = params.with_overrides(samples_final=int(samples["final"]))
    out_path = out_path or config.get("out", "results.csv")

    instances = []
    for spec in config["instances"]:
        G = _build_instance(spec, default_p, master_seed)
        demands = compute_demands(G, k, params, derive_seed(master_seed, spec["name"], "demands"))
        instances.append((spec["name"], G, demands))

    max_m = max(G.m for _, G, _ in instances)
    rows = []
    for name, G, demands in instances:
        for run in range(runs):
            greedy_cache: dict[str, SolveResult] = {}
            def greedy_result():
                if "res" not in greedy_cache:
                    greedy_cache["res"] = solve_greedy(
                        G, k, params, derive_seed(master_seed, name, "run", run, "greedy"),
                        demands=demands)
                return greedy_cache["res"]
            for algo in algorithms:
                t0 = time.perf_counter()
                seed = derive_seed(master_seed, name, "run", run, algo)
                if algo == "greedy":
                    res = greedy_result()
                elif algo == "dc":
                    res = solve_diversity(G, k, params, seed, demands=demands)
                else:
                    res = solve_maximin(G, k, params, seed, demands=demands)
                wall_ms = (time.perf_counter() - t0) * 1000.0
                opt_total = greedy_result().total
                pof = opt_total / res.total if res.total > 0 else float("inf")
                row = {
                    "instance": name, "run": run, "algorithm": algo,
                    "total": res.total, "maximin_value": res.maximin_value,
                    "mean_violation_pct": res.mean_violation_pct,
                    "pof": pof, "wall_ms": wall_ms,
                    "fractions": res.fractions,
                }
                rows.append(row)

    header = _CSV_FIXED + [f"group_frac_{i}" for i in range(max_m)]
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            fracs = list(row["fractions"]) + [""] * (max_m - len(row["fractions"]))
            writer.writerow([
                row["instance"], row["run"], row["algorithm"],
                _fmt(row["total"]), _fmt(row["maximin_value"]),
                _fmt(row["mean_violation_pct"]), _fmt(row["pof"]), _fmt(row["wall_ms"]),
            ] + [_fmt(v) for v in fracs])
    return rows, out_path


def _fmt(v) -> str:
    if v is None or v == "":
        return ""
    return f"{float(v):.10g}"
