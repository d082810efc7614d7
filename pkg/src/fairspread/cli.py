"""Command-line front end.

Subcommands: solve (greedy / maximin / dc), evaluate (diagnose a given seed
set), pof (price of fairness), gen (instance generators), bench (batch
experiment to CSV). All randomness flows from one --seed; outputs are JSON
or CSV and byte-identical across repeat runs with the same seed, except
for measured wall time in bench CSVs. Every flag can be defaulted through
an environment variable FAIRSPREAD_<FLAG> (e.g. FAIRSPREAD_K=15).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .bench import (GENERATORS, gen_attributed_random, gen_overlap_maximin,
                    gen_overlap_rational, gen_pof_maximin, gen_pof_rational,
                    run_experiment)
from .config import SolverParams
from .fairness import (SolveResult, evaluate_fairness, price_of_fairness,
                       solve_diversity, solve_greedy, solve_maximin)
from .graph import (AttributedGraph, GraphFormatError, GraphValidationError,
                    load_graph, save_graph, with_probability)


def _env(flag: str, default=None):
    return os.environ.get("FAIRSPREAD_" + flag.upper().replace("-", "_"), default)


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--seed", type=int, default=_env("seed", 0), help="master random seed")
    parser.add_argument("--threads", type=int, default=_env("threads"),
                        help="cap worker threads for sampling kernels")
    parser.add_argument("--out", default=_env("out"), help="output file (default: stdout)")


def _add_solver(parser: argparse.ArgumentParser):
    parser.add_argument("--samples", type=int, default=_env("samples", 1000),
                        help="Monte Carlo samples inside the optimization loop")
    parser.add_argument("--final-samples", type=int, default=_env("final_samples", 100000),
                        help="Monte Carlo samples for final reporting")
    parser.add_argument("--epsilon", type=float, default=_env("epsilon", 0.5))
    parser.add_argument("--fw-iters", type=int, default=_env("fw_iters", 100))
    parser.add_argument("--md-iters", type=int, default=_env("md_iters", 500))
    parser.add_argument("--bs-tol", type=float, default=_env("bs_tol", 0.01))
    parser.add_argument("--exact-demand", action="store_true",
                        default=_env("exact_demand") not in (None, "", "0"),
                        help="brute-force group demands on small subgraphs")


def _params(args) -> SolverParams:
    return SolverParams(
        epsilon=float(args.epsilon),
        fw_iters=int(args.fw_iters),
        md_iters=int(args.md_iters),
        bs_tol=float(args.bs_tol),
        samples_probe=int(args.samples),
        samples_final=int(args.final_samples),
        exact_demand=bool(args.exact_demand),
        threads=args.threads if args.threads is None else int(args.threads),
    )


def _apply_threads(args):
    threads = getattr(args, "threads", None)
    if threads:
        import numba
        numba.set_num_threads(int(threads))


def _load(args) -> AttributedGraph:
    G = load_graph(args.graph, fmt=getattr(args, "format", "json") or "json",
                   attrs=getattr(args, "attrs", None), p=getattr(args, "p", None))
    if getattr(args, "p", None) is not None:
        G = with_probability(G, float(args.p))
    return G


def _emit(doc, out):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_doc(command: str, res: SolveResult, G: AttributedGraph, args, params: SolverParams) -> dict:
    return {
        "command": command,
        "algorithm": res.algorithm,
        "k": int(res.seeds.k),
        "seed": int(args.seed),
        "graph": {"nodes": G.n, "arcs": G.num_arcs, "p": G.p, "groups": G.m},
        "seeds": sorted(G.node_ids[v] for v in res.seeds.members),
        "total": res.total,
        "total_stderr": res.total_stderr,
        "per_group": [float(v) for v in res.per_group],
        "fractions": [float(v) for v in res.fractions],
        "maximin_value": res.maximin_value,
        "demands": None if res.demands is None else [float(v) for v in res.demands],
        "violations": None if res.violations is None else [float(v) for v in res.violations],
        "mean_violation_pct": res.mean_violation_pct,
        "search_trace": res.search_trace,
        "params": {
            "epsilon": params.epsilon, "fw_iters": params.fw_iters,
            "md_iters": params.md_iters, "bs_tol": params.bs_tol,
            "samples_probe": params.samples_probe, "samples_final": params.samples_final,
        },
    }


def cmd_solve(args) -> int:
    _apply_threads(args)
    if args.k < 1:
        raise SystemExit(2)
    G = _load(args)
    params = _params(args)
    seed = int(args.seed)
    if args.algo == "greedy":
        res = solve_greedy(G, args.k, params, seed)
    elif args.algo == "maximin":
        res = solve_maximin(G, args.k, params, seed)
    else:
        res = solve_diversity(G, args.k, params, seed)
    _emit(_result_doc("solve", res, G, args, params), args.out)
    return 0


def cmd_evaluate(args) -> int:
    _apply_threads(args)
    G = _load(args)
    params = _params(args)
    ids = [v for v in args.seed_nodes.split(",") if v]
    missing = [v for v in ids if v not in G.id_to_index]
    if missing:
        raise GraphValidationError(f"unknown node id {missing[0]!r}")
    members = [G.id_to_index[v] for v in ids]
    k = args.k if args.k else max(len(members), 1)
    res = evaluate_fairness(G, members, num_samples=int(args.final_samples),
                            master_seed=int(args.seed), k=k, params=params)
    _emit(_result_doc("evaluate", res, G, args, params), args.out)
    return 0


def cmd_pof(args) -> int:
    _apply_threads(args)
    G = _load(args)
    params = _params(args)
    ratio, detail = price_of_fairness(G, args.k, args.concept, params, int(args.seed),
                                      details=True)
    doc = {
        "command": "pof",
        "concept": args.concept,
        "k": int(args.k),
        "seed": int(args.seed),
        "graph": {"nodes": G.n, "arcs": G.num_arcs, "p": G.p, "groups": G.m},
        "pof": ratio if ratio != float("inf") else "inf",
        "opt_total": detail["opt_total"],
        "fair_total": detail["fair_total"],
    }
    _emit(doc, args.out)
    return 0


def cmd_gen(args) -> int:
    name = args.generator
    if name == "attributed":
        profile = [int(v) for v in args.groups.split(",")]
        G = gen_attributed_random(args.n, len(profile), profile, args.homophily,
                                  args.mean_degree, args.p, int(args.seed))
        save_graph(G, args.out or sys.stdout)
        return 0
    if name == "pof-rational":
        G, _ = gen_pof_rational(args.s, args.p)
    elif name == "pof-maximin":
        G, _ = gen_pof_maximin(args.s, args.p)
    elif name == "overlap-rational":
        G, Gp, _ = gen_overlap_rational(args.s, args.p)
    elif name == "overlap-maximin":
        G, Gp, _ = gen_overlap_maximin(args.s, args.p)
    else:
        raise SystemExit(2)
    if name.startswith("overlap"):
        if not args.out:
            raise GraphValidationError("overlap generators need --out to write the pair")
        base, ext = os.path.splitext(args.out)
        save_graph(G, base + "_base" + (ext or ".json"))
        save_graph(Gp, base + "_overlap" + (ext or ".json"))
    else:
        save_graph(G, args.out or sys.stdout)
    return 0


def cmd_bench(args) -> int:
    _apply_threads(args)
    with open(args.config, "r", encoding="utf-8") as fh:
        config = json.load(fh)
    rows, path = run_experiment(config, out_path=args.out)
    sys.stderr.write(f"wrote {len(rows)} rows to {path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairspread",
        description="Influence maximization with group-fairness guarantees")
    sub = parser.add_subparsers(dest="cmd", required=True)

    ps = sub.add_parser("solve", help="select seeds with a chosen solver")
    ps.add_argument("--graph", required=True)
    ps.add_argument("--format", choices=["json", "edgelist"], default="json")
    ps.add_argument("--attrs", help="attribute CSV for edgelist format")
    ps.add_argument("--algo", choices=["greedy", "maximin", "dc"],
                    default=_env("algo", "greedy"))
    ps.add_argument("--k", type=int, required=_env("k") is None,
                    default=_env("k") and int(_env("k")))
    ps.add_argument("--p", type=float, default=_env("p"),
                    help="override the graph's activation probability")
    _add_solver(ps)
    _add_common(ps)
    ps.set_defaults(func=cmd_solve)

    pe = sub.add_parser("evaluate", help="fairness diagnostics for given seeds")
    pe.add_argument("--graph", required=True)
    pe.add_argument("--format", choices=["json", "edgelist"], default="json")
    pe.add_argument("--attrs")
    pe.add_argument("--seed-nodes", required=True, help="comma-separated node ids")
    pe.add_argument("--k", type=int, default=None)
    pe.add_argument("--p", type=float, default=None)
    _add_solver(pe)
    _add_common(pe)
    pe.set_defaults(func=cmd_evaluate)

    pp = sub.add_parser("pof", help="price of fairness of a concept on a graph")
    pp.add_argument("--graph", required=True)
    pp.add_argument("--format", choices=["json", "edgelist"], default="json")
    pp.add_argument("--attrs")
    pp.add_argument("--concept", choices=["maximin", "rational"], required=True)
    pp.add_argument("--k", type=int, required=True)
    pp.add_argument("--p", type=float, default=None)
    _add_solver(pp)
    _add_common(pp)
    pp.set_defaults(func=cmd_pof)

    pg = sub.add_parser("gen", help="write a generated instance as graph JSON")
    pg.add_argument("generator", choices=["attributed", "pof-rational", "pof-maximin",
                                          "overlap-rational", "overlap-maximin"])
    pg.add_argument("--s", type=int, default=10, help="size parameter of the construction")
    pg.add_argument("--p", type=float, default=0.1)
    pg.add_argument("--n", type=int, default=100)
    pg.add_argument("--groups", default="80,20", help="comma-separated group sizes")
    pg.add_argument("--homophily", type=float, default=0.8)
    pg.add_argument("--mean-degree", type=float, default=4.0)
    _add_common(pg)
    pg.set_defaults(func=cmd_gen)

    pb = sub.add_parser("bench", help="batch experiment from a JSON config")
    pb.add_argument("--config", required=True)
    _add_common(pb)
    pb.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (GraphFormatError, GraphValidationError, FileNotFoundError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 3
    except Exception as exc:  # internal failure
        sys.stderr.write(f"internal error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
