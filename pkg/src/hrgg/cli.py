"""Command-line front end: sample, build, census, theory, experiment.

Exit codes: 0 success, 2 parameter-regime violation, 3 numeric overflow.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .census import TreeSpec, count_tree_embeddings
from .experiments import MODES, ExperimentConfig, run_experiment
from .geometry import ModelParams, RadiusRule
from .graph import (
    build_hyperbolic_graph,
    load_graph,
    restrict_annulus,
    save_graph,
)
from .sampling import load_point_cloud, sample_point_cloud, save_point_cloud
from .theory import (
    RegimeError,
    RegimeWarning,
    a_gamma,
    expected_subtree_asymptotic,
    expected_subtree_full,
    log_expectation_limit,
    regime_classify,
    variance_orders,
)

EXIT_OK = 0
EXIT_REGIME = 2
EXIT_OVERFLOW = 3


def _add_model_flags(p: argparse.ArgumentParser, require: bool = False) -> None:
    p.add_argument("--d", type=int, default=None, required=require)
    p.add_argument("--alpha", type=float, default=None, required=require)
    p.add_argument("--zeta", type=float, default=None, required=require)
    p.add_argument("--n", type=float, default=None, required=require,
                   help="Poisson intensity")
    p.add_argument("--radius-rule", default=None, required=require,
                   help="thermo:NU | logmult:C | explicit:R")
    p.add_argument("--gamma", type=float, default=None,
                   help="annulus depth fraction in (0, 1]")


def _params_from_args(args) -> ModelParams:
    missing = [name for name in ("d", "alpha", "zeta", "n", "radius_rule")
               if getattr(args, name) is None]
    if missing:
        raise SystemExit(f"missing required model flags: {missing}")
    return ModelParams(
        d=args.d, alpha=args.alpha, zeta=args.zeta, n=args.n,
        radius_rule=RadiusRule.parse(args.radius_rule),
        gamma=1.0 if args.gamma is None else args.gamma,
    )


def _cmd_sample(args) -> int:
    params = _params_from_args(args)
    cloud = sample_point_cloud(params, args.seed)
    out = save_point_cloud(cloud, args.out)
    print(f"sampled {len(cloud)} points at R = {cloud.R:.6g} -> {out}")
    return EXIT_OK


def _cmd_build(args) -> int:
    cloud = load_point_cloud(args.cloud)
    if args.gamma is not None:
        cloud = restrict_annulus(cloud, args.gamma)
    graph = build_hyperbolic_graph(cloud, strategy=args.strategy)
    save_graph(graph, args.out)
    print(f"built graph: {graph.num_vertices} vertices, "
          f"{graph.num_edges} edges ({graph.build_meta['strategy']}) -> {args.out}")
    return EXIT_OK


def _cmd_census(args) -> int:
    tree = TreeSpec.parse(args.tree)
    if args.graph is not None:
        graph = load_graph(args.graph)
    else:
        if args.cloud is None:
            raise SystemExit("census needs --cloud or --graph")
        cloud = load_point_cloud(args.cloud)
        if args.gamma is not None:
            cloud = restrict_annulus(cloud, args.gamma)
        graph = build_hyperbolic_graph(cloud, strategy=args.strategy)
    count = count_tree_embeddings(graph, tree, max_depth=args.max_depth)
    print(count)
    return EXIT_OK


def _cmd_theory(args) -> int:
    params = _params_from_args(args)
    tree = TreeSpec.parse(args.tree)
    report = regime_classify(tree, params)
    doc = {
        "params": params.to_dict(),
        "tree": {"k": tree.k, "edges": [list(e) for e in tree.edges],
                 "label": tree.label()},
        "R": params.radius(),
        "regime": report.to_dict(),
        "a_gamma": {str(deg): a_gamma(int(deg), params)
                    for deg in sorted(set(int(x) for x in tree.degrees))},
        "variance_orders": variance_orders(tree, params).to_dict(),
    }
    if args.strict_regime:
        doc["expected_annulus"] = expected_subtree_asymptotic(tree, params)
    else:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RegimeWarning)
            doc["expected_annulus"] = expected_subtree_asymptotic(tree, params)
    try:
        doc["expected_full"] = expected_subtree_full(tree, params)
    except RegimeError as exc:
        if args.strict_regime:
            raise
        doc["expected_full"] = None
        doc["expected_full_note"] = str(exc)
    rule = params.radius_rule
    if tree.is_star and rule.kind == "logmult":
        ratio = 2.0 * params.alpha / params.zeta
        branch = "ii" if 1.0 < ratio <= tree.k - 1 else \
            "iii" if 0.0 < ratio <= 1.0 else None
        if branch is not None:
            doc["log_expectation_limit"] = {
                "branch": branch,
                "value": log_expectation_limit(tree.k, rule.value, params.alpha,
                                               params.zeta, params.d, branch),
            }
    print(json.dumps(doc, indent=2, sort_keys=True))
    return EXIT_OK


def _merged_experiment_config(args) -> ExperimentConfig:
    data = json.loads(Path(args.config).read_text()) if args.config else {}
    if args.mode is not None:
        data["mode"] = args.mode
    if args.replicates is not None:
        data["replicates"] = args.replicates
    if args.n_grid is not None:
        data["n_grid"] = [float(x) for x in args.n_grid.split(",") if x]
    if args.seed is not None:
        data["master_seed"] = args.seed
    if args.tree is not None:
        data["tree"] = args.tree
    if args.euclid_regime is not None:
        data["euclid_regime"] = args.euclid_regime
    pd = dict(data.get("params", {}))
    for name in ("d", "alpha", "zeta", "gamma", "n"):
        value = getattr(args, name)
        if value is not None:
            pd[name] = value
    if args.radius_rule is not None:
        pd["radius_rule"] = args.radius_rule
    if "n" not in pd and data.get("n_grid"):
        pd["n"] = data["n_grid"][0]
    pd.setdefault("gamma", 1.0)
    data["params"] = pd
    data.setdefault("master_seed", 0)
    data.setdefault("replicates", 100)
    if "mode" not in data:
        raise SystemExit(f"experiment needs --mode (one of {MODES}) or a config file")
    if "tree" not in data:
        raise SystemExit("experiment needs --tree or a config file")
    return ExperimentConfig.from_dict(data)


def _cmd_experiment(args) -> int:
    cfg = _merged_experiment_config(args)
    result = run_experiment(cfg)
    prefix = Path(args.out_prefix) if args.out_prefix else None
    if prefix is not None:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        result.to_json(prefix.with_suffix(".json"))
        result.records_csv(prefix.with_suffix(".csv"))
        samples = result.samples_csv(prefix.parent / (prefix.name + "_samples.csv"))
        written = [str(prefix.with_suffix(".json")), str(prefix.with_suffix(".csv"))]
        if samples:
            written.append(str(samples))
        print("wrote " + ", ".join(written))
    for rec in result.records:
        ratio = "-" if rec["ratio"] is None else f"{rec['ratio']:.4f}"
        print(f"n={rec['n']:g} R={rec['R']:.4g} mean={rec['mc_mean']:.6g} "
              f"var={rec['mc_variance']:.6g} se={rec['std_error']:.3g} ratio={ratio}")
    if result.fitted_exponent:
        fe = result.fitted_exponent
        print(f"log-log slope: {fe['slope']:.4f} (stderr {fe['stderr']:.4f})")
    if result.clt:
        print(f"KS at n={result.clt['n']:g}: {result.clt['ks_statistic']:.4f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrgg",
        description="Hyperbolic random geometric graphs: sampling, tree census, "
                    "limit formulas, Monte Carlo experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample a point cloud to CSV")
    _add_model_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("build", help="build a graph from a sampled cloud")
    p.add_argument("--cloud", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=("auto", "naive", "sweep"), default="auto")
    p.add_argument("--gamma", type=float, default=None,
                   help="restrict to the depth-gamma*R annulus first")
    p.set_defaults(func=_cmd_build)

    p = sub.add_parser("census", help="count tree embeddings")
    p.add_argument("--tree", required=True, help="path:K | star:K | edges:0-1,...")
    p.add_argument("--cloud", default=None)
    p.add_argument("--graph", default=None, help="pre-built edge list")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--strategy", choices=("auto", "naive", "sweep"), default="auto")
    p.add_argument("--max-depth", type=float, default=None)
    p.set_defaults(func=_cmd_census)

    p = sub.add_parser("theory", help="closed-form values and regime report")
    _add_model_flags(p)
    p.add_argument("--tree", required=True)
    p.add_argument("--strict-regime", action="store_true")
    p.set_defaults(func=_cmd_theory)

    p = sub.add_parser("experiment", help="run a Monte Carlo experiment")
    _add_model_flags(p)
    p.add_argument("--config", default=None, help="JSON config file")
    p.add_argument("--mode", choices=MODES, default=None)
    p.add_argument("--tree", default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--n-grid", default=None, help="comma-separated intensities")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--euclid-regime", choices=("dense", "thermodynamic"),
                   default=None)
    p.add_argument("--out-prefix", default=None)
    p.add_argument("--strict-regime", action="store_true")
    p.set_defaults(func=_cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "strict_regime", False):
            with warnings.catch_warnings():
                warnings.simplefilter("error", RegimeWarning)
                return args.func(args)
        return args.func(args)
    except (RegimeError, RegimeWarning) as exc:
        print(f"regime violation: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except OverflowError as exc:
        print(f"overflow: {exc}", file=sys.stderr)
        return EXIT_OVERFLOW


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
