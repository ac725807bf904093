"""Acceptance gate: one test per shipped guarantee, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see the
summary lines on passing runs too).  Each test prints

    ACCEPTANCE NN <name>: PASS|FAIL (<measured detail>; <elapsed>)

and then asserts, so the printed line and the pytest verdict agree.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import integrate

from hrgg.census import (
    TreeSpec,
    add_one_cost,
    count_tree_embeddings,
    count_tree_embeddings_bruteforce,
    second_difference,
)
from hrgg.experiments import (
    ExperimentConfig,
    fit_loglog,
    run_experiment,
)
from hrgg.geometry import (
    ModelParams,
    RadiusRule,
    ball_coordinates,
    connection_cos_gap,
    connection_probability_asymptotic,
    hyperbolic_distance,
    poincare_distance_oracle,
)
from hrgg.graph import Graph, _csr_from_pairs, build_hyperbolic_graph
from hrgg.sampling import RngStream, sample_point_cloud
from hrgg.theory import a_gamma

ALL_TREES = (
    TreeSpec.path(2),
    TreeSpec.path(3),
    TreeSpec.path(4), TreeSpec.star(4),
    TreeSpec.path(5), TreeSpec.star(5), TreeSpec.parse("edges:0-1,1-2,1-3,3-4"),
)


def _report(num: int, name: str, ok: bool, detail: str,
            elapsed: float, budget_s: float) -> None:
    in_budget = elapsed < budget_s
    verdict = "PASS" if (ok and in_budget) else "FAIL"
    print(f"ACCEPTANCE {num:02d} {name}: {verdict} "
          f"({detail}; {elapsed:.1f}s / {budget_s:.0f}s budget)", flush=True)
    assert ok, f"criterion {num} value check failed: {detail}"
    assert in_budget, f"criterion {num} exceeded budget: {elapsed:.1f}s"


def _graph_from_edges(n, edges):
    arr = np.asarray(sorted(set(map(tuple, map(sorted, edges)))), dtype=np.int64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    indptr, indices = _csr_from_pairs(n, arr[:, 0], arr[:, 1])
    return Graph(num_vertices=n, indptr=indptr, indices=indices,
                 vertex_payload=np.zeros(n), build_meta={})


def _er_graph(rng):
    n = int(rng.integers(2, 13))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < rng.uniform(0.1, 0.9)
    return _graph_from_edges(n, list(zip(iu[keep], ju[keep])))


def _small_hyperbolic_graph(seed):
    params = ModelParams(d=2, alpha=1.0, zeta=1.0, n=6.0,
                         radius_rule=RadiusRule.explicit(4.0))
    cloud = sample_point_cloud(params, seed)
    if len(cloud) > 12:
        cloud = cloud.subset(np.arange(12))
    return build_hyperbolic_graph(cloud, strategy="naive")


def test_criterion_01_census_matches_bruteforce_on_mixed_graphs():
    start = time.monotonic()
    rng = np.random.default_rng(1)
    graphs = [_er_graph(rng) for _ in range(100)]
    graphs += [_small_hyperbolic_graph(seed) for seed in range(100)]
    checked = mismatches = 0
    for graph in graphs:
        for tree in ALL_TREES:
            fast = count_tree_embeddings(graph, tree)
            slow = count_tree_embeddings_bruteforce(graph, tree)
            checked += 1
            mismatches += fast != slow
    _report(1, "census equals brute force", mismatches == 0,
            f"{checked} graph/tree pairs, {mismatches} mismatches",
            time.monotonic() - start, 60.0)


def test_criterion_02_distance_formula_matches_ball_oracle():
    start = time.monotonic()
    rng = np.random.default_rng(2)
    worst = 0.0
    pairs_per_zeta = 100_000 // 4
    for zeta in (0.5, 1.0, 1.5, 2.0):
        # oracle works in ball coordinates: cap radii where 1 - |x|^2
        # retains enough bits for 1e-9 comparisons
        r = rng.uniform(1e-3, 12.0 / zeta, size=(pairs_per_zeta, 2))
        theta = rng.uniform(1e-6, math.pi, size=pairs_per_zeta)
        got = hyperbolic_distance(r[:, 0], r[:, 1], theta, zeta)
        zero = np.zeros_like(theta)
        x = ball_coordinates(r[:, 0], np.stack([np.cos(zero), np.sin(zero)],
                                               axis=-1), zeta)
        y = ball_coordinates(r[:, 1], np.stack([np.cos(theta), np.sin(theta)],
                                               axis=-1), zeta)
        ref = poincare_distance_oracle(x, y, zeta)
        scale = np.maximum(ref, 1e-300)
        worst = max(worst, float(np.max(np.abs(got - ref) / scale)))
    _report(2, "law of cosines equals ball-model oracle", worst < 1e-9,
            f"4x{pairs_per_zeta} pairs, max rel err {worst:.3e}",
            time.monotonic() - start, 30.0)


def test_criterion_03_depth_profile_integral_matches_quadrature():
    start = time.monotonic()
    R, worst = 10.0, 0.0
    cases = 0
    for p, d, ratio, gamma in itertools.product(
            (1, 2, 3, 4, 5, 6), (2, 3, 5), (0.3, 0.8, 1.6, 3.0),
            (0.2, 0.4, 0.9)):
        params = ModelParams(d=d, alpha=ratio, zeta=1.0, n=100.0,
                             radius_rule=RadiusRule.explicit(R), gamma=gamma)
        c = (d - 1) * (p - 2.0 * ratio) / 2.0
        ref, _ = integrate.quad(lambda t: math.exp(c * t), 0.0, gamma * R,
                                epsabs=1e-14, epsrel=1e-13)
        got = a_gamma(p, params, R=R)
        worst = max(worst, abs(got - ref) / abs(ref))
        cases += 1
    # continuity at the degenerate growth rate
    params = ModelParams(d=2, alpha=1.0, zeta=1.0, n=100.0,
                         radius_rule=RadiusRule.explicit(R), gamma=0.4)
    jump = abs(a_gamma(2.0 + 1e-13, params, R=R) - 0.4 * R)
    _report(3, "depth-profile integral equals quadrature",
            worst < 1e-10 and jump < 1e-8,
            f"{cases} grid cases, max rel err {worst:.3e}, "
            f"degenerate jump {jump:.1e}",
            time.monotonic() - start, 30.0)


def test_criterion_04_connection_probability_asymptotics():
    start = time.monotonic()
    R, draws = 30.0, 1_000_000
    rng = np.random.default_rng(4)
    worst = 0.0
    details = []
    for d, t in ((2, 9.5), (3, 12.0)):
        r = R - t
        gap = float(connection_cos_gap(r, r, R, 1.0))
        if d == 2:
            theta = rng.uniform(0.0, math.pi, size=draws)
        else:
            theta = np.arccos(1.0 - 2.0 * rng.uniform(0.0, 1.0, size=draws))
        mc = float(np.mean(np.cos(theta) >= 1.0 - gap)) if gap > 0 else 0.0
        closed = connection_probability_asymptotic(t, t, R, d, 1.0)
        rel = abs(mc - closed) / closed
        worst = max(worst, rel)
        details.append(f"d={d}: mc {mc:.5f} vs {closed:.5f} ({rel:.1%})")
    _report(4, "asymptotic connection probability", worst < 0.05,
            "; ".join(details), time.monotonic() - start, 60.0)


def test_criterion_05_tuple_identity_for_census_mean():
    start = time.monotonic()
    params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=50.0,
                         radius_rule=RadiusRule.thermodynamic(1.0), gamma=0.4)
    cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                           replicates=10_000, n_grid=(50.0,), master_seed=5,
                           mode="palm")
    rec = run_experiment(cfg).records[0]
    z = rec["z_distance"]
    _report(5, "census mean equals iid-tuple estimate", abs(z) < 3.0,
            f"census {rec['mc_mean']:.2f}+-{rec['std_error']:.2f} vs "
            f"tuple {rec['theory_value']:.2f}+-{rec['rhs_std_error']:.2f}, "
            f"z = {z:.2f}",
            time.monotonic() - start, 120.0)


def test_criterion_06_edge_count_constant_and_slope():
    start = time.monotonic()
    reference = 32.0 / (9.0 * math.pi)
    grid = ((1.0e3, 400), (1.0e4, 120), (1.0e5, 30))
    means, ratios, slacks = [], [], []
    for n, reps in grid:
        params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=n,
                             radius_rule=RadiusRule.thermodynamic(1.0))
        cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                               replicates=reps, n_grid=(n,), master_seed=6,
                               mode="expectation")
        rec = run_experiment(cfg).records[0]
        means.append((n, rec["mc_mean"]))
        ratios.append(rec["mc_mean"] / (reference * n))
        slacks.append(rec["std_error"] / (reference * n))
    final_ok = abs(ratios[-1] - 1.0) < 0.20
    # approach to 1 must be monotone up to replicate noise
    monotone = all(
        abs(ratios[j + 1] - 1.0) <= abs(ratios[j] - 1.0)
        + 2.0 * (slacks[j] + slacks[j + 1])
        for j in range(len(ratios) - 1))
    slope = fit_loglog([n for n, _ in means], [m for _, m in means])["slope"]
    slope_ok = abs(slope - 1.0) < 0.1
    _report(6, "edge-count constant and linear growth",
            final_ok and monotone and slope_ok,
            f"ratios {[f'{r:.3f}' for r in ratios]}, slope {slope:.3f}",
            time.monotonic() - start, 300.0)


def test_criterion_07_annulus_star_exponent():
    start = time.monotonic()
    grid = ((1.0e3, 64), (3.0e3, 32), (1.0e4, 16), (3.0e4, 8))
    means = []
    for n, reps in grid:
        params = ModelParams(d=2, alpha=0.8, zeta=1.0, n=n,
                             radius_rule=RadiusRule.thermodynamic(1.0),
                             gamma=0.4)
        cfg = ExperimentConfig(params=params, tree=TreeSpec.star(3),
                               replicates=reps, n_grid=(n,), master_seed=7,
                               mode="expectation")
        rec = run_experiment(cfg).records[0]
        means.append((n, rec["mc_mean"]))
    slope = fit_loglog([n for n, _ in means], [m for _, m in means])["slope"]
    # the annulus profile integrals still grow over this grid (their
    # saturation scale is far beyond desk-size n), so the finite-size
    # slope sits near 1.29, well above the limit exponent 1.16
    _report(7, "annulus star-count exponent", abs(slope - 1.16) < 0.05,
            f"fitted slope {slope:.4f} vs 1.16 +- 0.05",
            time.monotonic() - start, 600.0)


def test_criterion_08_variance_grows_linearly():
    start = time.monotonic()
    params = ModelParams(d=2, alpha=3.0, zeta=1.0, n=1.0e3,
                         radius_rule=RadiusRule.thermodynamic(1.0))
    cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                           replicates=500, n_grid=(1.0e3, 3.0e3, 1.0e4),
                           master_seed=8, mode="variance")
    result = run_experiment(cfg)
    slope = result.fitted_exponent["slope"]
    _report(8, "census variance linear in intensity", abs(slope - 1.0) < 0.15,
            f"fitted variance slope {slope:.3f}",
            time.monotonic() - start, 600.0)


def test_criterion_09_normal_limit_ks():
    start = time.monotonic()
    ks_small, ks_large = [], []
    for rerun in range(5):
        params = ModelParams(d=2, alpha=3.0, zeta=1.0, n=1.0e3,
                             radius_rule=RadiusRule.thermodynamic(1.0))
        cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                               replicates=500, n_grid=(1.0e3, 2.0e4),
                               master_seed=rerun, mode="clt")
        by_n = run_experiment(cfg).clt["ks_by_n"]
        ks_small.append(by_n["1000.0"])
        ks_large.append(by_n["20000.0"])
    level_ok = ks_large[0] < 0.08
    trend_ok = float(np.mean(ks_small)) > float(np.mean(ks_large))
    _report(9, "standardized census is near normal",
            level_ok and trend_ok,
            f"KS(2e4) = {ks_large[0]:.4f} on first rerun; rerun means "
            f"KS(1e3) = {np.mean(ks_small):.4f} > "
            f"KS(2e4) = {np.mean(ks_large):.4f}",
            time.monotonic() - start, 900.0)


def test_criterion_10_euclidean_baseline_slopes():
    start = time.monotonic()

    def euclid(tree, regime, n_grid, reps):
        params = ModelParams(d=2, alpha=1.0, zeta=1.0, n=n_grid[0],
                             radius_rule=RadiusRule.explicit(1.0))
        cfg = ExperimentConfig(params=params, tree=tree, replicates=reps,
                               n_grid=n_grid, master_seed=10,
                               mode="euclid-baseline", euclid_regime=regime)
        return run_experiment(cfg).fitted_exponent["slope"]

    dense = euclid(TreeSpec.path(2), "dense", (50.0, 100.0, 200.0, 400.0), 40)
    thermo = euclid(TreeSpec.path(2), "thermodynamic",
                    (250.0, 500.0, 1000.0, 2000.0), 30)
    star = euclid(TreeSpec.star(3), "thermodynamic",
                  (250.0, 500.0, 1000.0, 2000.0), 30)
    ok = (abs(dense - 2.0) < 0.1 and abs(thermo - 1.0) < 0.1
          and abs(star - 1.0) < 0.15)
    _report(10, "flat-geometry growth is degree-blind", ok,
            f"dense edge {dense:.3f} (2.0 +- 0.1), thermo edge {thermo:.3f} "
            f"(1.0 +- 0.1), thermo star {star:.3f} (1.0 +- 0.15)",
            time.monotonic() - start, 300.0)


def test_criterion_11_difference_operators_match_recounts():
    start = time.monotonic()
    rng = np.random.default_rng(11)
    trees = (TreeSpec.path(2), TreeSpec.star(3), TreeSpec.path(4),
             TreeSpec.parse("edges:0-1,1-2,1-3,3-4"))
    first_bad = second_bad = 0
    for i in range(100):
        tree = trees[i % len(trees)]
        graph = _er_graph(rng)
        nv = graph.num_vertices
        x_nbrs = np.flatnonzero(rng.random(nv) < 0.5)
        y_nbrs = np.flatnonzero(rng.random(nv) < 0.5)
        xy = bool(rng.random() < 0.5)
        edges = list(map(tuple, graph.edge_array()))

        gx = _graph_from_edges(nv + 1, edges + [(int(v), nv) for v in x_nbrs])
        base = count_tree_embeddings(graph, tree)
        want_first = count_tree_embeddings(gx, tree) - base
        if add_one_cost(graph, tree, x_nbrs) != want_first:
            first_bad += 1

        gy = _graph_from_edges(nv + 1, edges + [(int(v), nv) for v in y_nbrs])
        both = edges + [(int(v), nv) for v in x_nbrs] \
            + [(int(v), nv + 1) for v in y_nbrs] + ([(nv, nv + 1)] if xy else [])
        gxy = _graph_from_edges(nv + 2, both)
        want_second = (count_tree_embeddings(gxy, tree)
                       - count_tree_embeddings(gx, tree)
                       - count_tree_embeddings(gy, tree) + base)
        if second_difference(graph, tree, x_nbrs, y_nbrs,
                             xy_adjacent=xy) != want_second:
            second_bad += 1
    _report(11, "difference operators equal recounts",
            first_bad == 0 and second_bad == 0,
            f"100 instances each; {first_bad} + {second_bad} mismatches",
            time.monotonic() - start, 60.0)


def test_criterion_12_bit_identical_reruns():
    start = time.monotonic()

    def run_once():
        params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=200.0,
                             radius_rule=RadiusRule.thermodynamic(1.0),
                             gamma=0.4)
        cfg = ExperimentConfig(params=params, tree=TreeSpec.star(3),
                               replicates=12, n_grid=(200.0, 400.0),
                               master_seed=12, mode="expectation")
        return run_experiment(cfg)

    a, b = run_once(), run_once()
    counts_equal = [r["counts"] for r in a.records] == \
        [r["counts"] for r in b.records]
    summaries_equal = all(
        ra["mc_mean"] == rb["mc_mean"] and ra["mc_variance"] == rb["mc_variance"]
        for ra, rb in zip(a.records, b.records))
    _report(12, "experiments are bit-reproducible",
            counts_equal and summaries_equal,
            "identical replicate counts and summaries on rerun",
            time.monotonic() - start, 60.0)
