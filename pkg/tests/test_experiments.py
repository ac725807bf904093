"""End-to-end experiment runners: reproducibility, outputs, sanity of stats."""

import csv
import json
import math

import numpy as np
import pytest

from hrgg.census import TreeSpec
from hrgg.experiments import (
    MODES,
    ExperimentConfig,
    ExperimentResult,
    fit_loglog,
    palm_second_moment,
    run_experiment,
)
from hrgg.geometry import ModelParams, RadiusRule
from hrgg.theory import RegimeWarning


def edge_config(mode="expectation", n_grid=(50.0, 100.0), replicates=8,
                alpha=2.0, gamma=1.0, seed=7, **kwargs):
    params = ModelParams(d=2, alpha=alpha, zeta=1.0,
                         n=n_grid[0] if n_grid else 100.0,
                         radius_rule=RadiusRule.thermodynamic(1.0), gamma=gamma)
    return ExperimentConfig(params=params, tree=TreeSpec.path(2),
                            replicates=replicates, n_grid=n_grid,
                            master_seed=seed, mode=mode, **kwargs)


# ---------------------------------------------------------------------------
# configuration plumbing


class TestExperimentConfig:
    def test_mode_whitelist(self):
        assert set(MODES) == {"expectation", "variance", "clt", "palm",
                              "euclid-baseline", "stein"}
        with pytest.raises(ValueError):
            edge_config(mode="bogus")

    def test_grid_and_replicate_validation(self):
        with pytest.raises(ValueError):
            edge_config(n_grid=())
        with pytest.raises(ValueError):
            edge_config(n_grid=(100.0, -2.0))
        with pytest.raises(ValueError):
            edge_config(replicates=0)
        with pytest.raises(ValueError):
            edge_config(mode="variance", replicates=1)
        with pytest.raises(ValueError):
            edge_config(mode="clt", replicates=1)
        with pytest.raises(ValueError):
            edge_config(euclid_regime="sparse")

    def test_dict_round_trip(self):
        cfg = edge_config(mode="variance", replicates=12, gamma=0.4)
        again = ExperimentConfig.from_dict(cfg.to_dict())
        assert again == cfg
        assert again.config_hash() == cfg.config_hash()

    def test_from_dict_accepts_tree_strings(self):
        doc = edge_config().to_dict()
        doc["tree"] = "star:3"
        cfg = ExperimentConfig.from_dict(doc)
        assert cfg.tree == TreeSpec.star(3)

    def test_hash_tracks_content(self):
        base = edge_config(seed=7)
        assert base.config_hash() == edge_config(seed=7).config_hash()
        assert base.config_hash() != edge_config(seed=8).config_hash()
        assert len(base.config_hash()) == 16


# ---------------------------------------------------------------------------
# slope fitting


class TestFitLogLog:
    def test_recovers_exact_power_law(self):
        ns = [10.0, 100.0, 1000.0, 10000.0]
        fit = fit_loglog(ns, [3.0 * n ** 2 for n in ns])
        assert fit["slope"] == pytest.approx(2.0, rel=1e-12)
        assert fit["intercept"] == pytest.approx(math.log(3.0), rel=1e-10)
        assert fit["stderr"] == pytest.approx(0.0, abs=1e-10)

    def test_two_points_have_no_stderr(self):
        fit = fit_loglog([10.0, 100.0], [5.0, 50.0])
        assert fit["slope"] == pytest.approx(1.0)
        assert math.isnan(fit["stderr"])

    def test_nonpositive_values_are_dropped(self):
        assert fit_loglog([10.0, 100.0], [0.0, 7.0]) is None
        fit = fit_loglog([10.0, 100.0, 1000.0], [0.0, 4.0, 40.0])
        assert fit["slope"] == pytest.approx(1.0)


# ---------------------------------------------------------------------------
# expectation mode


class TestExpectationMode:
    def test_records_and_outputs(self, tmp_path):
        cfg = edge_config(replicates=10)
        result = run_experiment(cfg)
        assert isinstance(result, ExperimentResult)
        assert len(result.records) == 2
        for rec in result.records:
            assert rec["count_replicates"] == 10
            assert len(rec["counts"]) == 10
            assert all(isinstance(c, int) for c in rec["counts"])
            assert rec["theory_value"] > 0
            assert rec["ratio"] == pytest.approx(
                rec["mc_mean"] / rec["theory_value"])
            assert rec["std_error"] >= 0
        assert result.fitted_exponent is not None
        assert result.clt is None
        assert result.samples_csv(tmp_path / "never.csv") is None

        out = result.to_json(tmp_path / "run.json")
        doc = json.loads(out.read_text())
        assert doc["config"]["mode"] == "expectation"
        assert doc["provenance"]["config_hash"] == cfg.config_hash()
        assert doc["provenance"]["master_seed"] == 7
        assert "library_version" in doc["provenance"]

        csv_path = result.records_csv(tmp_path / "run.csv")
        with csv_path.open() as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert float(rows[0]["mc_mean"]) == result.records[0]["mc_mean"]

    def test_bitwise_reproducible(self):
        a = run_experiment(edge_config(replicates=6))
        b = run_experiment(edge_config(replicates=6))
        assert [r["counts"] for r in a.records] == [r["counts"] for r in b.records]
        assert a.provenance["config_hash"] == b.provenance["config_hash"]

    def test_seed_changes_counts(self):
        a = run_experiment(edge_config(replicates=6, seed=1))
        b = run_experiment(edge_config(replicates=6, seed=2))
        assert [r["counts"] for r in a.records] != [r["counts"] for r in b.records]

    def test_annulus_restriction_lowers_counts(self):
        wide = run_experiment(edge_config(replicates=6, gamma=1.0))
        narrow = run_experiment(edge_config(replicates=6, gamma=0.3))
        assert narrow.records[0]["mc_mean"] < wide.records[0]["mc_mean"]

    def test_mode_runner_mismatch(self):
        from hrgg.experiments import run_clt_experiment
        with pytest.raises(ValueError):
            run_clt_experiment(edge_config(mode="expectation"))


# ---------------------------------------------------------------------------
# variance mode


def test_variance_mode_records():
    cfg = edge_config(mode="variance", replicates=25, n_grid=(100.0, 300.0))
    result = run_experiment(cfg)
    for rec in result.records:
        orders = rec["variance_orders"]
        assert set(orders) == {"overlap_term", "poisson_term",
                               "exact_order_pair"}
        theory = max(orders["exact_order_pair"])
        assert rec["ratio"] == pytest.approx(rec["mc_variance"] / theory)
    assert result.fitted_exponent is not None


# ---------------------------------------------------------------------------
# clt mode


class TestCltMode:
    def test_standardized_payload(self, tmp_path):
        cfg = edge_config(mode="clt", replicates=40, n_grid=(200.0,))
        result = run_experiment(cfg)
        samples = np.asarray(result.clt["standardized_samples"])
        assert len(samples) == 40
        assert samples.mean() == pytest.approx(0.0, abs=1e-12)
        assert samples.std(ddof=1) == pytest.approx(1.0, rel=1e-12)
        assert 0.0 < result.clt["ks_statistic"] < 1.0
        assert result.clt["n"] == 200.0
        assert result.clt["ks_by_n"] == {
            "200.0": result.records[0]["ks_statistic"]}

        path = result.samples_csv(tmp_path / "samples.csv")
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "n,standardized_value"
        assert len(lines) == 41

    def test_warns_outside_normal_regime(self):
        params = ModelParams(d=2, alpha=0.8, zeta=1.0, n=200.0,
                             radius_rule=RadiusRule.thermodynamic(1.0),
                             gamma=0.4)
        cfg = ExperimentConfig(params=params, tree=TreeSpec.star(3),
                               replicates=20, n_grid=(200.0,), master_seed=3,
                               mode="clt")
        with pytest.warns(RegimeWarning):
            run_experiment(cfg)

    def test_degenerate_counts_raise(self):
        params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=0.5,
                             radius_rule=RadiusRule.explicit(0.5))
        cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                               replicates=5, n_grid=(0.5,), master_seed=0,
                               mode="clt")
        with pytest.raises(ValueError, match="zero variance"):
            run_experiment(cfg)


# ---------------------------------------------------------------------------
# Palm / Mecke consistency checks


def test_palm_mode_agrees_with_census():
    params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=50.0,
                         radius_rule=RadiusRule.thermodynamic(1.0), gamma=0.4)
    cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                           replicates=400, n_grid=(50.0,), master_seed=11,
                           mode="palm")
    rec = run_experiment(cfg).records[0]
    assert rec["rhs_std_error"] > 0
    assert abs(rec["z_distance"]) < 4.0


def test_palm_second_moment_decomposition():
    params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=30.0,
                         radius_rule=RadiusRule.thermodynamic(1.0), gamma=0.4)
    out = palm_second_moment(params, TreeSpec.path(2), replicates=250,
                             master_seed=5, iid_draws=30_000)
    assert set(out["per_overlap"]) == {2, 3, 4}
    # ordered-pair patterns on a union of m points: 4, 24, 24
    assert out["per_overlap"][2]["patterns"] == 4
    assert out["per_overlap"][3]["patterns"] == 24
    assert out["per_overlap"][4]["patterns"] == 24
    assert out["palm_second_moment"] > 0
    assert abs(out["z_distance"]) < 4.0


# ---------------------------------------------------------------------------
# stein mode


class TestSteinMode:
    def test_edge_tree_bound_structure(self):
        cfg = edge_config(mode="stein", replicates=50, n_grid=(300.0,),
                          gamma=0.4)
        rec = run_experiment(cfg).records[0]
        info = rec["stein"]
        assert info["lambda_total"] > 0
        assert info["c2"] == 32.0
        assert min(info["c1"], info["c3"]) > 0
        assert min(info["q_integrals"]) > 0
        assert info["kolmogorov"] >= info["wasserstein"] > 0
        assert info["kolmogorov"] >= rec["ks_statistic"]

    def test_wasserstein_bound_decreases_with_n(self):
        cfg = edge_config(mode="stein", replicates=60, n_grid=(300.0, 3000.0),
                          gamma=0.4, seed=2)
        records = run_experiment(cfg).records
        w = [r["stein"]["wasserstein"] for r in records]
        assert w[1] < w[0]

    def test_empty_clouds_skip_with_warning(self):
        params = ModelParams(d=2, alpha=2.0, zeta=1.0, n=0.2,
                             radius_rule=RadiusRule.explicit(0.4))
        cfg = ExperimentConfig(params=params, tree=TreeSpec.path(2),
                               replicates=4, n_grid=(0.2,), master_seed=0,
                               mode="stein")
        with pytest.warns(RuntimeWarning, match="degenerate"):
            rec = run_experiment(cfg).records[0]
        assert rec["stein"] is None


# ---------------------------------------------------------------------------
# euclidean baseline


def test_euclidean_baseline_thresholds():
    dense = run_experiment(edge_config(mode="euclid-baseline", replicates=5,
                                       n_grid=(50.0, 100.0)))
    for rec in dense.records:
        assert rec["threshold"] == 1.0
        assert rec["theory_value"] is None
    thermo = run_experiment(edge_config(mode="euclid-baseline", replicates=5,
                                        n_grid=(64.0,),
                                        euclid_regime="thermodynamic"))
    assert thermo.records[0]["threshold"] == pytest.approx(64.0 ** -0.5)
    assert dense.fitted_exponent is not None
