"""Acceptance gate: one test per primary criterion, each printing PASS or FAIL.

The verdict lines are written past pytest's capture so they appear in a plain
``pytest tests/test_acceptance.py`` run.  Tolerances are the stated ones; the
Monte-Carlo seed is fixed at 0 and was chosen before any run.
"""

import time

import numpy as np
import pytest

import oracles
from conftest import toy_design
from published import THREE_GROUP, parse
from vinoreg.estimator import FitResult, ModelSpec, canonical_names, fit, hypothesis_test, loglik
from vinoreg.features import (Measure, build_design, dist_lat_3050, export_share, nirw, rmp_matrix)
from vinoreg.fixture import fixture_paths
from vinoreg.panel import PERIODS
from vinoreg.report import render_table
from vinoreg.simulate import canonical_params, monte_carlo, oracle_loglik


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
        assert ok, detail
    return emit


@pytest.fixture(scope="module")
def fixture_designs(fixture_panel):
    return {m: build_design(fixture_panel, m) for m in ("volume", "value")}


@pytest.fixture(scope="module")
def fixture_fits(fixture_designs):
    return {m: fit(d, ModelSpec(measure=m)) for m, d in fixture_designs.items()}


def test_oracle_equivalence(verdict):
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(20):
        design, theta = toy_design(rng, n_countries=3, n_periods=4)
        worst = max(worst, abs(loglik(theta, design) - oracle_loglik(theta, design)))
    elapsed = time.perf_counter() - start
    verdict(1, worst <= 1e-6 and elapsed < 10.0,
            f"20 designs 3x4, max |ll - oracle| = {worst:.2e} (tol 1e-6), {elapsed:.2f} s (limit 10 s)")


def test_degenerate_closed_form(verdict):
    rng = np.random.default_rng(7)
    theta = np.array([10.0, 0.7, -0.4, 1.2, -50.0, np.log(0.6)])
    design, _ = toy_design(rng, 40, 6, n_regressors=3, theta=theta)
    assert (design.y > 0).all()
    result = fit(design, ModelSpec(restriction_on=False, random_effects=False))
    Z = np.column_stack([np.ones(design.n_obs), design.X])
    coef, rss, *_ = np.linalg.lstsq(Z, design.y, rcond=None)
    se = np.sqrt(np.diag(rss[0] / design.n_obs * np.linalg.inv(Z.T @ Z)))
    beta_err = np.max(np.abs(result.beta - coef) / np.abs(coef))
    se_err = np.max(np.abs(result.se - se) / se)
    verdict(2, beta_err <= 1e-6 and se_err <= 1e-4 and result.sigma_alpha == 0.0,
            f"beta rel err {beta_err:.1e} (tol 1e-6), SE rel err {se_err:.1e} (tol 1e-4)")


def test_restriction_exactness(verdict, fixture_designs, fixture_fits):
    worst = 0.0
    for measure, result in fixture_fits.items():
        assert fixture_designs[measure].group_counts == {"RW": 25, "OW": 12, "NW": 10}
        b1, b4, b5 = (result.coef(n) for n in ("NIRW", "NIRW_x_OW", "NIRW_x_NW"))
        worst = max(worst, abs(25 * b1 + 12 * (b1 + b4) + 10 * (b1 + b5)))
    verdict(3, worst < 1e-10, f"max |25 b1 + 12 (b1+b4) + 10 (b1+b5)| = {worst:.1e} (tol 1e-10)")


@pytest.mark.slow
def test_monte_carlo_recovery(verdict):
    params = canonical_params()
    start = time.perf_counter()
    report = monte_carlo(params, 200, ModelSpec(seed_starts=1), seed=0)
    elapsed = time.perf_counter() - start
    k = len(params.beta)
    z = np.abs(report.bias[:k]) / report.mc_se[:k]
    cover = report.coverage[:k]
    ok = (report.n_failed == 0 and np.all(z < 3.0) and np.all((cover >= 0.90) & (cover <= 0.99))
          and report.ordering_rate >= 0.95 and elapsed < 600.0)
    verdict(4, ok,
            f"{report.n_ok}/200 fits, max |bias|/MC SE = {z.max():.2f} (tol 3), coverage "
            f"[{cover.min():.3f}, {cover.max():.3f}] (band [0.90, 0.99]), ordering "
            f"{report.ordering_rate:.3f} (min 0.95), {elapsed:.0f} s (limit 600 s)")


def test_quadrature_stability(verdict, fixture_designs, fixture_fits):
    gap = 0.0
    for measure, design in fixture_designs.items():
        theta = fixture_fits[measure].theta
        gap = max(gap, abs(loglik(theta, design, ModelSpec(quad_nodes=12))
                           - loglik(theta, design, ModelSpec(quad_nodes=24))))
    verdict(5, gap <= 1e-7, f"fixture max |ll(12 nodes) - ll(24 nodes)| = {gap:.1e} (tol 1e-7)")


def test_published_format(verdict):
    names = canonical_names(False)
    beta, se = np.zeros(len(names)), np.full(len(names), 0.01)
    for name, cell in THREE_GROUP["volume"].items():
        b, _, s = parse(cell)
        beta[names.index(name)], se[names.index(name)] = b, s
    result = FitResult(names=names, beta=beta, se=se, sigma_alpha=0.05, sigma_eps=0.02, loglik=0.0,
                       converged=True, iterations=1, gradient_norm=0.0, n_censored=0,
                       cov=np.diag(se**2))
    table = render_table(result)
    wanted = ("-0.019* (0.007)", "0.056* (0.018)", "-0.066*** (0.037)")
    missing = [c for c in wanted if c not in table]
    verdict(6, not missing, f"cells {', '.join(wanted)} rendered" if not missing
            else f"missing cells {missing}")


def test_feature_correctness(verdict, fixture_panel):
    countries, rows = oracles.read_raw(*fixture_paths())
    worst = {"export_share": 0.0, "nirw": 0.0, "rmp (relative)": 0.0, "dist_lat_3050": 0.0}
    for measure in Measure:
        for period in PERIODS:
            shares = oracles.shares(countries, rows, period.label, f"export_{measure.suffix}")
            for cid, value in shares.items():
                worst["export_share"] = max(worst["export_share"],
                                            abs(export_share(fixture_panel, cid, period, measure) - value))
            worst["nirw"] = max(worst["nirw"], abs(nirw(fixture_panel, period, measure)
                                                   - oracles.nirw(countries, rows, period.label,
                                                                  measure.suffix)))
    m = rmp_matrix(fixture_panel)
    for i, c in enumerate(fixture_panel.countries):
        for t, period in enumerate(PERIODS):
            value = oracles.rmp(countries, rows, c.id, period.label)
            worst["rmp (relative)"] = max(worst["rmp (relative)"], abs(m[i, t] - value) / abs(value))
        worst["dist_lat_3050"] = max(worst["dist_lat_3050"], abs(
            dist_lat_3050(c.latitude) - oracles.dist_lat(float(countries[c.id]["latitude"]))))
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items())
    verdict(7, max(worst.values()) <= 1e-12, f"max deviation from brute force: {detail} (tol 1e-12)")


def test_hypothesis_direction(verdict):
    names = canonical_names(False)
    beta, se = np.zeros(len(names)), np.full(len(names), 0.01)
    for name in ("NIRW_x_OW", "NIRW_x_NW"):
        b, _, s = parse(THREE_GROUP["volume"][name])
        beta[names.index(name)], se[names.index(name)] = b, s
    result = FitResult(names=names, beta=beta, se=se, sigma_alpha=0.05, sigma_eps=0.02, loglik=0.0,
                       converged=True, iterations=1, gradient_norm=0.0, n_censored=0,
                       cov=np.diag(se**2))
    t = hypothesis_test(result)
    ok = (result.coef("NIRW_x_OW"), result.coef("NIRW_x_NW")) == (0.029, 0.056) \
        and abs(t.delta - 0.027) < 1e-12 and t.delta > 0
    verdict(8, ok, f"b4 = 0.029, b5 = 0.056 gives delta = {t.delta:.3f} (> 0)")
