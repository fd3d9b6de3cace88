"""Acceptance gate. Each test prints one PASS/FAIL/SKIP line for its criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline; they
are also echoed to the terminal when output capture is on.
"""

import json
import math
import time
from datetime import date

import numpy as np
import pytest
from scipy import stats

from arbound import cli
from arbound.armodel import Design, build_design
from arbound.complexity import BlockPlan, empirical_gaussian_complexity, monte_carlo_complexity
from arbound.mixing import (
    GaussianARSurrogate, beta_ar1, fit_surrogate, isotonic_nonincreasing, mixing_profile,
    tv_gaussians_1d,
)
from arbound.riskbound import InfeasiblePlanError, srm_select
from arbound.simgen import SimSpec, coverage_experiment, simulate_path, truth_profile
from arbound.stability import companion_spectral_radius, hull_vertices, is_stationary
from arbound.timeseries import RawSeries, load_csv, log_growth, summary

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report_line(capsys):
    def emit(number, ok, detail, seconds):
        status = "PASS" if ok else "FAIL"
        with capsys.disabled():
            print(f"\nACCEPTANCE {number} {status} ({seconds:.2f}s): {detail}")
    return emit


def _deflate(coeffs, root):
    """Exact synthetic division of an integer polynomial by (z - root)."""
    out, acc = [], 0
    for c in coeffs:
        acc = acc * root + c
        out.append(acc)
    return out[:-1], out[-1]


def exact_unit_roots(v):
    """Roots of z^p - v_1 z^(p-1) - ... - v_p found by exact deflation at +-1.

    Returns the list of roots found; it has length p only if every root is +-1.
    """
    coeffs = [1] + [-int(c) for c in v]
    assert all(float(c) == int(c) for c in v)
    roots = []
    for r in (1, -1):
        while len(coeffs) > 1:
            quotient, rem = _deflate(coeffs, r)
            if rem != 0:
                break
            coeffs = quotient
            roots.append(r)
    return roots


def test_criterion_1_polytope(report_line):
    t0 = time.perf_counter()
    counts_ok, worst_exact, numeric = True, 0.0, 0.0
    for p in range(1, 13):
        poly = hull_vertices(p)
        counts_ok &= poly.vertices.shape == (p + 1, p)
        for v in poly.vertices:
            roots = exact_unit_roots(v)
            counts_ok &= len(roots) == p
            worst_exact = max([worst_exact] + [abs(abs(r) - 1) for r in roots])
            numeric = max(numeric, float(np.max(np.abs(np.abs(
                np.roots(np.concatenate([[1.0], -v]))) - 1.0))))
    p2 = {tuple(v) for v in hull_vertices(2).vertices.tolist()}
    p2_ok = p2 == {(2.0, -1.0), (0.0, 1.0), (-2.0, -1.0)}
    seconds = time.perf_counter() - t0
    ok = counts_ok and worst_exact < 1e-9 and p2_ok and seconds < 1.0
    report_line(1, ok, f"p=1..12 give p+1 vertices with all p roots at +-1 (exact deflation): "
                f"{counts_ok}, max ||root|-1|={worst_exact:.1e}, p=2 set exact: {p2_ok}; "
                f"np.roots on these repeated roots is off by {numeric:.1e} (informational)",
                seconds)
    assert ok


def random_coefficients(p, count, rng):
    """Half drawn uniformly from the coefficient box, half from random root sets."""
    from math import comb
    half = count // 2
    bounds = np.array([comb(p, k) for k in range(1, p + 1)], dtype=float)
    box = rng.uniform(-bounds, bounds, size=(half, p))
    rooted = np.empty((count - half, p))
    for i in range(count - half):
        n_pairs = rng.integers(0, p // 2 + 1)
        radius = rng.uniform(0.5, 1.5, size=p)
        angles = rng.uniform(0, np.pi, size=n_pairs)
        roots = list(radius[:n_pairs] * np.exp(1j * angles))
        roots += [np.conj(r) for r in roots]
        roots += list(radius[2 * n_pairs:] * rng.choice([-1.0, 1.0], size=p - 2 * n_pairs))
        rooted[i] = -np.real(np.poly(roots))[1:]
    return np.vstack([box, rooted])


def test_criterion_2_jury_vs_eigen(report_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    disagreements, compared, excluded = 0, 0, 0
    for p in range(1, 7):
        for phi in random_coefficients(p, 10_000, rng):
            rho = companion_spectral_radius(phi)
            if abs(rho - 1.0) < 1e-7:
                excluded += 1
                continue
            compared += 1
            disagreements += is_stationary(phi) != (rho < 1.0)
    seconds = time.perf_counter() - t0
    ok = disagreements == 0 and seconds < 30
    report_line(2, ok, f"{disagreements} disagreements over {compared} vectors "
                f"({excluded} in the 1e-7 band excluded)", seconds)
    assert ok


def test_criterion_3_slepian(report_line):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    passed, worst = 0, -math.inf
    for k in range(100):
        p = 2 + k % 5
        phi = random_coefficients(p, 2, rng)[1]
        while not is_stationary(phi, 0.05):
            phi = random_coefficients(p, 2, rng)[1]
        x = simulate_path(phi, 1.0, 64 + p, 200, rng)
        design = build_design(x, p)
        plan = BlockPlan(n=2 * 64, m=1, mu=64, indices=np.arange(1, 65))
        poly = hull_vertices(p)
        mc, se = monte_carlo_complexity(design, plan, poly, 10_000, seed=k, return_stderr=True)
        bound = empirical_gaussian_complexity(design, plan, poly).value
        passed += mc <= bound + 3 * se
        worst = max(worst, (mc - bound) / se if se > 0 else -math.inf)
    seconds = time.perf_counter() - t0
    ok = passed == 100 and seconds < 120
    report_line(3, ok, f"{passed}/100 designs satisfy MC <= Slepian + 3 SE "
                f"(largest (MC - Slepian)/SE = {worst:.1f})", seconds)
    assert ok


def beta_ar1_oracle(phi, m, samples, seed):
    """TV(P^m(x, .), pi) averaged over x ~ pi, written as E_{y ~ pi}[(1 - p_m(y|x)/pi(y))+]."""
    rng = np.random.default_rng(seed)
    v_inf = 1.0 / (1.0 - phi ** 2)
    v_m = (1.0 - phi ** (2 * m)) / (1.0 - phi ** 2)
    x = rng.normal(0.0, math.sqrt(v_inf), samples)
    y = rng.normal(0.0, math.sqrt(v_inf), samples)
    ratio = np.exp(stats.norm.logpdf(y, phi ** m * x, math.sqrt(v_m))
                   - stats.norm.logpdf(y, 0.0, math.sqrt(v_inf)))
    vals = np.maximum(0.0, 1.0 - ratio)
    return float(vals.mean()), float(vals.std() / math.sqrt(samples))


def test_criterion_4_mixing(report_line):
    t0 = time.perf_counter()
    got = beta_ar1(GaussianARSurrogate([0.5], 1.0), 3)
    oracle, se = beta_ar1_oracle(0.5, 3, 1_000_000, seed=4)
    beta_ok = abs(got - oracle) < 2e-3
    tv = tv_gaussians_1d(0.0, 1.0, 1.0, 1.0)
    tv_ok = abs(tv - (2 * stats.norm.cdf(0.5) - 1)) < 1e-10
    worst_raw, mono_ok = 0.0, True
    for phi in (0.1, 0.3, 0.5, 0.7, 0.9, 0.95, -0.6):
        raw = {m: beta_ar1(GaussianARSurrogate([phi]), m) for m in range(1, 61)}
        seq = [raw[m] for m in sorted(raw)]
        worst_raw = max(worst_raw, max(b - a for a, b in zip(seq, seq[1:])))
        iso = isotonic_nonincreasing(raw)
        iso_seq = [iso[m] for m in sorted(iso)]
        mono_ok &= all(b <= a for a, b in zip(iso_seq, iso_seq[1:]))
    mc_prof = mixing_profile(GaussianARSurrogate([0.5, -0.3]), range(1, 11), samples=20_000,
                             seed=4)
    mc_seq = [mc_prof.betas[m] for m in mc_prof.lags]
    mono_ok &= all(b <= a for a, b in zip(mc_seq, mc_seq[1:]))
    seconds = time.perf_counter() - t0
    ok = beta_ok and tv_ok and mono_ok and worst_raw <= 1e-6 and seconds < 60
    report_line(4, ok, f"beta_ar1(0.5, m=3)={got:.6f} vs oracle {oracle:.6f} (se {se:.1e}); "
                f"tv error={abs(tv - (2 * stats.norm.cdf(0.5) - 1)):.1e}; isotonic monotone: "
                f"{mono_ok}; largest raw increase={worst_raw:.1e}", seconds)
    assert ok


def test_criterion_5_coverage(report_line):
    t0 = time.perf_counter()
    spec = SimSpec([0.5, -0.3], 1.0, 2048, seed=7)
    profile = truth_profile(spec, spec.n, seed=7)
    res = coverage_experiment(spec, 2, 10.0, 0.05, 200, 512, profile=profile)
    seconds = time.perf_counter() - t0
    ok = res.skipped == 0 and res.violation_rate <= 0.05 and seconds < 600
    report_line(5, ok, f"violation rate {res.violation_rate:.3f} over {res.replicates} "
                f"replicates (skipped {res.skipped}), mean bound {res.mean_bound:.3f}, "
                f"mean holdout risk {np.mean(res.holdout_risks):.3f}", seconds)
    assert ok


DGS10_END = date(2010, 8, 31)


def test_criterion_6_dgs10(dgs10_csv, report_line):
    t0 = time.perf_counter()
    raw = load_csv(dgs10_csv, "DGS10")
    keep = [k for k, d in enumerate(raw.dates) if d <= DGS10_END]
    raw = RawSeries(tuple(raw.dates[k] for k in keep), tuple(raw.values[k] for k in keep),
                    raw.source_id)
    series = log_growth(raw)
    stats_ = summary(series)
    n_ok = series.n == 12150
    sq_ok = abs(stats_["max_squared_value"] - 0.034) <= 0.002
    detail = f"n={series.n}, max squared change={stats_['max_squared_value']:.4f}"
    bound_ok = srm_ok = aic_ok = False
    try:
        surrogate = fit_surrogate(series, 20)
        profile = mixing_profile(surrogate, [7], seed=0)
        res = srm_select(series, 50, 0.05, 0.05, profile, block=(7, 867))
        ar1 = res.per_order[0]
        bound_ok = 0.0063 <= ar1.bound_total <= 0.0095
        srm_ok = res.srm_choice == 1
        aic_ok = 30 <= res.aic_choice <= 42
        detail += (f", AR(1) bound={ar1.bound_total:.5f}, srm_choice={res.srm_choice}, "
                   f"aic_choice={res.aic_choice}")
    except InfeasiblePlanError as exc:
        detail += f", plan (7, 867) infeasible under the order-20 surrogate: {exc}"
    seconds = time.perf_counter() - t0
    ok = n_ok and sq_ok and bound_ok and srm_ok and aic_ok and seconds < 300
    report_line(6, ok, detail, seconds)
    assert ok


def test_criterion_6_marker_when_skipped(capsys):
    from conftest import dgs10_path

    path = dgs10_path()
    if path is not None and path.exists():
        pytest.skip("DGS10 data present; criterion 6 runs above")
    with capsys.disabled():
        print("\nACCEPTANCE 6 SKIP: FRED DGS10 CSV not supplied; treasury replication "
              "not evaluated")
    pytest.skip("criterion 6 needs the FRED DGS10 CSV")


def _select_args(levels, out, workers):
    # order-2 surrogate keeps a plan feasible; the report's sensitivity block
    # still runs the higher-order Monte Carlo estimates
    return ["select", "--input", str(levels), "--p-max", "10", "--m-max", "30",
            "--surrogate-order", "2",
            "--mc-samples", "20000", "--seed", "3", "--out-dir", str(out),
            "--workers", str(workers)]


def test_criterion_7_determinism(tmp_path, report_line):
    t0 = time.perf_counter()
    levels = [tmp_path / f"levels{k}.csv" for k in range(2)]
    for path in levels:
        assert cli.main(["simulate", "--phi", "0.3,-0.1", "--n", "3000", "--seed", "5",
                         "--out", str(path)]) == 0
    sim_same = levels[0].read_bytes() == levels[1].read_bytes()
    outs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
        assert cli.main(_select_args(levels[0], tmp_path / tag, workers)) == 0
        outs.append((tmp_path / tag / "report.json").read_bytes())
    covs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 4)):
        out = tmp_path / f"cov_{tag}.json"
        assert cli.main(["coverage", "--replicates", "20", "--n", "1024", "--holdout", "256",
                         "--mc-samples", "20000", "--seed", "3", "--workers", str(workers),
                         "--out", str(out)]) == 0
        covs.append(out.read_bytes())
    select_same = outs[0] == outs[1] == outs[2]
    cov_same = covs[0] == covs[1] == covs[2]
    json.loads(outs[0])
    seconds = time.perf_counter() - t0
    ok = sim_same and select_same and cov_same
    report_line(7, ok, f"simulate identical: {sim_same}; select report.json identical across "
                f"runs and workers 1/4: {select_same}; coverage JSON identical: {cov_same}",
                seconds)
    assert ok
