"""Acceptance suite: eight end-to-end checks of the package's core claims.

Each criterion prints one PASS line with its key numbers; run this file
directly for the full printed report, or under pytest as ordinary tests.
"""

import json
import math
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from graphrd import (
    ErParams,
    InhomErParams,
    RngSpec,
    SbmParams,
    binary_entropy,
    blahut_arimoto,
    conditional_sbm_oracle,
    er_kkt_certificate,
    er_rdf,
    inhomogeneous_er_rdf,
    joint_graph_rdf_oracle,
    monte_carlo_distortion,
    pair_count,
    quadratic_form,
    sbm_conditional_rdf,
    sbm_distortion_boundary,
    sbm_kkt_certificate,
    solve_er_waterfill,
    solve_sbm_waterfill,
)
from graphrd.cli import main as cli_main
from graphrd.oracle import DiscreteRdProblem

REF_CFG = {
    "model": "sbm",
    "n": 100,
    "p": [0.4, 0.3, 0.3],
    "W": [[0.5, 0.2, 0.1], [0.2, 0.5, 0.1], [0.1, 0.1, 0.4]],
}
REF_PARAMS = SbmParams(n=REF_CFG["n"], p=REF_CFG["p"], W=REF_CFG["W"])
RATE_AT_ZERO = 3502.7509056278570069
ZERO_RATE_BOUNDARY = 1242.45


def _run_cli(argv):
    code = cli_main(argv)
    assert code == 0, f"cli {argv} exited {code}"


def test_criterion_1_curve_reproduction():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = Path(tmp) / "cfg.json"
        out = Path(tmp) / "curve.csv"
        cfg.write_text(json.dumps(REF_CFG))
        start = time.perf_counter()
        _run_cli(["curve", "--config", str(cfg), "--out", str(out)])
        elapsed = time.perf_counter() - start
        lines = out.read_text().strip().split("\n")
    assert lines[0] == "D,D_per_edge,rate_bits,mu"
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    assert len(rows) == 200
    budgets = [row[0] for row in rows]
    rates = [row[2] for row in rows]
    assert budgets[0] == 0.0
    assert abs(rates[0] - RATE_AT_ZERO) <= 1e-6 * RATE_AT_ZERO
    assert abs(budgets[-1] - ZERO_RATE_BOUNDARY) <= 1e-6 * ZERO_RATE_BOUNDARY
    assert rates[-1] <= 1e-9
    assert all(b <= a + 1e-9 for a, b in zip(rates, rates[1:]))
    # evenly spaced grid, so convexity is a midpoint check
    for i in range(1, len(rates) - 1):
        assert rates[i] <= 0.5 * (rates[i - 1] + rates[i + 1]) + 1e-9
    assert elapsed < 1.0, f"curve took {elapsed:.3f} s"
    print(
        f"PASS: criterion 1, 200-point curve from {rates[0]:.2f} bits to zero at "
        f"D={budgets[-1]:.2f}, nonincreasing and convex, {elapsed * 1000:.0f} ms"
    )


def test_criterion_2_binary_oracle_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for p in (0.05, 0.1, 0.2, 0.3, 0.4, 0.5):
        problem = DiscreteRdProblem(
            source_probs=[1.0 - p, p], distortion=[[0.0, 1.0], [1.0, 0.0]]
        )
        cap = min(p, 1.0 - p)
        for D in cap * np.linspace(0.05, 0.95, 20):
            # slope chosen so the unconstrained optimum sits exactly at D
            res = blahut_arimoto(problem, math.log(1.0 / D - 1.0), tol=1e-12)
            want = binary_entropy(p) - binary_entropy(float(D))
            assert res.converged
            worst = max(worst, abs(res.rate_bits - want))
            assert abs(res.rate_bits - want) <= 1e-6
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"binary sweep took {elapsed:.2f} s"
    print(
        f"PASS: criterion 2, 120 binary curve points, worst |rate error| "
        f"{worst:.2e} bits <= 1e-6, {elapsed:.2f} s"
    )


def test_criterion_3_joint_oracle_additivity():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(5):
        probs = rng.uniform(0.1, 0.9, size=3)
        params = InhomErParams(n=3, edge_probs=probs)
        boundary = float(np.minimum(probs, 1.0 - probs).sum())
        for frac in rng.uniform(0.1, 0.9, size=5):
            D = float(frac) * boundary
            res = joint_graph_rdf_oracle(probs, D)
            want = inhomogeneous_er_rdf(params, D).rate_bits
            assert res.converged
            worst = max(worst, abs(res.rate_bits - want))
            assert abs(res.rate_bits - want) <= 1e-4
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0, f"joint oracle sweep took {elapsed:.2f} s"
    print(
        f"PASS: criterion 3, 25 joint-oracle points on 3-edge instances, worst "
        f"|rate gap| {worst:.2e} bits <= 1e-4, {elapsed:.2f} s"
    )


def test_criterion_4_conditional_oracle_equivalence():
    rng = np.random.default_rng(103)
    worst_rate = worst_cross = 0.0
    for _ in range(3):
        p0 = float(rng.uniform(0.25, 0.75))
        W = rng.uniform(0.1, 0.9, size=(2, 2))
        W = 0.5 * (W + W.T)
        params = SbmParams(n=3, p=[p0, 1.0 - p0], W=W)
        boundary = sbm_distortion_boundary(params)
        for frac in rng.uniform(0.1, 0.9, size=5):
            D = float(frac) * boundary
            res = conditional_sbm_oracle(params, D)
            want = sbm_conditional_rdf(params, D).rate_bits
            alloc = solve_sbm_waterfill(params, D)
            assert res.converged
            worst_rate = max(worst_rate, abs(res.rate_bits - want))
            worst_cross = max(worst_cross, float(np.abs(res.crossovers - alloc.dstar).max()))
            assert abs(res.rate_bits - want) <= 1e-4
            assert np.all(np.abs(res.crossovers - alloc.dstar) <= 1e-4)
    print(
        f"PASS: criterion 4, 15 conditional-oracle points on 3-node instances, worst "
        f"|rate gap| {worst_rate:.2e} bits and |crossover gap| {worst_cross:.2e} <= 1e-4"
    )


def _random_sbm(rng):
    n = int(rng.integers(2, 40))
    k = int(rng.integers(1, 5))
    p = rng.dirichlet(np.ones(k))
    W = rng.uniform(0.02, 0.98, size=(k, k))
    return SbmParams(n=n, p=p, W=0.5 * (W + W.T))


def test_criterion_5_kkt_certificates():
    rng = np.random.default_rng(107)
    worst_mult = 0.0
    worst_res = 0.0
    for i in range(100):
        if i % 2 == 0:
            params = _random_sbm(rng)
            D = float(rng.uniform(0.0, 1.0)) * sbm_distortion_boundary(params)
            cert = sbm_kkt_certificate(params, solve_sbm_waterfill(params, D))
        else:
            n = int(rng.integers(2, 15))
            probs = rng.uniform(0.02, 0.98, size=pair_count(n))
            params = InhomErParams(n=n, edge_probs=probs)
            boundary = float(np.minimum(probs, 1.0 - probs).sum())
            D = float(rng.uniform(0.0, 1.0)) * boundary
            cert = er_kkt_certificate(params, solve_er_waterfill(params, D))
        worst_mult = min(worst_mult, cert["min_multiplier"])
        worst_res = max(worst_res, cert["max_slackness_residual"])
        assert cert["min_multiplier"] >= -1e-10
        assert cert["max_slackness_residual"] <= 1e-10
    print(
        f"PASS: criterion 5, 100 certificates, smallest multiplier {worst_mult:.2e} "
        f">= -1e-10, largest slackness residual {worst_res:.2e} <= 1e-10"
    )


def test_criterion_6_waterfill_budget_and_monotonicity():
    rng = np.random.default_rng(109)
    worst = 0.0
    for _ in range(1000):
        params = _random_sbm(rng)
        boundary = sbm_distortion_boundary(params)
        D = float(rng.uniform(0.0, 1.0)) * boundary
        alloc = solve_sbm_waterfill(params, D)
        target = D / pair_count(params.n)
        spent = quadratic_form(params.p, alloc.dstar)
        rel = abs(spent - target) / max(target, 1e-300)
        worst = max(worst, rel if target > 0.0 else abs(spent))
        assert abs(spent - target) <= 1e-10 * max(target, 1e-300)
    for _ in range(20):
        params = _random_sbm(rng)
        grid = np.sort(rng.uniform(0.0, 1.0, size=30)) * sbm_distortion_boundary(params)
        levels = [solve_sbm_waterfill(params, D).mu for D in grid]
        assert all(b >= a for a, b in zip(levels, levels[1:]))
    print(
        f"PASS: criterion 6, 1000 budgets rebalanced within {worst:.2e} relative "
        f"<= 1e-10, water level monotone on 20 sorted grids"
    )


def test_criterion_7_achievability_simulation():
    budgets = (200.0, 495.0, 1000.0)
    worst_z = 0.0
    worst_pair_z = 0.0
    for D in budgets:
        report = monte_carlo_distortion(
            REF_PARAMS, D, trials=1000, rng=RngSpec(seed=7), pair_stats=True
        )
        z = abs(report.mean_distortion - D) / report.stderr
        worst_z = max(worst_z, z)
        assert z <= 3.0, f"mean off by {z:.2f} standard errors at D={D}"
        dstar = solve_sbm_waterfill(REF_PARAMS, D).dstar
        for l in range(3):
            for m in range(3):
                exposures = report.pair_exposures[l, m]
                d = dstar[l, m]
                sigma = math.sqrt(d * (1.0 - d) / exposures)
                pair_z = abs(report.pair_flip_rate[l, m] - d) / sigma
                worst_pair_z = max(worst_pair_z, pair_z)
                assert pair_z <= 4.0, f"pair ({l},{m}) off by {pair_z:.2f} sigma at D={D}"
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        base = dict(REF_CFG, D=495.0, trials=1000, seed=7)
        (tmp / "serial.json").write_text(json.dumps(dict(base, workers=1)))
        (tmp / "threaded.json").write_text(json.dumps(dict(base, workers=8)))
        outs = [tmp / name for name in ("a.json", "b.json", "c.json")]
        _run_cli(["simulate", "--config", str(tmp / "serial.json"), "--out", str(outs[0])])
        _run_cli(["simulate", "--config", str(tmp / "serial.json"), "--out", str(outs[1])])
        _run_cli(["simulate", "--config", str(tmp / "threaded.json"), "--out", str(outs[2])])
        blobs = [path.read_bytes() for path in outs]
    assert blobs[0] == blobs[1], "same seed, two runs: output differs"
    assert blobs[0] == blobs[2], "1 vs 8 workers: output differs"
    print(
        f"PASS: criterion 7, 1000-trial runs at D in {budgets}: worst mean z "
        f"{worst_z:.2f} <= 3, worst pair z {worst_pair_z:.2f} <= 4, byte-identical "
        f"across reruns and 1 vs 8 workers"
    )


def test_criterion_8_reduction_identities():
    worst = 0.0
    w = 0.35
    grid = np.linspace(0.0, pair_count(100) * w, 50)
    for D in grid:
        a = sbm_conditional_rdf(SbmParams(n=100, p=[1.0], W=[[w]]), D).rate_bits
        b = er_rdf(ErParams(n=100, p=w), D).rate_bits
        worst = max(worst, abs(a - b) / max(1.0, b))
        assert abs(a - b) <= 1e-12 * max(1.0, b)
    n, q = 12, 0.6
    m = pair_count(n)
    grid = np.linspace(0.0, m * min(q, 1.0 - q), 50)
    for D in grid:
        a = inhomogeneous_er_rdf(InhomErParams(n=n, edge_probs=np.full(m, q)), D).rate_bits
        b = er_rdf(ErParams(n=n, p=q), D).rate_bits
        worst = max(worst, abs(a - b) / max(1.0, b))
        assert abs(a - b) <= 1e-12 * max(1.0, b)
    print(
        f"PASS: criterion 8, both reductions pointwise equal on 50-point grids, "
        f"worst relative gap {worst:.2e} <= 1e-12"
    )


CRITERIA = [
    test_criterion_1_curve_reproduction,
    test_criterion_2_binary_oracle_equivalence,
    test_criterion_3_joint_oracle_additivity,
    test_criterion_4_conditional_oracle_equivalence,
    test_criterion_5_kkt_certificates,
    test_criterion_6_waterfill_budget_and_monotonicity,
    test_criterion_7_achievability_simulation,
    test_criterion_8_reduction_identities,
]


if __name__ == "__main__":
    failures = 0
    for check in CRITERIA:
        try:
            check()
        except AssertionError as exc:
            failures += 1
            print(f"FAIL: {check.__name__}: {exc}")
    total = len(CRITERIA)
    print(f"{total - failures}/{total} acceptance criteria passed")
    sys.exit(1 if failures else 0)
