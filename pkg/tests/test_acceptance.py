"""Acceptance gate: one recorded pass/fail line per criterion."""

import itertools
import math

import numpy as np
import pytest

from ahdacs.cs import (
    MeasurementPlan,
    cs_gate,
    dct_basis,
    derive_seed,
    measure,
    measurement_count,
    omp,
    recover,
    sensing_matrix,
)
from ahdacs.experiment import ExperimentConfig, run_experiment
from ahdacs.metrics import disabled_stats, mse_per_level, root_mse
from ahdacs.protocols import Status, run_ahdacs, run_hdacs
from ahdacs.transform import dct_forward, dct_inverse
from conftest import make_network
from test_topology import check_tree_invariants

SIZES = (300, 400, 500, 600, 700, 800)


def bumps_runs(count=60):
    """(nodes, tree, ahdacs trace, hdacs trace) over sizes 300-800."""
    for k in range(count):
        size = SIZES[k % len(SIZES)]
        nodes, tree = make_network("bumps", size, seed=1000 + k)
        yield nodes, tree, run_ahdacs(tree, nodes, seed=k), run_hdacs(tree, nodes, seed=k)


@pytest.fixture(scope="module")
def bumps():
    return list(bumps_runs())


def test_criterion_1_prop1(criterion, bumps):
    checks = violations = 0
    for _, _, _, h in bumps:
        rep = h.sparsity
        for i in range(1, h.T):
            if rep.K_T > rep.level_thresholds[i]:
                checks += 1
                violations += sum(d.enabled for lvl in h.decisions[:i] for d in lvl if d.eligible)
    criterion(1, violations == 0 and checks > 0,
              f"{len(bumps)} bumps runs, {checks} premise levels, {violations} violations")


def brute_zeta(trace, i):
    flags = [d.status is Status.DISABLED for lvl in trace.decisions[:i] for d in lvl if d.N >= 4]
    return sum(flags) / len(flags)


def test_criterion_2_prop2(criterion, bumps):
    premises = bad = 0
    for _, _, a, h in bumps:
        rep = h.sparsity
        for i in range(1, h.T):
            za, zh = disabled_stats(a, i), disabled_stats(h, i)
            if za.zeta != brute_zeta(a, i) or zh.zeta != brute_zeta(h, i):
                bad += 1
            if rep.K_T <= rep.level_thresholds[i]:
                continue
            local_ok = any(
                d.eligible and cs_gate(d.local_K, d.N) for lvl in a.decisions[:i] for d in lvl
            )
            if local_ok:
                premises += 1
                bad += not (za.zeta < 1.0 and zh.zeta == 1.0)
    criterion(2, bad == 0 and premises > 0,
              f"{premises} premise cases, {bad} failures (zeta strict + brute-force match)")


def test_criterion_3_recovery(criterion):
    rng = np.random.default_rng(3)
    good = 0
    for trial in range(200):
        K = int(rng.integers(1, 9))
        spectrum = np.zeros(128)
        spectrum[rng.choice(128, K, replace=False)] = rng.standard_normal(K) + np.sign(rng.standard_normal(K))
        x = dct_basis(128) @ spectrum
        plan = MeasurementPlan(K, 128, measurement_count(K, 128), derive_seed(3, trial))
        x_hat = recover(measure(sensing_matrix(plan.M, 128, plan.seed), x), plan)
        good += np.linalg.norm(x_hat - x) / np.linalg.norm(x) < 1e-5

    compared = disagree = 0
    for trial in range(150):
        N = int(rng.integers(4, 13))
        K = int(rng.integers(1, max(2, N // 3) + 1))
        M = min(N, measurement_count(K, N))
        spectrum = np.zeros(N)
        spectrum[rng.choice(N, K, replace=False)] = rng.standard_normal(K) + np.sign(rng.standard_normal(K))
        A = sensing_matrix(M, N, derive_seed(4, trial)) @ dct_basis(N)
        y = A @ spectrum
        res = omp(A, y, K)
        if res.residual_norm >= 1e-8:
            continue
        compared += 1
        best, best_r = None, np.inf
        for sup in itertools.combinations(range(N), K):
            sol = np.linalg.lstsq(A[:, sup], y, rcond=None)[0]
            r = np.linalg.norm(y - A[:, sup] @ sol)
            if r < best_r - 1e-12:
                best_r, best = r, np.zeros(N)
                best[list(sup)] = sol
        disagree += not np.allclose(res.coef, best, atol=1e-6)
    criterion(3, good >= 190 and disagree == 0 and compared > 0,
              f"{good}/200 recovered below 1e-5; exhaustive oracle {compared} compared, {disagree} disagree")


@pytest.fixture(scope="module")
def energy(tmp_path_factory):
    out = {}
    for kind in ("piecewise", "gaussian-bumps"):
        cfg = ExperimentConfig(field=kind, nodes=list(SIZES), reps=5, seed=2024,
                               out=str(tmp_path_factory.mktemp(kind)))
        out[kind] = [r["ratio"] for r in run_experiment(cfg)["energy_ratio"]]
    return out


def test_criterion_4_piecewise_energy(criterion, energy):
    ratios = energy["piecewise"]
    savings = 1.0 - float(np.mean(ratios))
    ok = all(r <= 1.0 for r in ratios) and 0.15 <= savings <= 0.40 and len(ratios) == 6
    criterion(4, ok, f"ratios {[round(r, 3) for r in ratios]}, mean savings {savings:.1%}")


def test_criterion_5_bumps_energy(criterion, energy):
    ratios = energy["gaussian-bumps"]
    mean = float(np.mean(ratios))
    ok = all(0.80 <= r <= 1.00 for r in ratios) and 0.85 <= mean <= 0.97 and len(ratios) == 6
    criterion(5, ok, f"ratios {[round(r, 3) for r in ratios]}, mean {mean:.3f}")


def test_criterion_6_mse(criterion):
    nodes, tree = make_network("piecewise", 400, seed=0)
    head = root_mse(run_ahdacs(tree, nodes, fraction=0.01), nodes)
    wins = pairs = 0
    for seed in range(40):
        size = SIZES[seed % len(SIZES)]
        pn, pt = make_network("piecewise", size, seed=seed)
        bn, bt = make_network("bumps", size, seed=seed)
        wins += root_mse(run_ahdacs(pt, pn, seed=seed), pn) < root_mse(run_ahdacs(bt, bn, seed=seed), bn)
        pairs += 1
    raw = run_hdacs(tree, nodes, K_T=len(nodes))
    raw_ok = raw.counts()[0] == 0 and np.all(mse_per_level(raw, nodes) == 0.0)
    ok = head < 0.1 and wins >= 0.8 * pairs and raw_ok
    criterion(6, ok, f"piecewise@400 root MSE {head:.4g}; piecewise<bumps {wins}/{pairs}; all-raw MSE zero={raw_ok}")


def test_criterion_7_diagonal(criterion):
    hits = runs = 0
    for seed in range(30):
        nodes, tree = make_network("piecewise", SIZES[seed % len(SIZES)], seed=500 + seed)
        a = run_ahdacs(tree, nodes, seed=seed)

        def dist(d):
            cx, cy = tree.cluster(1, d.index).centroid
            return abs(cx - cy) / math.sqrt(2)

        dis = [dist(d) for d in a.level(1) if d.eligible and not d.enabled]
        en = [dist(d) for d in a.level(1) if d.enabled]
        if dis and en:
            runs += 1
            hits += np.median(dis) < np.median(en)
    criterion(7, runs >= 20 and hits >= 0.8 * runs, f"disabled closer to x=y in {hits}/{runs} runs")


def test_criterion_8_invariants(criterion, tmp_path):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(200):
        x = rng.standard_normal(int(rng.integers(1, 600))) * 10 ** rng.uniform(-3, 3)
        c = dct_forward(x)
        n = np.linalg.norm(x)
        worst = max(worst, np.linalg.norm(dct_inverse(c) - x) / n, abs(np.linalg.norm(c) - n) / n)

    audit_fail = trees = 0
    for seed in range(12):
        kind = ("piecewise", "bumps")[seed % 2]
        nodes, tree = make_network(kind, SIZES[seed % len(SIZES)], seed=seed)
        check_tree_invariants(tree, nodes)
        trees += 1
        for trace in (run_ahdacs(tree, nodes, seed=seed), run_hdacs(tree, nodes, seed=seed)):
            for d in trace.iter_decisions():
                if d.status is Status.ROOT:
                    continue
                audit_fail += d.enabled != cs_gate(d.K, d.N)
                if d.enabled and d.K > 0:
                    audit_fail += d.M != math.ceil(d.K * math.log2(d.N))

    cfg = dict(field="piecewise", nodes=[300, 500], reps=2, seed=9)
    run_experiment(ExperimentConfig(**cfg, out=str(tmp_path / "a")))
    run_experiment(ExperimentConfig(**cfg, out=str(tmp_path / "b"), jobs=2))
    names = ("runs.csv", "levels.csv", "census.csv", "nodes.csv", "summary.json")
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes() for f in names)

    ok = worst <= 1e-9 and audit_fail == 0 and same
    criterion(8, ok, f"DCT worst rel err {worst:.2e}; audit failures {audit_fail}; "
                     f"{trees} trees checked; byte-identical reruns={same}")
