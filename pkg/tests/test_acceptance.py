"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Ensembles shared between criteria are computed once in module-scope fixtures.
"""

import time

import numpy as np
import pytest

import helpers
from cpkit.centroid import centroid_init
from cpkit.cli import main
from cpkit.diagnostics import (rank1_critical_residual,
                               rank1_stationarity_check, swamp_report)
from cpkit.generate import GeneratorSpec, generate
from cpkit.reduced import (contraction_kernel, objective, reduced_objective,
                           reduced_objective_spectral, reduced_objective_trace)
from cpkit.solve import SolverConfig, als_sweep, decompose, random_init


def report(num, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    line = f"ACCEPTANCE {num:02d} {name}: {tag}"
    if detail and not ok:
        line += f" ({detail})"
    print(line)
    return ok


def als_to_stall_recording(T, factors, max_iters=300, stall_tol=1e-9,
                           window=5):
    """ALS run until progress dies; returns (final value, objective sequence)."""
    seq = [objective(T, factors)]
    run = 0
    for _ in range(max_iters):
        factors = als_sweep(T, factors)
        seq.append(objective(T, factors))
        rel = (seq[-2] - seq[-1]) / max(seq[-2], np.finfo(float).tiny)
        run = run + 1 if rel < stall_tol else 0
        if run >= window or seq[-1] < 1e-14:
            break
    return seq[-1], seq


@pytest.fixture(scope="module")
def sandwich_runs():
    """Criterion 3 ensemble: 30 random tensors with dims <= 4, R in {1, 2}."""
    records = []
    sequences = []
    for seed in range(30):
        rng = np.random.default_rng(1000 + seed)
        dims = tuple(int(d) for d in rng.integers(2, 5, size=3))
        rank = 1 + seed % 2
        T = rng.standard_normal(dims)
        bundle = centroid_init(T, rank)
        inf_est = np.inf
        for s in range(32):
            F0 = random_init(T, rank, seed * 1000 + s)
            val, seq = als_to_stall_recording(T, F0)
            inf_est = min(inf_est, val)
            sequences.append(seq)
        records.append({
            "lower": bundle.lower_bound,
            "upper": bundle.upper_bound,
            "inf_est": inf_est,
            "init_obj": objective(T, bundle.init_factors),
        })
    return records, sequences


@pytest.fixture(scope="module")
def recovery_runs():
    """Criterion 4 ensemble: 20 exact rank-R tensors, collinearity <= 0.5."""
    runs = []
    for seed in range(20):
        rng = np.random.default_rng(seed)
        rank = 1 + seed % 3
        coll = 0.5 * (seed % 5) / 4.0  # 0, 0.125, ..., 0.5
        F_true = helpers.make_collinear_factors(rng, (5, 5, 5), rank, coll)
        T = F_true.compose()
        lower = centroid_init(T, rank).lower_bound
        cfg = SolverConfig(rank=rank, init="centroid", max_iters=500,
                           tol_residual=1e-10)
        _, trace, status = decompose(T, cfg)
        runs.append({
            "lower": lower,
            "status": status,
            "objectives": trace.objectives(),
        })
    return runs


@pytest.fixture(scope="module")
def swamp_runs():
    """Criterion 8 ensemble: swampy 6x6x6 rank-3 family, 20 seeds.

    The stall tolerance 1e-6 is a practical swamp detector: runs making less
    than 1e-4 percent relative progress for five consecutive sweeps stop with
    status 'stalled'.
    """
    out = {}
    for init in ("random", "centroid"):
        runs = []
        for seed in range(20):
            T, _ = generate(GeneratorSpec("swampy", (6, 6, 6), 3, seed=seed,
                                          collinearity=0.95))
            cfg = SolverConfig(rank=3, init=init, seed=100003 + seed,
                               max_iters=2000, tol_stall=1e-6)
            _, trace, status = decompose(T, cfg, keep_history=(init == "random"))
            runs.append({"trace": trace, "status": status})
        out[init] = runs
    return out


def test_criterion_01_evaluator_consensus(assert_rel):
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(50):
        rng = np.random.default_rng(2000 + case)
        rank = 1 + case % 3
        T = rng.standard_normal((4, 5, 6))
        B = rng.standard_normal((5, rank))
        C = rng.standard_normal((6, rank))
        if case == 49 and rank >= 2:  # duplicated-column case
            B[:, 1] = B[:, 0]
            C[:, 1] = C[:, 0]
        ker = contraction_kernel(T)
        direct = reduced_objective(T, B, C)
        for other in (reduced_objective_trace(ker, B, C),
                      reduced_objective_trace(T, B, C),
                      reduced_objective_spectral(ker, B, C)):
            worst = max(worst, abs(other - direct)
                        / max(abs(direct), abs(other), 1e-30))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed < 10.0
    assert report(1, "evaluator-consensus", ok,
                  f"worst rel disagreement {worst:.2e}, {elapsed:.1f}s")


def test_criterion_02_worked_diagonal_example():
    T = np.zeros((2, 2, 2))
    T[0, 0, 0] = 1.0
    T[1, 1, 1] = 1.0
    bundle = centroid_init(T, 1)
    init_jred = reduced_objective(T, bundle.init_factors.B,
                                  bundle.init_factors.C)
    inf_est = helpers.multistart_inf_estimate(T, 1, n_starts=32, seed=0)
    checks = {
        "lower": abs(bundle.lower_bound - 0.0) <= 1e-10,
        "upper": abs(bundle.upper_bound - 0.75) <= 1e-10,
        "gap": abs(bundle.gap_bound - 0.75) <= 1e-10,
        "init_jred": abs(init_jred - 0.5) <= 1e-10,
        "inf_oracle": abs(inf_est - 0.5) <= 1e-6,
    }
    ok = all(checks.values())
    assert report(2, "worked-diagonal-example", ok,
                  f"failed: {[k for k, v in checks.items() if not v]}")


def test_criterion_03_sandwich(sandwich_runs):
    records, _ = sandwich_runs
    bad = []
    for i, r in enumerate(records):
        if not (r["lower"] <= r["inf_est"] + 1e-10
                and r["inf_est"] <= r["init_obj"] + 1e-10
                and r["init_obj"] <= r["upper"] + 1e-8):
            bad.append(i)
    assert report(3, "sandwich-property", not bad, f"violations at {bad}")


def test_criterion_04_exact_rank_certificate(recovery_runs):
    lower_ok = all(r["lower"] < 1e-10 for r in recovery_runs)
    n_conv = sum(r["status"] == "converged"
                 and r["objectives"][-1] < 1e-10 for r in recovery_runs)
    ok = lower_ok and n_conv >= 18
    assert report(4, "exact-rank-certificate", ok,
                  f"lower bounds ok: {lower_ok}, converged {n_conv}/20")


def test_criterion_05_als_monotonicity(sandwich_runs, recovery_runs):
    _, sequences = sandwich_runs
    worst = 0.0
    for seq in sequences:
        d = np.diff(np.asarray(seq))
        if d.size:
            worst = max(worst, float(d.max()))
    for r in recovery_runs:
        d = np.diff(r["objectives"])
        if d.size:
            worst = max(worst, float(d.max()))
    assert report(5, "als-monotonicity", worst <= 1e-12,
                  f"worst per-sweep increase {worst:.2e}")


def test_criterion_06_kr_range_invariance():
    worst = 0.0
    for case in range(100):
        rng = np.random.default_rng(3000 + case)
        rank = 2 + case % 2
        T = rng.standard_normal((4, 4, 4))
        B = rng.standard_normal((4, rank))
        C = rng.standard_normal((4, rank))
        base = reduced_objective(T, B, C)
        perm = rng.permutation(rank)
        scale_b = np.sign(rng.standard_normal(rank)) * rng.uniform(0.25, 4.0, rank)
        scale_c = np.sign(rng.standard_normal(rank)) * rng.uniform(0.25, 4.0, rank)
        other = reduced_objective(T, (B * scale_b)[:, perm],
                                  (C * scale_c)[:, perm])
        worst = max(worst, abs(base - other))
    assert report(6, "kr-range-invariance", worst < 1e-10,
                  f"worst absolute change {worst:.2e}")


def test_criterion_07_rank1_stationarity():
    bad = []
    for seed in range(5):
        T = np.random.default_rng(seed).standard_normal((2, 2, 2))
        points = helpers.coupled_power_points(T, grid=13)
        if not points:
            bad.append((seed, "no critical point found"))
            continue
        for b, c in points:
            a = helpers.contract_23(T, b, c)
            if np.linalg.norm(a) < 1e-12:
                continue
            res = rank1_critical_residual(T, a, b, c)
            drift = rank1_stationarity_check(T, a, b, c, 20)
            if res >= 1e-9 or drift >= 1e-8:
                bad.append((seed, f"residual {res:.1e}, drift {drift:.1e}"))
    assert report(7, "rank1-stationarity", not bad, str(bad))


def test_criterion_08_swamp_mitigation(swamp_runs):
    target = 1e-6
    medians = {}
    for init, runs in swamp_runs.items():
        iters = []
        for r in runs:
            obj = r["trace"].objectives()
            hits = np.nonzero(obj < target)[0]
            iters.append(int(hits[0]) + 1 if hits.size else 2000)
        medians[init] = float(np.median(iters))
    stalled = [r for r in swamp_runs["random"] if r["status"] == "stalled"]
    stall_ok = True
    for r in stalled:
        window = r["trace"].history[-6:]
        rep = swamp_report(window)
        if np.median(rep.proj_distance) >= 1e-4:
            stall_ok = False
    n_swamped = {init: sum(r["trace"].objectives()[-1] >= target
                           for r in runs)
                 for init, runs in swamp_runs.items()}
    print(f"  [info] median iters-to-{target:g}: centroid {medians['centroid']},"
          f" random {medians['random']}; runs never reaching target:"
          f" centroid {n_swamped['centroid']}/20, random {n_swamped['random']}/20;"
          f" stalled random runs: {len(stalled)}")
    ok = medians["centroid"] <= medians["random"] and stall_ok
    assert report(8, "swamp-mitigation", ok,
                  f"centroid median {medians['centroid']} vs random "
                  f"{medians['random']}, stall correlation ok: {stall_ok}")


def test_criterion_09_symmetric_centroid_als():
    n_good = 0
    symmetric_violated = False
    for seed in range(10):
        T, _ = generate(GeneratorSpec("symmetric", (5, 5, 5), 2, seed=seed))
        cfg = SolverConfig(rank=2, init="centroid_symmetric", symmetric=True,
                           max_iters=500, tol_residual=1e-10)
        _, trace, _ = decompose(T, cfg, keep_history=True)
        for F in trace.history:
            if np.linalg.norm(F.B - F.C) != 0.0:
                symmetric_violated = True
        if trace.objectives()[-1] < 1e-8:
            n_good += 1
    ok = not symmetric_violated and n_good >= 8
    assert report(9, "symmetric-centroid-als", ok,
                  f"B=C violated: {symmetric_violated}, converged {n_good}/10")


def test_criterion_10_kernel_identities():
    specs = []
    for seed in range(4):
        specs += [
            GeneratorSpec("random_factors", (4, 5, 6), 2, seed=seed),
            GeneratorSpec("swampy", (5, 5, 5), 3, seed=seed, collinearity=0.9),
            GeneratorSpec("symmetric", (4, 4, 4), 2, seed=seed),
            GeneratorSpec("diagonal", (3, 4, 5), 3, seed=seed),
            GeneratorSpec("noisy", (4, 4, 4), 2, seed=seed, noise=0.05),
        ]
    ok = True
    detail = ""
    for spec in specs:
        T, _ = generate(spec)
        ker = contraction_kernel(T)
        norm_sq = float(np.vdot(T, T))
        trace_err = abs(float(np.trace(ker.matrix)) - norm_sq) / max(norm_sq, 1e-30)
        min_eig = float(ker.eigenvalues.min())
        if trace_err > 1e-10 or min_eig < -1e-9 * np.linalg.norm(ker.matrix):
            ok = False
            detail = f"{spec.kind}: trace err {trace_err:.1e}, min eig {min_eig:.1e}"
    assert report(10, "kernel-identities", ok, detail)


def test_criterion_11_determinism(tmp_path):
    def pipeline(out):
        base = ["--seed", "13", "--output-dir", str(out)]
        main(base + ["generate", "--kind", "swampy", "--dims", "5,5,5",
                     "--rank", "2", "--collinearity", "0.8"])
        tensor = str(out / "tensor.txt")
        main(base + ["bounds", tensor, "--rank", "2"])
        main(base + ["--keep-history", "decompose", tensor, "--rank", "2",
                     "--init", "centroid", "--max-iters", "60"])
        main(base + ["diagnose", tensor,
                     "--history", str(out / "history.jsonl"),
                     "--trace", str(out / "trace.jsonl")])
        main(base + ["bench", "--kind", "random_factors", "--dims", "4,4,4",
                     "--rank", "2", "--methods", "als,rals", "--inits",
                     "random,centroid", "--reps", "2", "--max-iters", "80"])

    out1, out2 = tmp_path / "run1", tmp_path / "run2"
    pipeline(out1)
    pipeline(out2)
    names = ["tensor.txt", "factors_true.txt", "bounds.json", "factors.txt",
             "trace.jsonl", "history.jsonl", "swamp_report.jsonl",
             "summary.jsonl"]
    differing = [n for n in names
                 if (out1 / n).read_bytes() != (out2 / n).read_bytes()]
    assert report(11, "determinism", not differing, f"differs: {differing}")
