"""Acceptance gate: twelve end-to-end criteria, one test (and one pass/fail
line) each.  Tolerances and instance scales are stated inline; randomized
criteria run on frozen seeds so the suite is deterministic."""

import csv
import json
import time

import numpy as np
import pytest

from sigw.analysis import (
    adjusted_rand_index,
    cka_distance,
    pairwise_distances,
    purity,
    self_tuning_affinity,
    spectral_cluster,
    SlicedIGW,
)
from sigw.cli import main
from sigw.gaussian import sliced_igw_gaussian
from sigw.measures import EmpiricalMeasure, GaussianMeasure, UnivariateSample, second_moment
from sigw.optim import (
    OptimizerConfig,
    TheoreticalStep,
    dissolve_jacobian_apply,
    dissolve_map,
    objective_f,
    run_cd_subgradient,
    run_riemannian_subgradient,
    subgrad_f,
    subgrad_h,
    theoretical_constants,
)
from sigw.slicing import SliceObjective, mc_estimate, sample_directions
from sigw.univariate import igw_1d, reflect, w2_squared_1d

from oracles import (
    brute_force_igw_squared,
    directional_difference,
    finite_difference_grad,
    random_orthogonal,
    random_stiefel,
)
from test_optim import _smooth_instance


def _passed(number: int, label: str) -> None:
    print(f"PASS criterion {number:02d}: {label}")


def _uniform_factor_pair(seed: int):
    rng = np.random.default_rng(seed)
    fa = rng.random((5, 5))
    fb = rng.random((10, 10))
    return GaussianMeasure(fa.T @ fa), GaussianMeasure(fb.T @ fb)


def test_criterion_01_univariate_oracle_equivalence():
    start = time.perf_counter()
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 8))
        xs = rng.uniform(-3.0, 3.0, size=n)
        ys = rng.uniform(-3.0, 3.0, size=n)
        got = igw_1d(UnivariateSample.uniform(xs), UnivariateSample.uniform(ys)).igw_squared
        assert abs(got - brute_force_igw_squared(xs, ys)) <= 1e-10
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _passed(1, f"100 instances match the exhaustive coupling minimum ({elapsed:.1f}s)")


def test_criterion_02_gaussian_closed_form_cross_check():
    start = time.perf_counter()
    rng = np.random.default_rng(202)
    for k in range(50):
        dy = int(rng.integers(2, 11))
        dx = int(rng.integers(1, dy + 1))
        fa = rng.random((dx, dx))
        fb = rng.random((dy, dy))
        mu = GaussianMeasure(fa.T @ fa)
        nu = GaussianMeasure(fb.T @ fb)
        closed = sliced_igw_gaussian(mu, nu)
        estimates = np.array(
            [
                mc_estimate(
                    SliceObjective(mu, nu, sample_directions(dy, 2**13, seed=1000 * k + r)),
                    closed.delta_star,
                )
                for r in range(25)
            ]
        )
        stderr = estimates.std(ddof=1) / np.sqrt(25.0)
        assert abs(estimates.mean() - closed.sliced_igw_squared) <= 3.0 * stderr
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0
    _passed(2, f"50 pairs within 3 MC standard errors of the closed form ({elapsed:.1f}s)")


def test_criterion_03_mc_rate(tmp_path, capsys):
    start = time.perf_counter()
    out = tmp_path / "mc.csv"
    code = main(["validate-mc", "--seed", "13", "--out", str(out), "--no-figure"])
    assert code == 0
    slope = json.loads((tmp_path / "mc.json").read_text())["slope"]
    assert -0.65 <= slope <= -0.35
    elapsed = time.perf_counter() - start
    assert elapsed < 600.0
    capsys.readouterr()
    _passed(3, f"median-error log-log slope {slope:.3f} in [-0.65, -0.35] ({elapsed:.1f}s)")


def test_criterion_04_empirical_rate(tmp_path, capsys):
    start = time.perf_counter()
    out = tmp_path / "rate.csv"
    code = main(
        [
            "validate-rate",
            "--m", "512",
            "--n-grid", "32,64,128,256,512,1024",
            "--reps", "10",
            "--max-iters", "100",
            "--seed", "30",
            "--out", str(out),
            "--no-figure",
        ]
    )
    assert code == 0
    with open(out, newline="") as fh:
        rows = list(csv.DictReader(fh))
    medians = [float(row["median_abs_err"]) for row in rows]
    inversions = [
        (medians[i + 1] - medians[i]) / medians[i]
        for i in range(len(medians) - 1)
        if medians[i + 1] > medians[i]
    ]
    assert len(inversions) <= 1
    assert all(up <= 0.10 for up in inversions)
    r_squared = json.loads((tmp_path / "rate.json").read_text())["r_squared"]
    assert r_squared >= 0.8
    elapsed = time.perf_counter() - start
    assert elapsed < 900.0
    capsys.readouterr()
    _passed(4, f"median error monotone, rate fit R^2 {r_squared:.3f} >= 0.8 ({elapsed:.1f}s)")


def test_criterion_05_theoretical_feasibility():
    rng = np.random.default_rng(505)
    for inst in range(20):
        dx = int(rng.integers(1, 4))
        dy = int(rng.integers(dx, 5))
        mu = EmpiricalMeasure.uniform(rng.normal(size=(int(rng.integers(8, 21)), dx)))
        nu = EmpiricalMeasure.uniform(rng.normal(size=(int(rng.integers(8, 21)), dy)))
        obj = SliceObjective(mu, nu, sample_directions(dy, 16, seed=600 + inst))
        constants = theoretical_constants(mu, nu)
        cfg = OptimizerConfig(
            beta=constants.beta_min, step_rule=TheoreticalStep(), max_iters=500
        )
        trace = run_cd_subgradient(obj, cfg)
        assert len(trace.iterates) == 500
        assert all(rec.residual <= 1.0 / 6.0 + 1e-12 for rec in trace.iterates)
    _passed(5, "every iterate of 20 runs stays within feasibility residual 1/6")


def test_criterion_06_dissolving_contraction():
    rng = np.random.default_rng(606)
    for _ in range(500):
        dy = int(rng.integers(1, 7))
        dx = int(rng.integers(1, dy + 1))
        base = random_stiefel(rng, dy, dx)
        noise = rng.normal(size=(dy, dx)) * rng.uniform(0.0, 0.2)
        delta = base + noise
        res = np.linalg.norm(delta.T @ delta - np.eye(dx))
        while res >= 1.0:  # keep every draw inside the contraction region
            noise *= 0.5
            delta = base + noise
            res = np.linalg.norm(delta.T @ delta - np.eye(dx))
        mapped = dissolve_map(delta)
        res_mapped = np.linalg.norm(mapped.T @ mapped - np.eye(dx))
        assert res_mapped <= res**3 + 1e-12
    _passed(6, "dissolve residual contracts cubically on 500 random points")


def test_criterion_07_subgradient_correctness():
    beta = 50.0
    for seed in range(50):
        obj, delta = _smooth_instance(3000 + seed)
        grad = subgrad_f(obj, delta)
        fd = finite_difference_grad(lambda d: objective_f(obj, d), delta, step=1e-6)
        assert np.linalg.norm(grad - fd) <= 1e-5 * max(np.linalg.norm(fd), 1.0)

        obj_h, delta_h = _smooth_instance(6000 + seed, infeasible=True)

        def h(d):
            pen = np.linalg.norm(d.T @ d - np.eye(d.shape[1])) ** 2
            return objective_f(obj_h, dissolve_map(d)) + beta / 4.0 * pen

        grad_h = subgrad_h(obj_h, delta_h, beta)
        fd_h = finite_difference_grad(h, delta_h, step=1e-6)
        assert np.linalg.norm(grad_h - fd_h) <= 1e-5 * max(np.linalg.norm(fd_h), 1.0)

        rng = np.random.default_rng(9000 + seed)
        point = random_stiefel(rng, 3, 2) + 0.05 * rng.normal(size=(3, 2))
        direction = rng.normal(size=(3, 2))
        applied = dissolve_jacobian_apply(point, direction)
        diff = directional_difference(lambda d: dissolve_map(d), point, direction, step=1e-6)
        assert np.linalg.norm(applied - diff) <= 1e-6 * max(np.linalg.norm(diff), 1.0)
    _passed(7, "analytic subgradients and jacobian match finite differences at 50 points")


def test_criterion_08_comparison_inequality():
    rng = np.random.default_rng(808)
    for _ in range(200):
        na = int(rng.integers(2, 40))
        nb = int(rng.integers(2, 40))
        mu = UnivariateSample.uniform(rng.normal(size=na) * rng.uniform(0.5, 3.0))
        nu = UnivariateSample.uniform(rng.normal(size=nb) * rng.uniform(0.5, 3.0))
        igw2 = igw_1d(mu, nu).igw_squared
        w2 = min(w2_squared_1d(mu, nu), w2_squared_1d(mu, reflect(nu)))
        moments = second_moment(mu) + second_moment(nu)
        assert igw2 <= 2.0 * moments * w2 + 1e-9
        assert 0.5 * moments * w2 <= igw2 + 1e-9
    _passed(8, "squared distance sandwiched by the transport bound on 200 pairs")


def test_criterion_09_gaussian_pseudometric():
    rng = np.random.default_rng(909)

    def dist(a, b):
        return float(np.sqrt(max(sliced_igw_gaussian(a, b).sliced_igw_squared, 0.0)))

    for _ in range(200):
        d = int(rng.integers(1, 7))
        measures = []
        for _ in range(3):
            f = rng.normal(size=(d, d))
            measures.append(GaussianMeasure(f @ f.T))
        a, b, c = measures
        assert abs(dist(a, b) - dist(b, a)) <= 1e-12
        assert dist(a, c) <= dist(a, b) + dist(b, c) + 1e-12
    _passed(9, "closed form is symmetric and satisfies the triangle inequality")


def _synthetic_users(seed: int):
    """24 users in 3 style groups of 8; dimensions alternate 5 and 8 inside
    each group.  Groups differ in mixture offset and covariance scale."""
    rng = np.random.default_rng(seed)
    users, truth = [], []
    # Modest absolute scale: subgradient step sizes are found by backtracking
    # from a fixed first guess, so large second moments waste line-search
    # evaluations without changing the clustering (distances scale uniformly).
    archetypes = [(0.0, 0.5), (2.0, 0.35), (0.0, 1.5)]
    for group, (offset, scale) in enumerate(archetypes):
        for u in range(8):
            dim = 5 if u % 2 == 0 else 8
            off = offset * (1.0 + 0.05 * rng.normal())
            sc = scale * (1.0 + 0.05 * rng.normal())
            component = rng.integers(0, 2, size=120) * 2 - 1
            points = rng.normal(size=(120, dim)) * 0.1
            points[:, :5] = sc * rng.normal(size=(120, 5))
            points[:, 0] += component * off
            users.append(EmpiricalMeasure.uniform(points))
            truth.append(group)
    return users, np.array(truth)


def test_criterion_10_clustering_end_to_end():
    start = time.perf_counter()
    users, truth = _synthetic_users(seed=100)
    method = SlicedIGW(m=200, max_iters=50)
    for seed in (1, 2, 3):
        distances = pairwise_distances(users, method, seed=seed)
        affinity = self_tuning_affinity(distances)
        result = spectral_cluster(affinity, k=3, seed=seed)
        assert adjusted_rand_index(result.assignments, truth) >= 0.9
        assert purity(result.assignments, truth) >= 0.9
    elapsed = time.perf_counter() - start
    assert elapsed < 1200.0
    _passed(10, f"24-user pipeline reaches ARI/purity >= 0.9 on 3 seeds ({elapsed:.0f}s)")


def test_criterion_11_optimizer_agreement():
    for k in range(10):
        mu, nu = _uniform_factor_pair(900 + k)
        closed = sliced_igw_gaussian(mu, nu).sliced_igw_squared
        obj = SliceObjective(mu, nu, sample_directions(10, 512, seed=7000 + k))
        cd = run_cd_subgradient(obj, OptimizerConfig.cd_defaults(init="gaussian-alignment"))
        riem = run_riemannian_subgradient(
            obj, OptimizerConfig.riemannian_defaults(init="gaussian-alignment")
        )
        assert abs(cd.final_objective - riem.final_objective) <= 0.15 * closed
        assert abs(cd.final_objective - closed) <= 0.15 * closed
        assert abs(riem.final_objective - closed) <= 0.15 * closed
    _passed(11, "dissolving and Riemannian runs agree and track the closed form")


def test_criterion_12_score_worked_examples():
    assert adjusted_rand_index([0, 0, 1, 1, 2], [5, 5, 3, 3, 9]) == pytest.approx(1.0)
    assert adjusted_rand_index([0, 0, 0, 0], [0, 1, 2, 3]) == pytest.approx(0.0)
    assert adjusted_rand_index([0, 0, 1, 1], [0, 1, 1, 1]) == pytest.approx(0.0, abs=1e-15)

    assert purity([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(1.0)
    assert purity([0, 0, 0, 0], [0, 0, 1, 1]) == pytest.approx(0.5)
    assert purity([0, 0, 1, 1], [0, 1, 1, 1]) == pytest.approx(0.75)

    rng = np.random.default_rng(121)
    x = rng.normal(size=(10, 3))
    assert cka_distance(x, x) == pytest.approx(0.0, abs=1e-12)
    assert cka_distance(x, x @ random_orthogonal(rng, 3)) == pytest.approx(0.0, abs=1e-12)
    n, p, q = 9, 2, 3
    centered = (np.eye(n) - np.full((n, n), 1.0 / n)) @ rng.normal(size=(n, p + q))
    basis, _ = np.linalg.qr(centered)
    assert cka_distance(basis[:, :p], basis[:, p:]) == pytest.approx(1.0, abs=1e-10)
    for _ in range(20):
        a = rng.normal(size=(8, int(rng.integers(1, 5))))
        b = rng.normal(size=(8, int(rng.integers(1, 5))))
        assert 0.0 <= cka_distance(a, b) <= 1.0
    _passed(12, "ARI, purity, and CKA worked examples hold exactly")
