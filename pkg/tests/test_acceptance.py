"""Acceptance suite: one test per criterion, one printed line per result.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines inline.
"""

import contextlib
import json
import time

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from tlbo.bench import TaskFamilySpec, run_benchmark
from tlbo.box import Box
from tlbo.cli import main as cli_main
from tlbo.ensemble import (
    Schedule,
    compute_weights,
    force_target_weight,
    ranking_loss,
)
from tlbo.gp import (
    FitConfig,
    condition,
    log_marginal_likelihood,
    loo_predictions,
    predict,
)
from tlbo.kernels import kernel_matrix, kernel_sum, log_params, matern25, se, with_log_params
from tlbo.minimize import OptimizerConfig
from tlbo.service import create_app
from tlbo.session import Session, SessionConfig, StopRule
from tlbo.tasks import TaskDataset
from tlbo.transforms import source_normalize, target_normalize


@contextlib.contextmanager
def criterion(number, description):
    try:
        yield
    except BaseException:
        print(f"ACCEPTANCE {number:>2}: FAIL  {description}")
        raise
    print(f"ACCEPTANCE {number:>2}: PASS  {description}")


def random_kernel(rng, n_dims):
    ls1 = rng.uniform(0.4, 1.6, size=n_dims)
    ls2 = rng.uniform(0.4, 1.6, size=n_dims)
    return kernel_sum(
        se(rng.uniform(0.3, 2.0), ls1), matern25(rng.uniform(0.3, 2.0), ls2)
    )


def test_criterion_1_gp_oracle_equivalence():
    with criterion(1, "GP posterior matches dense-formula oracle (1e-10, 50 instances)"):
        rng = np.random.default_rng(1001)
        t0 = time.time()
        for _ in range(50):
            n_points = int(rng.integers(2, 51))
            n_dims = int(rng.integers(1, 6))
            X = rng.uniform(-2, 2, size=(n_points, n_dims))
            y = rng.normal(size=n_points)
            kern = random_kernel(rng, n_dims)
            noise = rng.uniform(0.01, 0.5)
            Xs = rng.uniform(-2, 2, size=(5, n_dims))

            model = condition(X, y, kern, noise)
            post = predict(model, Xs, full_cov=True)

            K = kernel_matrix(kern, X) + noise * np.eye(n_points)
            K_inv = np.linalg.inv(K)
            Ks = kernel_matrix(kern, X, Xs)
            mean = Ks.T @ K_inv @ y
            cov = kernel_matrix(kern, Xs) - Ks.T @ K_inv @ Ks
            np.testing.assert_allclose(post.mean, mean, atol=1e-10)
            np.testing.assert_allclose(post.variance, np.diag(cov), atol=1e-10)
        assert time.time() - t0 < 10.0


def test_criterion_2_lml_gradient():
    with criterion(2, "LML gradient vs central differences (rel 1e-4, 20 instances)"):
        rng = np.random.default_rng(1002)
        h = 1e-5
        for _ in range(20):
            n_dims = int(rng.integers(1, 4))
            X = rng.uniform(-2, 2, size=(7, n_dims))
            y = rng.normal(size=7)
            kern = random_kernel(rng, n_dims)
            noise = rng.uniform(0.05, 0.4)
            model = condition(X, y, kern, noise)
            _, grad = log_marginal_likelihood(model)
            theta = np.append(log_params(kern), np.log(noise))
            for j in range(theta.size):
                tp, tm = theta.copy(), theta.copy()
                tp[j] += h
                tm[j] -= h
                up = condition(X, y, with_log_params(kern, tp[:-1]), float(np.exp(tp[-1])))
                dn = condition(X, y, with_log_params(kern, tm[:-1]), float(np.exp(tm[-1])))
                fd = (log_marginal_likelihood(up)[0] - log_marginal_likelihood(dn)[0]) / (2 * h)
                scale = max(abs(fd), abs(grad[j]), 1e-8)
                assert abs(grad[j] - fd) / scale < 1e-4


def test_criterion_3_ranking_loss_oracle():
    with criterion(3, "ranking loss equals pair enumeration (200 instances incl. ties)"):
        rng = np.random.default_rng(1003)
        for k in range(200):
            n = int(rng.integers(1, 13))
            if k % 2 == 0:  # force ties half the time
                p = rng.integers(0, 4, size=n).astype(float)
                t = rng.integers(0, 4, size=n).astype(float)
            else:
                p = rng.normal(size=n)
                t = rng.normal(size=n)
            expected = sum(
                int((p[j] < p[l]) != (t[j] < t[l])) for j in range(n) for l in range(n)
            )
            assert ranking_loss(p, t) == expected


def test_criterion_4_loo_oracle():
    with criterion(4, "LOO predictions equal N-refit brute force (1e-8, N <= 20)"):
        rng = np.random.default_rng(1004)
        for n_points in (2, 5, 11, 20):
            n_dims = int(rng.integers(1, 4))
            X = rng.uniform(-2, 2, size=(n_points, n_dims))
            y = rng.normal(size=n_points)
            kern = random_kernel(rng, n_dims)
            noise = rng.uniform(0.05, 0.3)
            model = condition(X, y, kern, noise)
            loo = loo_predictions(model)
            for i in range(n_points):
                keep = np.delete(np.arange(n_points), i)
                refit = condition(X[keep], y[keep], kern, noise)
                ref = predict(refit, X[i : i + 1])
                assert abs(loo.mean[i] - ref.mean[0]) < 1e-8
                assert abs(loo.variance[i] - ref.variance[0]) < 1e-8


def test_criterion_5_simplex_and_schedule():
    with criterion(5, "1000 weight computations stay on the simplex; forcing is monotone"):
        rng = np.random.default_rng(1005)
        checked = 0
        while checked < 1000:
            n_t = int(rng.integers(2, 8))
            n_sources = int(rng.integers(1, 4))
            n_dims = int(rng.integers(1, 3))
            X = rng.uniform(-1, 1, size=(n_t, n_dims))
            y = rng.normal(size=n_t)
            kern = se(1.0, np.full(n_dims, 0.7))
            sources = [
                condition(
                    rng.uniform(-1, 1, size=(6, n_dims)), rng.normal(size=6), kern, 0.05
                )
                for _ in range(n_sources)
            ]
            target = condition(X, y, kern, 0.05)
            for s in range(4):
                w = compute_weights(
                    sources, target, X, y,
                    sample_count=int(rng.integers(5, 40)),
                    seed=int(rng.integers(0, 2**31)),
                )
                assert np.all(w >= 0)
                assert abs(w.sum() - 1.0) <= 1e-9
                sched = Schedule(
                    alpha0=float(rng.uniform(0, 0.3)),
                    alpha1=float(rng.uniform(0, 0.3)),
                    beta=float(rng.uniform(0.5, 1.0)),
                )
                forced = force_target_weight(w, int(rng.integers(0, 20)), sched)
                assert forced[-1] >= w[-1] - 1e-15
                assert np.all(forced >= -1e-15)
                assert abs(forced.sum() - 1.0) <= 1e-9
                checked += 1


def test_criterion_6_normalization_round_trips():
    with criterion(6, "normalization inverts within 1e-12; optimum maps exactly to 0"):
        rng = np.random.default_rng(1006)
        for k in range(1000):
            n_points = int(rng.integers(2, 30))
            n_dims = int(rng.integers(1, 4))
            inputs = rng.uniform(-50, 50, size=(n_points, n_dims)) * rng.uniform(
                0.01, 100
            )
            outputs = rng.normal(size=n_points) * rng.uniform(0.1, 1000)
            task = TaskDataset("t", inputs, outputs)
            if k % 2 == 0:
                norm, t = source_normalize(task)
                opt_row = norm.inputs[int(np.argmin(outputs))]
                assert np.all(opt_row == 0.0)
            else:
                lo = inputs.min(axis=0) - 1.0
                hi = inputs.max(axis=0) + 1.0
                box = Box(lo, hi)
                x0 = inputs[0]
                norm, t = target_normalize(task, x0, box)
                assert np.all(norm.inputs[0] == 0.0)
            probe = rng.uniform(-100, 100, size=n_dims)
            back = t.invert_input(t.apply_input(probe))
            # error relative to the affine map's own magnitudes: a probe much
            # smaller than the shift cannot round-trip below eps * |shift|
            denom = np.maximum(np.abs(probe), np.maximum(np.abs(t.input_shift), 1e-30))
            assert np.max(np.abs(back - probe) / denom) < 1e-12
            y_probe = float(rng.normal() * 1e3)
            y_back = t.invert_output(t.apply_output(y_probe))
            assert abs(y_back - y_probe) / max(abs(y_probe), 1e-30) < 1e-12


def test_criterion_7_identical_source_dominance():
    with criterion(7, "matching source has maximal median weight over 20 seeds"):
        rng = np.random.default_rng(1007)
        box = Box([0.0, 0.0], [10.0, 10.0])

        def f_target(X):
            return (X[:, 0] - 4.0) ** 2 + 0.5 * (X[:, 1] - 6.0) ** 2

        decoy_fns = [
            lambda X: -f_target(X),
            lambda X: (X[:, 0] - 9.0) ** 2 + (X[:, 1] - 1.0) ** 2,
            lambda X: np.sin(X[:, 0]) + np.cos(X[:, 1]),
            lambda X: rng.normal(size=X.shape[0]) * 5.0,
        ]
        kern = se(1.0, [0.2, 0.2])
        grid = np.stack(
            np.meshgrid(np.linspace(0, 10, 7), np.linspace(0, 10, 7)), axis=-1
        ).reshape(-1, 2)

        def build_source(fn):
            task = TaskDataset("s", grid, fn(grid))
            norm, transform = source_normalize(task)
            return condition(norm.inputs, norm.outputs, kern, 1e-6), task

        matching_model, matching_task = build_source(f_target)
        decoy_models = [build_source(fn)[0] for fn in decoy_fns]
        x0 = matching_task.best()[0]  # start at the matching source's optimum

        rng_pts = np.random.default_rng(2007)
        X_t = rng_pts.uniform(0, 10, size=(5, 2))
        task_t = TaskDataset("t", X_t, f_target(X_t))
        norm_t, _ = target_normalize(task_t, x0, box)
        target_model = condition(norm_t.inputs, norm_t.outputs, kern, 1e-4)

        models = [matching_model] + decoy_models
        weights = np.array(
            [
                compute_weights(
                    models, target_model, norm_t.inputs, norm_t.outputs, 100, seed=s
                )
                for s in range(20)
            ]
        )
        medians = np.median(weights, axis=0)
        assert medians[0] >= medians[1:5].max()


def test_criterion_8_protocol_recreation():
    with criterion(
        8, "5-source quadratic family, 20 paired trials: ours >= 80% and strictly ahead"
    ):
        t0 = time.time()
        spec = TaskFamilySpec(
            base="quadratic_valley",
            n_sources=5,
            samples_range=(20, 40),
            output_offset_range=(5.0, 10.0),
            seed=2026,
        )
        report = run_benchmark(
            spec,
            strategies=("random", "vanilla_bo", "ours"),
            iterations=10,
            trials=20,
            seed=7,
            kernel_family="se",
            fit=FitConfig(n_starts=3, max_iter=100),
            optimizer=OptimizerConfig(restarts=12, grid_density=16, max_iter=80),
            weight_samples=100,
        )
        for name in report.strategies:
            curves = np.asarray(report.best_so_far[name])
            assert np.all(np.diff(curves, axis=1) <= 1e-12), f"{name} curve not monotone"
        ours = report.trials_reaching_threshold("ours")
        vanilla = report.trials_reaching_threshold("vanilla_bo")
        rand = report.trials_reaching_threshold("random")
        elapsed = time.time() - t0
        print(
            f"    ours {ours}/20, vanilla_bo {vanilla}/20, random {rand}/20, "
            f"threshold {report.threshold:.4g}, {elapsed:.0f}s"
        )
        assert ours >= 16  # >= 80% of 20 trials
        assert ours > vanilla
        assert ours > rand
        assert elapsed < 600.0


def test_criterion_9_determinism(tmp_path):
    with criterion(9, "bench CSV byte-identical; snapshot resume repeats the suggestion"):
        config = {
            "family": {
                "base": "damped_cosine",
                "n_sources": 2,
                "samples_range": [8, 12],
                "seed": 3,
            },
            "strategies": ["random", "ours"],
            "iterations": 2,
            "trials": 2,
            "kernel_family": "se",
            "fit": {"n_starts": 2, "max_iter": 40},
            "optimizer": {"restarts": 4, "grid_density": 16, "max_iter": 50},
            "weight_samples": 20,
        }
        config_path = tmp_path / "bench.json"
        config_path.write_text(json.dumps(config))
        runner = CliRunner()
        for out in ("a", "b"):
            result = runner.invoke(
                cli_main,
                ["bench", "--config", str(config_path), "--out", str(tmp_path / out),
                 "--seed", "23"],
            )
            assert result.exit_code == 0, result.output
        assert (tmp_path / "a" / "bench_curves.csv").read_bytes() == (
            tmp_path / "b" / "bench_curves.csv"
        ).read_bytes()

        rng = np.random.default_rng(1009)
        X = rng.uniform(0, 10, size=(10, 1))
        source = TaskDataset("s", X, (X[:, 0] - 3.0) ** 2)
        session = Session.create(
            [source],
            SessionConfig(
                box=Box([0.0], [10.0]),
                kernel_family="se",
                fit=FitConfig(n_starts=2, max_iter=40),
                optimizer=OptimizerConfig(restarts=4, grid_density=16, max_iter=50),
                weight_samples=20,
                seed=31,
                stop=StopRule(max_iterations=10),
            ),
        )
        session.tell([3.0], 1.0)
        session.tell([3.5], 2.0)
        x_live, _ = session.ask()
        snap = tmp_path / "session.json"
        session.save(snap)
        resumed = Session.load(snap)
        x_resumed, _ = resumed.ask()
        np.testing.assert_array_equal(x_live, x_resumed)


def test_criterion_10_service_contract(tmp_path):
    with criterion(
        10, "service black box: create, 2 init tells, 5 ask/tell rounds, idempotent"
    ):
        client = TestClient(create_app(tmp_path / "svc"))
        rng = np.random.default_rng(1010)
        X = rng.uniform(0, 10, size=(12, 1))
        payload = {
            "sources": [
                {"task_id": "s", "inputs": X.tolist(), "outputs": ((X[:, 0] - 3.0) ** 2).tolist()}
            ],
            "config": {
                "box": {"x_min": [0.0], "x_max": [10.0]},
                "kernel_family": "se",
                "fit": {"n_starts": 2, "max_iter": 40},
                "optimizer": {"restarts": 4, "grid_density": 16, "max_iter": 50},
                "weight_samples": 20,
                "seed": 13,
                "stop": {"max_iterations": 20},
            },
        }
        created = client.post("/sessions", json=payload)
        assert created.status_code == 201
        sid = created.json()["session_id"]

        for _ in range(2):
            doc = client.post(f"/sessions/{sid}/ask").json()
            assert doc["suggested_start"] is True
            x = doc["x_next"]
            assert 0.0 <= x[0] <= 10.0
            resp = client.post(
                f"/sessions/{sid}/tell", json={"x": x, "y": (x[0] - 3.2) ** 2}
            )
            assert resp.status_code == 200

        for _ in range(5):
            first = client.post(f"/sessions/{sid}/ask").json()
            second = client.post(f"/sessions/{sid}/ask").json()
            assert first == second
            x = first["x_next"]
            assert 0.0 <= x[0] <= 10.0
            resp = client.post(
                f"/sessions/{sid}/tell", json={"x": x, "y": (x[0] - 3.2) ** 2}
            )
            assert resp.status_code == 200
        history = client.get(f"/sessions/{sid}/history").json()
        assert len(history["records"]) == 7
