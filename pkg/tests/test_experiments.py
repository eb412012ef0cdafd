import numpy as np
import pytest

from ridgelab.data import LabeledImages, RffConfig
from ridgelab.errors import InvalidInputError
from ridgelab.experiments import (
    augmentation_sweep,
    dimensionality_sweep,
    find_lambda_opt,
    heatmap_lambda_opt,
    kfold_cv,
    lambda_sweep,
    rff_experiment_on_images,
)
from ridgelab.linalg import Dataset, fit_with_intercept, predict
from ridgelab.spiked import SpikedSpec, benchmark_spec, sample_training


class TestLambdaSweep:
    def test_single_point_matches_grid(self):
        # common random numbers: the same penalty inside a larger grid gives
        # bitwise-identical means
        spec = benchmark_spec(150)
        grid = np.array([0.01, 1.0, 100.0])
        full = lambda_sweep(spec, 64, grid, n_rep=10, seed=3)
        solo = lambda_sweep(spec, 64, np.array([1.0]), n_rep=10, seed=3)
        assert full.mean_nmse[1] == solo.mean_nmse[0]
        assert full.std_err[1] == solo.std_err[0]

    def test_risk_above_oracle_floor(self):
        spec = benchmark_spec(1000)
        curve = lambda_sweep(spec, 64, np.geomspace(1e-2, 1e4, 10), n_rep=20, seed=1)
        assert np.all(curve.mean_nmse >= spec.oracle_normalized_mse - 1e-12)

    def test_exclusion_accounting(self):
        # a penalty below every replicate's divergence bound excludes everyone
        spec = benchmark_spec(100)
        curve = lambda_sweep(spec, 64, np.array([-1e6, 1.0]), n_rep=5, seed=0)
        assert curve.excluded[0] == 5
        assert np.isnan(curve.mean_nmse[0])
        assert curve.excluded[1] == 0

    def test_threads_match_serial(self):
        spec = benchmark_spec(200)
        grid = np.geomspace(1e-1, 1e3, 5)
        a = lambda_sweep(spec, 64, grid, n_rep=8, seed=7, threads=1)
        b = lambda_sweep(spec, 64, grid, n_rep=8, seed=7, threads=4)
        assert np.array_equal(a.mean_nmse, b.mean_nmse)

    def test_empty_grid_rejected(self):
        with pytest.raises(InvalidInputError):
            lambda_sweep(benchmark_spec(50), 64, [], n_rep=2, seed=0)


class TestFindLambdaOpt:
    def test_low_dimension_positive_lambda(self):
        res = find_lambda_opt(benchmark_spec(50), 64, n_rep=50, seed=0)
        assert 15.0 <= res.lambda_opt <= 60.0
        assert not res.boundary_hit

    def test_high_dimension_negative_lambda(self):
        res = find_lambda_opt(benchmark_spec(1000), 64, n_rep=50, seed=0)
        assert -250.0 <= res.lambda_opt <= -75.0
        assert not res.boundary_hit

    def test_refined_beats_grid(self):
        spec = benchmark_spec(50)
        coarse = find_lambda_opt(spec, 64, n_rep=20, seed=2, refine=False)
        fine = find_lambda_opt(spec, 64, n_rep=20, seed=2, refine=True)
        assert fine.min_risk <= coarse.min_risk + 1e-12
        assert coarse.bracket[0] <= fine.lambda_opt <= coarse.bracket[1]

    def test_invalid_lower_bound(self):
        with pytest.raises(InvalidInputError):
            find_lambda_opt(
                benchmark_spec(100), 64, n_rep=5, seed=0, search_range=(-1e9, 10.0)
            )


class TestDimensionalitySweep:
    def test_double_descent_shape(self):
        rows = dimensionality_sweep([20, 64, 300], n=64, n_rep=30, seed=4)
        risks = {p: r for p, r, *_ in rows}
        # the interpolation threshold p = n is the risk peak
        assert risks[64] > risks[20]
        assert risks[64] > risks[300]
        # the tuned fit never loses to the untuned one
        for _, minnorm, opt_risk, _ in rows:
            assert opt_risk <= minnorm + 1e-12


class TestHeatmap:
    def test_rows_and_signs(self):
        rows = heatmap_lambda_opt(
            [20, 64], [10, 1000], SpikedSpec(p=10), n_rep=30, seed=5
        )
        assert [(r[0], r[1]) for r in rows] == [
            (20, 10), (20, 1000), (64, 10), (64, 1000)
        ]
        by_cell = {(r[0], r[1]): r[2] for r in rows}
        assert by_cell[(64, 10)] > 0
        assert by_cell[(64, 1000)] < 0


class TestAugmentationSweep:
    def test_adaptive_trunc_converges_to_ridge(self):
        spec = benchmark_spec(50)
        lam = 31.0
        rows = augmentation_sweep(
            spec, 64, [10, 5000], "adaptive", n_rep=30, seed=6,
            total_lambda=lam, lambda_opt_search=False,
        )
        ridge_risk = lambda_sweep(spec, 64, [lam], n_rep=30, seed=6).mean_nmse[0]
        small_q, big_q = rows[0], rows[1]
        assert abs(big_q[1] - ridge_risk) < abs(small_q[1] - ridge_risk)
        assert big_q[1] == pytest.approx(ridge_risk, rel=0.05)

    def test_fixed_mode_full_exceeds_trunc(self):
        rows = augmentation_sweep(
            benchmark_spec(50), 64, [25, 50], "fixed", n_rep=10, seed=7,
            var=0.5, lambda_opt_search=False,
        )
        for _, trunc, full, *_ in rows:
            assert full >= trunc

    def test_q_zero_matches_min_norm(self):
        spec = benchmark_spec(200)
        rows = augmentation_sweep(
            spec, 64, [0], "fixed", n_rep=15, seed=8, var=1.0,
            lambda_opt_search=False,
        )
        base = lambda_sweep(spec, 64, [0.0], n_rep=15, seed=8).mean_nmse[0]
        assert rows[0][1] == pytest.approx(base, rel=1e-6)
        assert rows[0][2] == pytest.approx(base, rel=1e-6)

    def test_bad_mode(self):
        with pytest.raises(InvalidInputError):
            augmentation_sweep(benchmark_spec(50), 64, [1], "bogus", 2, 0, var=1.0)


class TestKfoldCv:
    def test_loo_matches_manual(self):
        rng = np.random.default_rng(9)
        x = rng.standard_normal((5, 2))
        y = rng.standard_normal(5)
        data = Dataset(x=x, y=y)
        grid = np.array([0.5, 2.0])
        curve = kfold_cv(data, grid, k=5, seed=0)
        manual = np.empty((5, 2))
        for i in range(5):
            keep = [j for j in range(5) if j != i]
            sub = Dataset(x=x[keep], y=y[keep])
            for li, lam in enumerate(grid):
                fit = fit_with_intercept(sub, lam)
                manual[i, li] = (y[i] - predict(fit, x[i : i + 1])[0]) ** 2
        # folds are a permutation of singletons, so means agree exactly
        assert np.allclose(sorted(curve.mean_nmse), sorted(manual.mean(axis=0)))

    def test_u_shape_low_dimension(self):
        spec = benchmark_spec(5)
        data = sample_training(spec, 200, np.random.default_rng(10))
        grid = np.array([1e-4, 1.0, 1e6])
        curve = kfold_cv(data, grid, k=10, seed=1)
        assert curve.mean_nmse[2] > curve.mean_nmse[0]
        assert curve.mean_nmse[2] > curve.mean_nmse[1]

    def test_high_dimension_interpolation_competitive(self):
        # with p >> n the near-zero penalty is close to the curve minimum
        spec = benchmark_spec(800)
        data = sample_training(spec, 60, np.random.default_rng(11))
        grid = np.concatenate([[1e-8], np.geomspace(1e-2, 1e4, 15)])
        curve = kfold_cv(data, grid, k=10, seed=2)
        best = np.nanmin(curve.mean_nmse)
        assert curve.mean_nmse[0] <= 1.3 * best

    def test_bad_k(self):
        data = Dataset(x=np.eye(3), y=np.zeros(3))
        with pytest.raises(InvalidInputError):
            kfold_cv(data, [1.0], k=1, seed=0)
        with pytest.raises(InvalidInputError):
            kfold_cv(data, [1.0], k=4, seed=0)


def synthetic_images(count: int, seed: int) -> LabeledImages:
    rng = np.random.default_rng(seed)
    pixels = rng.uniform(-1.0, 1.0, size=(count, 784))
    labels = rng.integers(0, 10, size=count)
    return LabeledImages(pixels=pixels, labels=labels)


class TestRffExperiment:
    def test_shapes_and_split(self):
        train = synthetic_images(200, 0)
        test = synthetic_images(80, 1)
        grid = np.array([-5.0, 0.01, 10.0, 1000.0])
        res = rff_experiment_on_images(
            train, test, grid, RffConfig(n_features=200, seed=0),
            train_n=32, n_rep=6, smin_sq_threshold=float(np.inf), seed=3,
        )
        assert res.smin_sq.shape == (6,)
        assert np.all(res.smin_sq > 0)
        # threshold at infinity: "below" group holds every replicate
        assert np.array_equal(res.curve_below.mean_nmse, res.curve_all.mean_nmse)

    def test_deterministic(self):
        train = synthetic_images(100, 2)
        test = synthetic_images(40, 3)
        grid = np.array([0.01, 100.0])
        kw = dict(train_n=20, n_rep=4, seed=5)
        a = rff_experiment_on_images(train, test, grid, RffConfig(n_features=100, seed=1), **kw)
        b = rff_experiment_on_images(train, test, grid, RffConfig(n_features=100, seed=1), **kw)
        assert np.array_equal(a.curve_all.mean_nmse, b.curve_all.mean_nmse)
        assert np.array_equal(a.smin_sq, b.smin_sq)
