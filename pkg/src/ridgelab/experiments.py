"""Replicated simulation experiments behind every figure.

All experiments use common random numbers: each replicate index maps to a
fixed RNG substream of the master seed, every penalty value is evaluated on
the same draws, and aggregation is an ordered reduction, so results are
bitwise reproducible regardless of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .augmentation import (
    augment_columns_fixed_variance,
    min_norm_truncated,
)
from .data import (
    LabeledImages,
    RffConfig,
    load_idx,
    normalize_pixels,
    rff_transform,
    sample_rff_matrix,
)
from .errors import InvalidInputError, RankDeficiencyError
from .linalg import NEG_LAMBDA_GUARD, Dataset, SvdFactorization, thin_svd, truncate_rank
from .rng import derive_seed, rng_for
from .spiked import SpikedSpec, beta_of, raw_risk_of_diff, sample_training

GOLDEN_INV = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RiskCurve:
    """Replicate-averaged risk over a penalty grid.

    mean_nmse holds the normalized MSE for spiked-model sweeps and the plain
    empirical test MSE for data-driven curves (CV, MNIST). Entries where all
    replicates were excluded are NaN.
    """

    lambdas: np.ndarray
    mean_nmse: np.ndarray
    std_err: np.ndarray
    n_rep: int
    excluded: np.ndarray

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.size == 0:
            raise InvalidInputError("empty penalty grid")
        if not np.all(np.diff(lam) > 0):
            raise InvalidInputError("penalty grid must be strictly increasing")
        object.__setattr__(self, "lambdas", lam)
        object.__setattr__(self, "mean_nmse", np.asarray(self.mean_nmse, dtype=float))
        object.__setattr__(self, "std_err", np.asarray(self.std_err, dtype=float))
        object.__setattr__(self, "excluded", np.asarray(self.excluded, dtype=int))


@dataclass(frozen=True)
class LambdaOptResult:
    """Result of the optimal-penalty search."""

    lambda_opt: float
    min_risk: float
    bracket: tuple[float, float]
    method: str
    boundary_hit: bool = False


@dataclass(frozen=True)
class _ReplicateCache:
    """Per-replicate quantities reused across every penalty value."""

    svd: SvdFactorization
    uty: np.ndarray
    smin_sq: float


def _make_caches(spec: SpikedSpec, n: int, n_rep: int, seed: int, threads: int = 1):
    def build(rep: int) -> _ReplicateCache:
        data = sample_training(spec, n, rng_for(seed, rep))
        svd = thin_svd(data.x)
        return _ReplicateCache(svd=svd, uty=svd.u.T @ data.y, smin_sq=svd.smin_sq)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(build, range(n_rep)))
    return [build(rep) for rep in range(n_rep)]


def _nmse_at(cache: _ReplicateCache, lam: float, beta: np.ndarray, spec: SpikedSpec) -> float:
    """Normalized risk of the ridge fit at one penalty, NaN when divergent."""
    if lam <= -cache.smin_sq * (1.0 - NEG_LAMBDA_GUARD):
        return float("nan")
    s = cache.svd.s
    bh = cache.svd.v @ (s / (s**2 + lam) * cache.uty)
    return raw_risk_of_diff(bh - beta, spec) / ((spec.alpha + 1.0) * spec.sigma2)


def _curve_from_matrix(lambdas, values: np.ndarray) -> RiskCurve:
    """Aggregate a (n_rep x L) value matrix, counting NaN rows as excluded."""
    values = np.asarray(values, dtype=float)
    n_rep = values.shape[0]
    valid = np.isfinite(values)
    counts = valid.sum(axis=0)
    with np.errstate(invalid="ignore"):
        mean = np.where(counts > 0, np.nansum(values, axis=0) / np.maximum(counts, 1), np.nan)
        centered = np.where(valid, values - mean[None, :], 0.0)
        var = np.where(counts > 1, (centered**2).sum(axis=0) / np.maximum(counts - 1, 1), 0.0)
        std_err = np.sqrt(var / np.maximum(counts, 1))
    return RiskCurve(
        lambdas=np.asarray(lambdas, dtype=float),
        mean_nmse=mean,
        std_err=std_err,
        n_rep=n_rep,
        excluded=(n_rep - counts).astype(int),
    )


def lambda_sweep(
    spec: SpikedSpec,
    n: int,
    lambda_grid,
    n_rep: int,
    seed: int,
    threads: int = 1,
) -> RiskCurve:
    """Expected normalized MSE of ridge fits over a penalty grid.

    One SVD per replicate serves the whole grid; penalties at or below a
    replicate's divergence boundary exclude that replicate at that point.
    """
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if lambda_grid.size == 0:
        raise InvalidInputError("empty penalty grid")
    beta = beta_of(spec)
    caches = _make_caches(spec, n, n_rep, seed, threads)

    def row(rep: int) -> np.ndarray:
        return np.array([_nmse_at(caches[rep], lam, beta, spec) for lam in lambda_grid])

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(n_rep)))
    else:
        rows = [row(rep) for rep in range(n_rep)]
    return _curve_from_matrix(lambda_grid, np.vstack(rows))


def _golden_min(f, lo: float, hi: float, iters: int = 60) -> tuple[float, float]:
    """Golden-section minimum of a unimodal function on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN_INV * (b - a)
    d = a + GOLDEN_INV * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN_INV * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN_INV * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def _default_grid(lo: float, hi: float) -> np.ndarray:
    """Coarse search grid: linear over the negative range, log over positive."""
    parts = []
    if lo < 0:
        parts.append(np.linspace(lo, 0.0, 33))
    else:
        parts.append(np.array([max(lo, 0.0)]))
    if hi > 1e-2:
        parts.append(np.geomspace(1e-2, hi, 61))
    else:
        parts.append(np.array([hi]))
    grid = np.unique(np.concatenate(parts))
    return grid[(grid >= lo) & (grid <= hi)]


def find_lambda_opt(
    spec: SpikedSpec,
    n: int,
    n_rep: int,
    seed: int,
    search_range: tuple[float, float] | None = None,
    refine: bool = True,
    threads: int = 1,
    _caches=None,
) -> LambdaOptResult:
    """Penalty minimizing the replicate-averaged risk, negatives included.

    Coarse grid scan followed by golden-section refinement. Common random
    numbers make the averaged risk a deterministic function of the penalty,
    so the refinement is well-posed.
    """
    beta = beta_of(spec)
    caches = _caches if _caches is not None else _make_caches(spec, n, n_rep, seed, threads)
    smin_sqs = np.array([c.smin_sq for c in caches])
    if search_range is None:
        search_range = (-0.9 * float(smin_sqs.min()), 1e5)
    lo, hi = search_range
    pct5 = float(np.percentile(smin_sqs, 5))
    if lo <= -pct5:
        raise InvalidInputError(
            f"search lower bound {lo} is at or below the divergence guard {-pct5:.6g}"
        )

    def mean_risk(lam: float) -> float:
        vals = [_nmse_at(c, lam, beta, spec) for c in caches]
        return float(np.nanmean(vals))

    grid = _default_grid(lo, hi)
    risks = np.array([mean_risk(lam) for lam in grid])
    i = int(np.nanargmin(risks))
    boundary_hit = i == 0 or i == len(grid) - 1
    if not refine or boundary_hit:
        bracket = (grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)])
        return LambdaOptResult(
            lambda_opt=float(grid[i]),
            min_risk=float(risks[i]),
            bracket=(float(bracket[0]), float(bracket[1])),
            method="grid",
            boundary_hit=boundary_hit,
        )
    a, b = float(grid[i - 1]), float(grid[i + 1])
    x, fx = _golden_min(mean_risk, a, b)
    if fx > risks[i]:
        x, fx = float(grid[i]), float(risks[i])
    return LambdaOptResult(
        lambda_opt=x,
        min_risk=fx,
        bracket=(a, b),
        method="grid+golden",
        boundary_hit=False,
    )


def dimensionality_sweep(
    ps,
    n: int,
    n_rep: int,
    seed: int,
    template: SpikedSpec | None = None,
    threads: int = 1,
):
    """Min-norm and optimal-ridge risk across dimensionalities.

    Returns rows (p, risk_minnorm, risk_opt, lambda_opt); reproduces the
    double-descent shape with a peak near p = n.
    """
    rows = []
    for j, p in enumerate(ps):
        spec = replace(template, p=int(p)) if template is not None else SpikedSpec(p=int(p))
        beta = beta_of(spec)
        caches = _make_caches(spec, n, n_rep, derive_seed(seed, j), threads)
        minnorm = float(np.nanmean([_nmse_at(c, 0.0, beta, spec) for c in caches]))
        opt = find_lambda_opt(spec, n, n_rep, derive_seed(seed, j), _caches=caches)
        rows.append((int(p), minnorm, opt.min_risk, opt.lambda_opt))
    return rows


def heatmap_lambda_opt(
    n_grid,
    p_grid,
    template: SpikedSpec,
    n_rep: int,
    seed: int,
    threads: int = 1,
):
    """Optimal penalty over an (n, p) grid.

    Returns rows (n, p, lambda_opt, boundary_hit), p varying fastest.
    """
    rows = []
    for i, n in enumerate(n_grid):
        for j, p in enumerate(p_grid):
            spec = replace(template, p=int(p))
            res = find_lambda_opt(
                spec, int(n), n_rep, derive_seed(seed, i, j), threads=threads
            )
            rows.append((int(n), int(p), res.lambda_opt, res.boundary_hit))
    return rows


@dataclass(frozen=True)
class _AugCache:
    """Per (replicate, q) quantities for the augmentation sweep."""

    v_trunc: np.ndarray  # first p rows of the augmented V
    s: np.ndarray
    uty: np.ndarray
    smin_sq: float


def augmentation_sweep(
    spec: SpikedSpec,
    n: int,
    q_grid,
    mode: str,
    n_rep: int,
    seed: int,
    total_lambda: float | None = None,
    var: float = 1.0,
    lambda_opt_search: bool = True,
):
    """Risk of augmented minimum-norm estimators across q.

    mode "adaptive" uses per-column variance total_lambda/q; mode "fixed"
    uses a constant per-column variance. Returns rows
    (q, risk_trunc, risk_full, lambda_opt, excluded). The full-estimator risk
    is the exact expectation over fresh random test tails:
    risk(beta_q) + var * ||tail coefficients||^2.
    """
    if mode not in ("adaptive", "fixed"):
        raise InvalidInputError("mode must be 'adaptive' or 'fixed'")
    if mode == "adaptive" and total_lambda is None:
        raise InvalidInputError("adaptive mode requires total_lambda")
    beta = beta_of(spec)
    norm = (spec.alpha + 1.0) * spec.sigma2
    datasets = [sample_training(spec, n, rng_for(seed, rep, 0)) for rep in range(n_rep)]

    rows = []
    for qi, q in enumerate(q_grid):
        q = int(q)
        col_var = (total_lambda / q if q > 0 else 0.0) if mode == "adaptive" else var
        trunc_risks, full_risks, svd_caches = [], [], []
        excluded = 0
        for rep, data in enumerate(datasets):
            aug = augment_columns_fixed_variance(
                data.x, q, col_var, rng_for(seed, rep, 1, qi)
            )
            try:
                beta_q, beta_augm = min_norm_truncated(aug, data.y)
            except RankDeficiencyError:
                excluded += 1
                continue
            raw_trunc = raw_risk_of_diff(beta_q - beta, spec)
            trunc_risks.append(raw_trunc / norm)
            tail = beta_augm[spec.p :]
            full_risks.append((raw_trunc + col_var * float(tail @ tail)) / norm)
            if lambda_opt_search:
                svd = thin_svd(aug.x_augm)
                svd_caches.append(
                    _AugCache(
                        v_trunc=svd.v[: spec.p],
                        s=svd.s,
                        uty=svd.u.T @ data.y,
                        smin_sq=svd.smin_sq,
                    )
                )

        lam_opt = float("nan")
        if lambda_opt_search and svd_caches:
            smin = min(c.smin_sq for c in svd_caches)

            def mean_trunc_risk(lam: float) -> float:
                total = 0.0
                for c in svd_caches:
                    w = c.s / (c.s**2 + lam) * c.uty
                    d = c.v_trunc @ w - beta
                    total += raw_risk_of_diff(d, spec)
                return total / (len(svd_caches) * norm)

            lo, hi = -0.9 * smin, 1e4
            grid = _default_grid(lo, hi)
            risks = np.array([mean_trunc_risk(lam) for lam in grid])
            i = int(np.argmin(risks))
            if 0 < i < len(grid) - 1:
                lam_opt, _ = _golden_min(mean_trunc_risk, grid[i - 1], grid[i + 1])
            else:
                lam_opt = float(grid[i])

        rows.append(
            (
                q,
                float(np.mean(trunc_risks)) if trunc_risks else float("nan"),
                float(np.mean(full_risks)) if full_risks else float("nan"),
                lam_opt,
                excluded,
            )
        )
    return rows


def kfold_cv(data: Dataset, lambda_grid, k: int, seed: int) -> RiskCurve:
    """k-fold cross-validated test MSE of intercept-including ridge fits.

    Folds are a random equal-size partition (remainder spread across the
    first folds), deterministic per seed.
    """
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    if k < 2 or data.n < k:
        raise InvalidInputError("need 2 <= k <= n")
    perm = rng_for(seed).permutation(data.n)
    folds = np.array_split(perm, k)
    values = np.full((k, lambda_grid.size), np.nan)
    for fi, hold in enumerate(folds):
        train = np.setdiff1d(perm, hold, assume_unique=True)
        xt, yt = data.x[train], data.y[train]
        x_mean = xt.mean(axis=0)
        y_mean = yt.mean()
        svd = truncate_rank(thin_svd(xt - x_mean))
        uty = svd.u.T @ (yt - y_mean)
        xh = data.x[hold] - x_mean
        for li, lam in enumerate(lambda_grid):
            if lam <= -svd.smin_sq * (1.0 - NEG_LAMBDA_GUARD):
                continue
            coef = svd.v @ (svd.s / (svd.s**2 + lam) * uty)
            pred = xh @ coef + y_mean
            values[fi, li] = float(np.mean((data.y[hold] - pred) ** 2))
    return _curve_from_matrix(lambda_grid, values)


@dataclass(frozen=True)
class RffMnistResult:
    """Conditional risk curves of the MNIST random-feature experiment."""

    curve_above: RiskCurve
    curve_below: RiskCurve
    curve_all: RiskCurve
    smin_sq: np.ndarray


def rff_mnist_experiment(
    train_images_path,
    train_labels_path,
    test_images_path,
    test_labels_path,
    lambda_grid,
    rff: RffConfig | None = None,
    train_n: int = 64,
    n_rep: int = 100,
    smin_sq_threshold: float = 100.0,
    seed: int = 0,
    threads: int = 1,
) -> RffMnistResult:
    """Ridge risk on MNIST with random Fourier features and digit response.

    Per replicate: draw train_n training images, build 2*n_features random
    Fourier features, fit ridge with an unpenalized intercept across the
    penalty grid, and evaluate squared error on the full test set. Curves
    are split by the smallest squared singular value of the centered
    training feature matrix at the threshold.
    """
    rff = rff or RffConfig(seed=seed)
    train = normalize_pixels(load_idx(train_images_path, train_labels_path))
    test = normalize_pixels(load_idx(test_images_path, test_labels_path))
    return rff_experiment_on_images(
        train, test, lambda_grid, rff, train_n, n_rep, smin_sq_threshold, seed, threads
    )


def rff_experiment_on_images(
    train: LabeledImages,
    test: LabeledImages,
    lambda_grid,
    rff: RffConfig,
    train_n: int = 64,
    n_rep: int = 100,
    smin_sq_threshold: float = 100.0,
    seed: int = 0,
    threads: int = 1,
) -> RffMnistResult:
    """Core of the random-feature experiment on pre-loaded images."""
    lambda_grid = np.asarray(lambda_grid, dtype=float)
    w = sample_rff_matrix(rff)
    f_test = rff_transform(test.pixels, w)
    y_test = test.labels.astype(float)
    smin_sq = np.empty(n_rep)

    def row(rep: int) -> np.ndarray:
        rng = rng_for(seed, rep)
        idx = rng.choice(train.count, size=train_n, replace=False)
        f = rff_transform(train.pixels[idx], w)
        y = train.labels[idx].astype(float)
        x_mean = f.mean(axis=0)
        y_mean = y.mean()
        svd = truncate_rank(thin_svd(f - x_mean))
        smin_sq[rep] = svd.smin_sq
        uty = svd.u.T @ (y - y_mean)
        t = (f_test - x_mean) @ svd.v
        out = np.full(lambda_grid.size, np.nan)
        for li, lam in enumerate(lambda_grid):
            if lam <= -svd.smin_sq * (1.0 - NEG_LAMBDA_GUARD):
                continue
            pred = t @ (svd.s / (svd.s**2 + lam) * uty) + y_mean
            out[li] = float(np.mean((y_test - pred) ** 2))
        return out

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(row, range(n_rep)))
    else:
        rows = [row(rep) for rep in range(n_rep)]
    values = np.vstack(rows)
    above = smin_sq > smin_sq_threshold
    all_curve = _curve_from_matrix(lambda_grid, values)
    above_curve = (
        _curve_from_matrix(lambda_grid, values[above]) if above.any() else all_curve
    )
    below_curve = (
        _curve_from_matrix(lambda_grid, values[~above]) if (~above).any() else all_curve
    )
    return RffMnistResult(
        curve_above=above_curve,
        curve_below=below_curve,
        curve_all=all_curve,
        smin_sq=smin_sq,
    )
