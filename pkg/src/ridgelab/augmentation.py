"""Random-predictor augmentation and its ridge equivalence.

Appending q random columns with per-column variance lambda/q and fitting
minimum-norm least squares makes the first p coefficients converge (q -> inf)
to the ridge solution with penalty lambda; the same holds for predictions on
test points extended with fresh random tails. Row augmentation with q noise
rows and zero responses converges to the same limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import Dataset, min_norm_ols
from .rng import as_rng


@dataclass(frozen=True)
class AugmentedDesign:
    """Original design with q appended random columns."""

    x_orig: np.ndarray
    x_rand: np.ndarray
    var_per_col: float

    @property
    def q(self) -> int:
        return self.x_rand.shape[1]

    @property
    def p(self) -> int:
        return self.x_orig.shape[1]

    @property
    def x_augm(self) -> np.ndarray:
        if self.q == 0:
            return self.x_orig
        return np.hstack([self.x_orig, self.x_rand])


def augment_columns(x: np.ndarray, q: int, total_lambda: float, seed) -> AugmentedDesign:
    """Append q i.i.d. N(0, total_lambda/q) columns.

    As q grows, X_q X_q^T concentrates around total_lambda * I_n.
    """
    if q < 1:
        raise InvalidInputError("q must be >= 1; use q=0 via fixed-variance mode")
    if total_lambda <= 0:
        raise InvalidInputError("total_lambda must be > 0")
    return augment_columns_fixed_variance(x, q, total_lambda / q, seed)


def augment_columns_fixed_variance(
    x: np.ndarray, q: int, var: float, seed
) -> AugmentedDesign:
    """Append q i.i.d. N(0, var) columns with variance independent of q."""
    x = np.asarray(x, dtype=float)
    if q < 0 or var < 0:
        raise InvalidInputError("q and var must be non-negative")
    rng = as_rng(seed)
    x_rand = math.sqrt(var) * rng.standard_normal((x.shape[0], q))
    return AugmentedDesign(x_orig=x, x_rand=x_rand, var_per_col=float(var))


def min_norm_truncated(aug: AugmentedDesign, y: np.ndarray):
    """Minimum-norm fit on the augmented design, full and truncated.

    Returns (beta_q, beta_augm) where beta_q is the first p components of
    beta_augm = X_augm^+ y. Uses the n x n Gram system when the augmented
    design has full row rank, which is O(n^2 (p+q)) for large q.
    """
    y = np.asarray(y, dtype=float)
    xa = aug.x_augm
    n = xa.shape[0]
    beta_augm = None
    if n <= xa.shape[1]:
        gram = xa @ xa.T
        try:
            alpha = np.linalg.solve(gram, y)
            cond = np.linalg.cond(gram)
            if np.isfinite(cond) and cond < 1e12:
                beta_augm = xa.T @ alpha
        except np.linalg.LinAlgError:
            pass  # rank-deficient (e.g. zero-variance block); use the SVD path
    if beta_augm is None:
        beta_augm = min_norm_ols(xa, y)
    return beta_augm[: aug.p], beta_augm


def predict_augmented(
    aug: AugmentedDesign, beta_augm: np.ndarray, x_new: np.ndarray, seed
) -> float:
    """Predict for a test point extended with a fresh random tail.

    The tail is drawn from the same law as the augmentation columns; as
    q -> inf the prediction converges to the ridge prediction.
    """
    x_new = np.asarray(x_new, dtype=float)
    if x_new.shape != (aug.p,):
        raise InvalidInputError(f"x_new must have length {aug.p}")
    rng = as_rng(seed)
    tail = math.sqrt(aug.var_per_col) * rng.standard_normal(aug.q)
    return float(x_new @ beta_augm[: aug.p] + tail @ beta_augm[aug.p :])


def augment_rows(
    x: np.ndarray, y: np.ndarray, q: int, total_lambda: float, seed
) -> Dataset:
    """Append q noise rows with zero responses.

    The OLS/min-norm fit on the result converges to the ridge solution with
    penalty total_lambda as q -> inf; with the deterministic sqrt(lambda) I
    block instead, the identity is exact.
    """
    if q < 1:
        raise InvalidInputError("q must be >= 1")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rng = as_rng(seed)
    rows = math.sqrt(total_lambda / q) * rng.standard_normal((q, x.shape[1]))
    return Dataset(x=np.vstack([x, rows]), y=np.concatenate([y, np.zeros(q)]))
