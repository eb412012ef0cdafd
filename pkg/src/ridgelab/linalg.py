"""Exact linear estimators built on the thin SVD.

Ridge solutions are computed as V diag(s/(s^2+lambda)) U^T y, which stays
valid for negative penalties down to (but excluding) -s_min^2. The lambda=0
limit for n < p is the minimum-norm interpolator X^+ y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidInputError,
    SingularKernelError,
    SingularPenaltyError,
    StepTooLargeError,
)

# Relative gap kept between lambda and the -s_min^2 divergence boundary.
NEG_LAMBDA_GUARD = 1e-6

# Singular values below s_max * max(n, p) * RANK_RTOL count as zero.
RANK_RTOL = 1e-12


@dataclass(frozen=True)
class Dataset:
    """A design matrix paired with its response vector."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if x.ndim != 2 or y.ndim != 1:
            raise InvalidInputError("x must be 2-d and y 1-d")
        if x.shape[0] < 1 or x.shape[1] < 1:
            raise InvalidInputError("x must have at least one row and column")
        if y.shape[0] != x.shape[0]:
            raise DimensionMismatchError(
                f"y has length {y.shape[0]} but x has {x.shape[0]} rows"
            )
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise InvalidInputError("non-finite entries in dataset")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]


@dataclass(frozen=True)
class SvdFactorization:
    """Thin SVD of a design matrix: x = u @ diag(s) @ v.T."""

    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    @property
    def r(self) -> int:
        return self.s.shape[0]

    @property
    def smin_sq(self) -> float:
        return float(self.s[-1] ** 2)

    @property
    def smax_sq(self) -> float:
        return float(self.s[0] ** 2)

    def rank_tolerance(self) -> float:
        n, p = self.u.shape[0], self.v.shape[0]
        return float(self.s[0]) * max(n, p) * RANK_RTOL


@dataclass(frozen=True)
class RidgeFit:
    """Fitted ridge coefficients with optional unpenalized intercept."""

    coefficients: np.ndarray
    intercept: float
    lam: float
    smin_sq: float


def thin_svd(x: np.ndarray) -> SvdFactorization:
    """Thin SVD with singular values in descending order.

    Numerically-zero singular values are retained; rank decisions are left
    to callers via `rank_tolerance`.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise InvalidInputError("x must be a matrix")
    if not np.isfinite(x).all():
        raise InvalidInputError("non-finite entries in design matrix")
    u, s, vt = np.linalg.svd(x, full_matrices=False)
    return SvdFactorization(u=u, s=s, v=vt.T)


def truncate_rank(svd: SvdFactorization, tol: float | None = None) -> SvdFactorization:
    """Drop trailing singular values at or below a tolerance.

    Needed after column centering, which reduces the rank of an n <= p
    design to n-1; the smallest retained value then defines the divergence
    boundary for negative penalties.
    """
    from .errors import RankDeficiencyError

    if tol is None:
        tol = svd.rank_tolerance()
    r = int(np.sum(svd.s > tol))
    if r == 0:
        raise RankDeficiencyError("design is numerically zero")
    if r == svd.r:
        return svd
    return SvdFactorization(u=svd.u[:, :r], s=svd.s[:r], v=svd.v[:, :r])


def _check_penalty(smin_sq: float, lam: float) -> None:
    if lam <= -smin_sq * (1.0 - NEG_LAMBDA_GUARD):
        raise SingularPenaltyError(
            f"lambda={lam} is at or below the divergence boundary "
            f"-s_min^2={-smin_sq:.6g}"
        )


def ridge_path(svd: SvdFactorization, y: np.ndarray, lam: float) -> np.ndarray:
    """Ridge solution V diag(s/(s^2+lambda)) U^T y for one penalty value."""
    y = np.asarray(y, dtype=float)
    if y.shape != (svd.u.shape[0],):
        raise DimensionMismatchError("y length does not match the design rows")
    _check_penalty(svd.smin_sq, lam)
    weights = svd.s / (svd.s**2 + lam)
    return svd.v @ (weights * (svd.u.T @ y))


def ridge_path_grid(
    svd: SvdFactorization, y: np.ndarray, lambdas: np.ndarray
) -> np.ndarray:
    """Ridge solutions for a whole penalty grid from one factorization.

    Returns a (len(lambdas), p) array. Penalties at or below the divergence
    boundary must be filtered by the caller.
    """
    y = np.asarray(y, dtype=float)
    uty = svd.u.T @ y
    lambdas = np.asarray(lambdas, dtype=float)
    weights = svd.s[None, :] / (svd.s[None, :] ** 2 + lambdas[:, None])
    return (weights * uty[None, :]) @ svd.v.T


def min_norm_ols(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution X^+ y.

    Singular values below the rank tolerance are treated as zero, so the
    call is safe for rank-deficient designs.
    """
    svd = thin_svd(x)
    y = np.asarray(y, dtype=float)
    if y.shape != (x.shape[0],):
        raise DimensionMismatchError("y length does not match the design rows")
    tol = svd.rank_tolerance()
    inv = np.zeros_like(svd.s)
    keep = svd.s > tol
    inv[keep] = 1.0 / svd.s[keep]
    return svd.v @ (inv * (svd.u.T @ y))


def ridge_direct(x: np.ndarray, y: np.ndarray, lam: float) -> np.ndarray:
    """Ridge solution by dense solve of (X^T X + lambda I) b = X^T y.

    Independent oracle for `ridge_path`; O(p^3), intended for tests and
    small designs.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = x.shape[1]
    a = x.T @ x + lam * np.eye(p)
    try:
        return np.linalg.solve(a, x.T @ y)
    except np.linalg.LinAlgError as exc:
        raise SingularPenaltyError(f"X^T X + {lam} I is singular") from exc


def fit_with_intercept(data: Dataset, lam: float) -> RidgeFit:
    """Ridge fit with an unpenalized intercept, via column/response centering."""
    x_mean = data.x.mean(axis=0)
    y_mean = float(data.y.mean())
    xc = data.x - x_mean
    yc = data.y - y_mean
    svd = truncate_rank(thin_svd(xc))
    coef = ridge_path(svd, yc, lam)
    return RidgeFit(
        coefficients=coef,
        intercept=y_mean - float(x_mean @ coef),
        lam=float(lam),
        smin_sq=svd.smin_sq,
    )


def predict(fit: RidgeFit, x_new: np.ndarray) -> np.ndarray:
    """Apply a fit to new rows: x_new @ coefficients + intercept."""
    x_new = np.asarray(x_new, dtype=float)
    if x_new.ndim == 1:
        x_new = x_new[None, :]
    if x_new.shape[1] != fit.coefficients.shape[0]:
        raise DimensionMismatchError(
            f"x_new has {x_new.shape[1]} columns, fit expects "
            f"{fit.coefficients.shape[0]}"
        )
    return x_new @ fit.coefficients + fit.intercept


def kernel_min_norm_predict(
    k_train: np.ndarray, k_test: np.ndarray, y: np.ndarray
) -> float:
    """Kernelized minimum-norm prediction k^T K^{-1} y."""
    k_train = np.asarray(k_train, dtype=float)
    k_test = np.asarray(k_test, dtype=float)
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if k_train.shape != (n, n) or k_test.shape != (n,):
        raise DimensionMismatchError("kernel shapes do not match y")
    if not np.allclose(k_train, k_train.T, atol=1e-8):
        raise SingularKernelError("kernel matrix is not symmetric")
    eigvals = np.linalg.eigvalsh(k_train)
    if eigvals[0] <= eigvals[-1] * n * RANK_RTOL:
        raise SingularKernelError("kernel matrix is singular to tolerance")
    return float(k_test @ np.linalg.solve(k_train, y))


def gradient_descent_ols(
    x: np.ndarray,
    y: np.ndarray,
    step: float | None = None,
    iters: int = 10**6,
    grad_tol: float = 1e-10,
) -> np.ndarray:
    """Gradient descent on the squared loss from a zero start.

    Each update lies in the row space of x, so the converged iterate is the
    minimum-norm solution. Default step is 1/s_max^2.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    svd = thin_svd(x)
    if step is None:
        step = 1.0 / svd.smax_sq
    beta = np.zeros(x.shape[1])
    for _ in range(iters):
        grad = x.T @ (y - x @ beta)
        if np.linalg.norm(grad) < grad_tol:
            break
        beta = beta + step * grad
        if np.linalg.norm(beta) > 1e12:
            raise StepTooLargeError(f"iterates diverged with step={step}")
    return beta
