"""Spiked covariance generative model and its exact risk oracle.

Predictors are x ~ N(0, Sigma) with Sigma = I + rho * 11^T, the response is
y = x^T beta + eps with eps ~ N(0, sigma2), and beta = (b, ..., b) is chosen
so that Var[x^T beta] / sigma2 equals the target signal-to-noise ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import Dataset
from .rng import as_rng


@dataclass(frozen=True)
class SpikedSpec:
    """Parameters of the spiked covariance model."""

    p: int
    rho: float = 0.1
    alpha: float = 10.0
    sigma2: float = 1.0

    def __post_init__(self):
        if self.p < 1:
            raise InvalidInputError("p must be >= 1")
        if self.rho < 0:
            raise InvalidInputError("rho must be >= 0")
        if self.alpha <= 0 or self.sigma2 <= 0:
            raise InvalidInputError("alpha and sigma2 must be > 0")

    @property
    def b(self) -> float:
        """Common coefficient value: sigma * sqrt(alpha / (p + p^2 rho))."""
        return math.sqrt(self.sigma2) * math.sqrt(
            self.alpha / (self.p + self.p**2 * self.rho)
        )

    @property
    def beta_norm_sq(self) -> float:
        return self.b**2 * self.p

    @property
    def spike_coefficient(self) -> float:
        """c in the rewrite Sigma = I + c beta beta^T; c = rho p / ||beta||^2."""
        return self.rho * self.p / self.beta_norm_sq

    @property
    def oracle_normalized_mse(self) -> float:
        """Risk floor 1/(alpha+1) attained by beta_hat = beta."""
        return 1.0 / (self.alpha + 1.0)


def benchmark_spec(p: int) -> SpikedSpec:
    """The simulation defaults: sigma2=1, rho=0.1, alpha=10."""
    return SpikedSpec(p=p, rho=0.1, alpha=10.0, sigma2=1.0)


@dataclass(frozen=True)
class RiskValue:
    """Prediction risk of an estimator under the model, raw and normalized."""

    raw_mse: float
    normalized_mse: float


def beta_of(spec: SpikedSpec) -> np.ndarray:
    """The constant coefficient vector with Var[x^T beta] = alpha * sigma2."""
    return np.full(spec.p, spec.b)


def sample_training(spec: SpikedSpec, n: int, seed) -> Dataset:
    """Draw a training set of n rows from the model.

    Rows use the rank-one factorization z + sqrt(rho) * g * 1, which samples
    N(0, I + rho 11^T) exactly in O(np) per draw.
    """
    if n < 1:
        raise InvalidInputError("n must be >= 1")
    rng = as_rng(seed)
    z = rng.standard_normal((n, spec.p))
    g = rng.standard_normal(n)
    x = z + math.sqrt(spec.rho) * g[:, None]
    eps = math.sqrt(spec.sigma2) * rng.standard_normal(n)
    y = x @ beta_of(spec) + eps
    return Dataset(x=x, y=y)


def sample_design(spec: SpikedSpec, n: int, seed) -> np.ndarray:
    """Draw only the design matrix (no response)."""
    rng = as_rng(seed)
    z = rng.standard_normal((n, spec.p))
    g = rng.standard_normal(n)
    return z + math.sqrt(spec.rho) * g[:, None]


def risk(beta_hat: np.ndarray, spec: SpikedSpec) -> RiskValue:
    """Exact expected squared prediction error of a fixed estimator.

    raw = d^T Sigma d + sigma2 with d = beta_hat - beta, evaluated in closed
    form as ||d||^2 + rho (1^T d)^2 + sigma2. Normalization is by
    Var[y] = (alpha + 1) sigma2.
    """
    beta_hat = np.asarray(beta_hat, dtype=float)
    if beta_hat.shape != (spec.p,):
        raise InvalidInputError(f"beta_hat must have length {spec.p}")
    d = beta_hat - beta_of(spec)
    raw = float(d @ d + spec.rho * d.sum() ** 2 + spec.sigma2)
    return RiskValue(raw_mse=raw, normalized_mse=raw / ((spec.alpha + 1) * spec.sigma2))


def raw_risk_of_diff(d: np.ndarray, spec: SpikedSpec) -> float:
    """Closed-form d^T Sigma d + sigma2 for a precomputed d = beta_hat - beta."""
    return float(d @ d + spec.rho * d.sum() ** 2 + spec.sigma2)


def spherical_lambda_opt(spec: SpikedSpec) -> float:
    """Optimal penalty p * sigma2 / ||beta||^2 for the spherical case rho=0.

    With rho=0 this reduces to p / alpha.
    """
    if spec.rho != 0:
        raise InvalidInputError("closed-form lambda_opt applies only to rho=0")
    return spec.p * spec.sigma2 / spec.beta_norm_sq
