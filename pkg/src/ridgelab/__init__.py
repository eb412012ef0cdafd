"""ridgelab: high-dimensional ridge regression and minimum-norm interpolation lab."""

from .linalg import (
    Dataset,
    RidgeFit,
    SvdFactorization,
    fit_with_intercept,
    gradient_descent_ols,
    kernel_min_norm_predict,
    min_norm_ols,
    predict,
    ridge_direct,
    ridge_path,
    thin_svd,
)
from .spiked import RiskValue, SpikedSpec, beta_of, benchmark_spec, risk, sample_training

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "RidgeFit",
    "RiskValue",
    "SpikedSpec",
    "SvdFactorization",
    "beta_of",
    "fit_with_intercept",
    "gradient_descent_ols",
    "kernel_min_norm_predict",
    "min_norm_ols",
    "benchmark_spec",
    "predict",
    "ridge_direct",
    "ridge_path",
    "risk",
    "sample_training",
    "thin_svd",
    "__version__",
]
