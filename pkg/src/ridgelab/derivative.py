"""Monte-Carlo estimate of the risk derivative at lambda = 0+.

For the spiked model the derivative of the expected risk at zero penalty
decomposes into four terms driven by the projection moments
P_k = E[beta^T V S^{-2k} V^T beta] and the trace E[Tr(S^-4)]:

    2 c ||beta||^2 E[P1] - 2 c E[P0 P1] - 2 sigma2 E[Tr(S^-4)] - 2 c sigma2 E[P2]

with c = rho p / ||beta||^2. A positive derivative at 0+ implies the optimal
penalty is negative. The cross term keeps the per-replicate product P0*P1
(the decoupled E[P0]E[P1] variant is reported alongside for comparison).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, RankDeficiencyError
from .linalg import thin_svd
from .rng import rng_for
from .spiked import SpikedSpec, beta_of, raw_risk_of_diff, sample_design, sample_training


@dataclass(frozen=True)
class DerivativeEstimate:
    """Estimated derivative of the expected risk at lambda = 0+."""

    value: float
    std_err: float
    terms: dict = field(default_factory=dict)
    n_rep: int = 0
    value_decoupled_cross: float = float("nan")


@dataclass(frozen=True)
class FiniteDifferenceEstimate:
    """Central finite-difference estimate of the same derivative."""

    value: float
    std_err: float
    eps: float
    n_rep: int


def projection_moments(x: np.ndarray, beta: np.ndarray, k_max: int) -> np.ndarray:
    """Per-design moments beta^T V S^{-2k} V^T beta for k = 0..k_max."""
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (x.shape[1],):
        raise InvalidInputError("beta length must match the design columns")
    svd = thin_svd(x)
    if svd.s[-1] <= svd.rank_tolerance():
        raise RankDeficiencyError("design has a numerically zero singular value")
    proj_sq = (svd.v.T @ beta) ** 2
    ks = np.arange(k_max + 1)
    return np.array([float(proj_sq @ svd.s ** (-2.0 * k)) for k in ks])


def trace_s4(x: np.ndarray) -> float:
    """Sum of s_i^-4 over the retained singular values."""
    svd = thin_svd(x)
    if svd.s[-1] <= svd.rank_tolerance():
        raise RankDeficiencyError("design has a numerically zero singular value")
    return float(np.sum(svd.s**-4.0))


def _replicate_derivative(spec: SpikedSpec, n: int, seed: int, rep: int):
    """Per-replicate derivative value and its term decomposition."""
    x = sample_design(spec, n, rng_for(seed, rep))
    beta = beta_of(spec)
    p0, p1, p2 = projection_moments(x, beta, 2)
    tr = trace_s4(x)
    c = spec.spike_coefficient
    terms = np.array(
        [
            2.0 * c * spec.beta_norm_sq * p1,
            -2.0 * c * p0 * p1,
            -2.0 * spec.sigma2 * tr,
            -2.0 * c * spec.sigma2 * p2,
        ]
    )
    return terms, p0, p1


def derivative_at_zero(
    spec: SpikedSpec, n: int, n_rep: int, seed: int
) -> DerivativeEstimate:
    """Average the per-replicate derivative over n_rep fresh designs."""
    if n >= spec.p:
        raise InvalidInputError("the derivative formula requires n < p")
    all_terms = np.empty((n_rep, 4))
    p0s = np.empty(n_rep)
    p1s = np.empty(n_rep)
    for rep in range(n_rep):
        all_terms[rep], p0s[rep], p1s[rep] = _replicate_derivative(spec, n, seed, rep)
    values = all_terms.sum(axis=1)
    mean_terms = all_terms.mean(axis=0)
    c = spec.spike_coefficient
    decoupled = (
        mean_terms[0]
        - 2.0 * c * p0s.mean() * p1s.mean()
        + mean_terms[2]
        + mean_terms[3]
    )
    return DerivativeEstimate(
        value=float(values.mean()),
        std_err=float(values.std(ddof=1) / np.sqrt(n_rep)) if n_rep > 1 else 0.0,
        terms={
            "signal": float(mean_terms[0]),
            "cross": float(mean_terms[1]),
            "trace": float(mean_terms[2]),
            "spike_noise": float(mean_terms[3]),
        },
        n_rep=n_rep,
        value_decoupled_cross=float(decoupled),
    )


def derivative_fd_oracle(
    spec: SpikedSpec,
    n: int,
    n_rep: int,
    eps: float | None = None,
    seed: int = 0,
) -> FiniteDifferenceEstimate:
    """Central finite difference of the expected risk around lambda = 0.

    Uses common random numbers: both penalty values are evaluated on the same
    training draws. Default eps is 1e-3 times the median s_min^2.
    """
    datasets = [sample_training(spec, n, rng_for(seed, rep)) for rep in range(n_rep)]
    svds = [thin_svd(d.x) for d in datasets]
    if eps is None:
        eps = 1e-3 * float(np.median([s.smin_sq for s in svds]))
    if eps <= 0:
        raise InvalidInputError("eps must be > 0")
    beta = beta_of(spec)
    fd = np.empty(n_rep)
    for rep, (data, svd) in enumerate(zip(datasets, svds)):
        uty = svd.u.T @ data.y
        risks = []
        for lam in (eps, -eps):
            bh = svd.v @ (svd.s / (svd.s**2 + lam) * uty)
            risks.append(raw_risk_of_diff(bh - beta, spec))
        fd[rep] = (risks[0] - risks[1]) / (2.0 * eps)
    return FiniteDifferenceEstimate(
        value=float(fd.mean()),
        std_err=float(fd.std(ddof=1) / np.sqrt(n_rep)) if n_rep > 1 else 0.0,
        eps=float(eps),
        n_rep=n_rep,
    )


def sign_change_scan(
    specs: list[SpikedSpec], n: int, n_rep: int, seed: int
):
    """Derivative estimates over an ascending p grid.

    Returns (rows, crossing_p) where rows are (p, value, std_err) and
    crossing_p is the smallest p whose estimate exceeds +2 standard errors
    (None when no crossing occurs).
    """
    ps = [s.p for s in specs]
    if ps != sorted(ps):
        raise InvalidInputError("p grid must be ascending")
    rows = []
    crossing_p = None
    for i, spec in enumerate(specs):
        sub_seed = int(np.random.SeedSequence([seed, i]).generate_state(1)[0])
        est = derivative_at_zero(spec, n, n_rep, seed=sub_seed)
        rows.append((spec.p, est.value, est.std_err))
        if crossing_p is None and est.value > 2.0 * est.std_err:
            crossing_p = spec.p
    return rows, crossing_p
