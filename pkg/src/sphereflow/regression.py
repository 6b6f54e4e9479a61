"""Gradient-flow kernel regression and its interpolation limit.

Starting from f_0 = 0, gradient flow on the empirical least-squares objective
has the closed-form solution f_t(x) = K(x, X) alpha(t) with dual weights
alpha(t) = (1/n) U D(t) U^T y, where (1/n) K(X, X) = U diag(lambda) U^T and
D(t) = (1 - exp(-t lambda)) / lambda (with the analytic limit t on the null
space).  t = infinity is kernel interpolation, realized through a jittered
pseudo-inverse.  The matrix exponential is always taken through the symmetric
eigendecomposition, never by series summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericError
from .kernels import GramMatrix, KernelProfile, cross_kernel
from .sphere_data import SphereSample, TargetFunction

NULL_SPACE_REL = 1e-14
ILL_CONDITION_REL = 1e-14
INTERPOLATION_JITTER_REL = 1e-12


@dataclass(frozen=True)
class GramEigen:
    """Eigendecomposition U diag(lambda) U^T of a normalized kernel matrix."""

    U: np.ndarray
    lambdas: np.ndarray  # non-increasing, >= 0
    n: int
    profile_label: str


@dataclass(frozen=True)
class FlowPredictor:
    """Kernel regressor f_t(x) = sum_i alpha_i K(x, x_i) at flow time t."""

    gram_eigen: GramEigen
    y: np.ndarray
    t: float
    dual_weights: np.ndarray
    mode: str  # "flow" or "interpolation"
    train: SphereSample | None = None
    profile: KernelProfile | None = None
    ill_conditioned: bool = False

    def train_predictions(self) -> np.ndarray:
        """f_t on the training inputs: K(X, X) alpha, computed spectrally."""
        ge = self.gram_eigen
        return ge.n * (ge.U @ (ge.lambdas * (ge.U.T @ self.dual_weights)))


@dataclass(frozen=True)
class FlowDiagnostics:
    """Bias/variance split of the empirical risk at flow time t."""

    t: float
    bias_sq: float
    variance: float
    empirical_risk: float


def eigendecompose(gram: GramMatrix) -> GramEigen:
    """Full symmetric eigendecomposition, eigenvalues clamped at 0 and sorted."""
    if not gram.normalized:
        raise ValueError("eigendecompose expects the (1/n)-normalized Gram matrix")
    try:
        lam, U = np.linalg.eigh(gram.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    lam = lam[::-1].copy()
    U = U[:, ::-1].copy()
    trace = float(np.trace(gram.entries))
    if lam[-1] < -1e-8 * max(trace, 1e-300):
        raise NumericError(f"Gram matrix has eigenvalue {lam[-1]} far below zero (trace {trace})")
    np.maximum(lam, 0.0, out=lam)
    return GramEigen(U=U, lambdas=lam, n=gram.n, profile_label=gram.source_profile)


def _fit_filter(lam: np.ndarray, t: float) -> np.ndarray:
    """D(t) = (1 - exp(-t lambda)) / lambda with the lambda -> 0 limit t."""
    null = lam <= NULL_SPACE_REL * (lam[0] if lam[0] > 0 else 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        coeff = -np.expm1(-t * lam) / lam
    return np.where(null, t, coeff)


def fit_flow(
    gram_eigen: GramEigen,
    y: np.ndarray,
    t: float,
    train: SphereSample | None = None,
    profile: KernelProfile | None = None,
) -> FlowPredictor:
    """Dual weights alpha(t) = (1/n) U D(t) U^T y; t = inf is interpolation."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (gram_eigen.n,):
        raise ValueError(f"response length {y.shape} does not match n = {gram_eigen.n}")
    if t < 0:
        raise ValueError("flow time must be >= 0")
    lam = gram_eigen.lambdas
    ill = False
    if math.isinf(t):
        lam_max = lam[0] if lam[0] > 0 else 1.0
        positive = lam > NULL_SPACE_REL * lam_max
        ill = bool(lam[-1] / lam_max < ILL_CONDITION_REL) if lam_max > 0 else True
        jitter = INTERPOLATION_JITTER_REL * float(lam.sum())
        with np.errstate(divide="ignore"):
            coeff = np.where(positive, 1.0 / (lam + jitter), 0.0)
        mode = "interpolation"
    else:
        coeff = _fit_filter(lam, t)
        mode = "flow"
    alpha = gram_eigen.U @ (coeff * (gram_eigen.U.T @ y)) / gram_eigen.n
    return FlowPredictor(
        gram_eigen=gram_eigen,
        y=y,
        t=t,
        dual_weights=alpha,
        mode=mode,
        train=train,
        profile=profile,
        ill_conditioned=ill,
    )


def predict(predictor: FlowPredictor, queries: SphereSample) -> np.ndarray:
    """Evaluate f_t at query points via the cross-kernel row map."""
    if predictor.train is None or predictor.profile is None:
        raise ValueError("predictor lacks training sample/profile; fit with train= and profile=")
    kq = cross_kernel(predictor.profile, queries, predictor.train)
    return kq @ predictor.dual_weights


def diagnostics(gram_eigen: GramEigen, y: np.ndarray, f_star_values: np.ndarray, t: float) -> FlowDiagnostics:
    """Bias/variance decomposition at time t against known target values.

    With g* = U^T f*(X) and e = y - f*(X):
    B_t^2 = (2/n) ||exp(-t Sigma) g*||^2,
    V_t   = (2/n) ||(I - exp(-t Sigma)) U^T e||^2,
    and the empirical risk ||f_t - f*||_n^2 is computed directly.
    """
    y = np.asarray(y, dtype=np.float64)
    f_star_values = np.asarray(f_star_values, dtype=np.float64)
    n = gram_eigen.n
    if y.shape != (n,) or f_star_values.shape != (n,):
        raise ValueError("inconsistent vector lengths")
    lam = gram_eigen.lambdas
    if math.isinf(t):
        null = lam <= NULL_SPACE_REL * (lam[0] if lam[0] > 0 else 1.0)
        decay = null.astype(np.float64)
    else:
        decay = np.exp(-t * lam)
    g_star = gram_eigen.U.T @ f_star_values
    e_hat = gram_eigen.U.T @ (y - f_star_values)
    bias_sq = 2.0 / n * float(np.sum((decay * g_star) ** 2))
    variance = 2.0 / n * float(np.sum(((1.0 - decay) * e_hat) ** 2))
    ft_train = gram_eigen.U @ ((1.0 - decay) * (gram_eigen.U.T @ y))
    emp = float(np.mean((ft_train - f_star_values) ** 2))
    return FlowDiagnostics(t=t, bias_sq=bias_sq, variance=variance, empirical_risk=emp)


def excess_risk(predictor: FlowPredictor, target: TargetFunction, test: SphereSample) -> float:
    """Monte-Carlo L2 excess risk: mean squared error over the test sample."""
    if test.n == 0:
        raise ValueError("test sample is empty")
    preds = predict(predictor, test)
    return float(np.mean((preds - target(test.points)) ** 2))
