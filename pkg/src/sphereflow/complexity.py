"""Mendelson-complexity fixed points and local Rademacher complexity.

The central quantity is R_K(eps) = [(1/n) sum_j min{lambda_j, eps^2}]^{1/2};
the (population or empirical) complexity is the unique crossing of R_K(eps)
with eps^2 / (2 e sigma), found here as an equality root so the residual is
checkable.  Uniqueness follows from R_K(eps)/eps being non-increasing while
eps/(2 e sigma) increases.

The empirical localized Rademacher supremum Z_n(w, t) is solved exactly: in
the eigenbasis of the normalized Gram matrix it is a linear functional
maximized over the intersection of two concentric ellipsoids, whose value is
min over theta in [0, 1] of sqrt(sum_j c_j^2 / (theta + (1-theta)
lambda_j / t^2)) by strong duality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .regression import GramEigen
from .spectrum import Spectrum

TWO_E = 2.0 * math.e
RESIDUAL_RTOL = 1e-12
GOLDEN_TOL = 1e-12
EIGEN_DROP = 1e-14


@dataclass(frozen=True)
class MendelsonSolution:
    """Fixed-point radius of R_K(eps) = eps^2/(2 e sigma) and derived quantities."""

    kind: str  # "population" or "empirical"
    epsilon: float
    epsilon_sq: float
    stopping_time: float
    residual: float
    sigma: float
    n: int


@dataclass(frozen=True)
class RademacherEstimate:
    """Monte-Carlo estimate of Q_n(t) = E_w Z_n(w, t) with its sandwich partner."""

    t: float
    q_hat: float
    std_err: float
    draws: int
    r_hat: float


def _weighted_eigs(eigvals) -> tuple[np.ndarray, np.ndarray, float]:
    """Normalize input to (values, weights, resolved_tail_mass).

    Plain arrays get unit weights; a Spectrum contributes its per-level
    multiplicities without expansion plus any analytically resolved tail mass
    (valid whenever eps^2 dominates the sub-cap eigenvalues, which holds by
    many orders of magnitude at desk scale).
    """
    if isinstance(eigvals, Spectrum):
        return eigvals.mus, np.exp(eigvals.log_mults), eigvals.tail_mass
    vals = np.asarray(eigvals, dtype=np.float64)
    if vals.ndim != 1 or vals.size == 0:
        raise ValueError("eigenvalues must be a nonempty 1-D sequence")
    if np.any(vals < -1e-12):
        raise ValueError(f"negative eigenvalue {vals.min()} beyond the noise floor")
    return np.maximum(vals, 0.0), np.ones_like(vals), 0.0


def r_function(eigvals, n: int, eps: float) -> float:
    """R_K(eps) = [(1/n) sum_j min{lambda_j, eps^2}]^(1/2).

    `eigvals` may be a plain array (empirical use) or a Spectrum, in which
    case the multiplicity-weighted form sum_k N(d,k) min{mu_k, eps^2} is used
    without expansion.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if n < 1:
        raise ValueError("n must be >= 1")
    vals, weights, tail = _weighted_eigs(eigvals)
    return math.sqrt((float(weights @ np.minimum(vals, eps * eps)) + tail) / n)


def solve_mendelson(
    eigvals, n: int, sigma: float, kind: str = "population", bracket: tuple[float, float] | None = None
) -> MendelsonSolution:
    """Root of R_K(eps) = eps^2 / (2 e sigma) by bracketing + fixed-point polish.

    The default bracket [1e-12, max(sqrt(lambda_1), 2 e sigma sqrt(tr/n))] is
    expanded geometrically whenever the crossing is not yet enclosed, so a
    caller-supplied `bracket` only changes the starting interval, not the root.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    vals, weights, tail = _weighted_eigs(eigvals)
    total_mass = float(weights @ vals) + tail
    lam_max = float(vals.max()) if vals.size else 0.0
    if total_mass <= 0.0:
        raise ValueError("all eigenvalues are zero: the fixed point does not exist")

    def f(eps: float) -> float:
        return r_function_raw(vals, weights, tail, n, eps) - eps * eps / (TWO_E * sigma)

    if bracket is not None:
        lo, hi = bracket
    else:
        lo = 1e-12
        hi = max(math.sqrt(lam_max), TWO_E * sigma * math.sqrt(total_mass / n))
    # Expand geometrically until the signs bracket the crossing.
    for _ in range(200):
        if f(lo) > 0:
            break
        lo /= 8.0
    for _ in range(200):
        if f(hi) < 0:
            break
        hi *= 8.0
    if not (f(lo) > 0 > f(hi)):
        raise ValueError("failed to bracket the Mendelson fixed point")
    eps = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps)
    # Polish via the contraction eps <- sqrt(2 e sigma R(eps)).
    for _ in range(8):
        target = eps * eps / (TWO_E * sigma)
        r_val = r_function_raw(vals, weights, tail, n, eps)
        if abs(r_val - target) <= RESIDUAL_RTOL * target:
            break
        eps = math.sqrt(TWO_E * sigma * r_val)
    r_val = r_function_raw(vals, weights, tail, n, eps)
    residual = abs(r_val - eps * eps / (TWO_E * sigma))
    return MendelsonSolution(
        kind=kind,
        epsilon=eps,
        epsilon_sq=eps * eps,
        stopping_time=1.0 / (eps * eps),
        residual=residual,
        sigma=sigma,
        n=n,
    )


def r_function_raw(vals: np.ndarray, weights: np.ndarray, tail: float, n: int, eps: float) -> float:
    return math.sqrt((float(weights @ np.minimum(vals, eps * eps)) + tail) / n)


def stopping_time(solution: MendelsonSolution) -> float:
    """T = 1/eps^2, the early-stopping time induced by the fixed point."""
    return 1.0 / solution.epsilon_sq


def empirical_mendelson(gram_eigen: GramEigen, sigma: float) -> MendelsonSolution:
    """Empirical complexity from the eigenvalues of (1/n) K(X, X)."""
    return solve_mendelson(gram_eigen.lambdas, gram_eigen.n, sigma, kind="empirical")


def rademacher_z(gram_eigen: GramEigen, w: np.ndarray, t: float) -> float:
    """Exact Z_n(w, t) = sup{ |(1/n) sum_i w_i g(x_i)| : ||g||_H <= 1, ||g||_n <= t }.

    In the empirical eigenbasis the problem is max c.b over the intersection
    of the unit ball and the ellipsoid sum lambda_j b_j^2 <= t^2, with
    c_j = sqrt(lambda_j / n) <u_j, w>.  Degenerate branches: t = 0 gives 0,
    t^2 >= lambda_1 leaves only the unit ball active (value ||c||).
    """
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (gram_eigen.n,):
        raise ValueError("sign vector length must equal n")
    if w.size and abs(np.abs(w).max() - 1.0) > 1e-12:
        raise ValueError("sign vector must have unit sup-norm")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    lam = gram_eigen.lambdas
    keep = lam > EIGEN_DROP * lam[0] if lam[0] > 0 else np.zeros_like(lam, dtype=bool)
    if not keep.any():
        return 0.0
    lam = lam[keep]
    c = np.sqrt(lam / gram_eigen.n) * (gram_eigen.U[:, keep].T @ w)
    c_sq = c * c
    if t * t >= lam[0]:
        return float(np.sqrt(c_sq.sum()))
    ratio = lam / (t * t)

    def dual(theta: float) -> float:
        return float(np.sqrt((c_sq / (theta + (1.0 - theta) * ratio)).sum()))

    return _golden_min(dual, 0.0, 1.0, GOLDEN_TOL)


def _golden_min(fn, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimum value of a unimodal function on [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - invphi * (b - a)
    x2 = a + invphi * (b - a)
    f1, f2 = fn(x1), fn(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - invphi * (b - a)
            f1 = fn(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + invphi * (b - a)
            f2 = fn(x2)
    return min(fn(a), f1, f2, fn(b))


def rademacher_estimate(gram_eigen: GramEigen, t: float, draws: int, seed: int) -> RademacherEstimate:
    """Monte-Carlo Q_n(t) over i.i.d. Rademacher sign vectors.

    The attached r_hat = R_K(t) is the sandwich partner: Q_n(t) <= sqrt(2)
    R_K(t) always, and c R_K(t) <= Q_n(t) for t^2 >= 1/n.
    """
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, draws])))
    zs = np.empty(draws)
    for i in range(draws):
        w = rng.integers(0, 2, size=gram_eigen.n) * 2.0 - 1.0
        zs[i] = rademacher_z(gram_eigen, w, t)
    q_hat = float(zs.mean())
    std_err = float(zs.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    r_hat = r_function(gram_eigen.lambdas, gram_eigen.n, t)
    return RademacherEstimate(t=t, q_hat=q_hat, std_err=std_err, draws=draws, r_hat=r_hat)
