"""Metric entropy, covering radii, lower-bound certificates, and rate curves.

The computable entropy proxy is K(eps) = 1/2 sum_{lambda_j > eps^2}
log(lambda_j / eps^2), which sandwiches the covering entropy of the RKHS unit
ball: V_2(6 eps) <= K(eps) <= V_2(eps).  The covering radius solves
n eps^2 = K(sqrt(2) sigma eps); the 6x sandwich slack is surfaced as a second
root rather than hidden inside constants.

Rate curves are evaluated in exact rational arithmetic (a decimal gamma like
1.8 is read as 9/5), so regime boundaries and exponents such as 5/9 come out
exact rather than one ulp off.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .spectrum import Spectrum

DEFAULT_C2 = 0.2  # certifier constant; proofs use c2 <= 1/5

INNER = "inner"
NTK = "ntk"
INTERPOLATION = "interpolation"
FAMILIES = (INNER, NTK, INTERPOLATION)


# ---------------------------------------------------------------------------
# Metric entropy and covering radius
# ---------------------------------------------------------------------------

def metric_entropy(spectrum: Spectrum, eps: float) -> float:
    """K(eps) = 1/2 sum_{mu_k > eps^2} N(d, k) log(mu_k / eps^2)."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    eps_sq = eps * eps
    mus = spectrum.mus
    active = mus > eps_sq
    if not active.any():
        return 0.0
    log_terms = spectrum.log_mults[active] + np.log(np.log(mus[active] / eps_sq))
    with np.errstate(over="ignore"):
        return 0.5 * float(np.exp(log_terms).sum())


@dataclass(frozen=True)
class EntropyFixture:
    """Root of n eps^2 = K(sqrt(2) sigma eps) plus the conservative 6x endpoint."""

    spectrum: Spectrum
    n: int
    sigma: float
    eps_bar: float
    eps_bar_upper: float  # root with the deflated argument K(sqrt(2) sigma eps / 6)
    entropy_at_root: float
    residual: float


def covering_radius(spectrum: Spectrum, n: int, sigma: float) -> EntropyFixture:
    """Solve n eps^2 = K(sqrt(2) sigma eps) by bracketed root finding."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    eps_bar = _entropy_root(spectrum, n, sigma, deflate=1.0)
    eps_upper = _entropy_root(spectrum, n, sigma, deflate=6.0)
    entropy = metric_entropy(spectrum, math.sqrt(2.0) * sigma * eps_bar)
    residual = abs(n * eps_bar**2 - entropy)
    return EntropyFixture(
        spectrum=spectrum,
        n=n,
        sigma=sigma,
        eps_bar=eps_bar,
        eps_bar_upper=eps_upper,
        entropy_at_root=entropy,
        residual=residual,
    )


def _entropy_root(spectrum: Spectrum, n: int, sigma: float, deflate: float) -> float:
    mu_max = float(spectrum.mus.max())
    if mu_max <= 0:
        raise ValueError("spectrum has no positive eigenvalues")

    def g(eps: float) -> float:
        return n * eps * eps - metric_entropy(spectrum, math.sqrt(2.0) * sigma * eps / deflate)

    hi = deflate * math.sqrt(mu_max / (2.0 * sigma * sigma)) * 1.0000001
    lo = hi / 2.0
    for _ in range(2000):
        if g(lo) < 0:
            break
        lo /= 2.0
    else:
        raise ValueError("entropy never exceeds n eps^2 on the bracket: spectrum too small relative to n")
    return brentq(g, lo, hi, rtol=4 * np.finfo(float).eps, maxiter=500)


@dataclass(frozen=True)
class LowerBoundCertificate:
    """Both sides of the strengthened entropy condition for the minimax bound."""

    holds: bool
    lhs: float
    rhs: float
    eps_bar: float
    c2: float
    risk_lower_bound: float  # (1/2) (c2 / 12)^2  eps_bar^2, the certified rate


def certify_lower_bound(spectrum: Spectrum, n: int, sigma: float, c2: float = DEFAULT_C2) -> LowerBoundCertificate:
    """Check sum_{mu_k > c2^2 eps_bar^2 / 36} N log(mu_k / (c2^2 eps_bar^2 / 36)) >= 10 n eps_bar^2."""
    if c2 <= 0:
        raise ValueError("c2 must be positive")
    fixture = covering_radius(spectrum, n, sigma)
    eps_bar = fixture.eps_bar
    thr = (c2 * eps_bar) ** 2 / 36.0
    mus = spectrum.mus
    active = mus > thr
    lhs = 0.0
    if active.any():
        log_terms = spectrum.log_mults[active] + np.log(np.log(mus[active] / thr))
        with np.errstate(over="ignore"):
            lhs = float(np.exp(log_terms).sum())
    rhs = 10.0 * n * eps_bar**2
    return LowerBoundCertificate(
        holds=bool(lhs >= rhs),
        lhs=lhs,
        rhs=rhs,
        eps_bar=eps_bar,
        c2=c2,
        risk_lower_bound=0.5 * (c2 / 12.0) ** 2 * eps_bar**2,
    )


# ---------------------------------------------------------------------------
# Theoretical rate curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatePoint:
    """Excess-risk exponents at one scaling gamma (risk ~ n^{-n_exponent})."""

    gamma: float
    family: str
    p: int
    n_exponent: float
    d_exponent: float
    log_factor: bool
    match_status: str  # matched | matched_up_to_log | matched_up_to_epsilon | upper_only


def _as_fraction(gamma) -> Fraction:
    """Exact rational gamma; floats are read via their shortest decimal repr,
    so 1.8 means 9/5, not the binary float."""
    if isinstance(gamma, Fraction):
        return gamma
    if isinstance(gamma, int):
        return Fraction(gamma)
    return Fraction(repr(float(gamma)))


def _is_even_integer(g: Fraction) -> bool:
    return g.denominator == 1 and g.numerator % 2 == 0


def rate_curve(gamma, family: str = INNER) -> RatePoint:
    """Optimal excess-risk exponent for n = d^gamma in the chosen family.

    Regime boundaries follow the half-open interval conventions literally:
    gamma exactly equal to an odd integer sits in the right-closed log-factor
    branch.
    """
    g = _as_fraction(gamma)
    if g <= 0:
        raise ValueError("gamma must be positive")
    if family == INNER:
        return _inner_rate(g)
    if family == NTK:
        return _ntk_rate(g)
    if family == INTERPOLATION:
        return _interpolation_rate(g)
    raise ValueError(f"unknown rate family {family!r}")


def _point(g: Fraction, family: str, p: int, exponent: Fraction, log_factor: bool, status: str) -> RatePoint:
    return RatePoint(
        gamma=float(g),
        family=family,
        p=p,
        n_exponent=float(exponent),
        d_exponent=float(g * exponent),
        log_factor=log_factor,
        match_status=status,
    )


def _inner_rate(g: Fraction) -> RatePoint:
    p = math.floor(g / 2)
    if _is_even_integer(g):
        return _point(g, INNER, p, Fraction(1, 2), False, "matched")
    if g - 2 * p <= 1:  # gamma in (2p, 2p + 1]: upper has log, lower loses n^-epsilon
        return _point(g, INNER, p, (g - p) / g, True, "matched_up_to_epsilon")
    return _point(g, INNER, p, Fraction(p + 1) / g, False, "matched")


def _ntk_rate(g: Fraction) -> RatePoint:
    p = math.floor(g / 2) if g < 4 else 2 * math.floor(g / 4)
    if g == 2 or (g.denominator == 1 and g.numerator % 4 == 0):
        return _point(g, NTK, p, Fraction(1, 2), False, "matched")
    in_log_branch = (g <= 1) or (2 < g <= 3) or (g > 4 and 0 < g - 4 * math.floor(g / 4) <= 2)
    if in_log_branch:
        return _point(g, NTK, p, (g - p) / g, True, "matched_up_to_epsilon")
    exponent = Fraction(p + 1 + (1 if p >= 2 else 0)) / g
    return _point(g, NTK, p, exponent, False, "matched")


def _interpolation_rate(g: Fraction) -> RatePoint:
    if g <= 1:
        raise ValueError("interpolation rate requires gamma > 1")
    ell = math.floor(g)
    eta = min(Fraction(ell + 1) / g - 1, 1 - Fraction(ell) / g)
    return _point(g, INTERPOLATION, ell, eta, False, "upper_only")


def rate_table(gammas, families, errors: list | None = None) -> list[RatePoint]:
    """rate_curve mapped over a grid; per-point errors are collected, not fatal.

    Pass a list as `errors` to receive (gamma, family, message) tuples for the
    points that were skipped.
    """
    out: list[RatePoint] = []
    for family in families:
        for gamma in gammas:
            try:
                out.append(rate_curve(gamma, family))
            except ValueError as exc:
                if errors is not None:
                    errors.append((gamma, family, str(exc)))
    return out
