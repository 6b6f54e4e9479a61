"""Mercer spectra of inner-product kernels on the d-sphere.

Every degree k carries one eigenvalue mu_k with multiplicity N(d, k); the
eigenvalue is the 1-D projection integral of the profile against the degree-k
Legendre (Gegenbauer) polynomial under the sphere's projection weight
(1 - t^2)^{(d-2)/2}.  Quadrature covers arbitrary profiles; the two-layer NTK
additionally has exact Gamma-function closed forms which remain accurate far
past the point where double-precision quadrature drowns in cancellation noise,
and which let the trace be accumulated to convergence beyond the materialized
level cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln, gammaln, roots_jacobi, roots_legendre

from .errors import NumericError
from .kernels import KernelProfile, ntk2_profile, phi

K_MAX = 512
DEFAULT_TAIL_TOL = 1e-8
QUAD_REL_TOL = 1e-10
# Anything below -1e-14 * Phi(1) means the profile is not positive definite
# at this dimension; smaller negatives are quadrature cancellation noise.
NOISE_FLOOR = 1e-14
_MAX_NODES = 16384
_EPS = float(np.finfo(np.float64).eps)


def _quad_noise_floor(witness: float, n_nodes: int, scale: float) -> float:
    """Rounding resolution of one quadrature sum.

    The witness sum |w| |Phi| |P_k| bounds the cancellation mass; the sqrt
    node factor covers error accumulation in the nodes/recurrence.  The
    1e-17 * Phi(1) term is the empirical floor of the d >= 3 rules, where
    interior Legendre decay makes the witness far too optimistic to trust
    alone.
    """
    return max(64.0 * _EPS * math.sqrt(n_nodes) * witness, 1e-17 * scale)


# ---------------------------------------------------------------------------
# Multiplicities and Legendre polynomials
# ---------------------------------------------------------------------------

def multiplicity(d: int, k: int) -> int:
    """Dimension N(d, k) of degree-k spherical harmonics on the d-sphere, exact."""
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if k == 0:
        return 1
    num = (2 * k + d - 1) * math.comb(k + d - 2, k - 1)
    assert num % k == 0
    return num // k


def log_multiplicity(d: int, k) -> np.ndarray:
    """log N(d, k) through log-Gamma; safe for d * k far beyond big-int comfort."""
    k = np.asarray(k, dtype=np.float64)
    out = np.where(
        k == 0,
        0.0,
        np.log(2 * k + d - 1) - np.log(np.maximum(k, 1)) + gammaln(k + d - 1) - gammaln(d) - gammaln(np.maximum(k, 1)),
    )
    return out if out.ndim else float(out)


def legendre(d: int, k: int, t):
    """Legendre polynomial of degree k for the d-sphere, normalized P_k(1) = 1.

    Three-term recurrence in the (d+1)-ambient convention:
    P_0 = 1, P_1 = t, (k + d - 2) P_k = (2k + d - 3) t P_{k-1} - (k - 1) P_{k-2}.
    """
    t = np.asarray(t, dtype=np.float64)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValueError("argument outside [-1, 1]")
    table = _legendre_table(d, k, np.atleast_1d(t))
    out = table[k].reshape(t.shape) if t.ndim else table[k][0]
    return out if t.ndim else float(out)


def _legendre_table(d: int, kmax: int, t: np.ndarray) -> np.ndarray:
    """All degrees 0..kmax evaluated at the nodes, shape (kmax + 1, len(t))."""
    P = np.empty((kmax + 1, t.size))
    P[0] = 1.0
    if kmax >= 1:
        P[1] = t
    for k in range(2, kmax + 1):
        P[k] = ((2 * k + d - 3) * t * P[k - 1] - (k - 1) * P[k - 2]) / (k + d - 2)
    return P


def log_surface_ratio(d: int) -> float:
    """log(omega_{d-1} / omega_d) = log Gamma((d+1)/2) - log(sqrt(pi) Gamma(d/2))."""
    return float(gammaln((d + 1) / 2) - 0.5 * np.log(np.pi) - gammaln(d / 2))


# ---------------------------------------------------------------------------
# Quadrature eigenvalues
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _jacobi_rule(d: int, n_nodes: int):
    """Gauss-Jacobi rule absorbing the sphere weight (1 - t^2)^{(d-2)/2}."""
    a = (d - 2) / 2.0
    return roots_jacobi(n_nodes, a, a)


def _mu_batch(profile: KernelProfile, d: int, kmax: int, n_nodes: int):
    """(mu_k, rounding witness) for all k = 0..kmax at a fixed node count."""
    x, w = _jacobi_rule(d, n_nodes)
    f = np.asarray(phi(profile, x), dtype=np.float64)
    P = _legendre_table(d, kmax, x)
    pref = np.exp(log_surface_ratio(d))
    mus = pref * (P @ (w * f))
    witness = pref * (np.abs(P) @ np.abs(w * f))
    return mus, witness


def eigenvalue_quadrature(profile: KernelProfile, d: int, k: int) -> float:
    """Funk-Hecke eigenvalue mu_k by adaptive Gauss-Jacobi quadrature.

    Node counts are doubled until two consecutive evaluations agree to 1e-10
    relative (with an absolute floor at the cancellation noise level); values
    inside the noise floor are clamped to exactly 0.
    """
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    scale = abs(profile.phi_at_one)
    n_nodes = max(64, k // 2 + 32)
    prev = None
    while n_nodes <= _MAX_NODES:
        mus, wit = _mu_batch(profile, d, k, n_nodes)
        cur = float(mus[k])
        floor = _quad_noise_floor(float(wit[k]), n_nodes, scale)
        if prev is not None and abs(cur - prev) <= QUAD_REL_TOL * abs(cur) + floor:
            return _clamp_eigenvalue(cur, floor, scale)
        prev = cur
        n_nodes *= 2
    raise NumericError(
        f"quadrature for mu_{k} (kernel {profile.label}, d={d}) did not stabilize to "
        f"{QUAD_REL_TOL} relative by {_MAX_NODES} nodes; last two values {prev}, {cur}"
    )


def _clamp_eigenvalue(mu: float, floor: float, scale: float) -> float:
    if mu < -max(NOISE_FLOOR * scale, floor):
        raise NumericError(
            f"eigenvalue {mu} below the noise floor: profile not positive definite at this dimension"
        )
    return 0.0 if mu <= floor else mu


# ---------------------------------------------------------------------------
# NTK closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaCoefficients:
    """Half-interval projection beta_{alpha,k} of t^alpha on the degree-k harmonics."""

    d: int
    alpha: int
    k: int
    value: float
    log_abs: float
    is_zero: bool
    method: str  # "closed-form", "parity-zero", or "quadrature"

    @property
    def sign(self) -> int:
        if self.is_zero:
            return 0
        return 1 if self.value > 0 else -1


def _log_abs_beta_closed(d: int, alpha: int, k) -> np.ndarray:
    """log |beta_{alpha,k}| from the Gamma closed form; valid for k - alpha odd >= 1.

    The surface-area prefactor is kept exact (log-Gamma ratio), which is what
    makes the closed form agree with quadrature to round-off instead of only
    asymptotically in d.
    """
    k = np.asarray(k, dtype=np.float64)
    return (
        log_surface_ratio(d)
        + gammaln(alpha + 1.0)
        - k * np.log(2.0)
        + gammaln(d / 2.0)
        + gammaln(k - alpha)
        - gammaln(k / 2.0 - alpha / 2.0 + 0.5)
        - gammaln(k / 2.0 + d / 2.0 + alpha / 2.0 + 0.5)
    )


@lru_cache(maxsize=64)
def _half_jacobi_rule(d: int, n_nodes: int):
    """Rule for integrals over [0, 1] against (1 - t^2)^{(d-2)/2}.

    Substituting t = (1+s)/2 turns the weight into (1-s)^a times a smooth
    factor ((3+s)/2)^a, so a one-sided Jacobi rule applies.
    """
    a = (d - 2) / 2.0
    s, w = roots_jacobi(n_nodes, a, 0.0)
    t = 0.5 * (1.0 + s)
    w_eff = w * (0.5 ** (1.0 + a)) * ((3.0 + s) / 2.0) ** a
    return t, w_eff


def _beta_quadrature(d: int, alpha: int, k: int) -> float:
    prev = None
    n_nodes = max(64, k // 2 + 32)
    pref = np.exp(log_surface_ratio(d))
    while n_nodes <= _MAX_NODES:
        t, w = _half_jacobi_rule(d, n_nodes)
        P = _legendre_table(d, k, t)
        integrand = (t**alpha) * P[k] * w
        cur = float(pref * integrand.sum())
        floor = _quad_noise_floor(float(pref * np.abs(integrand).sum()), n_nodes, 1.0)
        if prev is not None and abs(cur - prev) <= QUAD_REL_TOL * abs(cur) + floor:
            return cur
        prev = cur
        n_nodes *= 2
    raise NumericError(f"beta quadrature (d={d}, alpha={alpha}, k={k}) did not stabilize")


def ntk_beta(d: int, alpha: int, k: int) -> BetaCoefficients:
    """beta_{alpha,k}: closed form when k - alpha is odd, quadrature otherwise.

    Parity kills the half-interval integral exactly when k - alpha is a
    positive even integer (even integrand restores full-interval orthogonality).
    """
    if alpha not in (0, 1):
        raise ValueError(f"alpha must be 0 or 1, got {alpha}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    diff = k - alpha
    if diff >= 1 and diff % 2 == 1:
        log_abs = float(_log_abs_beta_closed(d, alpha, k))
        sign = -1.0 if ((diff - 1) // 2) % 2 else 1.0
        return BetaCoefficients(d=d, alpha=alpha, k=k, value=sign * np.exp(log_abs),
                                log_abs=log_abs, is_zero=False, method="closed-form")
    if diff >= 2 and diff % 2 == 0:
        return BetaCoefficients(d=d, alpha=alpha, k=k, value=0.0, log_abs=-np.inf,
                                is_zero=True, method="parity-zero")
    value = _beta_quadrature(d, alpha, k)
    log_abs = float(np.log(abs(value))) if value != 0.0 else -np.inf
    return BetaCoefficients(d=d, alpha=alpha, k=k, value=value, log_abs=log_abs,
                            is_zero=(value == 0.0), method="quadrature")


def _log_beta11_sq(d: int) -> float:
    """log beta_{1,1}^2; the integral is the exact Beta function B(3/2, d/2)/2."""
    return 2.0 * (log_surface_ratio(d) + np.log(0.5) + betaln(1.5, d / 2.0))


def ntk_eigen_closed(d: int, k: int) -> float:
    """Two-layer NTK eigenvalue mu_k from the beta closed forms (k >= 1).

    mu_k = k/(2k+d-1) beta_{0,k-1}^2 + (k+d-1)/(2k+d-1) beta_{0,k+1}^2
         + (d+1) beta_{1,k}^2, assembled in the log domain.
    Odd degrees k >= 3 vanish exactly: all three betas are parity zeros.
    """
    if k < 1:
        raise ValueError(f"closed form requires k >= 1, got {k}")
    if k >= 3 and k % 2 == 1:
        return 0.0
    if k == 1:
        # beta_{0,0} = 1/2 (half the sphere-weight mass), beta_{0,2} = 0.
        terms = [
            np.log(1.0 / (d + 1)) + 2.0 * np.log(0.5),
            np.log(d + 1.0) + _log_beta11_sq(d),
        ]
    else:
        terms = [
            np.log(k / (2.0 * k + d - 1)) + 2.0 * float(_log_abs_beta_closed(d, 0, k - 1)),
            np.log((k + d - 1.0) / (2.0 * k + d - 1)) + 2.0 * float(_log_abs_beta_closed(d, 0, k + 1)),
            np.log(d + 1.0) + 2.0 * float(_log_abs_beta_closed(d, 1, k)),
        ]
    m = max(terms)
    return float(np.exp(m) * sum(np.exp(t - m) for t in terms))


def surrogate_mu(d: int, k: int) -> float:
    """Log-domain proxy for the NTK eigenvalues: 1 at k <= 1, else
    d^d k^{k-2} (k+d)^{-(k+d+1)} (k^2 + kd + d)."""
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    if k < 0:
        raise ValueError(f"degree must be >= 0, got {k}")
    if k <= 1:
        return 1.0
    log_val = (
        d * np.log(d)
        + (k - 2) * np.log(k)
        - (k + d + 1) * np.log(k + d)
        + np.log(k * k + k * d + d)
    )
    return float(np.exp(log_val))


# ---------------------------------------------------------------------------
# NTK spectral tail beyond the materialized levels
# ---------------------------------------------------------------------------

def _ntk_level_mass(d: int, k: np.ndarray) -> np.ndarray:
    """N(d, k) mu_k for even k >= 2, fully in the log domain (exact closed forms)."""
    k = np.asarray(k, dtype=np.float64)
    lb0m = 2.0 * _log_abs_beta_closed(d, 0, k - 1)
    lb0p = 2.0 * _log_abs_beta_closed(d, 0, k + 1)
    lb1 = 2.0 * _log_abs_beta_closed(d, 1, k)
    mu = (
        (k / (2 * k + d - 1)) * np.exp(lb0m)
        + ((k + d - 1) / (2 * k + d - 1)) * np.exp(lb0p)
        + (d + 1) * np.exp(lb1)
    )
    return mu * np.exp(log_multiplicity(d, k))


def _ntk_tail_mass(d: int, k_start: int, switch: int = 100_000) -> float:
    """Total NTK spectral mass over even degrees >= k_start.

    Terms up to `switch` are summed exactly; the remainder is completed by
    Euler-Maclaurin with step 2 on the smooth mass function (the mass decays
    like k^-2, so the derivative corrections beyond g'(a)/6 are far below
    double precision at a = 10^5).
    """
    if k_start % 2 == 1:
        k_start += 1
    a = float(max(switch, k_start))
    exact = 0.0
    if k_start < a:
        ks = np.arange(k_start, a, 2, dtype=np.float64)
        exact = float(_ntk_level_mass(d, ks).sum())
    x, w = roots_legendre(400)
    u = 0.5 * (x + 1.0)
    integral = float(((_ntk_level_mass(d, a / u) * a / u**2) * (0.5 * w)).sum())
    g_a = float(_ntk_level_mass(d, np.array([a]))[0])
    g_prime = float((_ntk_level_mass(d, np.array([a + 1.0])) - _ntk_level_mass(d, np.array([a - 1.0])))[0]) / 2.0
    return exact + 0.5 * integral + 0.5 * g_a - g_prime / 6.0


# ---------------------------------------------------------------------------
# Spectrum assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SpectrumLevel:
    """One Mercer level: degree, eigenvalue, exact and log multiplicity."""

    k: int
    mu: float
    multiplicity: int
    log_multiplicity: float


@dataclass(frozen=True)
class Spectrum:
    """Multiplicity-weighted Mercer data for one profile at one dimension.

    ``tail_mass`` is spectral mass beyond the materialized levels that was
    resolved analytically (nonzero only for the NTK closed-form route);
    ``truncation_tail`` is whatever of Phi(1) remains unaccounted for.
    """

    d: int
    profile_label: str
    phi_at_one: float
    levels: tuple[SpectrumLevel, ...]
    tail_mass: float
    truncation_tail: float
    tail_tol: float

    @property
    def mus(self) -> np.ndarray:
        return np.array([lv.mu for lv in self.levels])

    @property
    def log_mults(self) -> np.ndarray:
        return np.array([lv.log_multiplicity for lv in self.levels])

    @property
    def k_max(self) -> int:
        return self.levels[-1].k

    def level_trace(self) -> float:
        """sum_k mu_k N(d, k) over the materialized levels."""
        return float(sum(lv.mu * np.exp(lv.log_multiplicity) for lv in self.levels))

    def trace(self) -> float:
        """Full spectral trace including the analytically resolved tail."""
        return self.level_trace() + self.tail_mass

    def expanded_eigenvalues(self, length: int) -> np.ndarray:
        """First `length` entries of the non-increasing sequence lambda_j
        (each mu_k repeated N(d, k) times)."""
        if length < 1:
            raise ValueError("length must be >= 1")
        order = np.argsort([-lv.mu for lv in self.levels], kind="stable")
        out = np.empty(length)
        pos = 0
        for i in order:
            lv = self.levels[i]
            take = min(length - pos, lv.multiplicity)
            out[pos:pos + take] = lv.mu
            pos += take
            if pos == length:
                return out
        return out[:pos]


def build_spectrum(profile: KernelProfile, d: int, tail_tol: float = DEFAULT_TAIL_TOL) -> Spectrum:
    """Materialize levels k = 0, 1, 2, ... until the trace identity
    sum_k mu_k N(d, k) = Phi(1) is met to tail_tol, or the K_MAX cap.

    Route depends on the profile: quadrature for TAYLOR (which terminates
    exactly at its polynomial degree) and RBF (super-exponential decay), the
    exact closed forms plus resolved analytic tail for the NTK.
    """
    if tail_tol <= 0:
        raise ValueError("tail_tol must be positive")
    total = profile.phi_at_one
    if profile.kind == "NTK2":
        levels, tail_mass = _build_ntk_levels(d, total, tail_tol)
    else:
        levels, tail_mass = _build_quadrature_levels(profile, d, total, tail_tol)
    level_sum = float(sum(lv.mu * np.exp(lv.log_multiplicity) for lv in levels))
    gap = total - level_sum - tail_mass
    if abs(gap) > 10.0 * tail_tol:
        raise NumericError(
            f"trace identity violated for {profile.label} at d={d}: "
            f"sum={level_sum + tail_mass:.12g} vs Phi(1)={total:.12g} (gap {gap:.3e})"
        )
    return Spectrum(
        d=d,
        profile_label=profile.label,
        phi_at_one=total,
        levels=tuple(levels),
        tail_mass=tail_mass,
        truncation_tail=gap,
        tail_tol=tail_tol,
    )


def _make_level(d: int, k: int, mu: float) -> SpectrumLevel:
    return SpectrumLevel(k=k, mu=mu, multiplicity=multiplicity(d, k), log_multiplicity=float(log_multiplicity(d, k)))


def _build_ntk_levels(d: int, total: float, tail_tol: float):
    levels = [_make_level(d, 0, eigenvalue_quadrature(ntk2_profile(), d, 0))]
    acc = levels[0].mu
    k = 0
    while acc < total - tail_tol and k < K_MAX:
        k += 1
        mu = ntk_eigen_closed(d, k)
        levels.append(_make_level(d, k, mu))
        acc += mu * np.exp(log_multiplicity(d, k))
    tail_mass = 0.0
    if acc < total - tail_tol:
        tail_mass = _ntk_tail_mass(d, k + 1 if (k + 1) % 2 == 0 else k + 2)
    return levels, tail_mass


def _build_quadrature_levels(profile: KernelProfile, d: int, total: float, tail_tol: float):
    # Polynomial profiles have exactly zero mass beyond their degree.
    hard_cap = K_MAX
    if profile.kind == "TAYLOR":
        hard_cap = min(K_MAX, len(profile.taylor_coeffs) - 1)
    scale = abs(total)
    levels = []
    acc = 0.0
    zero_run = 0
    seen_positive = False
    for k in range(hard_cap + 1):
        mu = _stabilized_mu(profile, d, k, 128, scale)
        levels.append(_make_level(d, k, mu))
        acc += mu * np.exp(log_multiplicity(d, k))
        if acc >= total - tail_tol:
            break
        if mu > 0:
            seen_positive = True
            zero_run = 0
        else:
            zero_run += 1
            # Parity gives at most single-level gaps inside a profile's
            # support, so a run of resolution-floor zeros means the remaining
            # mass is unresolvable in double precision; stop scanning.
            if seen_positive and zero_run >= 3:
                break
    return levels, 0.0


def _stabilized_mu(profile: KernelProfile, d: int, k: int, n_start: int, scale: float) -> float:
    n_nodes = max(n_start, k // 2 + 32)
    prev = None
    while n_nodes <= _MAX_NODES:
        mus, wit = _mu_batch(profile, d, k, n_nodes)
        cur = float(mus[k])
        floor = _quad_noise_floor(float(wit[k]), n_nodes, scale)
        if prev is not None and abs(cur - prev) <= QUAD_REL_TOL * abs(cur) + floor:
            return _clamp_eigenvalue(cur, floor, scale)
        prev = cur
        n_nodes *= 2
    raise NumericError(f"spectrum quadrature for {profile.label} (d={d}, k={k}) did not stabilize")


def spectral_sum(spectrum: Spectrum, p: int) -> float:
    """sum_k N(d, k) min{mu_k, mu_p} over the materialized levels.

    The unresolved remainder is bounded by ``spectrum.tail_mass`` (all tail
    eigenvalues sit below every materialized one in the regimes we run).
    """
    ks = [lv.k for lv in spectrum.levels]
    if p not in ks:
        raise ValueError(f"level p={p} not materialized (levels up to {spectrum.k_max})")
    mu_p = spectrum.levels[ks.index(p)].mu
    mus = spectrum.mus
    return float(np.exp(spectrum.log_mults) @ np.minimum(mus, mu_p))
