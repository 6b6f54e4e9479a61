"""Experiment orchestration: seeded rate-fitting runs and the eigen-gap check.

A run sweeps (n, trial, C): per trial a fresh dataset is drawn on the sphere
of dimension d(n), the normalized Gram matrix is eigendecomposed once, and the
flow regressor is evaluated at the stopping time induced by each constant C
alongside the t = infinity interpolant.  Datasets depend only on
(master_seed, n, trial), never on C, so C is the only factor varying inside a
sweep.  Log-log rates are fit to trial-averaged risks by ordinary least
squares.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .complexity import empirical_mendelson
from .errors import InfeasibleConfigError
from .kernels import KernelProfile, cross_kernel, gram, ntk2_profile, rbf_profile, taylor_profile
from .regression import eigendecompose, fit_flow
from .spectrum import build_spectrum, multiplicity
from .sphere_data import generate_dataset, make_target, sample_sphere

DEFAULT_C_GRID = (0.001, 0.01, 0.1, 1.0, 10.0, 100.0, 1000.0)
# Sub-seed tags deriving independent streams from (master_seed, n, trial).
_TAG_TRAIN, _TAG_NOISE, _TAG_TEST, _TAG_TARGET = 11, 12, 13, 14


def kernel_by_name(name: str, taylor_coeffs=None) -> KernelProfile:
    name = name.lower()
    if name == "ntk2":
        return ntk2_profile()
    if name == "rbf":
        return rbf_profile()
    if name == "taylor":
        if taylor_coeffs is None:
            raise ValueError("taylor kernel requires coefficients")
        return taylor_profile(taylor_coeffs)
    raise ValueError(f"unknown kernel {name!r} (expected ntk2|rbf|taylor)")


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one rate-fitting experiment; serializes losslessly."""

    gamma: float
    n_grid: tuple[int, ...]
    kernel: str = "ntk2"
    n_anchors: int = 3
    noise_sd: float = 1.0
    test_size: int = 1000
    trials: int = 20
    c_grid: tuple[float, ...] = DEFAULT_C_GRID
    stopping_mode: str = "fixed_exponent"  # or "theory"
    master_seed: int = 0
    d_rule: str = "round"  # "round" or "ceil" applied to n^(1/gamma)
    taylor_coeffs: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if len(self.n_grid) < 2 or any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ValueError("n_grid must have at least two strictly increasing sizes (rate fits need them)")
        if self.stopping_mode not in ("fixed_exponent", "theory"):
            raise ValueError("stopping_mode must be fixed_exponent or theory")
        if self.d_rule not in ("round", "ceil"):
            raise ValueError("d_rule must be round or ceil")
        if self.trials < 1 or self.test_size < 1:
            raise ValueError("trials and test_size must be >= 1")
        for n in self.n_grid:
            if self.d_for(n) < 2:
                raise ValueError(f"d rule gives d < 2 at n = {n}")

    def d_for(self, n: int) -> int:
        raw = n ** (1.0 / self.gamma)
        return int(math.ceil(raw)) if self.d_rule == "ceil" else int(round(raw))

    def profile(self) -> KernelProfile:
        return kernel_by_name(self.kernel, self.taylor_coeffs)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        for key in ("n_grid", "c_grid", "taylor_coeffs"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw)


@dataclass(frozen=True)
class RiskRow:
    n: int
    d: int
    trial: int
    C: float
    t_used: float
    risk_regression: float
    risk_interpolation: float
    error: str = ""


@dataclass(frozen=True)
class RiskTable:
    """All per-(n, trial, C) measurements plus the fitted log-log rates."""

    config: ExperimentConfig
    rows: tuple[RiskRow, ...]
    fitted_regression: dict  # C -> (r, b) on trial-averaged risks
    fitted_interpolation: tuple[float, float]
    best_c_regression: float
    best_c_interpolation: float

    def to_csv(self) -> str:
        header = "n,d,trial,C,t_used,risk_regression,risk_interpolation,error"
        lines = [header]
        for row in self.rows:
            lines.append(
                f"{row.n},{row.d},{row.trial},{repr(row.C)},{repr(row.t_used)},"
                f"{repr(row.risk_regression)},{repr(row.risk_interpolation)},{row.error}"
            )
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        best_c = self.best_c_regression
        r_reg, b_reg = self.fitted_regression[best_c]
        r_int, b_int = self.fitted_interpolation
        from .entropy_rates import rate_curve

        return {
            "gamma": self.config.gamma,
            "kernel": self.config.kernel,
            "best_C": best_c,
            "r_regression": r_reg,
            "b_regression": b_reg,
            "r_interpolation": r_int,
            "b_interpolation": b_int,
            "theoretical_exponent": rate_curve(self.config.gamma, "inner").n_exponent,
            "stopping_mode": self.config.stopping_mode,
            "trials": self.config.trials,
            "n_grid": list(self.config.n_grid),
        }


def fit_rate(points) -> tuple[float, float]:
    """Ordinary least squares of log risk on log n: returns (slope r, intercept b)."""
    pts = [(float(n), float(risk)) for n, risk in points]
    if len(pts) < 2:
        raise ValueError("rate fit needs at least two points")
    if any(risk <= 0 for _, risk in pts):
        raise ValueError("rate fit requires strictly positive risks")
    x = np.log([n for n, _ in pts])
    y = np.log([risk for _, risk in pts])
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


def _trial_measurements(config: ExperimentConfig, profile: KernelProfile, n: int, d: int, trial: int):
    """One dataset draw and all risk evaluations for the C sweep.

    Seeds never involve C, so C is the only factor varying inside a sweep; the
    noise seed also omits n, which makes the noise draws of one trial nested
    across the n-grid (common random numbers, stabilizing the fitted slope).
    """
    ms = config.master_seed
    target = make_target(profile, d, config.n_anchors, seed=_seed(ms, n, 0, _TAG_TARGET))
    train = sample_sphere(d, n, seed=_seed(ms, n, trial, _TAG_TRAIN))
    data = generate_dataset(target, train, config.noise_sd, seed=_seed(ms, 0, trial, _TAG_NOISE))
    test = sample_sphere(d, config.test_size, seed=_seed(ms, n, trial, _TAG_TEST))

    ge = eigendecompose(gram(profile, train, normalized=True))
    kq = cross_kernel(profile, test, train)
    f_star_test = target(test.points)

    def risk_at(t: float) -> float:
        predictor = fit_flow(ge, data.responses, t)
        preds = kq @ predictor.dual_weights
        return float(np.mean((preds - f_star_test) ** 2))

    risk_interp = risk_at(math.inf)
    if config.stopping_mode == "theory":
        base_t = empirical_mendelson(ge, config.noise_sd).stopping_time
    else:
        base_t = math.sqrt(n)
    out = []
    for c in config.c_grid:
        t_used = c * base_t
        out.append((c, t_used, risk_at(t_used), risk_interp))
    return out


_MASK64 = (1 << 64) - 1
_GOLDEN64 = 0x9E3779B97F4A7C15


def _seed(master: int, n: int, trial: int, tag: int) -> int:
    """Stable 63-bit mix of the experiment coordinates (pure-int, wrap at 2^64)."""
    h = (master * _GOLDEN64) & _MASK64
    for part in (n, trial, tag):
        h ^= (part + _GOLDEN64 + ((h << 6) & _MASK64) + (h >> 2)) & _MASK64
    return h & 0x7FFFFFFFFFFFFFFF


def run_experiment(config: ExperimentConfig) -> RiskTable:
    """Sweep (n, trial, C); average risks over trials; fit log-log slopes per C.

    Per-trial failures are recorded on their rows and skipped in the fits; a
    run with more than half its trials failing raises.
    """
    profile = config.profile()
    rows: list[RiskRow] = []
    failures = 0
    total_trials = 0
    for n in config.n_grid:
        d = config.d_for(n)
        for trial in range(config.trials):
            total_trials += 1
            try:
                measurements = _trial_measurements(config, profile, n, d, trial)
            except Exception as exc:  # noqa: BLE001 - tagged and surfaced per row
                failures += 1
                for c in config.c_grid:
                    rows.append(RiskRow(n=n, d=d, trial=trial, C=c, t_used=math.nan,
                                        risk_regression=math.nan, risk_interpolation=math.nan,
                                        error=type(exc).__name__))
                continue
            for c, t_used, risk_reg, risk_int in measurements:
                rows.append(RiskRow(n=n, d=d, trial=trial, C=c, t_used=t_used,
                                    risk_regression=risk_reg, risk_interpolation=risk_int))
    if failures * 2 > total_trials:
        raise RuntimeError(f"{failures}/{total_trials} trials failed")

    fitted_reg: dict[float, tuple[float, float]] = {}
    mean_at_largest: dict[float, float] = {}
    n_largest = config.n_grid[-1]
    for c in config.c_grid:
        pts = []
        for n in config.n_grid:
            risks = [r.risk_regression for r in rows if r.n == n and r.C == c and not r.error]
            if risks:
                pts.append((n, float(np.mean(risks))))
        fitted_reg[c] = fit_rate(pts)
        largest = [r.risk_regression for r in rows if r.n == n_largest and r.C == c and not r.error]
        mean_at_largest[c] = float(np.mean(largest)) if largest else math.inf

    interp_pts = []
    for n in config.n_grid:
        risks = [r.risk_interpolation for r in rows if r.n == n and r.C == config.c_grid[0] and not r.error]
        if risks:
            interp_pts.append((n, float(np.mean(risks))))
    fitted_int = fit_rate(interp_pts)

    best_c = min(config.c_grid, key=lambda c: (mean_at_largest[c], c))
    interp_at_largest: dict[float, float] = {}
    for c in config.c_grid:
        largest = [r.risk_interpolation for r in rows if r.n == n_largest and r.C == c and not r.error]
        interp_at_largest[c] = float(np.mean(largest)) if largest else math.inf
    best_c_interp = min(config.c_grid, key=lambda c: (interp_at_largest[c], c))
    return RiskTable(
        config=config,
        rows=tuple(rows),
        fitted_regression=fitted_reg,
        fitted_interpolation=fitted_int,
        best_c_regression=best_c,
        best_c_interpolation=best_c_interp,
    )


def emit(obj, format: str, path) -> None:
    """Write a RiskTable or a list of RatePoints as csv, json, or svg."""
    from pathlib import Path

    from . import svg as svg_mod
    from .entropy_rates import RatePoint, rate_curve

    path = Path(path)
    try:
        if isinstance(obj, RiskTable):
            if format == "csv":
                path.write_text(obj.to_csv())
            elif format == "json":
                path.write_text(json.dumps(obj.summary(), indent=2, sort_keys=True))
            elif format == "svg":
                cfg = obj.config
                ns = list(cfg.n_grid)
                best = obj.best_c_regression
                reg = [float(np.mean([r.risk_regression for r in obj.rows
                                      if r.n == n and r.C == best and not r.error])) for n in ns]
                interp = [float(np.mean([r.risk_interpolation for r in obj.rows
                                         if r.n == n and r.C == best and not r.error])) for n in ns]
                r_theory = rate_curve(cfg.gamma, "inner").n_exponent
                ref = [reg[0] * (ns[0] ** r_theory) * n ** (-r_theory) for n in ns]
                path.write_text(svg_mod.line_chart(
                    {"regression": (ns, reg), "interpolation": (ns, interp)},
                    x_label="n", y_label="excess risk", log_x=True, log_y=True,
                    reference=(f"theory n^-{r_theory:.3g}", ns, ref),
                    title=f"gamma={cfg.gamma}, kernel={cfg.kernel}",
                ))
            else:
                raise ValueError(f"unknown format {format!r}")
        elif obj and isinstance(obj[0], RatePoint):
            if format == "csv":
                lines = ["gamma,family,p,n_exponent,d_exponent,log_factor,match_status"]
                for pt in obj:
                    lines.append(f"{repr(pt.gamma)},{pt.family},{pt.p},{repr(pt.n_exponent)},"
                                 f"{repr(pt.d_exponent)},{str(pt.log_factor).lower()},{pt.match_status}")
                path.write_text("\n".join(lines) + "\n")
            elif format == "svg":
                xs = [pt.gamma for pt in obj]
                path.write_text(svg_mod.line_chart(
                    {"n-exponent": (xs, [pt.n_exponent for pt in obj])},
                    x_label="gamma", y_label="excess-risk exponent",
                ))
            elif format == "json":
                path.write_text(json.dumps([asdict(pt) for pt in obj], indent=2))
            else:
                raise ValueError(f"unknown format {format!r}")
        else:
            raise ValueError(f"cannot emit object of type {type(obj).__name__}")
    except OSError as exc:
        raise OSError(f"failed writing {path}: {exc}") from exc


@dataclass(frozen=True)
class GapCheckResult:
    pass_fraction: float
    n: int
    analytic_gap_ok: bool
    mu_p: float
    mu_p1: float
    cutoff_index: int  # N(p) = sum_{k <= p} N(d, k)
    per_seed: tuple[dict, ...]


def eigen_gap_check(profile: KernelProfile, gamma: float, d: int, p: int, seeds) -> GapCheckResult:
    """Empirical eigen-gap block structure at n = round(d^gamma).

    For each seed, checks the four-way chain
    lambda_hat_{N(p)+1} < 4 mu_{p+1} < mu_p / 4 < lambda_hat_{N(p)}
    on the eigenvalues of the normalized Gram matrix; the middle inequality is
    deterministic and verified on the analytic spectrum before any sampling.
    """
    n = int(round(d**gamma))
    if n > 5000:
        raise InfeasibleConfigError(f"n = {n} exceeds desk scale 5000")
    cutoff = sum(multiplicity(d, k) for k in range(p + 1))
    if cutoff >= n:
        raise InfeasibleConfigError(f"N(p) = {cutoff} >= n = {n}: block structure unresolvable")
    spectrum = build_spectrum(profile, d)
    if spectrum.k_max < p + 1:
        raise InfeasibleConfigError(f"spectrum has no level {p + 1}")
    mu_p = spectrum.levels[p].mu
    mu_p1 = spectrum.levels[p + 1].mu
    analytic_ok = bool(4.0 * mu_p1 < mu_p / 4.0)
    per_seed = []
    passes = 0
    for seed in seeds:
        sample = sample_sphere(d, n, seed=int(seed))
        lam = np.linalg.eigvalsh(gram(profile, sample, normalized=True).entries)[::-1]
        lower_ok = bool(lam[cutoff] < 4.0 * mu_p1)  # lambda_hat_{N(p)+1}, zero-indexed
        upper_ok = bool(mu_p / 4.0 < lam[cutoff - 1])  # lambda_hat_{N(p)}
        ok = analytic_ok and lower_ok and upper_ok
        passes += ok
        per_seed.append({
            "seed": int(seed),
            "pass": ok,
            "lambda_after_block": float(lam[cutoff]),
            "lambda_block_edge": float(lam[cutoff - 1]),
        })
    return GapCheckResult(
        pass_fraction=passes / len(per_seed) if per_seed else 0.0,
        n=n,
        analytic_gap_ok=analytic_ok,
        mu_p=mu_p,
        mu_p1=mu_p1,
        cutoff_index=cutoff,
        per_seed=tuple(per_seed),
    )
