"""Uniform sphere sampling, target functions, and synthetic regression data.

The data model is y = f*(x) + eps with x uniform on the d-sphere (unit vectors
in R^{d+1}) and eps ~ N(0, sigma^2).  Targets are finite kernel expansions
f*(x) = sum_i w_i Phi(<x, u_i>) around anchor points u_i, whose squared RKHS
norm sum_{ij} w_i w_j Phi(<u_i, u_j>) is attached at construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import KernelProfile, phi

UNIT_NORM_TOL = 1e-12


def _rng(*key) -> np.random.Generator:
    """Deterministic generator from an integer key tuple (splittable scheme)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(key))))


@dataclass(frozen=True)
class SphereSample:
    """n unit vectors on the d-sphere (points live in R^{d+1})."""

    d: int
    points: np.ndarray  # shape (n, d + 1)
    seed: int

    @property
    def n(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class TargetFunction:
    """Finite kernel expansion f(x) = sum_i w_i Phi(<x, u_i>)."""

    anchors: np.ndarray  # shape (m, d + 1), unit rows
    weights: np.ndarray  # shape (m,)
    profile: KernelProfile
    h_norm_sq: float = field(default=0.0)

    def __call__(self, points: np.ndarray) -> np.ndarray:
        dots = np.atleast_2d(points) @ self.anchors.T
        return np.asarray(phi(self.profile, dots), dtype=np.float64) @ self.weights

    def scaled_to_unit_norm(self) -> "TargetFunction":
        """Same anchors with weights rescaled so the RKHS norm equals 1."""
        if self.h_norm_sq <= 0:
            raise ValueError("target has nonpositive RKHS norm; cannot normalize")
        s = 1.0 / np.sqrt(self.h_norm_sq)
        return TargetFunction(
            anchors=self.anchors,
            weights=self.weights * s,
            profile=self.profile,
            h_norm_sq=1.0,
        )


@dataclass(frozen=True)
class Dataset:
    """A sphere sample with noisy responses from a known target."""

    sample: SphereSample
    responses: np.ndarray
    noise_sd: float
    target: TargetFunction
    seed: int


def sample_sphere(d: int, n: int, seed: int) -> SphereSample:
    """n i.i.d. uniform points on the d-sphere: normalized standard Gaussians.

    Deterministic given (d, n, seed).  Exactly-zero Gaussian draws (probability
    zero, but possible in floating point) are redrawn rather than divided by.
    """
    if d < 1:
        raise ValueError(f"sphere dimension must be >= 1, got {d}")
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    rng = _rng(seed, d, n)
    pts = rng.standard_normal((n, d + 1))
    norms = np.linalg.norm(pts, axis=1)
    while np.any(norms == 0.0):
        bad = norms == 0.0
        pts[bad] = rng.standard_normal((int(bad.sum()), d + 1))
        norms = np.linalg.norm(pts, axis=1)
    return SphereSample(d=d, points=pts / norms[:, None], seed=seed)


def make_target(profile: KernelProfile, d: int, n_anchors: int, seed: int, weights=None) -> TargetFunction:
    """Draw anchors uniformly on the d-sphere; default weights are all 1."""
    if n_anchors < 1:
        raise ValueError(f"need at least one anchor, got {n_anchors}")
    anchors = sample_sphere(d, n_anchors, seed).points
    w = np.ones(n_anchors) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (n_anchors,):
        raise ValueError("weights length must match n_anchors")
    anchor_gram = np.asarray(phi(profile, anchors @ anchors.T), dtype=np.float64)
    np.fill_diagonal(anchor_gram, profile.phi_at_one)
    h_norm_sq = float(w @ anchor_gram @ w)
    return TargetFunction(anchors=anchors, weights=w, profile=profile, h_norm_sq=h_norm_sq)


def generate_dataset(target: TargetFunction, sample: SphereSample, noise_sd: float, seed: int) -> Dataset:
    """y_i = f*(x_i) + sigma z_i with z_i i.i.d. standard normal."""
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0, got {noise_sd}")
    if target.anchors.shape[1] != sample.points.shape[1]:
        raise ValueError(
            f"ambient dimension mismatch: target {target.anchors.shape[1]} vs sample {sample.points.shape[1]}"
        )
    f_values = target(sample.points)
    # The stream is keyed by the seed alone, so one seed reused at several
    # sample sizes yields nested (prefix-shared) noise; the harness exploits
    # this as common random numbers across its n-grid.
    noise = _rng(seed, 7).standard_normal(sample.n) * noise_sd
    return Dataset(sample=sample, responses=f_values + noise, noise_sd=noise_sd, target=target, seed=seed)


def dataset_to_csv(dataset: Dataset) -> str:
    """CSV with columns x_0..x_d, y; values printed at round-trip precision."""
    d = dataset.sample.d
    header = ",".join([f"x_{i}" for i in range(d + 1)] + ["y"])
    lines = [header]
    for row, y in zip(dataset.sample.points, dataset.responses):
        lines.append(",".join(repr(float(v)) for v in row) + "," + repr(float(y)))
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse points and responses back from the CSV emitted above."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    if header[-1] != "y" or header[0] != "x_0":
        raise ValueError("unrecognized dataset CSV header")
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    arr = np.asarray(rows, dtype=np.float64)
    return arr[:, :-1], arr[:, -1]
