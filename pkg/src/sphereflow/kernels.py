"""Inner-product kernel profiles on the sphere and Gram-matrix assembly.

A profile is a scalar function Phi on [-1, 1]; the kernel it induces on the
sphere is K(x, x') = Phi(<x, x'>).  Three profiles are supported:

* ``NTK2``       -- two-layer ReLU neural tangent kernel,
                    Phi(t) = [sin(arccos t) + 2(pi - arccos t) t] / (2 pi);
* ``RBF_SPHERE`` -- Gaussian kernel with unit bandwidth restricted to the
                    sphere; since ||x - x'||^2 = 2 - 2t this is exp(t - 1);
* ``TAYLOR``     -- finite power series sum_j a_j t^j with a_j >= 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DOT_CLAMP_SLACK = 1e-12


@dataclass(frozen=True)
class KernelProfile:
    """A named scalar profile Phi defining an inner-product kernel."""

    kind: str  # one of "NTK2", "RBF_SPHERE", "TAYLOR"
    taylor_coeffs: tuple[float, ...] | None = None
    label: str = ""
    # For TAYLOR profiles built by truncating a known infinite series the
    # caller may record the discarded coefficient mass here.
    taylor_tail_bound: float = 0.0

    def __post_init__(self):
        if self.kind not in ("NTK2", "RBF_SPHERE", "TAYLOR"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "TAYLOR":
            if not self.taylor_coeffs:
                raise ValueError("TAYLOR profile requires taylor_coeffs")
            if any(a < 0 for a in self.taylor_coeffs):
                raise ValueError("TAYLOR coefficients must be nonnegative for positive definiteness")
        if not self.label:
            object.__setattr__(self, "label", self.kind.lower())

    @property
    def phi_at_one(self) -> float:
        """Phi(1) = max_x K(x, x), the trace-per-point bound."""
        return float(phi(self, 1.0))


def ntk2_profile() -> KernelProfile:
    return KernelProfile(kind="NTK2", label="ntk2")


def rbf_profile() -> KernelProfile:
    return KernelProfile(kind="RBF_SPHERE", label="rbf")


def taylor_profile(coeffs, label: str = "taylor", tail_bound: float = 0.0) -> KernelProfile:
    return KernelProfile(
        kind="TAYLOR",
        taylor_coeffs=tuple(float(a) for a in coeffs),
        label=label,
        taylor_tail_bound=tail_bound,
    )


def _clamp_dot(t, slack: float = DOT_CLAMP_SLACK):
    t = np.asarray(t, dtype=np.float64)
    if np.any(np.abs(t) > 1.0 + slack):
        worst = float(np.max(np.abs(t)))
        raise ValueError(f"dot product {worst} outside [-1, 1] beyond clamping slack")
    return np.clip(t, -1.0, 1.0)


def phi(profile: KernelProfile, t):
    """Evaluate the profile at t in [-1, 1] (scalar or array).

    Inputs may exceed the interval by at most 1e-12 (round-off from unit
    vectors); anything larger is a domain error.
    """
    t = _clamp_dot(t)
    if profile.kind == "NTK2":
        theta = np.arccos(t)
        out = (np.sin(theta) + 2.0 * (np.pi - theta) * t) / (2.0 * np.pi)
    elif profile.kind == "RBF_SPHERE":
        out = np.exp(t - 1.0)
    else:
        # Horner evaluation of the finite power series.
        coeffs = profile.taylor_coeffs
        out = np.full_like(t, coeffs[-1])
        for a in reversed(coeffs[:-1]):
            out = out * t + a
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class GramMatrix:
    """Kernel matrix K(X, X), optionally scaled by 1/n."""

    entries: np.ndarray
    normalized: bool
    source_profile: str

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def gram(profile: KernelProfile, sample, normalized: bool = False) -> GramMatrix:
    """Assemble Phi(<x_i, x_j>) for all pairs; diagonal pinned to Phi(1) exactly."""
    pts = sample.points
    if pts.shape[0] == 0:
        raise ValueError("empty sample")
    dots = pts @ pts.T
    entries = np.asarray(phi(profile, dots), dtype=np.float64)
    np.fill_diagonal(entries, profile.phi_at_one)
    entries = 0.5 * (entries + entries.T)
    if normalized:
        entries = entries / pts.shape[0]
    return GramMatrix(entries=entries, normalized=normalized, source_profile=profile.label)


def cross_kernel(profile: KernelProfile, queries, train) -> np.ndarray:
    """m x n matrix of Phi(<q_i, x_j>) between query and training points."""
    if queries.points.shape[1] != train.points.shape[1]:
        raise ValueError(
            f"ambient dimension mismatch: queries {queries.points.shape[1]} vs train {train.points.shape[1]}"
        )
    dots = queries.points @ train.points.T
    return np.asarray(phi(profile, dots), dtype=np.float64)
