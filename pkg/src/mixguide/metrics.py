"""Evaluation quantities: safety, class-balance KL, posterior-tracking
error, 1-D histogram comparisons and 2-D guided-field decompositions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .guidance import Scheme
from .mixture import (
    GaussianMixture,
    MixtureSplit,
    classify_mode,
    diffuse_mixture,
    exact_posterior,
    forbidden_log_odds,
    mixture_cdf,
    score,
)
from .sampler import TrajectoryRecord
from .schedule import NoiseSchedule

TARGET_MASS_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class ClassHistogram:
    """Per-mode sample counts plus the forbidden index set."""

    counts: np.ndarray
    forbidden_indices: frozenset[int]
    total: int = field(init=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=int)
        if counts.ndim != 1 or np.any(counts < 0):
            raise ValueError("counts must be a 1-D array of non-negative integers")
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "forbidden_indices", frozenset(self.forbidden_indices))
        object.__setattr__(self, "total", int(counts.sum()))

    @property
    def forbidden_count(self) -> int:
        return int(sum(self.counts[i] for i in self.forbidden_indices))


def class_histogram(samples, split: MixtureSplit) -> ClassHistogram:
    """Classify samples against the clean mixture and count per mode."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("samples must be non-empty")
    if samples.ndim == 1:
        samples = samples[:, None]
    modes = classify_mode(split.full, samples)
    counts = np.bincount(modes, minlength=split.full.n_modes)
    return ClassHistogram(counts=counts, forbidden_indices=split.forbidden_indices)


def safety(samples, split: MixtureSplit) -> float:
    """Fraction of samples NOT classified into forbidden modes."""
    hist = class_histogram(samples, split)
    return 1.0 - hist.forbidden_count / hist.total


def kl_to_ideal(hist: ClassHistogram) -> float:
    """KL of the allowed-mode empirical distribution from uniform-over-allowed.

    Counts are renormalized over allowed modes only; forbidden mass is
    reported separately through safety, not folded in here.  Zero counts
    contribute 0 (the 0 log 0 convention).
    """
    allowed = sorted(set(range(len(hist.counts))) - hist.forbidden_indices)
    counts = hist.counts[allowed].astype(float)
    total = counts.sum()
    if total == 0:
        raise ValueError("no samples fell into allowed modes")
    k = float(len(allowed))
    q = counts / total
    nz = q > 0
    return float(np.sum(q[nz] * np.log(counts[nz] * k / total)))


@dataclass(frozen=True, eq=False)
class TrackingComparison:
    """Group-mean tracked vs exact posterior curves over reverse steps."""

    steps: np.ndarray  # t values, T..1
    tracked_mean: dict
    exact_mean: dict
    group_counts: dict
    aggregate_mae: float


def posterior_tracking_error(
    records: list[TrajectoryRecord], split: MixtureSplit, schedule: NoiseSchedule
) -> TrackingComparison:
    """Compare tracked posteriors against the exact Bayes posterior.

    Chains are grouped by whether their final sample classifies into a
    forbidden mode.  For each reverse step the tracked and exact values
    are averaged within each group; the aggregate MAE is the mean of
    |tracked - exact| over steps and (non-empty) groups.
    """
    if not records:
        raise ValueError("records must be non-empty")
    if any(r.posteriors is None for r in records):
        raise ValueError("records lack posterior traces; rerun with a tracking scheme")
    T = schedule.T
    if any(r.n_steps != T for r in records):
        raise ValueError("record length does not match the schedule")

    states = np.stack([r.states for r in records])  # (N, T+1, d)
    tracked = np.stack([r.posteriors for r in records])  # (N, T)
    modes = classify_mode(split.full, states[:, -1, :])
    in_forbidden = np.isin(modes, sorted(split.forbidden_indices))

    steps = np.arange(T, 0, -1)
    exact = np.empty_like(tracked)
    for k, t in enumerate(steps):
        exact[:, k] = exact_posterior(split, states[:, k, :], schedule.state_alpha_bar(t))

    tracked_mean, exact_mean, counts, errs = {}, {}, {}, []
    for name, mask in (("forbidden", in_forbidden), ("allowed", ~in_forbidden)):
        if not mask.any():
            continue
        tracked_mean[name] = tracked[mask].mean(axis=0)
        exact_mean[name] = exact[mask].mean(axis=0)
        counts[name] = int(mask.sum())
        errs.append(np.abs(tracked_mean[name] - exact_mean[name]))
    return TrackingComparison(
        steps=steps,
        tracked_mean=tracked_mean,
        exact_mean=exact_mean,
        group_counts=counts,
        aggregate_mae=float(np.mean(np.concatenate(errs))),
    )


@dataclass(frozen=True, eq=False)
class Histogram1D:
    """Binned sample density plus its KL against an analytic target."""

    edges: np.ndarray
    counts: np.ndarray
    density: np.ndarray
    target_mass: np.ndarray
    kl: float
    n_used: int
    n_total: int


def histogram_1d(
    samples, target: GaussianMixture, lo: float, hi: float, bins: int
) -> Histogram1D:
    """Histogram samples on [lo, hi] and compare against a 1-D mixture.

    Target mass per bin comes from exact CDF differences.  Samples outside
    the range are dropped and the in-range histogram renormalized.  Target
    bins with (near-)zero mass but non-zero empirical mass contribute with
    the target floored at TARGET_MASS_FLOOR.
    """
    if target.dim != 1:
        raise ValueError("histogram_1d expects a 1-D target mixture")
    if bins < 1 or not lo < hi:
        raise ValueError("need lo < hi and bins >= 1")
    x = np.asarray(samples, dtype=float).reshape(-1)
    if x.size == 0:
        raise ValueError("samples must be non-empty")
    counts, edges = np.histogram(x, bins=bins, range=(lo, hi))
    n_used = int(counts.sum())
    if n_used == 0:
        raise ValueError(f"no samples fell inside [{lo}, {hi}]")
    emp = counts / n_used
    width = (hi - lo) / bins
    cdf = mixture_cdf(target, edges)
    tmass = np.diff(cdf)
    nz = emp > 0
    kl = float(np.sum(emp[nz] * np.log(emp[nz] / np.maximum(tmass[nz], TARGET_MASS_FLOOR))))
    return Histogram1D(
        edges=edges,
        counts=counts,
        density=emp / width,
        target_mass=tmass,
        kl=kl,
        n_used=n_used,
        n_total=int(x.size),
    )


@dataclass(frozen=True)
class GridSpec2D:
    """Rectangular evaluation grid for 2-D field plots."""

    x_lo: float
    x_hi: float
    nx: int
    y_lo: float
    y_hi: float
    ny: int

    def __post_init__(self):
        if not (self.x_lo < self.x_hi and self.y_lo < self.y_hi):
            raise ValueError("grid ranges must be non-empty")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid resolution must be >= 2 per axis")

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x_lo, self.x_hi, self.nx)

    @property
    def ys(self) -> np.ndarray:
        return np.linspace(self.y_lo, self.y_hi, self.ny)

    @property
    def points(self) -> np.ndarray:
        xv, yv = np.meshgrid(self.xs, self.ys, indexing="xy")
        return np.column_stack([xv.ravel(), yv.ravel()])


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """Score-field decomposition on a 2-D grid: uncond + guidance = total."""

    grid: GridSpec2D
    t: int
    scheme: Scheme
    lambda0: float
    points: np.ndarray
    uncond: np.ndarray
    guidance: np.ndarray
    total: np.ndarray


def guided_field(
    split: MixtureSplit,
    schedule: NoiseSchedule,
    t: int,
    scheme: Scheme,
    lambda0: float,
    points,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate (unconditional score, guidance term, total) at given points.

    Supported schemes: cfg (allowed arm), np (forbidden arm), dng_exact
    (forbidden arm scaled by the exact posterior odds) and none.
    """
    scheme = Scheme(scheme)
    pts = np.asarray(points, dtype=float)
    ab = schedule.alpha_bar(t)
    s_u = score(diffuse_mixture(split.full, ab), pts)
    if scheme is Scheme.NONE:
        g = np.zeros_like(s_u)
    elif scheme is Scheme.CFG:
        s_r = score(diffuse_mixture(split.allowed, ab), pts)
        g = lambda0 * (s_r - s_u)
    elif scheme is Scheme.NP:
        s_f = score(diffuse_mixture(split.forbidden, ab), pts)
        g = -lambda0 * (s_f - s_u)
    elif scheme is Scheme.DNG_EXACT:
        s_f = score(diffuse_mixture(split.forbidden, ab), pts)
        odds = np.exp(forbidden_log_odds(split, pts, ab))
        g = -lambda0 * np.asarray(odds)[..., None] * (s_f - s_u)
    else:
        raise ValueError(f"scheme {scheme} has no static field decomposition")
    return s_u, g, s_u + g


def field_grid(
    split: MixtureSplit,
    schedule: NoiseSchedule,
    t: int,
    scheme: Scheme,
    lambda0: float,
    grid: GridSpec2D,
) -> FieldGrid:
    """Evaluate the guided-field decomposition on a rectangular 2-D grid."""
    if split.full.dim != 2:
        raise ValueError("field_grid requires a 2-D mixture")
    pts = grid.points
    s_u, g, total = guided_field(split, schedule, t, scheme, lambda0, pts)
    return FieldGrid(
        grid=grid,
        t=int(t),
        scheme=Scheme(scheme),
        lambda0=float(lambda0),
        points=pts,
        uncond=s_u,
        guidance=g,
        total=total,
    )
