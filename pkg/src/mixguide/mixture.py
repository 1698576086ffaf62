"""Closed-form Gaussian mixture machinery.

Everything here is exact (up to floating point): densities, scores,
noise-prediction conversions and the Bayes posterior of a forbidden
subset of modes.  These functions are the analytic oracles that the
sampler and the guidance schemes are validated against.

Shape conventions: a single point is a vector of length ``dim`` (a bare
scalar is accepted when ``dim == 1``) and yields scalar/vector outputs; a
batch of points is an ``(n, dim)`` array and yields ``(n, ...)`` outputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np
from scipy.special import erf, logsumexp

# Variance floor used when classifying against a mixture that contains
# delta peaks (zero-variance modes).
CLASSIFY_VARIANCE_FLOOR = 1e-6

_WEIGHT_TOL = 1e-12


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    """Isotropic Gaussian mixture: sum_i weights[i] * N(x; means[i], variances[i] * I).

    ``means`` may be given as a length-K sequence of scalars (1D mixture)
    or as a (K, d) array.  Weights must be non-negative and sum to one;
    variances may be zero (delta peaks), in which case only diffusion and
    mode classification are defined.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    _log_weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = _readonly(self.weights)
        m = np.array(self.means, dtype=float)
        if m.ndim == 1:
            m = m[:, None]
        if m.ndim != 2:
            raise ValueError("means must be a (K,) or (K, d) array")
        m = _readonly(m)
        v = _readonly(self.variances)
        if w.ndim != 1 or v.ndim != 1:
            raise ValueError("weights and variances must be 1-D")
        if not (len(w) == len(v) == m.shape[0]) or len(w) < 1:
            raise ValueError("weights, means and variances must have equal length >= 1")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(float(w.sum()) - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"weights must sum to 1 (got {w.sum()!r})")
        if np.any(v < 0):
            raise ValueError("variances must be non-negative")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "variances", v)
        with np.errstate(divide="ignore"):
            object.__setattr__(self, "_log_weights", _readonly(np.log(w)))

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_modes(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class MixtureSplit:
    """A mixture together with a forbidden subset of its modes.

    ``forbidden`` and ``allowed`` are the renormalized sub-mixtures;
    ``prior`` is the total weight of the forbidden modes, so the mixture
    law density(full) = prior * density(forbidden) + (1 - prior) * density(allowed)
    holds pointwise at every noise level.
    """

    full: GaussianMixture
    forbidden_indices: frozenset[int]
    forbidden: GaussianMixture = field(init=False, repr=False)
    allowed: GaussianMixture = field(init=False, repr=False)
    prior: float = field(init=False)

    def __post_init__(self):
        idx = frozenset(int(i) for i in self.forbidden_indices)
        k = self.full.n_modes
        if not idx:
            raise ValueError("forbidden_indices must be non-empty")
        if any(i < 0 or i >= k for i in idx):
            raise ValueError(f"forbidden_indices out of range for {k} modes")
        if len(idx) == k:
            raise ValueError("at least one mode must remain allowed")
        fmask = np.zeros(k, dtype=bool)
        fmask[sorted(idx)] = True
        prior = float(self.full.weights[fmask].sum())
        if not 0.0 < prior < 1.0:
            raise ValueError(f"forbidden weight must lie strictly in (0, 1), got {prior}")
        object.__setattr__(self, "forbidden_indices", idx)
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "forbidden", _submixture(self.full, fmask))
        object.__setattr__(self, "allowed", _submixture(self.full, ~fmask))

    @property
    def allowed_indices(self) -> frozenset[int]:
        return frozenset(range(self.full.n_modes)) - self.forbidden_indices


def _submixture(gmm: GaussianMixture, mask: np.ndarray) -> GaussianMixture:
    w = gmm.weights[mask]
    return GaussianMixture(w / w.sum(), gmm.means[mask], gmm.variances[mask])


class ScoreProvider(Protocol):
    """Noise-prediction contract: eps(x, t), deterministic in (x, t)."""

    def __call__(self, x: np.ndarray, t: int) -> np.ndarray: ...


def _as_points(gmm: GaussianMixture, x) -> tuple[np.ndarray, bool]:
    """Normalize x to an (n, d) array; the flag marks single-point input."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        if gmm.dim != 1:
            raise ValueError(f"scalar point given for a {gmm.dim}-dimensional mixture")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if arr.shape[0] != gmm.dim:
            raise ValueError(f"point has length {arr.shape[0]}, expected {gmm.dim}")
        return arr.reshape(1, -1), True
    if arr.ndim == 2:
        if arr.shape[1] != gmm.dim:
            raise ValueError(f"points have dimension {arr.shape[1]}, expected {gmm.dim}")
        return arr, False
    raise ValueError("x must be a point (d,) or a batch of points (n, d)")


def _log_components(gmm: GaussianMixture, pts: np.ndarray) -> np.ndarray:
    """(n, K) array of log(weight_i) + log N(x; mu_i, var_i * I)."""
    var = gmm.variances
    if np.any(var <= 0):
        raise ValueError(
            "mixture has a zero-variance mode; diffuse it first (density undefined)"
        )
    diff = pts[:, None, :] - gmm.means[None, :, :]
    sq = np.sum(diff * diff, axis=2)
    norm = gmm.dim * np.log(2.0 * np.pi * var)
    return gmm._log_weights[None, :] - 0.5 * (norm + sq / var[None, :])


def diffuse_mixture(gmm: GaussianMixture, alpha_bar: float) -> GaussianMixture:
    """Mixture after variance-preserving diffusion to signal level ``alpha_bar``.

    Mode i keeps its weight, its mean shrinks to sqrt(alpha_bar) * mu_i and
    its variance becomes 1 - alpha_bar + alpha_bar * var_i.
    """
    ab = float(alpha_bar)
    if not 0.0 <= ab <= 1.0:
        raise ValueError(f"alpha_bar must lie in [0, 1], got {ab}")
    return GaussianMixture(
        gmm.weights,
        np.sqrt(ab) * gmm.means,
        1.0 - ab + ab * gmm.variances,
    )


def log_density(gmm: GaussianMixture, x) -> float | np.ndarray:
    """log of the mixture density, evaluated in log space (log-sum-exp)."""
    pts, single = _as_points(gmm, x)
    out = logsumexp(_log_components(gmm, pts), axis=1)
    return float(out[0]) if single else out


def score(gmm: GaussianMixture, x) -> np.ndarray:
    """Gradient of log_density: sum_i r_i(x) * (mu_i - x) / var_i.

    r_i are the posterior mode responsibilities at x.
    """
    pts, single = _as_points(gmm, x)
    lc = _log_components(gmm, pts)
    resp = np.exp(lc - logsumexp(lc, axis=1, keepdims=True))
    pull = (gmm.means[None, :, :] - pts[:, None, :]) / gmm.variances[None, :, None]
    out = np.sum(resp[:, :, None] * pull, axis=1)
    return out[0] if single else out


def noise_from_score(s, alpha_bar: float) -> np.ndarray:
    """eps = -sqrt(1 - alpha_bar) * score.  Undefined at alpha_bar = 1."""
    ab = float(alpha_bar)
    if not 0.0 <= ab < 1.0:
        raise ValueError(f"alpha_bar must lie in [0, 1), got {ab}")
    return -np.sqrt(1.0 - ab) * np.asarray(s, dtype=float)


def score_from_noise(eps, alpha_bar: float) -> np.ndarray:
    """Inverse of noise_from_score: s = -eps / sqrt(1 - alpha_bar)."""
    ab = float(alpha_bar)
    if not 0.0 <= ab < 1.0:
        raise ValueError(f"alpha_bar must lie in [0, 1), got {ab}")
    return -np.asarray(eps, dtype=float) / np.sqrt(1.0 - ab)


def exact_posterior(split: MixtureSplit, x, alpha_bar: float) -> float | np.ndarray:
    """Bayes posterior of the forbidden class at noise level alpha_bar.

    prior * density(forbidden_t, x) / density(full_t, x), computed in log
    space; clipped to [0, 1] only to absorb rounding at the 1e-15 level.
    """
    ld_f = log_density(diffuse_mixture(split.forbidden, alpha_bar), x)
    ld_full = log_density(diffuse_mixture(split.full, alpha_bar), x)
    return np.clip(np.exp(np.log(split.prior) + ld_f - ld_full), 0.0, 1.0)


def forbidden_log_odds(split: MixtureSplit, x, alpha_bar: float) -> float | np.ndarray:
    """log(p / (1 - p)) of the exact posterior, without the 1 - p cancellation.

    Uses 1 - p = (1 - prior) * density(allowed_t) / density(full_t), which
    keeps the odds accurate even when the posterior saturates near 0 or 1.
    """
    ld_f = log_density(diffuse_mixture(split.forbidden, alpha_bar), x)
    ld_r = log_density(diffuse_mixture(split.allowed, alpha_bar), x)
    return (np.log(split.prior) + ld_f) - (np.log1p(-split.prior) + ld_r)


def classify_mode(gmm: GaussianMixture, x) -> int | np.ndarray:
    """Most likely mode index: argmax of log(weight_i) + log N(x; mu_i, var_i I).

    Variances are floored at CLASSIFY_VARIANCE_FLOOR so delta-peak mixtures
    classify by weighted squared distance.  Ties resolve to the lowest index.
    """
    floored = GaussianMixture(
        gmm.weights, gmm.means, np.maximum(gmm.variances, CLASSIFY_VARIANCE_FLOOR)
    )
    pts, single = _as_points(floored, x)
    idx = np.argmax(_log_components(floored, pts), axis=1)
    return int(idx[0]) if single else idx


def sample_mixture(gmm: GaussianMixture, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points from the mixture; returns an (n, dim) array."""
    if n < 1:
        raise ValueError("n must be >= 1")
    comp = rng.choice(gmm.n_modes, size=n, p=gmm.weights)
    noise = rng.standard_normal((n, gmm.dim))
    return gmm.means[comp] + np.sqrt(gmm.variances[comp])[:, None] * noise


def mixture_cdf(gmm: GaussianMixture, x) -> np.ndarray:
    """CDF of a 1-D mixture; zero-variance modes contribute step functions."""
    if gmm.dim != 1:
        raise ValueError("mixture_cdf is defined for 1-D mixtures only")
    xs = np.asarray(x, dtype=float).reshape(-1)
    mu = gmm.means[:, 0]
    sd = np.sqrt(gmm.variances)
    z = xs[:, None] - mu[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        phi = 0.5 * (1.0 + erf(z / (sd[None, :] * np.sqrt(2.0))))
    phi = np.where(sd[None, :] == 0.0, (z >= 0.0).astype(float), phi)
    out = phi @ gmm.weights
    return out if np.asarray(x).ndim else float(out[0])


@dataclass(frozen=True, eq=False)
class AnalyticNoisePredictor:
    """ScoreProvider backed by the closed-form diffused mixture score."""

    gmm: GaussianMixture
    schedule: "NoiseSchedule"  # noqa: F821 - imported lazily to avoid a cycle

    def __call__(self, x, t: int) -> np.ndarray:
        ab = self.schedule.alpha_bar(t)
        return noise_from_score(score(diffuse_mixture(self.gmm, ab), x), ab)
