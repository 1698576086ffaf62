"""Guidance combinators in noise-prediction space.

Covers classifier-free guidance (cfg), negative prompting (np), the
posterior-odds dynamic negative guidance (dng_exact / dng_tracked), and a
safe-latent-diffusion style baseline (sld) with an elementwise,
threshold-gated scale.  Also hosts the Markov-chain posterior tracker
that dng_tracked relies on.

Because eps = -sqrt(1 - alpha_bar) * score, every combination rule here
is identical in score space and in noise space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .schedule import NoiseSchedule


class Scheme(str, Enum):
    """Guidance scheme selector."""

    NONE = "none"
    CFG = "cfg"
    NP = "np"
    DNG_EXACT = "dng_exact"
    DNG_TRACKED = "dng_tracked"
    SLD = "sld"

    def __str__(self) -> str:  # keep CSV/CLI serialization plain
        return self.value


# Schemes whose guidance term is repulsive (eps_u - lambda * (eps_c - eps_u)).
_NEGATIVE = {Scheme.NP, Scheme.DNG_EXACT, Scheme.DNG_TRACKED, Scheme.SLD}


@dataclass(frozen=True)
class SldConfig:
    """Hyperparameters of the sld baseline.

    threshold gates activation on the signed elementwise difference
    eps_u - eps_neg; scale multiplies its magnitude inside min(1, .);
    momentum is an EMA of the raw scale, re-added with momentum_scale;
    guidance stays off for the first warmup_steps reverse steps.
    """

    threshold: float = 0.04
    scale: float = 100.0
    momentum_beta: float = 0.2
    momentum_scale: float = 0.1
    warmup_steps: int = 10

    def __post_init__(self):
        if self.threshold <= 0.0:
            raise ValueError("threshold must be positive")
        if self.scale <= 0.0:
            raise ValueError("scale must be positive")
        if not 0.0 <= self.momentum_beta < 1.0:
            raise ValueError("momentum_beta must lie in [0, 1)")
        if self.warmup_steps < 0:
            raise ValueError("warmup_steps must be >= 0")


@dataclass(frozen=True)
class GuidanceConfig:
    """Scheme selector plus every guidance hyperparameter.

    p0 initializes the tracked posterior; tau damps the likelihood-ratio
    increments, delta biases them upward.  Those three (and the clamps)
    only act under dng_tracked; other schemes ignore them.  The clamp
    defaults keep the dynamic scale finite: p_max = 0.999 caps it at
    999 * lambda0, p_min keeps log-space arithmetic away from -inf.
    """

    scheme: Scheme = Scheme.NONE
    lambda0: float = 1.0
    p0: float = 0.25
    tau: float = 0.25
    delta: float = 0.0
    p_min: float = 1e-6
    p_max: float = 0.999
    sld: SldConfig | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.lambda0 < 0.0:
            raise ValueError("lambda0 must be >= 0")
        if not 0.0 < self.p_min <= self.p_max < 1.0:
            raise ValueError("need 0 < p_min <= p_max < 1")
        if not self.p_min <= self.p0 <= self.p_max:
            raise ValueError("p0 must lie within [p_min, p_max]")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must lie in (0, 1]")
        if self.delta < 0.0:
            raise ValueError("delta must be >= 0")
        if (self.scheme is Scheme.SLD) != (self.sld is not None):
            raise ValueError("sld settings must be present iff scheme is sld")


@dataclass(frozen=True)
class PosteriorState:
    """Tracked log-posterior of the forbidden class, with its clamp bounds."""

    log_p: float
    p_min: float
    p_max: float

    @classmethod
    def initial(cls, p0: float, p_min: float, p_max: float) -> "PosteriorState":
        if not p_min <= p0 <= p_max:
            raise ValueError("p0 must lie within [p_min, p_max]")
        return cls(log_p=math.log(p0), p_min=p_min, p_max=p_max)

    @property
    def probability(self) -> float:
        # np.exp keeps this bit-identical with batched tracking; the
        # re-clip absorbs the one-ulp overshoot of exponentiation
        return float(min(max(np.exp(self.log_p), self.p_min), self.p_max))


@dataclass(frozen=True)
class SldState:
    """Per-chain sld state: guidance-scale EMA and the step counter."""

    momentum: np.ndarray
    steps_seen: int = 0

    @classmethod
    def initial(cls, dim: int) -> "SldState":
        return cls(momentum=np.zeros(dim), steps_seen=0)


def dynamic_lambda(p, lambda0: float):
    """Dynamic guidance scale lambda0 * p / (1 - p).

    Strictly increasing in p and finite for p < 1.  Clamping p is the
    tracker's job; values outside (0, 1) are rejected here.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0.0) or np.any(p >= 1.0):
        raise ValueError("posterior must lie strictly in (0, 1)")
    out = lambda0 * p / (1.0 - p)
    return float(out) if out.ndim == 0 else out


def combine_noise(eps_uncond, eps_cond, lam, scheme: Scheme) -> np.ndarray:
    """Apply a guidance scheme to a pair of noise predictions.

    cfg:            eps_u + lam * (eps_c - eps_u)
    np / dng / sld: eps_u - lam * (eps_c - eps_u)
    none:           eps_u (lam ignored)

    lam may be a scalar or an array broadcastable against the predictions
    (elementwise for sld).
    """
    scheme = Scheme(scheme)
    eps_u = np.asarray(eps_uncond, dtype=float)
    if scheme is Scheme.NONE:
        return eps_u
    eps_c = np.asarray(eps_cond, dtype=float)
    if eps_u.shape != eps_c.shape:
        raise ValueError(f"shape mismatch: {eps_u.shape} vs {eps_c.shape}")
    term = np.multiply(lam, eps_c - eps_u)
    return eps_u + term if scheme is Scheme.CFG else eps_u - term


def mean_from_noise(x_t, eps, schedule: NoiseSchedule, t: int) -> np.ndarray:
    """Gaussian transition mean: (x_t - (1 - alpha_t)/sqrt(1 - alpha_bar_t) * eps) / sqrt(alpha_t)."""
    alpha = schedule.alpha(t)
    ab = schedule.alpha_bar(t)
    x_t = np.asarray(x_t, dtype=float)
    eps = np.asarray(eps, dtype=float)
    return (x_t - (1.0 - alpha) / np.sqrt(1.0 - ab) * eps) / np.sqrt(alpha)


def _posterior_log_update(
    log_p, x_new, mu_uncond, mu_forbidden, sigma_sq, tau, delta, log_p_min, log_p_max
):
    """Shared log-space tracker update; shape-agnostic over leading axes.

    log p <- log p - tau/(2 sigma^2) * (|x - mu_f|^2 - |x - mu_u|^2)
                   + delta/(2 sigma^2),  then clamp.
    """
    d_f = np.sum((x_new - mu_forbidden) ** 2, axis=-1)
    d_u = np.sum((x_new - mu_uncond) ** 2, axis=-1)
    updated = log_p - tau / (2.0 * sigma_sq) * (d_f - d_u) + delta / (2.0 * sigma_sq)
    return np.clip(updated, log_p_min, log_p_max)


def update_posterior(
    state: PosteriorState,
    x_new,
    mu_uncond,
    mu_forbidden,
    sigma_sq: float,
    tau: float,
    delta: float,
) -> PosteriorState:
    """One tracker step against the means predicted from the previous state.

    The multiplicative factor on the posterior exceeds 1 exactly when
    tau * (|x - mu_f|^2 - |x - mu_u|^2) < delta.
    """
    if sigma_sq <= 0.0:
        raise ValueError(f"sigma_sq must be positive, got {sigma_sq}")
    x_new = np.asarray(x_new, dtype=float)
    mu_u = np.asarray(mu_uncond, dtype=float)
    mu_f = np.asarray(mu_forbidden, dtype=float)
    if not x_new.shape == mu_u.shape == mu_f.shape:
        raise ValueError("x_new and both means must share a shape")
    log_p = _posterior_log_update(
        state.log_p, x_new, mu_u, mu_f, sigma_sq, tau, delta,
        math.log(state.p_min), math.log(state.p_max),
    )
    return PosteriorState(log_p=float(log_p), p_min=state.p_min, p_max=state.p_max)


def sld_lambda(
    eps_uncond,
    eps_neg,
    cfg: SldConfig,
    lambda0: float,
    state: SldState,
    t: int,
) -> tuple[np.ndarray, SldState]:
    """Elementwise sld guidance scale plus the updated per-chain state.

    Raw scale per element: lambda0 * min(1, scale * |eps_u - eps_neg|)
    where the signed difference is below the threshold, else 0.  The
    applied scale adds momentum_scale times the running EMA, and is a
    zero vector during the first warmup_steps reverse steps (the EMA
    still accumulates during warmup).
    """
    eps_u = np.asarray(eps_uncond, dtype=float)
    eps_n = np.asarray(eps_neg, dtype=float)
    if eps_u.shape != eps_n.shape:
        raise ValueError(f"shape mismatch: {eps_u.shape} vs {eps_n.shape}")
    if int(t) < 1:
        raise ValueError(f"step t={t} must be >= 1")
    diff = eps_u - eps_n
    raw = np.where(
        diff < cfg.threshold,
        lambda0 * np.minimum(1.0, cfg.scale * np.abs(diff)),
        0.0,
    )
    if state.steps_seen < cfg.warmup_steps:
        applied = np.zeros_like(raw)
    else:
        applied = raw + cfg.momentum_scale * state.momentum
    momentum = cfg.momentum_beta * state.momentum + (1.0 - cfg.momentum_beta) * raw
    return applied, SldState(momentum=momentum, steps_seen=state.steps_seen + 1)
