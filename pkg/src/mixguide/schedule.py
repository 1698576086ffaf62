"""Discrete variance-preserving noise schedules and their derived constants.

Indexing: steps are 1-based, t = 1 .. T, matching the reverse loop
"for t = T, ..., 1".  Arrays are stored 0-based, so ``betas[t - 1]`` is
beta_t; the accessor methods take the 1-based t.  ``alpha_bar(0)`` is
defined as 1 (clean data).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_T = 1000
DEFAULT_BETA_MIN = 1e-4
DEFAULT_BETA_MAX = 0.02


def _readonly(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Per-step constants of a forward noising schedule {beta_t}.

    alphas[t-1] = 1 - beta_t, alpha_bars[t-1] = prod_{i<=t} alpha_i, and the
    reverse-step variance sigma_t^2 equals beta_t (the 1 - alpha_t choice).
    """

    betas: np.ndarray
    alphas: np.ndarray = field(init=False, repr=False)
    alpha_bars: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = _readonly(self.betas)
        if b.ndim != 1 or len(b) < 1:
            raise ValueError("betas must be a non-empty 1-D array")
        if np.any(b <= 0.0) or np.any(b >= 1.0):
            raise ValueError("every beta must lie strictly in (0, 1)")
        alphas = _readonly(1.0 - b)
        abars = _readonly(np.cumprod(alphas))
        if np.any(abars <= 0.0) or np.any(np.diff(abars) >= 0.0):
            raise ValueError("alpha_bar must stay positive and strictly decreasing")
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "alpha_bars", abars)

    @property
    def T(self) -> int:
        return len(self.betas)

    def _check_step(self, t: int) -> int:
        t = int(t)
        if not 1 <= t <= self.T:
            raise ValueError(f"step t={t} outside [1, {self.T}]")
        return t

    def beta(self, t: int) -> float:
        return float(self.betas[self._check_step(t) - 1])

    def alpha(self, t: int) -> float:
        return float(self.alphas[self._check_step(t) - 1])

    def alpha_bar(self, t: int) -> float:
        if t == 0:
            return 1.0
        return float(self.alpha_bars[self._check_step(t) - 1])

    def sigma_sq(self, t: int) -> float:
        """Reverse-transition variance at step t (equals beta_t)."""
        return self.beta(t)

    def state_alpha_bar(self, t: int) -> float:
        """Signal level of the reverse-chain state x_t.

        The reverse chain initializes x_T from N(0, I), i.e. from the
        zero-signal limit, so step T maps to alpha_bar = 0 rather than to
        the (nearly zero) forward alpha_bar_T.  All other steps map to the
        forward alpha_bar_t.
        """
        t = self._check_step(t)
        return 0.0 if t == self.T else float(self.alpha_bars[t - 1])


def linear_schedule(
    T: int = DEFAULT_T,
    beta_min: float = DEFAULT_BETA_MIN,
    beta_max: float = DEFAULT_BETA_MAX,
) -> NoiseSchedule:
    """Betas linearly interpolated from beta_min (t=1) to beta_max (t=T)."""
    if T < 2:
        raise ValueError(f"T must be >= 2, got {T}")
    if not 0.0 < beta_min <= beta_max < 1.0:
        raise ValueError(
            f"need 0 < beta_min <= beta_max < 1, got ({beta_min}, {beta_max})"
        )
    return NoiseSchedule(np.linspace(beta_min, beta_max, T))


def rescaled_linear_schedule(T: int, reference_T: int = DEFAULT_T) -> NoiseSchedule:
    """Linear schedule with betas scaled by reference_T / T.

    Keeps the total injected noise (sum of betas, hence the terminal
    alpha_bar) approximately constant when changing the step count, so
    runs with different T target the same forward process.
    """
    scale = reference_T / T
    return linear_schedule(T, DEFAULT_BETA_MIN * scale, DEFAULT_BETA_MAX * scale)


def forward_sample(x0, t: int, schedule: NoiseSchedule, noise) -> np.ndarray:
    """x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise.

    ``noise`` is a caller-supplied standard-normal draw, which keeps the
    function deterministic.
    """
    ab = schedule.alpha_bar(schedule._check_step(t))
    x0 = np.asarray(x0, dtype=float)
    noise = np.asarray(noise, dtype=float)
    if x0.shape != noise.shape:
        raise ValueError(f"x0 shape {x0.shape} != noise shape {noise.shape}")
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise
