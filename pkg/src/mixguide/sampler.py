"""Reverse DDPM loop with guidance, posterior tracking and batch orchestration.

Each chain owns a counter-based random stream keyed by (seed, chain_index),
so batches are reproducible under any execution plan: run_batch processes
chains in vectorized blocks but produces bit-identical results to running
run_chain once per index.

Per reverse step t = T, ..., 1 the loop (1) evaluates both noise
predictions at x_t, (2) forms the guidance scale from the posterior known
so far (staggered: no fixed-point solve), (3) combines and takes the DDPM
step to x_{t-1}, and (4) updates the tracked posterior by measuring
x_{t-1} against the transition means predicted from x_t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .guidance import (
    GuidanceConfig,
    Scheme,
    _posterior_log_update,
    combine_noise,
    dynamic_lambda,
    mean_from_noise,
    sld_lambda,
    SldState,
)
from .mixture import (
    AnalyticNoisePredictor,
    MixtureSplit,
    exact_posterior,
    forbidden_log_odds,
)
from .schedule import NoiseSchedule

_DNG = {Scheme.DNG_EXACT, Scheme.DNG_TRACKED}


@dataclass(frozen=True, eq=False)
class RunConfig:
    """Everything one guided sampling run needs."""

    split: MixtureSplit
    schedule: NoiseSchedule
    guidance: GuidanceConfig
    n_samples: int = 1
    seed: int = 0
    record_trajectories: bool = False
    record_noise: bool = False

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


@dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    """One reverse chain: states x_T..x_0 plus per-step guidance quantities.

    states[k] is x_{T-k} (so states[0] = x_T and states[-1] = x_0);
    lambdas[k] and posteriors[k] belong to reverse step t = T - k and hold
    the values used to guide that step (for the tracked scheme that is the
    pre-update posterior).  posteriors is None for schemes that carry no
    posterior; lambdas has shape (T, d) for the elementwise sld scheme.
    """

    chain_index: int
    seed: int
    states: np.ndarray
    lambdas: np.ndarray
    posteriors: np.ndarray | None
    eps_uncond: np.ndarray | None = None
    eps_cond: np.ndarray | None = None

    @property
    def x0(self) -> np.ndarray:
        return self.states[-1]

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1


def _chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(chain_index),))
    return np.random.Generator(np.random.Philox(ss))


def ddpm_step(x_t, eps_guided, schedule: NoiseSchedule, t: int, z) -> np.ndarray:
    """x_{t-1} = mean_from_noise(x_t, eps, t) + sqrt(beta_t) * z.

    z is a caller-supplied standard-normal draw; by convention the caller
    passes z = 0 at the final step t = 1.
    """
    x_t = np.asarray(x_t, dtype=float)
    eps = np.asarray(eps_guided, dtype=float)
    z = np.asarray(z, dtype=float)
    if x_t.shape != eps.shape:
        raise ValueError(f"x_t shape {x_t.shape} != eps shape {eps.shape}")
    return mean_from_noise(x_t, eps, schedule, t) + np.sqrt(schedule.beta(t)) * z


def _conditional_arm(split: MixtureSplit, scheme: Scheme):
    if scheme is Scheme.CFG:
        return split.allowed
    if scheme in (Scheme.NP, Scheme.SLD) or scheme in _DNG:
        return split.forbidden
    return None


def _run_block(config: RunConfig, chain_indices, record: bool):
    """Vectorized reverse loop over one block of chains."""
    split, sched, guid = config.split, config.schedule, config.guidance
    scheme = guid.scheme
    T, d, n = sched.T, split.full.dim, len(chain_indices)

    x = np.empty((n, d))
    z_tape = np.empty((n, T - 1, d))
    for row, ci in enumerate(chain_indices):
        rng = _chain_rng(config.seed, ci)
        x[row] = rng.standard_normal(d)
        if T > 1:
            z_tape[row] = rng.standard_normal((T - 1, d))

    pred_u = AnalyticNoisePredictor(split.full, sched)
    cond_gmm = _conditional_arm(split, scheme)
    pred_c = AnalyticNoisePredictor(cond_gmm, sched) if cond_gmm is not None else None

    log_p = None
    if scheme is Scheme.DNG_TRACKED:
        log_p = np.full(n, math.log(guid.p0))
    sld_state = SldState.initial(d) if scheme is Scheme.SLD else None

    states = lam_rec = post_rec = eps_u_rec = eps_c_rec = None
    if record:
        states = np.empty((n, T + 1, d))
        states[:, 0] = x
        lam_rec = np.empty((n, T, d)) if scheme is Scheme.SLD else np.empty((n, T))
        post_rec = np.empty((n, T)) if scheme in _DNG else None
        if config.record_noise:
            eps_u_rec = np.empty((n, T, d))
            eps_c_rec = np.empty((n, T, d))

    for k, t in enumerate(range(T, 0, -1)):
        try:
            eps_u = pred_u(x, t)
            eps_c = pred_c(x, t) if pred_c is not None else None

            post = None
            if scheme is Scheme.NONE:
                lam, lam_b = np.zeros(n), 0.0
            elif scheme in (Scheme.CFG, Scheme.NP):
                lam, lam_b = np.full(n, guid.lambda0), guid.lambda0
            elif scheme is Scheme.DNG_TRACKED:
                # exp(log p) can overshoot the clamp by one ulp; re-clip so
                # the recorded posterior honors the bounds exactly
                post = np.clip(np.exp(log_p), guid.p_min, guid.p_max)
                lam = dynamic_lambda(post, guid.lambda0)
                lam_b = lam[:, None]
            elif scheme is Scheme.DNG_EXACT:
                ab_state = sched.state_alpha_bar(t)
                post = np.atleast_1d(exact_posterior(split, x, ab_state))
                lam = guid.lambda0 * np.exp(forbidden_log_odds(split, x, ab_state))
                lam_b = lam[:, None]
            else:  # SLD
                lam, sld_state = sld_lambda(
                    eps_u, eps_c, guid.sld, guid.lambda0, sld_state, t
                )
                lam_b = lam

            eps_g = combine_noise(eps_u, eps_c, lam_b, scheme)
            z = z_tape[:, k] if t > 1 else 0.0
            x_new = mean_from_noise(x, eps_g, sched, t) + np.sqrt(sched.beta(t)) * z
            if not np.all(np.isfinite(x_new)):
                raise FloatingPointError("state became non-finite")

            if scheme is Scheme.DNG_TRACKED:
                mu_u = mean_from_noise(x, eps_u, sched, t)
                mu_f = mean_from_noise(x, eps_c, sched, t)
                log_p = _posterior_log_update(
                    log_p, x_new, mu_u, mu_f, sched.sigma_sq(t),
                    guid.tau, guid.delta,
                    math.log(guid.p_min), math.log(guid.p_max),
                )
        except Exception as exc:
            raise RuntimeError(f"reverse step t={t} failed: {exc}") from exc

        if record:
            states[:, k + 1] = x_new
            lam_rec[:, k] = lam
            if post_rec is not None:
                post_rec[:, k] = post
            if eps_u_rec is not None:
                eps_u_rec[:, k] = eps_u
                eps_c_rec[:, k] = eps_c if eps_c is not None else eps_u
        x = x_new

    if not record:
        return x, None

    records = []
    for row, ci in enumerate(chain_indices):
        records.append(
            TrajectoryRecord(
                chain_index=int(ci),
                seed=config.seed,
                states=states[row].copy(),
                lambdas=lam_rec[row].copy(),
                posteriors=None if post_rec is None else post_rec[row].copy(),
                eps_uncond=None if eps_u_rec is None else eps_u_rec[row].copy(),
                eps_cond=None if eps_c_rec is None else eps_c_rec[row].copy(),
            )
        )
    return x, records


def run_chain(config: RunConfig, chain_index: int) -> TrajectoryRecord:
    """Run one reverse chain (always recorded)."""
    _, records = _run_block(config, [chain_index], record=True)
    return records[0]


def _auto_block(n: int, T: int, d: int) -> int:
    budget = 4_000_000  # floats of noise tape per block
    return max(1, min(n, 16384, budget // max(1, T * d)))


def run_batch(config: RunConfig, block_size: int | None = None):
    """Run n_samples chains with indices 0..n-1.

    Returns a list of TrajectoryRecord when record_trajectories is set and
    otherwise just the (n, d) array of final samples.  Chains are processed
    in blocks for speed; the per-chain streams make the result independent
    of the block size.
    """
    n = config.n_samples
    T, d = config.schedule.T, config.split.full.dim
    block = block_size if block_size else _auto_block(n, T, d)
    record = config.record_trajectories

    finals = np.empty((n, d))
    records: list[TrajectoryRecord] = []
    for start in range(0, n, block):
        idx = range(start, min(start + block, n))
        x, recs = _run_block(config, idx, record=record)
        finals[start : start + len(x)] = x
        if record:
            records.extend(recs)
    return records if record else finals
