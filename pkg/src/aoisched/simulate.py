"""Monte Carlo policy evaluation by episodic slot simulation.

Two modes: ``kernel`` draws successors straight from the analytic transition
kernel (so the simulated chain is exactly the MDP the solver optimised),
``physical`` redraws fading per slot and replays the decode/harvest logic,
quantifying the kernel's modelling approximations.

Episode ``i`` always uses its own generator seeded ``base_seed + i`` and, in
kernel mode, consumes exactly one uniform per slot, so results are
independent of episode execution order and the batched fast path visits the
exact state sequences that per-episode :func:`run_episode` calls would.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .baselines import solve_restricted
from .config import SystemParams
from .link import SCHEME_TAGS, sample_slot_outcome
from .mdp import State, TransitionKernel, cost_table

__all__ = [
    "SimConfig",
    "EpisodeTrace",
    "MetricReport",
    "run_episode",
    "estimate_ewsaoi",
    "snr_sweep",
    "write_trace_csv",
]


@dataclass(frozen=True)
class SimConfig:
    horizon: int
    n_episodes: int = 1
    base_seed: int = 0
    mode: str = "kernel"                  # "kernel" | "physical"
    harvest_mode: str = "deterministic"   # "deterministic" | "sampled" (physical mode)
    sic_order: str = "instantaneous"      # NOMA decoding order in physical mode

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_episodes < 1:
            raise ValueError(f"n_episodes must be >= 1, got {self.n_episodes}")
        if self.mode not in ("kernel", "physical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.harvest_mode not in ("deterministic", "sampled"):
            raise ValueError(f"unknown harvest_mode {self.harvest_mode!r}")
        if self.sic_order not in ("instantaneous", "mean"):
            raise ValueError(f"unknown sic_order {self.sic_order!r}")


@dataclass
class EpisodeTrace:
    """One simulated episode.

    ``states[t]`` is the state at the start of slot t (so there are T+1
    rows); ``actions``, ``success`` and ``harvested_levels`` have one row per
    slot.
    """

    states: np.ndarray            # (T+1, 4) int32
    actions: np.ndarray           # (T,) int16
    success: np.ndarray           # (T, 2) bool
    harvested_levels: np.ndarray  # (T, 2) int32

    @property
    def horizon(self) -> int:
        return len(self.actions)

    def ewsaoi(self, w1: float, w2: float) -> float:
        """Time-averaged weighted AoI over the post-transition states."""
        d = self.states[1:, :2]
        return float((w1 * d[:, 0] + w2 * d[:, 1]).mean())


@dataclass(frozen=True)
class MetricReport:
    ewsaoi_mean: float
    stderr: float | None                  # None for a single episode
    ci95: tuple[float, float] | None
    per_device_aoi: tuple[float, float]
    scheme_freq: dict
    n_episodes: int
    horizon: int


def _branch_from_uniform(u, cum):
    # branch = count of cumulative probabilities <= u, capped at the last one
    return np.minimum((u >= cum).sum(axis=-1), cum.shape[-1] - 1)


def run_episode(policy, s0: State, kernel: TransitionKernel, config: SimConfig, rng) -> EpisodeTrace:
    """Simulate one episode of ``config.horizon`` slots from state ``s0``."""
    policy = np.asarray(policy)
    space = kernel.space
    T = config.horizon
    idx = space.index(State(*s0))

    d1g, d2g, e1g, e2g = space.grids()
    states = np.empty((T + 1, 4), dtype=np.int32)
    actions = np.empty(T, dtype=np.int16)
    success = np.empty((T, 2), dtype=bool)
    harvested = np.zeros((T, 2), dtype=np.int32)

    harvest_levels = kernel.derived.harvest_levels
    cum = np.cumsum(kernel.branch_probs, axis=1)
    m = kernel.params.battery_levels
    dmax = kernel.params.delta_max

    for t in range(T):
        states[t] = (d1g[idx], d2g[idx], e1g[idx], e2g[idx])
        a = int(policy[idx])
        kernel.check_feasible(idx, a, slot=t)
        actions[t] = a
        charged = kernel.actions.charged(a)

        if config.mode == "kernel":
            b = int(_branch_from_uniform(rng.random(), cum[a]))
            success[t] = (b <= 1, b in (0, 2))
            for i in range(2):
                if charged[i]:
                    harvested[t, i] = harvest_levels[i]
            idx = int(kernel.succ_idx[a, idx, b])
        else:
            scheme = kernel.actions.scheme(a)
            powers = kernel.actions.powers(a, kernel.derived)
            outcome = sample_slot_outcome(
                scheme, powers, kernel.derived, rng,
                harvest_mode=config.harvest_mode, order=config.sic_order,
            )
            success[t] = outcome.success
            spend = kernel.spend[a]
            d = [0, 0]
            e = [0, 0]
            for i in range(2):
                if config.harvest_mode == "deterministic":
                    gain = harvest_levels[i] if charged[i] else 0
                else:
                    gain = math.floor(outcome.harvested[i] / kernel.derived.e_step)
                harvested[t, i] = gain
                e[i] = min(max(int(states[t, 2 + i]) - int(spend[i]) + gain, 0), m)
                d[i] = 1 if outcome.success[i] else min(int(states[t, i]) + 1, dmax)
            idx = space.index(State(d[0], d[1], e[0], e[1]))

    states[T] = (d1g[idx], d2g[idx], e1g[idx], e2g[idx])
    return EpisodeTrace(states, actions, success, harvested)


def _batch_kernel_episodes(policy, idx0, kernel, config):
    """All-episode kernel-mode simulation.

    Replays the identical per-episode uniform streams (seed base_seed + i,
    one draw per slot), so the visited state sequences are bit-equal to
    per-episode :func:`run_episode` runs.  Returns per-episode EWSAoI means,
    per-episode per-device AoI means, and total action counts.
    """
    T, n = config.horizon, config.n_episodes
    w1, w2 = kernel.params.w1, kernel.params.w2
    uniforms = np.empty((n, T))
    for i in range(n):
        uniforms[i] = np.random.default_rng(config.base_seed + i).random(T)

    d1g, d2g, _, _ = kernel.space.grids()
    cum = np.cumsum(kernel.branch_probs, axis=1)
    succ = kernel.succ_idx
    feasible = kernel.feasible
    policy = np.asarray(policy)

    s = np.full(n, idx0, dtype=np.int64)
    aoi1 = np.empty((n, T), dtype=np.int32)
    aoi2 = np.empty((n, T), dtype=np.int32)
    action_counts = np.zeros(kernel.n_actions, dtype=np.int64)

    for t in range(T):
        a = policy[s]
        bad = np.flatnonzero(~feasible[s, a])
        if bad.size:
            kernel.check_feasible(int(s[bad[0]]), int(a[bad[0]]), slot=t)
        action_counts += np.bincount(a, minlength=kernel.n_actions)
        b = _branch_from_uniform(uniforms[:, t, None], cum[a])
        s = succ[a, s, b].astype(np.int64)
        aoi1[:, t] = d1g[s]
        aoi2[:, t] = d2g[s]

    means = (w1 * aoi1 + w2 * aoi2).mean(axis=1)
    aoi = np.stack([aoi1.mean(axis=1), aoi2.mean(axis=1)], axis=1)
    return means, aoi, action_counts


def estimate_ewsaoi(policy, s0: State, kernel: TransitionKernel, config: SimConfig) -> MetricReport:
    """Episode-averaged EWSAoI with a normal-approximation confidence interval."""
    w1, w2 = kernel.params.w1, kernel.params.w2
    idx0 = kernel.space.index(State(*s0))

    if config.mode == "kernel":
        means, aoi, action_counts = _batch_kernel_episodes(policy, idx0, kernel, config)
    else:
        means = np.empty(config.n_episodes)
        aoi = np.empty((config.n_episodes, 2))
        action_counts = np.zeros(kernel.n_actions, dtype=np.int64)
        for i in range(config.n_episodes):
            rng = np.random.default_rng(config.base_seed + i)
            trace = run_episode(policy, s0, kernel, config, rng)
            means[i] = trace.ewsaoi(w1, w2)
            aoi[i] = trace.states[1:, :2].mean(axis=0)
            action_counts += np.bincount(trace.actions, minlength=kernel.n_actions)

    mean = float(means.mean())
    if config.n_episodes > 1:
        stderr = float(means.std(ddof=1) / math.sqrt(config.n_episodes))
        ci = (mean - 1.96 * stderr, mean + 1.96 * stderr)
    else:
        stderr = None
        ci = None

    total_slots = int(action_counts.sum())
    freq = {tag: 0.0 for tag in SCHEME_TAGS}
    for a, count in enumerate(action_counts):
        if count:
            freq[kernel.actions.scheme(a).tag] += int(count) / total_slots

    return MetricReport(
        ewsaoi_mean=mean,
        stderr=stderr,
        ci95=ci,
        per_device_aoi=(float(aoi[:, 0].mean()), float(aoi[:, 1].mean())),
        scheme_freq=freq,
        n_episodes=config.n_episodes,
        horizon=config.horizon,
    )


def snr_sweep(
    params: SystemParams,
    presets,
    snr_db_list,
    s0: State,
    config: SimConfig,
    kernel: TransitionKernel | None = None,
    progress=None,
) -> list[dict]:
    """Solve and simulate every (preset, SNR) cell; rows in sweep order.

    The kernel geometry is built once and re-probed per SNR (only the noise
    power changes).  Each cell re-runs policy iteration at the listed SNR and
    evaluates the resulting policy from ``s0``.
    """
    presets = list(presets)
    snr_db_list = list(snr_db_list)
    rows = []
    if not presets or not snr_db_list:
        return rows
    if kernel is None:
        kernel = TransitionKernel(params)
    for snr in snr_db_list:
        k = kernel.at_snr(snr)
        costs = cost_table(k.space, k.params)
        for preset in presets:
            if progress is not None:
                progress(f"solving {preset} at {snr} dB")
            result = solve_restricted(k, costs, preset, k.params.gamma, k.params.eps_star)
            report = estimate_ewsaoi(result.policy, s0, k, config)
            rows.append(
                {
                    "snr_db": snr,
                    "preset": preset,
                    "ewsaoi_mean": report.ewsaoi_mean,
                    "stderr": report.stderr,
                }
            )
    return rows


def write_trace_csv(trace: EpisodeTrace, fh) -> None:
    """Per-slot trace rows: t, state, action code, success flags."""
    writer = csv.writer(fh)
    writer.writerow(["t", "delta1", "delta2", "e1", "e2", "action_code", "succ1", "succ2"])
    for t in range(trace.horizon):
        d1, d2, e1, e2 = trace.states[t]
        writer.writerow(
            [t, d1, d2, e1, e2, int(trace.actions[t]),
             int(trace.success[t, 0]), int(trace.success[t, 1])]
        )
