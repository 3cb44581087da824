"""Discounted-MDP solvers: policy iteration, value iteration, diagnostics.

Any kernel object with ``n_states``, ``n_actions``, a ``feasible`` (N, A)
bool array and per-action ``succ(a)`` / ``probs(a)`` arrays of shape (N, B)
can be solved; :class:`aoisched.mdp.TransitionKernel` and the explicit
:class:`TabularKernel` below both qualify.

Policy evaluation runs sequential in-place sweeps in state order (the
single-table update loop), stopping when the largest per-state change in a
sweep falls below ``eps_star``; improvement is a full greedy argmin with
ties broken toward the lowest action code.  Everything is deterministic:
identical inputs give bit-identical policies and values.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

__all__ = [
    "SolveLog",
    "SolverError",
    "PolicyIterationResult",
    "TabularKernel",
    "policy_iteration",
    "value_iteration",
    "bellman_residual",
    "greedy_policy",
    "evaluate_policy",
]


class SolverError(RuntimeError):
    """Iteration cap exceeded; carries the solve log so far in ``.log``."""

    def __init__(self, message, log=None):
        super().__init__(message)
        self.log = log


@dataclass
class SolveLog:
    """Per-sweep and per-improvement progress records.

    ``rows`` holds (phase, iteration, residual, policy_changes) tuples:
    ``eval`` rows carry the sweep's max value change and an empty change
    count, ``improve`` rows carry the round's policy-change count.
    """

    rows: list = field(default_factory=list)
    eval_sweeps: list = field(default_factory=list)  # sweeps per improvement round
    wall_time: float = 0.0

    def log_sweep(self, sweep: int, residual: float):
        self.rows.append(("eval", sweep, residual, ""))

    def log_improvement(self, round_: int, residual: float, changes: int):
        self.rows.append(("improve", round_, residual, changes))

    @property
    def final_residual(self) -> float:
        evals = [r[2] for r in self.rows if r[0] == "eval"]
        return evals[-1] if evals else float("nan")

    @property
    def n_rounds(self) -> int:
        return sum(1 for r in self.rows if r[0] == "improve")

    def write_csv(self, fh):
        writer = csv.writer(fh)
        writer.writerow(["phase", "iteration", "residual", "policy_changes"])
        for phase, it, res, changes in self.rows:
            writer.writerow([phase, it, repr(float(res)), changes])


class PolicyIterationResult(NamedTuple):
    policy: np.ndarray  # (N,) action codes
    value: np.ndarray   # (N,) float64
    log: SolveLog


class TabularKernel:
    """Explicit kernel from per-(state, action) successor lists.

    ``entries`` maps (state, action) to a list of (next_state, probability)
    pairs; pairs absent from the map are infeasible.  Intended for small
    hand-built MDPs in tests and experiments.
    """

    def __init__(self, n_states: int, n_actions: int, entries: dict):
        self.n_states = n_states
        self.n_actions = n_actions
        self.feasible = np.zeros((n_states, n_actions), dtype=bool)
        width = max(len(v) for v in entries.values())
        self._succ = np.zeros((n_actions, n_states, width), dtype=np.int32)
        self._probs = np.zeros((n_actions, n_states, width), dtype=np.float64)
        for (s, a), pairs in entries.items():
            self.feasible[s, a] = True
            for b, (sp, p) in enumerate(pairs):
                self._succ[a, s, b] = sp
                self._probs[a, s, b] = p

    def succ(self, a):
        return self._succ[a]

    def probs(self, a):
        return self._probs[a]


@njit(cache=True)
def _gs_sweep(succ, probs, cost, gamma, value):
    """One in-place evaluation sweep in state order; returns max |change|."""
    eps = 0.0
    n, width = succ.shape
    for s in range(n):
        old = value[s]
        acc = 0.0
        for b in range(width):
            acc += probs[s, b] * value[succ[s, b]]
        value[s] = cost[s] + gamma * acc
        diff = abs(old - value[s])
        if diff > eps:
            eps = diff
    return eps


def _effective_feasible(kernel, action_mask):
    feas = kernel.feasible
    if action_mask is not None:
        feas = feas & np.asarray(action_mask, dtype=bool)[None, :]
    uncovered = np.flatnonzero(~feas.any(axis=1))
    if uncovered.size:
        raise ValueError(f"state {uncovered[0]} has no feasible action")
    return feas


def _policy_tables(kernel, policy):
    """Gather per-state successor/probability tables for a fixed policy."""
    n = kernel.n_states
    width = max(kernel.succ(a).shape[1] for a in range(kernel.n_actions))
    succ = np.zeros((n, width), dtype=np.int32)
    probs = np.zeros((n, width), dtype=np.float64)
    for a in range(kernel.n_actions):
        rows = np.flatnonzero(policy == a)
        if rows.size == 0:
            continue
        sa, pa = kernel.succ(a), kernel.probs(a)
        succ[rows, : sa.shape[1]] = sa[rows]
        probs[rows, : pa.shape[1]] = pa[rows]
    return succ, probs


def _greedy(kernel, cost_vec, gamma, value, feas):
    """Greedy argmin of cost + gamma * E[V(s')], lowest code wins ties."""
    n = kernel.n_states
    best_q = np.full(n, np.inf)
    best_a = np.zeros(n, dtype=np.int64)
    for a in range(kernel.n_actions):
        q = cost_vec + gamma * (kernel.probs(a) * value[kernel.succ(a)]).sum(axis=1)
        q = np.where(feas[:, a], q, np.inf)
        better = q < best_q
        best_q = np.where(better, q, best_q)
        best_a[better] = a
    return best_a, best_q


def evaluate_policy(
    kernel,
    cost_vec,
    gamma: float,
    policy,
    value=None,
    eps_star: float = 1e-4,
    max_sweeps: int = 10_000,
    log: SolveLog | None = None,
) -> np.ndarray:
    """Iteratively evaluate a fixed policy to accuracy ``eps_star`` (in place
    on ``value`` when given)."""
    if value is None:
        value = np.zeros(kernel.n_states, dtype=np.float64)
    succ, probs = _policy_tables(kernel, np.asarray(policy))
    cost_vec = np.ascontiguousarray(cost_vec, dtype=np.float64)
    sweeps = 0
    while True:
        eps = _gs_sweep(succ, probs, cost_vec, gamma, value)
        sweeps += 1
        if log is not None:
            log.log_sweep(sweeps, eps)
        if eps < eps_star:
            break
        if sweeps >= max_sweeps:
            raise SolverError(
                f"policy evaluation did not reach eps_star={eps_star} "
                f"within {max_sweeps} sweeps (last residual {eps:.3e})",
                log,
            )
    if log is not None:
        log.eval_sweeps.append(sweeps)
    return value


def greedy_policy(kernel, cost_vec, gamma, value, action_mask=None) -> np.ndarray:
    feas = _effective_feasible(kernel, action_mask)
    best_a, _ = _greedy(kernel, cost_vec, gamma, value, feas)
    return best_a


def policy_iteration(
    kernel,
    cost_vec,
    gamma: float,
    eps_star: float,
    action_mask=None,
    max_eval_sweeps: int = 10_000,
    max_rounds: int = 1_000,
) -> PolicyIterationResult:
    """Alternate iterative evaluation and greedy improvement until stable.

    Starts from V = 0 and the lowest feasible action code in every state
    (the WET action when unrestricted).
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if eps_star <= 0:
        raise ValueError(f"eps_star must be > 0, got {eps_star}")
    t0 = time.perf_counter()
    feas = _effective_feasible(kernel, action_mask)
    cost_vec = np.ascontiguousarray(cost_vec, dtype=np.float64)

    policy = feas.argmax(axis=1).astype(np.int64)
    value = np.zeros(kernel.n_states, dtype=np.float64)
    log = SolveLog()

    for round_ in range(1, max_rounds + 1):
        evaluate_policy(
            kernel, cost_vec, gamma, policy, value,
            eps_star=eps_star, max_sweeps=max_eval_sweeps, log=log,
        )
        new_policy, _ = _greedy(kernel, cost_vec, gamma, value, feas)
        changes = int((new_policy != policy).sum())
        log.log_improvement(round_, log.final_residual, changes)
        policy = new_policy
        if changes == 0:
            log.wall_time = time.perf_counter() - t0
            return PolicyIterationResult(policy, value, log)

    raise SolverError(f"policy not stable after {max_rounds} improvement rounds", log)


def value_iteration(
    kernel,
    cost_vec,
    gamma: float,
    tol: float = 1e-3,
    action_mask=None,
    max_iters: int = 100_000,
) -> tuple[np.ndarray, np.ndarray]:
    """Successive Bellman backups; independent check on policy iteration.

    Stops when the sup-norm step falls below ``tol * (1 - gamma) / (2 *
    gamma)``, which brings the greedy policy within ``tol`` of optimal.
    """
    if not 0 < gamma < 1:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    feas = _effective_feasible(kernel, action_mask)
    cost_vec = np.ascontiguousarray(cost_vec, dtype=np.float64)
    threshold = tol * (1.0 - gamma) / (2.0 * gamma)

    value = np.zeros(kernel.n_states, dtype=np.float64)
    for _ in range(max_iters):
        _, backed = _greedy(kernel, cost_vec, gamma, value, feas)
        diff = np.abs(backed - value).max()
        value = backed
        if diff < threshold:
            policy, _ = _greedy(kernel, cost_vec, gamma, value, feas)
            return policy, value
    raise SolverError(f"value iteration did not converge in {max_iters} iterations")


def bellman_residual(kernel, cost_vec, gamma, value, action_mask=None) -> float:
    """Sup-norm mismatch between ``value`` and one greedy Bellman backup."""
    feas = _effective_feasible(kernel, action_mask)
    cost_vec = np.ascontiguousarray(cost_vec, dtype=np.float64)
    _, backed = _greedy(kernel, cost_vec, gamma, np.asarray(value, dtype=np.float64), feas)
    return float(np.abs(np.asarray(value) - backed).max())
