"""Truncated (AoI, battery) MDP: states, coded actions, transition kernel.

State = (delta1, delta2, e1, e2) with AoI in 1..delta_max and battery levels
in 0..M.  Actions are the coded triples [v0, alpha1, alpha2]: WET, solo
transmission of either device (full power), the L-1 NOMA power splits, and
the two charge-while-transmitting combinations; L+4 codes in total (14 for
L=10), ordered exactly in that sequence.

The kernel is stored factorised: successor indices per action and branch
(branch = which devices decoded successfully), and one probability
four-vector per action.  Outage probabilities depend only on the action's
power assignment, never on the state, and energy transitions are
deterministic, so this compact form is exact.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .config import DerivedParams, SystemParams, derive
from . import link
from .link import NOMA, OMA, WET, WET_OMA, OutagePair, Scheme

__all__ = [
    "State",
    "Action",
    "ActionTable",
    "StateSpace",
    "TransitionKernel",
    "InfeasibleActionError",
    "enumerate_states",
    "build_kernel",
    "cost",
    "cost_table",
]

# branch order: which devices were decoded this slot
_BRANCH_SUCCESS = ((True, True), (True, False), (False, True), (False, False))


class InfeasibleActionError(ValueError):
    """An action's battery cost exceeds what a device holds."""


class State(NamedTuple):
    delta1: int
    delta2: int
    e1: int
    e2: int


class Action(NamedTuple):
    """Coded action [v0, alpha1, alpha2]; alphas stored as numerators over L."""

    v0: int
    num1: int
    num2: int


class ActionTable:
    """The ordered action alphabet for L power levels.

    Code order: [1,0,0]; [0,1,0]; [0,0,1]; [0, l/L, (L-l)/L] for l=1..L-1;
    [1,1,0]; [1,0,1].
    """

    def __init__(self, power_levels: int):
        L = power_levels
        self.power_levels = L
        self.actions: tuple[Action, ...] = tuple(
            [Action(1, 0, 0), Action(0, L, 0), Action(0, 0, L)]
            + [Action(0, l, L - l) for l in range(1, L)]
            + [Action(1, L, 0), Action(1, 0, L)]
        )
        self._code = {a: c for c, a in enumerate(self.actions)}

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, code: int) -> Action:
        return self.actions[code]

    def code(self, action: Action) -> int:
        return self._code[action]

    def scheme(self, code: int) -> Scheme:
        a = self.actions[code]
        active = (a.num1 > 0, a.num2 > 0)
        if a.v0 and not any(active):
            return Scheme(WET)
        if all(active):
            return Scheme(NOMA)
        device = 1 if active[0] else 2
        return Scheme(WET_OMA, device) if a.v0 else Scheme(OMA, device)

    def powers(self, code: int, derived: DerivedParams) -> tuple[float, float]:
        a = self.actions[code]
        return (a.num1 * derived.p_step, a.num2 * derived.p_step)

    def spend_levels(self, code: int, derived: DerivedParams) -> tuple[int, int]:
        a = self.actions[code]
        return (derived.cost_levels[a.num1], derived.cost_levels[a.num2])

    def charged(self, code: int) -> tuple[bool, bool]:
        """Which devices harvest under this action (WET active and idle)."""
        a = self.actions[code]
        return (bool(a.v0) and a.num1 == 0, bool(a.v0) and a.num2 == 0)

    def describe(self, code: int) -> str:
        a = self.actions[code]
        L = self.power_levels

        def frac(num):
            return {0: "0", L: "1"}.get(num, f"{num}/{L}")

        return f"[{a.v0},{frac(a.num1)},{frac(a.num2)}]"


class StateSpace:
    """Dense bijective indexing of the truncated state space.

    Iteration order: delta1 outermost, then delta2, e1, e2 innermost.
    """

    def __init__(self, delta_max: int, battery_levels: int):
        self.delta_max = delta_max
        self.battery_levels = battery_levels
        self.n_states = delta_max * delta_max * (battery_levels + 1) ** 2
        self._grids = None

    def index(self, state: State) -> int:
        d1, d2, e1, e2 = state
        dm, m = self.delta_max, self.battery_levels
        if not (1 <= d1 <= dm and 1 <= d2 <= dm):
            raise ValueError(f"AoI out of range in {state} (delta_max={dm})")
        if not (0 <= e1 <= m and 0 <= e2 <= m):
            raise ValueError(f"battery level out of range in {state} (M={m})")
        return ((d1 - 1) * dm + (d2 - 1)) * (m + 1) ** 2 + e1 * (m + 1) + e2

    def state(self, index: int) -> State:
        if not 0 <= index < self.n_states:
            raise ValueError(f"state index {index} out of range [0, {self.n_states})")
        m = self.battery_levels
        rest, e2 = divmod(index, m + 1)
        rest, e1 = divmod(rest, m + 1)
        d1m1, d2m1 = divmod(rest, self.delta_max)
        return State(d1m1 + 1, d2m1 + 1, e1, e2)

    def grids(self):
        """Per-index component arrays (delta1, delta2, e1, e2), each (N,)."""
        if self._grids is None:
            dm, m = self.delta_max, self.battery_levels
            d = np.arange(1, dm + 1)
            e = np.arange(m + 1)
            shape = (dm, dm, m + 1, m + 1)
            self._grids = tuple(
                np.broadcast_to(arr.reshape(sh), shape).reshape(-1)
                for arr, sh in (
                    (d, (dm, 1, 1, 1)),
                    (d, (1, dm, 1, 1)),
                    (e, (1, 1, m + 1, 1)),
                    (e, (1, 1, 1, m + 1)),
                )
            )
        return self._grids


def enumerate_states(params: SystemParams) -> StateSpace:
    return StateSpace(params.delta_max, params.battery_levels)


def cost(state: State, params: SystemParams) -> float:
    """One-stage cost: weighted AoI sum, independent of the action."""
    return params.w1 * state.delta1 + params.w2 * state.delta2


def cost_table(space: StateSpace, params: SystemParams) -> np.ndarray:
    d1, d2, _, _ = space.grids()
    return params.w1 * d1 + params.w2 * d2


class TransitionKernel:
    """Exact sparse transitions for every (state, action) pair.

    Public arrays:
      - ``feasible``: (N, A) bool, battery feasibility of each action
      - ``succ_idx``: (A, N, 4) int32 successor index per decode branch
      - ``branch_probs``: (A, 4) float64, branch probabilities (shared across
        states); branch order is (both, 1 only, 2 only, none) decoded
    """

    def __init__(self, params: SystemParams, derived: DerivedParams | None = None):
        if derived is None:
            derived = derive(params)
        self.params = params
        self.derived = derived
        self.space = StateSpace(params.delta_max, params.battery_levels)
        self.actions = ActionTable(params.power_levels)
        self._build_geometry()
        self._build_probs()

    # -- construction -----------------------------------------------------

    def _build_geometry(self):
        dm, m = self.params.delta_max, self.params.battery_levels
        A = len(self.actions)
        N = self.space.n_states
        if N >= 2**31:
            raise ValueError(f"state space too large for int32 indexing ({N})")
        harvest = self.derived.harvest_levels

        d = np.arange(1, dm + 1)
        next_fail = np.minimum(d + 1, dm)  # AoI clamp at delta_max
        next_ok = np.ones(dm, dtype=np.int64)
        e = np.arange(m + 1)

        s_d1 = dm * (m + 1) ** 2
        s_d2 = (m + 1) ** 2
        s_e1 = m + 1

        self.succ_idx = np.empty((A, N, 4), dtype=np.int32)
        self.feasible = np.empty((N, A), dtype=bool)
        self.spend = np.empty((A, 2), dtype=np.int64)

        for a in range(A):
            spend = self.actions.spend_levels(a, self.derived)
            charged = self.actions.charged(a)
            self.spend[a] = spend
            gain = tuple(harvest[i] if charged[i] else 0 for i in range(2))
            e1n = np.clip(e - spend[0] + gain[0], 0, m)
            e2n = np.clip(e - spend[1] + gain[1], 0, m)
            e_part = (e1n * s_e1)[:, None] + e2n[None, :]  # (m+1, m+1)
            for b, (ok1, ok2) in enumerate(_BRANCH_SUCCESS):
                nd1 = next_ok if ok1 else next_fail
                nd2 = next_ok if ok2 else next_fail
                idx = (
                    ((nd1 - 1) * s_d1)[:, None, None, None]
                    + ((nd2 - 1) * s_d2)[None, :, None, None]
                    + e_part[None, None, :, :]
                )
                self.succ_idx[a, :, b] = idx.reshape(-1)
            feas = (e >= spend[0])[:, None] & (e >= spend[1])[None, :]
            self.feasible[:, a] = np.broadcast_to(
                feas[None, None, :, :], (dm, dm, m + 1, m + 1)
            ).reshape(-1)

    def _build_probs(self):
        A = len(self.actions)
        self.action_outage: list[OutagePair] = []
        self.branch_probs = np.empty((A, 4), dtype=np.float64)
        for a in range(A):
            pair = link.outage_pair(
                self.actions.scheme(a), self.actions.powers(a, self.derived), self.derived
            )
            self.action_outage.append(pair)
            p1, p2 = pair.p1, pair.p2
            self.branch_probs[a] = (
                (1.0 - p1) * (1.0 - p2),
                (1.0 - p1) * p2,
                p1 * (1.0 - p2),
                p1 * p2,
            )

    def at_snr(self, snr_db: float) -> "TransitionKernel":
        """Same geometry (states, feasibility, successors), new noise power."""
        clone = object.__new__(TransitionKernel)
        clone.params = self.params.with_snr(snr_db)
        clone.derived = derive(clone.params)
        clone.space = self.space
        clone.actions = self.actions
        clone.succ_idx = self.succ_idx
        clone.feasible = self.feasible
        clone.spend = self.spend
        clone._build_probs()
        return clone

    # -- solver-facing interface ------------------------------------------

    @property
    def n_states(self) -> int:
        return self.space.n_states

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    def succ(self, action_code: int) -> np.ndarray:
        return self.succ_idx[action_code]

    def probs(self, action_code: int) -> np.ndarray:
        return np.broadcast_to(self.branch_probs[action_code], (self.n_states, 4))

    # -- per-state queries -------------------------------------------------

    def feasible_actions(self, state: State) -> list[int]:
        """Codes of every action the state's batteries can pay for."""
        return np.flatnonzero(self.feasible[self.space.index(state)]).tolist()

    def check_feasible(self, state_index: int, action_code: int, slot: int | None = None):
        if self.feasible[state_index, action_code]:
            return
        state = self.space.state(state_index)
        spend = self.spend[action_code]
        energy = (state.e1, state.e2)
        dev = 1 if spend[0] > energy[0] else 2
        where = f"slot {slot}: " if slot is not None else ""
        raise InfeasibleActionError(
            f"{where}action {self.actions.describe(action_code)} infeasible in {state}: "
            f"device {dev} needs {spend[dev - 1]} battery levels, has {energy[dev - 1]}"
        )

    def transitions(self, state: State, action_code: int) -> list[tuple[State, float]]:
        """Sparse successor list; duplicate successors merged, zeros dropped."""
        i = self.space.index(state)
        self.check_feasible(i, action_code)
        merged: dict[int, float] = {}
        for b in range(4):
            p = self.branch_probs[action_code, b]
            if p == 0.0:
                continue
            j = int(self.succ_idx[action_code, i, b])
            merged[j] = merged.get(j, 0.0) + p
        return [(self.space.state(j), p) for j, p in merged.items()]

    def iter_rows(self):
        """Yield (state_index, action_code, next_state_index, probability)
        over all feasible pairs, duplicates merged."""
        for i in range(self.n_states):
            for a in np.flatnonzero(self.feasible[i]):
                merged: dict[int, float] = {}
                for b in range(4):
                    p = self.branch_probs[a, b]
                    if p == 0.0:
                        continue
                    j = int(self.succ_idx[a, i, b])
                    merged[j] = merged.get(j, 0.0) + p
                for j, p in merged.items():
                    yield i, int(a), j, p


def build_kernel(params: SystemParams, derived: DerivedParams | None = None) -> TransitionKernel:
    return TransitionKernel(params, derived)
