"""Scheme-restricted optimal policies (the comparison curves).

Each baseline is the exact solution of the same MDP with the action
alphabet filtered to a subset of scheme tags.  Named presets follow the
CLI spelling; the standalone OMA and NOMA baselines include WET, since
devices that can never recharge deadlock at empty battery.
"""

from __future__ import annotations

import numpy as np

from .link import NOMA, OMA, SCHEME_TAGS, WET, WET_OMA
from .mdp import TransitionKernel
from .solver import PolicyIterationResult, policy_iteration

__all__ = [
    "PRESETS",
    "RestrictionError",
    "scheme_set",
    "restrict_actions",
    "action_mask",
    "validate_restriction",
    "solve_restricted",
]

PRESETS = {
    "wet-oma": frozenset({WET, OMA}),
    "wet-wetoma": frozenset({WET, WET_OMA}),
    "wet-noma": frozenset({WET, NOMA}),
    "wet-oma-noma": frozenset({WET, OMA, NOMA}),
    "adaptive": frozenset(SCHEME_TAGS),
}


class RestrictionError(ValueError):
    """A scheme restriction leaves some state without a feasible action."""


def scheme_set(name_or_set) -> frozenset:
    """Resolve a preset name or an explicit iterable of scheme tags."""
    if isinstance(name_or_set, str):
        try:
            return PRESETS[name_or_set]
        except KeyError:
            raise ValueError(
                f"unknown preset {name_or_set!r}; choose from {', '.join(PRESETS)}"
            ) from None
    tags = frozenset(name_or_set)
    unknown = tags - set(SCHEME_TAGS)
    if unknown:
        raise ValueError(f"unknown scheme tags: {sorted(unknown)}")
    if not tags:
        raise ValueError("scheme set must be nonempty")
    return tags


def restrict_actions(schemes):
    """Predicate over action codes keeping exactly the selected schemes."""
    tags = scheme_set(schemes)

    def predicate(actions, code: int) -> bool:
        return actions.scheme(code).tag in tags

    return predicate


def action_mask(kernel: TransitionKernel, schemes) -> np.ndarray:
    pred = restrict_actions(schemes)
    return np.array(
        [pred(kernel.actions, a) for a in range(kernel.n_actions)], dtype=bool
    )


def validate_restriction(kernel: TransitionKernel, mask: np.ndarray) -> None:
    effective = kernel.feasible & mask[None, :]
    uncovered = np.flatnonzero(~effective.any(axis=1))
    if uncovered.size:
        state = kernel.space.state(int(uncovered[0]))
        raise RestrictionError(
            f"restriction leaves state {state} with no feasible action"
        )


def solve_restricted(
    kernel: TransitionKernel,
    cost_vec,
    schemes,
    gamma: float,
    eps_star: float,
    **solver_kwargs,
) -> PolicyIterationResult:
    """Policy iteration over the filtered action sets."""
    mask = action_mask(kernel, schemes)
    validate_restriction(kernel, mask)
    return policy_iteration(
        kernel, cost_vec, gamma, eps_star, action_mask=mask, **solver_kwargs
    )
