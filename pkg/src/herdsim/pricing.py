"""Dynamic token-pricing controller.

First-order discrete compensator regulating the number of agents on
incentivised routes toward a fixed target demand:

    pi(k) = beta * pi(k-1) + kappa * (e(k) - alpha * e(k-1))

with e(k) the target-minus-measured occupancy error. The output is not
clamped; a negative price simply yields zero acceptance probability
downstream.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

DEFAULT_ALPHA = -4.01
DEFAULT_BETA = 0.99
DEFAULT_KAPPA = 0.1


@dataclass(frozen=True)
class ControllerState:
    fixed_demand: float
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    kappa: float = DEFAULT_KAPPA
    e_history: float = 0.0
    pi_history: float = 0.0

    def __post_init__(self):
        if self.fixed_demand < 0:
            raise ValueError(f"fixed_demand must be >= 0, got {self.fixed_demand}")


def compute_error(state: ControllerState, agents_on: int) -> float:
    """Target demand minus measured occupancy (may be negative)."""
    if agents_on < 0:
        raise ValueError("agents_on must be >= 0")
    return state.fixed_demand - agents_on


def update_price(state: ControllerState, e: float) -> tuple[float, ControllerState]:
    """One controller update; returns the new price and advanced state."""
    pi = state.beta * state.pi_history + state.kappa * (e - state.alpha * state.e_history)
    return pi, replace(state, e_history=e, pi_history=pi)
