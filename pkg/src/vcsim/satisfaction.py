"""Adaptive-learning customer satisfaction model.

Each (customer, product) pair carries a vote x in [0, 10] that is updated
once per delivered order:

    x' = (1 - a) * x + a * u

where ``a`` is the forgetting factor and ``u`` is the input built from the
delivery's signals (innovation flag, support outcome, price change, delay,
quality, peer votes). With zero input the vote decays geometrically; the
innovation gain is chosen so that a launch pushes the vote to 9 from zero
regardless of the forgetting factor.
"""

from __future__ import annotations

from dataclasses import dataclass


class ParameterError(ValueError):
    """Raised for satisfaction parameters outside their admissible range."""


@dataclass(frozen=True, slots=True)
class SatisfactionParams:
    """Weights of the vote-update input.

    forgetting_factor must lie strictly inside (0, 1); price_weight must be
    strictly positive (set the price-change signal to zero to disable it).
    """

    forgetting_factor: float = 0.3
    support_weight: float = 0.5     # weight of a satisfied support request
    price_weight: float = 0.05      # weight of the price-change percentage
    delay_weight: float = -0.05     # weight of the delivery-delay percentage
    quality_weight: float = 0.02    # weight of the conform-ratio percentage
    peer_weight: float = 0.1        # coupling to the other customers' votes

    def validate(self) -> None:
        if not 0.0 < self.forgetting_factor < 1.0:
            raise ParameterError(
                f"forgetting factor out of range (0, 1): {self.forgetting_factor}"
            )
        if not self.price_weight > 0.0:
            raise ParameterError(
                f"price weight must be positive: {self.price_weight}"
            )


@dataclass(frozen=True, slots=True)
class InputSignals:
    """Signals observed at one delivery.

    new_product and support_resolved are boolean flags; price_change_pct is
    the price variation as a percentage of the previous price; delay_pct the
    delivery-time deviation as a percentage of the mean lead time;
    quality_pct the conform-products ratio as a percentage of the mean
    quality level; peer_vote summarizes the other customers' current votes.
    """

    new_product: bool = False
    support_resolved: bool = False
    price_change_pct: float = 0.0
    delay_pct: float = 0.0
    quality_pct: float = 0.0
    peer_vote: float = 0.0


@dataclass(frozen=True, slots=True)
class VoteState:
    """Vote for one (customer, product): value in [0, 10] and update count."""

    x: float
    k: int = 0


VOTE_MIN = 0.0
VOTE_MAX = 10.0


def innovation_gain(vote: float, forgetting_factor: float) -> float:
    """Input gain applied while the new-product flag is set.

    Equals (9 - 1.2*(1-a)*x) / a; combined with the vote update this makes
    the post-launch vote independent of the forgetting factor at x=0.
    """
    a = forgetting_factor
    if not 0.0 < a < 1.0:
        raise ParameterError(f"forgetting factor out of range (0, 1): {a}")
    return (9.0 - 1.2 * (1.0 - a) * vote) / a


def customer_input(
    f_value: float, signals: InputSignals, params: SatisfactionParams
) -> float:
    """Weighted input u for one vote update, exactly as the model states it."""
    params.validate()
    return (
        f_value * (1.0 if signals.new_product else 0.0)
        + params.support_weight * (1.0 if signals.support_resolved else 0.0)
        + params.price_weight * signals.price_change_pct
        + params.delay_weight * signals.delay_pct
        + params.quality_weight * signals.quality_pct
        + params.peer_weight * signals.peer_vote
    )


def update_vote(state: VoteState, u: float, params: SatisfactionParams) -> VoteState:
    """One vote update: convex mix of old vote and input, clamped to [0, 10]."""
    params.validate()
    a = params.forgetting_factor
    x = (1.0 - a) * state.x + a * u
    x = min(VOTE_MAX, max(VOTE_MIN, x))
    return VoteState(x=x, k=state.k + 1)


def zero_input_decay(x0: float, forgetting_factor: float, n: int) -> list[float]:
    """Vote sequence [x0, x1, ..., xn] under zero input: x_n = (1-a)^n * x0."""
    if not 0.0 < forgetting_factor < 1.0:
        raise ParameterError(
            f"forgetting factor out of range (0, 1): {forgetting_factor}"
        )
    seq = [x0]
    for _ in range(n):
        seq.append((1.0 - forgetting_factor) * seq[-1])
    return seq


def innovation_step(vote: float, forgetting_factor: float) -> float:
    """Closed-form vote after one update with only the new-product flag set.

    x' = 9 - 0.2*(1-a)*x  (the forgetting factor cancels out of the gain
    term, so x'=9 exactly at x=0 for any admissible a).
    """
    a = forgetting_factor
    if not 0.0 < a < 1.0:
        raise ParameterError(f"forgetting factor out of range (0, 1): {a}")
    return 9.0 - 0.2 * (1.0 - a) * vote
