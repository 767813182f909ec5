"""Observational-learning duopoly market: simulation and numerical solvers."""

__version__ = "0.1.0"

from .beliefs import (
    ActionLikelihoods,
    Belief,
    BoundsVariant,
    CascadeBounds,
    Decision,
    DegenerateThresholdError,
    Firm,
    HerdOutcome,
    Review,
    UnreachableActionError,
    action_likelihoods,
    bayes_update_action,
    bayes_update_review,
    cascade_bounds,
    consumer_decision,
    eta_star,
    flat_regions,
    flat_side,
    immediate_herd,
    net_surplus,
    never_search_bound,
    posterior_down,
    posterior_up,
)
from .engine import (
    AbsorbedSide,
    BatchResult,
    MarketState,
    PathEvent,
    RunConfig,
    RunOutcome,
    TrueState,
    calvo_reset_price,
    simulate_batch,
    simulate_run,
)
from .grid import PriceGrid
from .params import ModelParams
from .rng import Channel, CounterStream, rng_stream

__all__ = [
    "ActionLikelihoods",
    "AbsorbedSide",
    "BatchResult",
    "Belief",
    "BoundsVariant",
    "CascadeBounds",
    "Channel",
    "CounterStream",
    "Decision",
    "DegenerateThresholdError",
    "Firm",
    "HerdOutcome",
    "MarketState",
    "ModelParams",
    "PathEvent",
    "PriceGrid",
    "Review",
    "RunConfig",
    "RunOutcome",
    "TrueState",
    "UnreachableActionError",
    "action_likelihoods",
    "bayes_update_action",
    "bayes_update_review",
    "calvo_reset_price",
    "cascade_bounds",
    "consumer_decision",
    "eta_star",
    "flat_regions",
    "flat_side",
    "immediate_herd",
    "net_surplus",
    "never_search_bound",
    "posterior_down",
    "posterior_up",
    "rng_stream",
    "simulate_batch",
    "simulate_run",
]
