"""Pure belief arithmetic for the two-firm observational-learning market.

Posterior maps, consumer cutoffs, cascade boundaries, exact action
likelihoods from cell enumeration, and Bayes updates from observed actions
and public reviews.  Everything here is deterministic apart from explicit
tie-break draws at exact indifference, which callers supply.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import ModelParams

#: Likelihood gap below which an action distribution counts as state-independent.
FLAT_TOL = 1e-12


class Firm(enum.IntEnum):
    A = 0
    B = 1

    def other(self) -> "Firm":
        return Firm.B if self is Firm.A else Firm.A


class BoundsVariant(enum.Enum):
    """Which closed form produces the cascade boundaries.

    SINGLE_THRESHOLD uses one buy cutoff for both boundaries (the first-visit-A
    analysis).  VISIT_SYMMETRIC inverts the posterior map separately per visit
    side, which is label-symmetric and has the documented kappa monotonicity;
    it is the default.
    """

    SINGLE_THRESHOLD = "single_threshold"
    VISIT_SYMMETRIC = "visit_symmetric"


class HerdOutcome(enum.Enum):
    NONE = "none"
    HERD_UP = "herd_up"
    HERD_DOWN = "herd_down"


class DegenerateThresholdError(ValueError):
    """A consumer cutoff clamped to an endpoint, collapsing a boundary."""

    def __init__(self, boundary: str, cutoff: float):
        self.boundary = boundary
        self.cutoff = cutoff
        super().__init__(
            f"{boundary} boundary collapsed: clamped posterior cutoff is {cutoff:g}"
        )


class UnreachableActionError(ValueError):
    """Bayes update requested for an action with zero likelihood in both states."""


# ---------------------------------------------------------------------------
# Belief representation
# ---------------------------------------------------------------------------


def llr_from_eta(eta: float) -> float:
    """Log-likelihood ratio ln(eta / (1 - eta)); +/-inf at the endpoints."""
    if eta <= 0.0:
        return -np.inf
    if eta >= 1.0:
        return np.inf
    return float(np.log(eta) - np.log1p(-eta))


def eta_from_llr(llr: float) -> float:
    """Inverse of `llr_from_eta`, evaluated without catastrophic cancellation."""
    if llr >= 0.0:
        return float(1.0 / (1.0 + np.exp(-llr)))
    e = np.exp(llr)
    return float(e / (1.0 + e))


@dataclass(frozen=True)
class Belief:
    """Public belief stored as a log-likelihood ratio.

    The LLR form keeps Bayes updates additive and avoids cancellation near 0
    and 1; conversions are the only place exp/log appear.  Infinite values are
    reserved for absorbing clamps.
    """

    llr: float

    @staticmethod
    def from_eta(eta: float) -> "Belief":
        return Belief(llr_from_eta(eta))

    def eta(self) -> float:
        return eta_from_llr(self.llr)


# ---------------------------------------------------------------------------
# Posterior maps and cutoffs
# ---------------------------------------------------------------------------


def _check_eta(eta: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"belief must lie in [0, 1], got {eta}")


def _check_q(q: float) -> None:
    if not 0.5 < q < 1.0:
        raise ValueError(f"signal precision must lie in (1/2, 1), got {q}")


def posterior_up(eta, q):
    """Posterior that A is high after a private signal naming A."""
    _check_q(q)
    if np.isscalar(eta):
        _check_eta(eta)
    num = q * np.asarray(eta, dtype=float)
    out = num / (num + (1.0 - q) * (1.0 - np.asarray(eta, dtype=float)))
    return float(out) if np.isscalar(eta) else out


def posterior_down(eta, q):
    """Posterior that A is high after a private signal naming B."""
    _check_q(q)
    if np.isscalar(eta):
        _check_eta(eta)
    num = (1.0 - q) * np.asarray(eta, dtype=float)
    out = num / (num + q * (1.0 - np.asarray(eta, dtype=float)))
    return float(out) if np.isscalar(eta) else out


def eta_star(price_diff: float, kappa: float, delta_gap: float) -> float:
    """Posterior cutoff for buying at the visited firm without checking.

    Returned unclamped so callers can detect collapsed thresholds; comparisons
    clamp to [0, 1].
    """
    if delta_gap <= 0.0:
        raise ValueError(f"quality gap must be > 0, got {delta_gap}")
    return 0.5 + (price_diff - kappa) / (2.0 * delta_gap)


def net_surplus(x: float, price_diff: float, delta_gap: float) -> float:
    """Expected surplus from buying A rather than B at posterior x."""
    _check_eta(x)
    return (2.0 * x - 1.0) * delta_gap - price_diff


def never_search_bound(price_diff: float, delta_gap: float) -> float:
    """Search cost at or above which a first-visit-A consumer never checks B."""
    if delta_gap <= 0.0:
        raise ValueError(f"quality gap must be > 0, got {delta_gap}")
    return delta_gap + price_diff


def buy_cutoff_visit_a(params: ModelParams, kappa: Optional[float] = None) -> float:
    """Posterior above which a first-visit-A consumer buys A without checking."""
    k = params.kappa if kappa is None else kappa
    return eta_star(params.p_a - params.p_b, k, params.delta_gap)


def stay_cutoff_visit_b(params: ModelParams, kappa: Optional[float] = None) -> float:
    """Posterior below which a first-visit-B consumer buys B without checking."""
    k = params.kappa if kappa is None else kappa
    return 1.0 - eta_star(params.p_b - params.p_a, k, params.delta_gap)


def post_search_cutoff(params: ModelParams) -> float:
    """Posterior above which a consumer who already paid kappa buys A."""
    return 0.5 + (params.p_a - params.p_b) / (2.0 * params.delta_gap)


# ---------------------------------------------------------------------------
# Cascade boundaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CascadeBounds:
    eta_bar: float
    eta_under: float
    variant: BoundsVariant

    def __post_init__(self) -> None:
        for name, v in (("eta_bar", self.eta_bar), ("eta_under", self.eta_under)):
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {v}")


def _checked_cutoff(raw: float, boundary: str) -> float:
    clamped = min(max(raw, 0.0), 1.0)
    if clamped <= 0.0 or clamped >= 1.0:
        raise DegenerateThresholdError(boundary, clamped)
    return clamped


def cascade_bounds(
    params: ModelParams, variant: BoundsVariant = BoundsVariant.VISIT_SYMMETRIC
) -> CascadeBounds:
    """Closed-form up/down cascade boundaries.

    Raises `DegenerateThresholdError` when a clamped cutoff hits 0 or 1, i.e.
    one side of the market stops reacting to signals at every belief.
    """
    q = params.q
    if variant is BoundsVariant.SINGLE_THRESHOLD:
        x = _checked_cutoff(
            eta_star(params.p_a - params.p_b, params.kappa, params.delta_gap),
            "single-threshold",
        )
        eta_bar = x * q / ((1.0 - q) + x * (2.0 * q - 1.0))
        eta_under = x * (1.0 - q) / (q - x * (2.0 * q - 1.0))
        return CascadeBounds(eta_bar, eta_under, variant)

    x_a = _checked_cutoff(
        eta_star(params.p_a - params.p_b, params.kappa, params.delta_gap), "eta_bar"
    )
    x_b = _checked_cutoff(
        1.0 - eta_star(params.p_b - params.p_a, params.kappa, params.delta_gap),
        "eta_under",
    )
    # posterior_up inverts posterior_down and vice versa
    eta_bar = posterior_up(x_a, q)
    eta_under = posterior_down(x_b, q)
    return CascadeBounds(eta_bar, eta_under, variant)


def immediate_herd(
    params: ModelParams,
    bounds: CascadeBounds,
    rng: Optional[np.random.Generator] = None,
) -> HerdOutcome:
    """Classify whether the market herds before the first arrival.

    When the initial belief violates both boundaries (overlapping bands), the
    side violated by the larger margin wins; an exact margin tie is resolved
    by a fair coin from `rng`.
    """
    up = params.eta0 >= bounds.eta_bar
    down = params.eta0 <= bounds.eta_under
    if up and down:
        margin_up = params.eta0 - bounds.eta_bar
        margin_down = bounds.eta_under - params.eta0
        if margin_up > margin_down:
            return HerdOutcome.HERD_UP
        if margin_down > margin_up:
            return HerdOutcome.HERD_DOWN
        if rng is None:
            rng = np.random.default_rng(0)
        return HerdOutcome.HERD_UP if rng.random() < 0.5 else HerdOutcome.HERD_DOWN
    if up:
        return HerdOutcome.HERD_UP
    if down:
        return HerdOutcome.HERD_DOWN
    return HerdOutcome.NONE


# ---------------------------------------------------------------------------
# Decision cells and action likelihoods
# ---------------------------------------------------------------------------


class Decision(enum.Enum):
    BUY_HERE = "buy_here"
    SEARCH_THEN_BUY_A = "search_then_buy_a"
    SEARCH_THEN_BUY_B = "search_then_buy_b"


@dataclass(frozen=True)
class DecisionOutcome:
    decision: Decision
    searched: bool
    action: Firm


def consumer_decision(
    posterior_x: float,
    visit: Firm,
    params: ModelParams,
    rng: Optional[np.random.Generator] = None,
    kappa_eff: Optional[float] = None,
) -> DecisionOutcome:
    """Realized choice of one consumer at posterior `posterior_x`.

    Exact indifference (buy-here vs. search, and A vs. B after paying the
    search cost) is resolved by fair coins from `rng`.  `kappa_eff` overrides
    the search cost, which is how a per-belief subsidy enters.
    """
    _check_eta(posterior_x)
    k = params.kappa if kappa_eff is None else kappa_eff

    def coin() -> bool:
        gen = rng if rng is not None else np.random.default_rng(0)
        return bool(gen.random() < 0.5)

    def after_search_buy_a() -> bool:
        s = net_surplus(posterior_x, params.p_a - params.p_b, params.delta_gap)
        if s > 0.0:
            return True
        if s < 0.0:
            return False
        return coin()

    if visit is Firm.A:
        cutoff = eta_star(params.p_a - params.p_b, k, params.delta_gap)
        stay = posterior_x > cutoff or (posterior_x == cutoff and coin())
    else:
        cutoff = 1.0 - eta_star(params.p_b - params.p_a, k, params.delta_gap)
        stay = posterior_x < cutoff or (posterior_x == cutoff and coin())

    if stay:
        return DecisionOutcome(Decision.BUY_HERE, False, visit)
    if after_search_buy_a():
        return DecisionOutcome(Decision.SEARCH_THEN_BUY_A, True, Firm.A)
    return DecisionOutcome(Decision.SEARCH_THEN_BUY_B, True, Firm.B)


def _cell_probs(x: float, visit: Firm, params: ModelParams, k: float):
    """Exact (P(action = A), P(search)) for one visit/posterior cell.

    Fair-coin tie-breaks enter as probability-1/2 splits, so ties contribute
    quarter weights after the post-search comparison.
    """
    x_post = post_search_cutoff(params)
    if x > x_post:
        searched_buy_a = 1.0
    elif x == x_post:
        searched_buy_a = 0.5
    else:
        searched_buy_a = 0.0

    if visit is Firm.A:
        cutoff = eta_star(params.p_a - params.p_b, k, params.delta_gap)
        if x > cutoff:
            return 1.0, 0.0
        if x == cutoff:
            return 0.5 + 0.5 * searched_buy_a, 0.5
        return searched_buy_a, 1.0
    cutoff = 1.0 - eta_star(params.p_b - params.p_a, k, params.delta_gap)
    if x < cutoff:
        return 0.0, 0.0
    if x == cutoff:
        return 0.5 * searched_buy_a, 0.5
    return searched_buy_a, 1.0


@dataclass(frozen=True)
class ActionLikelihoods:
    """Exact action and search probabilities conditional on the true state."""

    act_a_given_a_high: float
    act_a_given_b_high: float
    search_given_a_high: float
    search_given_b_high: float
    # per-visit P(action = A | visit, signal): [visit][signal], 0 = A
    cells: tuple

    def likelihoods(self, action: Firm) -> tuple:
        if action is Firm.A:
            return self.act_a_given_a_high, self.act_a_given_b_high
        return 1.0 - self.act_a_given_a_high, 1.0 - self.act_a_given_b_high

    def flat_for_visit(self, visit: Firm, q: float, tol: float = FLAT_TOL) -> bool:
        a_sig_a, a_sig_b = self.cells[visit]
        return (2.0 * q - 1.0) * abs(a_sig_a - a_sig_b) <= tol

    def is_flat(self, q: float, tol: float = FLAT_TOL) -> bool:
        """Actions carry no state information for either visit side."""
        return self.flat_for_visit(Firm.A, q, tol) and self.flat_for_visit(Firm.B, q, tol)


def action_likelihoods(
    eta: float, params: ModelParams, kappa_eff: Optional[float] = None
) -> ActionLikelihoods:
    """Enumerate visit x signal cells and aggregate exactly (no sampling)."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"belief must lie in [0, 1], got {eta}")
    q = params.q
    phi = params.first_visit_prob
    k = params.kappa if kappa_eff is None else kappa_eff
    x_up = posterior_up(eta, q)
    x_down = posterior_down(eta, q)

    cells_a = []
    cells_s = []
    for visit in (Firm.A, Firm.B):
        a_up, s_up = _cell_probs(x_up, visit, params, k)
        a_dn, s_dn = _cell_probs(x_down, visit, params, k)
        cells_a.append((a_up, a_dn))
        cells_s.append((s_up, s_dn))

    def mix(table, p_sig_a: float) -> float:
        p_sig_b = 1.0 - p_sig_a
        return phi * (p_sig_a * table[0][0] + p_sig_b * table[0][1]) + (1.0 - phi) * (
            p_sig_a * table[1][0] + p_sig_b * table[1][1]
        )

    return ActionLikelihoods(
        act_a_given_a_high=mix(cells_a, q),
        act_a_given_b_high=mix(cells_a, 1.0 - q),
        search_given_a_high=mix(cells_s, q),
        search_given_b_high=mix(cells_s, 1.0 - q),
        cells=(tuple(cells_a[0]), tuple(cells_a[1])),
    )


def flat_side(
    eta: float, params: ModelParams, kappa_eff: Optional[float] = None
) -> Optional[Firm]:
    """If actions are uninformative at `eta`, which side the frozen market favors.

    Returns Firm.A for an up-herd (or a split favoring A), Firm.B for the
    mirror case, None while actions still carry information.  A split with
    exactly even demand is classified by the belief itself, ties to A.
    """
    lik = action_likelihoods(eta, params, kappa_eff)
    if not lik.is_flat(params.q):
        return None
    phi = params.first_visit_prob
    p_act_a = phi * lik.cells[0][0] + (1.0 - phi) * lik.cells[1][0]
    if p_act_a > 0.5:
        return Firm.A
    if p_act_a < 0.5:
        return Firm.B
    return Firm.A if eta >= 0.5 else Firm.B


@dataclass(frozen=True)
class FlatRegions:
    """Analytic boundaries of the beliefs where actions stop informing.

    `down_hi` bounds the all-actions-B herd, `up_lo` the all-actions-A herd.
    `lockin` is the interval (possibly None) where each visit side keeps
    buying its own firm, freezing the belief with split demand.  Derived for
    cross-checks and grid snapping; the cell enumeration is authoritative.
    """

    down_hi: float
    up_lo: float
    lockin: Optional[tuple]


def flat_regions(params: ModelParams, kappa_eff: Optional[float] = None) -> FlatRegions:
    q = params.q
    k = params.kappa if kappa_eff is None else kappa_eff
    x_a = min(max(buy_cutoff_visit_a(params, k), 0.0), 1.0)
    x_b = min(max(stay_cutoff_visit_b(params, k), 0.0), 1.0)
    down_hi = posterior_down(x_a, q)
    up_lo = posterior_up(x_b, q)
    lock_lo = posterior_up(x_a, q)
    lock_hi = posterior_down(x_b, q)
    lockin = (lock_lo, lock_hi) if lock_lo <= lock_hi else None
    return FlatRegions(down_hi=down_hi, up_lo=up_lo, lockin=lockin)


# ---------------------------------------------------------------------------
# Bayes updates
# ---------------------------------------------------------------------------


def bayes_update_action(
    eta: float, action: Firm, params: ModelParams, kappa_eff: Optional[float] = None
) -> float:
    """Public-belief update from one observed purchase (action only)."""
    if not 0.0 < eta < 1.0:
        raise ValueError(f"interior belief required, got {eta}")
    lik = action_likelihoods(eta, params, kappa_eff)
    l_a, l_b = lik.likelihoods(action)
    if l_a == 0.0 and l_b == 0.0:
        raise UnreachableActionError(
            f"action {action.name} has zero likelihood in both states at eta={eta}"
        )
    if l_a == l_b:
        return eta
    num = eta * l_a
    return num / (num + (1.0 - eta) * l_b)


class Review(enum.Enum):
    PLUS = "plus"
    MINUS = "minus"


def bayes_update_review(
    eta: float, product: Firm, review: Review, params: ModelParams
) -> float:
    """Public-belief update from one public review of `product`.

    A review is correct with probability `review_r`: plus when the reviewed
    product is truly high quality, minus when truly low.  A plus review of A
    (or a minus review of B) is evidence that A is the high-quality firm.
    """
    if params.review_mu <= 0.0:
        raise ValueError("review channel is off (review_mu = 0)")
    if not 0.0 < eta < 1.0:
        raise ValueError(f"interior belief required, got {eta}")
    r = params.review_r
    favors_a = (product is Firm.A) == (review is Review.PLUS)
    l_a, l_b = (r, 1.0 - r) if favors_a else (1.0 - r, r)
    num = eta * l_a
    return num / (num + (1.0 - eta) * l_b)
