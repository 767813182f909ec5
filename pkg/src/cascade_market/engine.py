"""Discrete-event execution of market trajectories.

Two execution paths share one stream and one arithmetic contract:

* `simulate_run` - a readable single-trajectory loop covering every
  extension: public reviews, Calvo price resets, belief-contingent search
  subsidies, and full path recording.
* `simulate_batch` - a vectorized kernel for the static-price
  configurations that dominate Monte Carlo workloads (optionally with
  reviews, subsidies, and label-swap coupling).

Draw k of every random channel is a pure function of
(seed, run_index, channel, k), and both paths evaluate the same numpy
expressions, so for any supported configuration they produce bit-identical
outcomes.  The public belief is carried in probability space and updated
multiplicatively with exactly the arithmetic of the closed-form posterior
maps, which keeps knife-edge beliefs (e.g. the zero-search-cost cascade
boundary) on their exact values instead of drifting by a unit in the last
place through log space.

Absorption is a per-belief stopping rule evaluated from the enumerated
decision cells, selected by `AbsorptionRule`:

* VISIT_SYMMETRIC (default): stop upward once a first-visit-A consumer
  buys A under both signals, downward once a first-visit-B consumer buys B
  under both signals; when both hold the market is locked in with split
  demand and classifies by demand share.  This is the cell-level form of
  the label-symmetric cascade boundaries and remains well defined under
  subsidies, unequal prices, and biased first visits.
* SINGLE_THRESHOLD: both stops from the first-visit-A cutoff alone (the
  one-sided textbook form).
* LIKELIHOOD_FLAT: stop only when the action distribution is
  state-independent for both visit sides (belief exactly frozen).

Runs with public reviews ignore the rule and stop on the belief leaving
[1e-9, 1 - 1e-9], because reviews re-open action-frozen states; Calvo runs
are fixed-horizon trajectories.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import rng
from .beliefs import FLAT_TOL, Firm
from .grid import PriceGrid
from .params import ModelParams
from .rng import Channel

#: Belief interval for runs with public reviews: absorbed on exit.
REVIEW_ETA_LO = 1e-9
REVIEW_ETA_HI = 1.0 - 1e-9


class TrueState(enum.Enum):
    A_HIGH = "a_high"
    B_HIGH = "b_high"
    DRAW_FROM_PRIOR = "draw_from_prior"


class AbsorbedSide(enum.Enum):
    UP = "up"
    DOWN = "down"
    CENSORED = "censored"


class AbsorptionRule(enum.Enum):
    VISIT_SYMMETRIC = "visit_symmetric"
    SINGLE_THRESHOLD = "single_threshold"
    LIKELIHOOD_FLAT = "likelihood_flat"


DEFAULT_RULE = AbsorptionRule.VISIT_SYMMETRIC


@dataclass(frozen=True)
class MarketState:
    """Snapshot of one trajectory between events."""

    eta: float
    p_a: float
    p_b: float
    clock: float
    arrivals: int
    absorbed: Optional[AbsorbedSide]


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    seed: int = 0
    run_index: int = 0
    max_arrivals: int = 100_000
    max_events: Optional[int] = None
    true_state: TrueState = TrueState.DRAW_FROM_PRIOR
    subsidy: Optional[object] = None  # SubsidySchedule; duck-typed to avoid a cycle
    record_path: bool = False
    mirror_labels: bool = False
    reset_grid: Optional[PriceGrid] = None
    rule: AbsorptionRule = DEFAULT_RULE

    def __post_init__(self) -> None:
        if self.max_arrivals < 1:
            raise ValueError(f"max_arrivals must be >= 1, got {self.max_arrivals}")
        if self.max_events is not None and self.max_events < 1:
            raise ValueError(f"max_events must be >= 1, got {self.max_events}")


@dataclass(frozen=True)
class PathEvent:
    event_index: int
    time: float
    eta: float
    p_a: float
    p_b: float
    event_type: str  # init | arrival | reset_a | reset_b
    action: str  # "A", "B", or ""


@dataclass(frozen=True)
class RunOutcome:
    absorbed_side: AbsorbedSide
    wrong: bool
    arrivals_to_absorption: int
    calendar_time: float
    sales_a: int
    sales_b: int
    searches: int
    search_cost_paid: float
    subsidy_transfers: float
    high_quality_purchases: int
    welfare: float
    true_high: Firm
    final_eta: float
    path: Optional[list] = None


# ---------------------------------------------------------------------------
# Shared per-event arithmetic (scalar lanes are 1-element arrays)
# ---------------------------------------------------------------------------


@dataclass
class _CellPack:
    """Cell action probabilities and likelihood aggregates at one belief."""

    x_up: np.ndarray
    x_dn: np.ndarray
    cut_a: np.ndarray  # buy-at-A cutoff for first-visit-A consumers
    cut_b: np.ndarray  # stay-at-B cutoff for first-visit-B consumers
    x_post: np.ndarray
    a_cells: tuple  # ((aAA, aAB), (aBA, aBB)) P(action=A | visit, signal)
    p_act_a_ahigh: np.ndarray
    p_act_a_bhigh: np.ndarray
    flat: np.ndarray


def _post_search_buy_a(x, x_post):
    return np.where(x > x_post, 1.0, np.where(x == x_post, 0.5, 0.0))


def _cells_at(eta, p_a, p_b, kappa_eff, params: ModelParams) -> _CellPack:
    """Exact decision-cell probabilities at belief `eta` (vectorized).

    Same arithmetic as the scalar closed forms in `beliefs`, including the
    fair-coin splits at exact indifference.
    """
    q = params.q
    phi = params.first_visit_prob
    two_gap = 2.0 * params.delta_gap

    num_up = q * eta
    x_up = num_up / (num_up + (1.0 - q) * (1.0 - eta))
    num_dn = (1.0 - q) * eta
    x_dn = num_dn / (num_dn + q * (1.0 - eta))
    cut_a = 0.5 + (p_a - p_b - kappa_eff) / two_gap
    cut_b = 0.5 + (p_a - p_b + kappa_eff) / two_gap
    x_post = 0.5 + (p_a - p_b) / two_gap

    def visit_a_cell(x):
        post = _post_search_buy_a(x, x_post)
        return np.where(x > cut_a, 1.0, np.where(x == cut_a, 0.5 + 0.5 * post, post))

    def visit_b_cell(x):
        post = _post_search_buy_a(x, x_post)
        return np.where(x < cut_b, 0.0, np.where(x == cut_b, 0.5 * post, post))

    a_aa = visit_a_cell(x_up)
    a_ab = visit_a_cell(x_dn)
    a_ba = visit_b_cell(x_up)
    a_bb = visit_b_cell(x_dn)

    def mix(p_sig_a):
        p_sig_b = 1.0 - p_sig_a
        return phi * (p_sig_a * a_aa + p_sig_b * a_ab) + (1.0 - phi) * (
            p_sig_a * a_ba + p_sig_b * a_bb
        )

    gap = 2.0 * q - 1.0
    flat = (gap * np.abs(a_aa - a_ab) <= FLAT_TOL) & (gap * np.abs(a_ba - a_bb) <= FLAT_TOL)

    return _CellPack(
        x_up=x_up,
        x_dn=x_dn,
        cut_a=cut_a,
        cut_b=cut_b,
        x_post=x_post,
        a_cells=((a_aa, a_ab), (a_ba, a_bb)),
        p_act_a_ahigh=mix(q),
        p_act_a_bhigh=mix(1.0 - q),
        flat=flat,
    )


def _lockin_up(pack: _CellPack, eta, phi: float):
    """Side favored by a frozen market: demand share, ties by the belief."""
    (a_aa, _), (a_ba, _) = pack.a_cells
    p_act_a = phi * a_aa + (1.0 - phi) * a_ba
    return np.where(p_act_a == 0.5, eta >= 0.5, p_act_a > 0.5)


def _stop_state(pack: _CellPack, eta, params: ModelParams, rule: AbsorptionRule):
    """(stopped, up_side) under the selected absorption rule.

    Boundary beliefs where a cell is exactly indifferent keep running: the
    coin there still correlates actions with signals, so stopping would
    discard information.  That keeps e.g. the zero-cost boundary belief a
    live coin state rather than a one-step cascade.
    """
    phi = params.first_visit_prob
    if rule is AbsorptionRule.LIKELIHOOD_FLAT:
        return pack.flat, _lockin_up(pack, eta, phi)
    if rule is AbsorptionRule.SINGLE_THRESHOLD:
        up = pack.x_dn > pack.cut_a
        down = pack.x_up < pack.cut_a
        return up | down, up
    up = pack.x_dn > pack.cut_a  # first-visit-A consumers herd to A
    down = pack.x_up < pack.cut_b  # first-visit-B consumers herd to B
    both = up & down  # lock-in: each side keeps its own visitors
    side = np.where(both, _lockin_up(pack, eta, phi), up)
    return up | down, side


def _decide(pack: _CellPack, visit_is_a, sig_is_a, u_tie1, u_tie2, mirror: bool):
    """Realized (action_is_a, searched) for drawn visit/signal/coins."""
    x = np.where(sig_is_a, pack.x_up, pack.x_dn)
    coin1 = u_tie1 < 0.5
    coin2 = (u_tie2 < 0.5) ^ mirror
    post_a = np.where(x > pack.x_post, True, np.where(x == pack.x_post, coin2, False))

    stay_a = np.where(x > pack.cut_a, True, np.where(x == pack.cut_a, coin1, False))
    stay_b = np.where(x < pack.cut_b, True, np.where(x == pack.cut_b, coin1, False))

    stay = np.where(visit_is_a, stay_a, stay_b)
    action_is_a = np.where(stay, visit_is_a, post_a)
    return action_is_a, ~stay


def _bayes_factor(pack: _CellPack, action_is_a):
    """(L(action | A high), L(action | B high)); both positive for realized actions."""
    l1 = np.where(action_is_a, pack.p_act_a_ahigh, 1.0 - pack.p_act_a_ahigh)
    l2 = np.where(action_is_a, pack.p_act_a_bhigh, 1.0 - pack.p_act_a_bhigh)
    return l1, l2


def _bayes_eta(eta, l1, l2):
    num = eta * l1
    return np.where(l1 == l2, eta, num / (num + (1.0 - eta) * l2))


def _subsidy_kappa(subsidy, eta, kappa: float):
    if subsidy is None:
        return kappa
    s = np.interp(eta, subsidy.grid, subsidy.s_values)
    return np.maximum(kappa - s, 0.0)


# ---------------------------------------------------------------------------
# Scalar trajectory
# ---------------------------------------------------------------------------


def calvo_reset_price(
    eta: float, firm: Firm, opponent_price: float, params: ModelParams, grid: PriceGrid
) -> float:
    """Myopic reset: argmax of price x instantaneous expected demand share.

    The share is exact from the cell enumeration under the belief-mixture of
    states; ties break toward the lower price (argmax scans prices upward).
    """
    prices = grid.points
    eta_vec = np.full_like(prices, eta)
    if firm is Firm.A:
        pack = _cells_at(eta_vec, prices, np.full_like(prices, opponent_price), params.kappa, params)
        share = eta * pack.p_act_a_ahigh + (1.0 - eta) * pack.p_act_a_bhigh
    else:
        pack = _cells_at(eta_vec, np.full_like(prices, opponent_price), prices, params.kappa, params)
        share_a = eta * pack.p_act_a_ahigh + (1.0 - eta) * pack.p_act_a_bhigh
        share = 1.0 - share_a
    value = prices * share
    return float(prices[int(np.argmax(value))])


def _as_bool(x) -> bool:
    return bool(np.asarray(x).reshape(()))


def simulate_run(config: RunConfig) -> RunOutcome:
    """Execute one trajectory to absorption, the event cap, or the belief cap."""
    p = config.params
    seed, run = config.seed, config.run_index
    mirror = config.mirror_labels

    def u(channel: Channel, idx: int) -> float:
        return rng.uniform(seed, run, channel, idx)

    if config.true_state is TrueState.DRAW_FROM_PRIOR:
        a_high = u(Channel.STATE, 0) < p.eta0
        if mirror:
            a_high = not a_high
    else:
        a_high = config.true_state is TrueState.A_HIGH
    high_firm = Firm.A if a_high else Firm.B

    reviews_on = p.review_mu > 0.0
    calvo_on = p.calvo_hazard > 0.0
    reset_grid = config.reset_grid or PriceGrid(p_max=p.p_max, step=0.01)

    eta = p.eta0
    p_a, p_b = p.p_a, p.p_b
    clock = 0.0
    arrivals = 0
    events = 0
    sales_a = sales_b = searches = q_high = 0
    transfers = 0.0
    welfare = 0.0
    path: Optional[list] = [] if config.record_path else None
    if path is not None:
        path.append(PathEvent(0, 0.0, eta, p_a, p_b, "init", ""))

    side: Optional[AbsorbedSide] = None
    reset_memo: dict = {}
    while True:
        lane = np.array([eta])
        pack = None

        if reviews_on:
            if eta <= REVIEW_ETA_LO or eta >= REVIEW_ETA_HI:
                side = AbsorbedSide.UP if eta >= REVIEW_ETA_HI else AbsorbedSide.DOWN
                break
        elif not calvo_on:
            k_eff = _subsidy_kappa(config.subsidy, eta, p.kappa)
            pack = _cells_at(lane, p_a, p_b, k_eff, p)
            stopped, up_side = _stop_state(pack, lane, p, config.rule)
            if _as_bool(stopped):
                side = AbsorbedSide.UP if _as_bool(up_side) else AbsorbedSide.DOWN
                break

        if arrivals >= config.max_arrivals or (
            config.max_events is not None and events >= config.max_events
        ):
            side = AbsorbedSide.CENSORED
            break

        # event clock: competing exponentials drawn as total-rate exponential
        # plus a categorical split, so the continuous-time law is exact
        if calvo_on:
            total = p.lambda_rate + 2.0 * p.calvo_hazard
            clock += rng.unit_exponential(seed, run, Channel.ARRIVAL, events) / total
            u_type = u(Channel.RESET, events)
            p_arrival = p.lambda_rate / total
            p_reset_a = p.calvo_hazard / total
            if u_type < p_arrival:
                event = "arrival"
            elif u_type < p_arrival + p_reset_a:
                event = "reset_b" if mirror else "reset_a"
            else:
                event = "reset_a" if mirror else "reset_b"
        else:
            clock += rng.unit_exponential(seed, run, Channel.ARRIVAL, arrivals) / p.lambda_rate
            event = "arrival"
        events += 1

        if event != "arrival":
            firm = Firm.A if event == "reset_a" else Firm.B
            opponent = p_b if firm is Firm.A else p_a
            memo_key = (eta, firm, opponent)
            new_price = reset_memo.get(memo_key)
            if new_price is None:
                new_price = calvo_reset_price(eta, firm, opponent, p, reset_grid)
                reset_memo[memo_key] = new_price
            if firm is Firm.A:
                p_a = new_price
            else:
                p_b = new_price
            if path is not None:
                path.append(PathEvent(events, clock, eta, p_a, p_b, event, ""))
            # prices changed: cutoffs and stopping regions must be re-evaluated
            continue

        if pack is None:
            k_eff = _subsidy_kappa(config.subsidy, eta, p.kappa)
            pack = _cells_at(lane, p_a, p_b, k_eff, p)
        k = arrivals
        u_v = u(Channel.VISIT, k)
        visit_is_a = (u_v >= 1.0 - p.first_visit_prob) if mirror else (u_v < p.first_visit_prob)
        u_s = u(Channel.SIGNAL, k)
        sig_is_a = (u_s < p.q) if a_high else (u_s >= p.q)

        action_is_a, searched = _decide(
            pack,
            np.array([visit_is_a]),
            np.array([sig_is_a]),
            np.array([u(Channel.TIE, 2 * k)]),
            np.array([u(Channel.TIE, 2 * k + 1)]),
            mirror,
        )
        act_a = _as_bool(action_is_a)
        did_search = _as_bool(searched)

        arrivals += 1
        sales_a += act_a
        sales_b += not act_a
        searches += did_search
        bought_high = act_a == a_high
        q_high += bought_high
        welfare += p.v_low + p.delta_gap * bought_high - p.kappa * did_search
        if did_search and config.subsidy is not None:
            transfers += min(p.kappa - float(k_eff), p.kappa)

        l1, l2 = _bayes_factor(pack, action_is_a)
        eta = float(_bayes_eta(lane, l1, l2)[0])

        if reviews_on:
            if u(Channel.REVIEW, 2 * k) < p.review_mu:
                product_high = act_a == a_high
                u_r = u(Channel.REVIEW, 2 * k + 1)
                plus = product_high if u_r < p.review_r else not product_high
                favors_a = act_a == plus
                r = p.review_r
                l1r, l2r = (r, 1.0 - r) if favors_a else (1.0 - r, r)
                eta = float(_bayes_eta(np.array([eta]), l1r, l2r)[0])

        if path is not None:
            path.append(PathEvent(events, clock, eta, p_a, p_b, "arrival", "A" if act_a else "B"))

    wrong = (side is AbsorbedSide.UP and not a_high) or (side is AbsorbedSide.DOWN and a_high)
    return RunOutcome(
        absorbed_side=side,
        wrong=wrong,
        arrivals_to_absorption=arrivals,
        calendar_time=clock,
        sales_a=sales_a,
        sales_b=sales_b,
        searches=searches,
        search_cost_paid=p.kappa * searches,
        subsidy_transfers=transfers,
        high_quality_purchases=q_high,
        welfare=welfare,
        true_high=high_firm,
        final_eta=eta,
        path=path,
    )


# ---------------------------------------------------------------------------
# Vectorized batch of independent runs
# ---------------------------------------------------------------------------


@dataclass
class BatchResult:
    """Per-lane outcomes of a batch of independent static-price runs."""

    run_indices: np.ndarray
    state_a_high: np.ndarray
    absorbed_up: np.ndarray
    absorbed_down: np.ndarray
    censored: np.ndarray
    wrong: np.ndarray
    arrivals: np.ndarray
    calendar_time: np.ndarray
    sales_a: np.ndarray
    searches: np.ndarray
    high_quality_purchases: np.ndarray
    welfare: np.ndarray
    subsidy_transfers: np.ndarray
    final_eta: np.ndarray

    @property
    def n_lanes(self) -> int:
        return len(self.run_indices)

    @property
    def sales_b(self) -> np.ndarray:
        return self.arrivals - self.sales_a


def simulate_batch(
    params: ModelParams,
    seed: int,
    run_indices: np.ndarray,
    p_a=None,
    p_b=None,
    true_state: TrueState = TrueState.DRAW_FROM_PRIOR,
    max_arrivals: int = 100_000,
    subsidy: Optional[object] = None,
    mirror_labels: bool = False,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> BatchResult:
    """Run one lane per entry of `run_indices`, all static-price.

    `p_a`/`p_b` may be scalars or per-lane arrays (the mixed-strategy solver
    feeds per-lane price pairs).  Calvo resets are not supported here; use
    `simulate_run`.  For any common configuration the outcome of lane i is
    bit-identical to `simulate_run` with the same (seed, run_index).
    """
    if params.calvo_hazard > 0.0:
        raise ValueError("batch kernel is static-price only; use simulate_run for resets")
    runs = np.asarray(run_indices, dtype=np.uint64)
    n = runs.size
    p_a_vec = np.broadcast_to(
        np.asarray(params.p_a if p_a is None else p_a, dtype=float), (n,)
    ).copy()
    p_b_vec = np.broadcast_to(
        np.asarray(params.p_b if p_b is None else p_b, dtype=float), (n,)
    ).copy()

    reviews_on = params.review_mu > 0.0
    mirror = mirror_labels

    if true_state is TrueState.DRAW_FROM_PRIOR:
        a_high = rng.uniform_vec(seed, runs, Channel.STATE, 0) < params.eta0
        if mirror:
            a_high = ~a_high
    else:
        a_high = np.full(n, true_state is TrueState.A_HIGH)

    eta = np.full(n, params.eta0)
    clock = np.zeros(n)
    arrivals = np.zeros(n, dtype=np.int64)
    sales_a = np.zeros(n, dtype=np.int64)
    searches = np.zeros(n, dtype=np.int64)
    q_high = np.zeros(n, dtype=np.int64)
    welfare = np.zeros(n)
    transfers = np.zeros(n)
    absorbed_up = np.zeros(n, dtype=bool)
    absorbed_down = np.zeros(n, dtype=bool)
    censored = np.zeros(n, dtype=bool)

    alive = np.arange(n)
    k = 0
    while alive.size:
        lane_eta = eta[alive]
        k_eff = _subsidy_kappa(subsidy, lane_eta, params.kappa) if subsidy is not None else params.kappa
        pack = _cells_at(lane_eta, p_a_vec[alive], p_b_vec[alive], k_eff, params)

        if reviews_on:
            done = (lane_eta <= REVIEW_ETA_LO) | (lane_eta >= REVIEW_ETA_HI)
            up_mask = lane_eta >= REVIEW_ETA_HI
        else:
            done, up_mask = _stop_state(pack, lane_eta, params, rule)
        if done.any():
            fin = alive[done]
            absorbed_up[fin] = up_mask[done]
            absorbed_down[fin] = ~up_mask[done]
            keep = ~done
            alive = alive[keep]
            if alive.size == 0:
                break
            lane_eta = lane_eta[keep]
            pack = _slice_pack(pack, keep)
            if not np.isscalar(k_eff):
                k_eff = k_eff[keep]

        if k >= max_arrivals:
            censored[alive] = True
            break

        lane_runs = runs[alive]
        clock[alive] += (
            rng.unit_exponential_vec(seed, lane_runs, Channel.ARRIVAL, k) / params.lambda_rate
        )
        u_v = rng.uniform_vec(seed, lane_runs, Channel.VISIT, k)
        visit_is_a = (u_v >= 1.0 - params.first_visit_prob) if mirror else (u_v < params.first_visit_prob)
        u_s = rng.uniform_vec(seed, lane_runs, Channel.SIGNAL, k)
        lane_a_high = a_high[alive]
        sig_is_a = np.where(lane_a_high, u_s < params.q, u_s >= params.q)

        action_is_a, searched = _decide(
            pack,
            visit_is_a,
            sig_is_a,
            rng.uniform_vec(seed, lane_runs, Channel.TIE, 2 * k),
            rng.uniform_vec(seed, lane_runs, Channel.TIE, 2 * k + 1),
            mirror,
        )

        arrivals[alive] += 1
        sales_a[alive] += action_is_a
        searches[alive] += searched
        bought_high = action_is_a == lane_a_high
        q_high[alive] += bought_high
        welfare[alive] += (
            params.v_low + params.delta_gap * bought_high - params.kappa * searched
        )
        if subsidy is not None:
            paid = np.minimum(params.kappa - k_eff, params.kappa)
            transfers[alive] += np.where(searched, paid, 0.0)

        l1, l2 = _bayes_factor(pack, action_is_a)
        new_eta = _bayes_eta(lane_eta, l1, l2)

        if reviews_on:
            has_review = rng.uniform_vec(seed, lane_runs, Channel.REVIEW, 2 * k) < params.review_mu
            u_r = rng.uniform_vec(seed, lane_runs, Channel.REVIEW, 2 * k + 1)
            product_high = action_is_a == lane_a_high
            plus = np.where(u_r < params.review_r, product_high, ~product_high)
            favors_a = action_is_a == plus
            r = params.review_r
            l1r = np.where(favors_a, r, 1.0 - r)
            l2r = np.where(favors_a, 1.0 - r, r)
            new_eta = np.where(has_review, _bayes_eta(new_eta, l1r, l2r), new_eta)

        eta[alive] = new_eta
        k += 1

    wrong = (absorbed_up & ~a_high) | (absorbed_down & a_high)
    return BatchResult(
        run_indices=runs,
        state_a_high=a_high,
        absorbed_up=absorbed_up,
        absorbed_down=absorbed_down,
        censored=censored,
        wrong=wrong,
        arrivals=arrivals,
        calendar_time=clock,
        sales_a=sales_a,
        searches=searches,
        high_quality_purchases=q_high,
        welfare=welfare,
        subsidy_transfers=transfers,
        final_eta=eta,
    )


def _slice_pack(pack: _CellPack, keep: np.ndarray) -> _CellPack:
    def s(x):
        return x[keep] if isinstance(x, np.ndarray) and x.ndim else x

    (a_aa, a_ab), (a_ba, a_bb) = pack.a_cells
    return _CellPack(
        x_up=s(pack.x_up),
        x_dn=s(pack.x_dn),
        cut_a=s(pack.cut_a),
        cut_b=s(pack.cut_b),
        x_post=s(pack.x_post),
        a_cells=((s(a_aa), s(a_ab)), (s(a_ba), s(a_bb))),
        p_act_a_ahigh=s(pack.p_act_a_ahigh),
        p_act_a_bhigh=s(pack.p_act_a_bhigh),
        flat=s(pack.flat),
    )
