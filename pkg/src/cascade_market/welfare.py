"""Welfare accounting, the belief-grid continuation value, and the search subsidy.

Per-arrival welfare counts a purchase of the objectively better product as
`delta_gap` on top of `v_low` and subtracts the full search cost per check;
prices are transfers and never appear.  The continuation value W solves a
fixed point with value zero on the absorbing (action-flat) beliefs, each
arrival's own contribution counted at the belief it acts on, including the
arrival that tips the market into an absorbing region.  The subsidy schedule
pays the expected continuation-welfare gain of a marginal search, clamped to
[0, kappa], and enters the engine as a reduction of the effective search
cost at the current belief.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .beliefs import (
    Firm,
    action_likelihoods,
    bayes_update_action,
    eta_star,
    flat_regions,
    post_search_cutoff,
)
from .engine import (
    DEFAULT_RULE,
    AbsorptionRule,
    TrueState,
    _cells_at,
    _stop_state,
    simulate_batch,
)
from .estimators import MCStats, _sample_stats
from .params import ModelParams


def absorbing_mask(eta, params: ModelParams, rule: AbsorptionRule = DEFAULT_RULE) -> np.ndarray:
    """Whether each belief is absorbed under the engine's stopping rule."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    pack = _cells_at(eta, params.p_a, params.p_b, params.kappa, params)
    stopped, _ = _stop_state(pack, eta, params, rule)
    return stopped


def per_arrival_welfare(eta: float, params: ModelParams, kappa_eff: Optional[float] = None) -> float:
    """Expected welfare of one arrival at public belief `eta`.

    Probabilities are exact from the cell enumeration under the eta-mixture
    of states.  `kappa_eff` changes the consumer's decision cutoffs only; the
    social cost per search stays `params.kappa` (subsidies are transfers).
    """
    lik = action_likelihoods(eta, params, kappa_eff)
    p_correct = eta * lik.act_a_given_a_high + (1.0 - eta) * (1.0 - lik.act_a_given_b_high)
    p_search = eta * lik.search_given_a_high + (1.0 - eta) * lik.search_given_b_high
    return params.v_low + params.delta_gap * p_correct - params.kappa * p_search


def _vector_likelihoods(eta: np.ndarray, params: ModelParams, kappa_eff) -> tuple:
    """Vectorized cell aggregation: P(action=A | state) and P(search | state).

    Mirrors `beliefs.action_likelihoods` in the eta domain, including the
    quarter-weight splits at exact indifference.
    """
    q = params.q
    phi = params.first_visit_prob
    two_gap = 2.0 * params.delta_gap
    pd = params.p_a - params.p_b

    num_up = q * eta
    x_up = num_up / (num_up + (1.0 - q) * (1.0 - eta))
    num_dn = (1.0 - q) * eta
    x_dn = num_dn / (num_dn + q * (1.0 - eta))
    cut_a = 0.5 + (pd - kappa_eff) / two_gap
    cut_b = 0.5 + (pd + kappa_eff) / two_gap
    x_post = 0.5 + pd / two_gap

    def post(x):
        return np.where(x > x_post, 1.0, np.where(x == x_post, 0.5, 0.0))

    def cell_a(x):
        p = post(x)
        return (
            np.where(x > cut_a, 1.0, np.where(x == cut_a, 0.5 + 0.5 * p, p)),
            np.where(x > cut_a, 0.0, np.where(x == cut_a, 0.5, 1.0)),
        )

    def cell_b(x):
        p = post(x)
        return (
            np.where(x < cut_b, 0.0, np.where(x == cut_b, 0.5 * p, p)),
            np.where(x < cut_b, 0.0, np.where(x == cut_b, 0.5, 1.0)),
        )

    a_aa, s_aa = cell_a(x_up)
    a_ab, s_ab = cell_a(x_dn)
    a_ba, s_ba = cell_b(x_up)
    a_bb, s_bb = cell_b(x_dn)

    def mix(c_aa, c_ab, c_ba, c_bb, p_sig_a):
        p_sig_b = 1.0 - p_sig_a
        return phi * (p_sig_a * c_aa + p_sig_b * c_ab) + (1.0 - phi) * (
            p_sig_a * c_ba + p_sig_b * c_bb
        )

    return (
        mix(a_aa, a_ab, a_ba, a_bb, q),
        mix(a_aa, a_ab, a_ba, a_bb, 1.0 - q),
        mix(s_aa, s_ab, s_ba, s_bb, q),
        mix(s_aa, s_ab, s_ba, s_bb, 1.0 - q),
    )


# ---------------------------------------------------------------------------
# Continuation value on a belief grid
# ---------------------------------------------------------------------------


@dataclass
class WelfareValue:
    """Converged continuation welfare W on a uniform interior belief grid."""

    params: ModelParams
    grid: np.ndarray
    values: np.ndarray
    absorbing: np.ndarray
    residual: float
    iterations: int
    converged: bool
    snap_error: float
    rule: AbsorptionRule = DEFAULT_RULE

    def evaluate(self, eta: float) -> float:
        """W at an off-grid belief: 0 on absorbing beliefs, else interpolation.

        Interpolation never mixes across the absorbing boundary: a query in a
        cell with one absorbing endpoint takes the interior endpoint's value.
        """
        if absorbing_mask(eta, self.params, self.rule)[0]:
            return 0.0
        g, v = self.grid, self.values
        if eta <= g[0]:
            return float(v[0]) if not self.absorbing[0] else 0.0
        if eta >= g[-1]:
            return float(v[-1]) if not self.absorbing[-1] else 0.0
        hi = int(np.searchsorted(g, eta))
        lo = hi - 1
        if self.absorbing[lo] and self.absorbing[hi]:
            return 0.0
        if self.absorbing[lo]:
            return float(v[hi])
        if self.absorbing[hi]:
            return float(v[lo])
        frac = (eta - g[lo]) / (g[hi] - g[lo])
        return float((1.0 - frac) * v[lo] + frac * v[hi])


def _interp_weights(queries: np.ndarray, grid: np.ndarray, absorbing: np.ndarray, q_flat: np.ndarray):
    """Precompute flat-aware linear-interpolation gathers for fixed queries."""
    n = queries.size
    lo = np.clip(np.searchsorted(grid, queries) - 1, 0, grid.size - 2)
    hi = lo + 1
    frac = np.clip((queries - grid[lo]) / (grid[hi] - grid[lo]), 0.0, 1.0)
    w_lo = 1.0 - frac
    w_hi = frac
    # one absorbing endpoint: all weight on the interior side; both: zero
    lo_abs = absorbing[lo]
    hi_abs = absorbing[hi]
    w_lo = np.where(lo_abs, 0.0, np.where(hi_abs, 1.0, w_lo))
    w_hi = np.where(hi_abs, 0.0, np.where(lo_abs, 1.0, w_hi))
    w_lo = np.where(q_flat, 0.0, w_lo)
    w_hi = np.where(q_flat, 0.0, w_hi)
    return lo, hi, w_lo, w_hi


def value_function_solve(
    params: ModelParams,
    n_grid: int = 2001,
    tol: float = 1e-8,
    max_iters: int = 50_000,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> WelfareValue:
    """Fixed-point iteration of W = w + E[W(next belief)] with W = 0 when absorbed.

    Transitions, per-arrival welfare, and the absorbing set are precomputed
    once per grid point from the exact cell enumeration, so each sweep is a
    gather.  Converges because the belief chain is absorbed almost surely.
    Static prices only; resets and reviews change the transition law.
    """
    if params.calvo_hazard > 0.0 or params.review_mu > 0.0:
        raise ValueError("value iteration covers static prices without reviews or resets")
    if n_grid < 3:
        raise ValueError(f"n_grid must be >= 3, got {n_grid}")

    grid = np.arange(1, n_grid + 1, dtype=float) / (n_grid + 1)
    absorbing = absorbing_mask(grid, params, rule)

    pa_ah, pa_bh, ps_ah, ps_bh = _vector_likelihoods(grid, params, params.kappa)
    p_correct = grid * pa_ah + (1.0 - grid) * (1.0 - pa_bh)
    p_search = grid * ps_ah + (1.0 - grid) * ps_bh
    w = params.v_low + params.delta_gap * p_correct - params.kappa * p_search

    p_act_a = grid * pa_ah + (1.0 - grid) * pa_bh
    with np.errstate(divide="ignore", invalid="ignore"):
        num_a = grid * pa_ah
        eta_after_a = np.where(p_act_a > 0.0, num_a / (num_a + (1.0 - grid) * pa_bh), grid)
        num_b = grid * (1.0 - pa_ah)
        eta_after_b = np.where(
            p_act_a < 1.0, num_b / (num_b + (1.0 - grid) * (1.0 - pa_bh)), grid
        )

    flat_a = absorbing_mask(eta_after_a, params, rule)
    flat_b = absorbing_mask(eta_after_b, params, rule)
    lo_a, hi_a, wlo_a, whi_a = _interp_weights(eta_after_a, grid, absorbing, flat_a)
    lo_b, hi_b, wlo_b, whi_b = _interp_weights(eta_after_b, grid, absorbing, flat_b)

    values = np.zeros(n_grid)
    interior = ~absorbing
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iters + 1):
        cont_a = wlo_a * values[lo_a] + whi_a * values[hi_a]
        cont_b = wlo_b * values[lo_b] + whi_b * values[hi_b]
        new = w + p_act_a * cont_a + (1.0 - p_act_a) * cont_b
        new = np.where(interior, new, 0.0)
        residual = float(np.max(np.abs(new - values)))
        values = new
        if residual < tol:
            break

    regions = flat_regions(params)
    thresholds = [t for t in (regions.down_hi, regions.up_lo) if 0.0 < t < 1.0]
    if regions.lockin is not None:
        thresholds += [t for t in regions.lockin if 0.0 < t < 1.0]
    snap = max((float(np.min(np.abs(grid - t))) for t in thresholds), default=0.0)

    return WelfareValue(
        params=params,
        grid=grid,
        values=values,
        absorbing=absorbing,
        residual=residual,
        iterations=iterations,
        converged=residual < tol,
        snap_error=snap,
        rule=rule,
    )


# ---------------------------------------------------------------------------
# Pigouvian search subsidy
# ---------------------------------------------------------------------------


@dataclass
class SubsidySchedule:
    """Per-search subsidy s(eta) on the welfare grid, clamped to [0, kappa].

    The engine reduces the consumer's effective search cost to
    max(kappa - s(eta), 0); the kappa paid remains the social cost and the
    subsidy itself is a transfer, tracked separately.
    """

    grid: np.ndarray
    s_values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.s_values):
            raise ValueError("grid and s_values must have equal length")

    def at(self, eta: float) -> float:
        return float(np.interp(eta, self.grid, self.s_values))


def zero_subsidy(n_grid: int = 2001) -> SubsidySchedule:
    grid = np.arange(1, n_grid + 1, dtype=float) / (n_grid + 1)
    return SubsidySchedule(grid=grid, s_values=np.zeros(n_grid))


def pigouvian_subsidy(value: WelfareValue, params: ModelParams) -> SubsidySchedule:
    """Subsidy equal to the expected future-welfare gain of a marginal search.

    At each grid belief, the marginal cells are the visit/signal cells whose
    decision would flip from buy-here to search if the effective search cost
    fell anywhere below kappa.  For each, the gain is W after the searched
    action minus W after the unsearched action, averaged with the cells'
    occurrence probabilities under the eta-mixture, clamped to [0, kappa].
    """
    p = params
    q, phi = p.q, p.first_visit_prob
    cut_k = eta_star(p.p_a - p.p_b, p.kappa, p.delta_gap)
    x_post = post_search_cutoff(p)
    stay_k = 1.0 - eta_star(p.p_b - p.p_a, p.kappa, p.delta_gap)

    s_values = np.zeros(value.grid.size)
    for i, eta in enumerate(value.grid):
        if value.absorbing[i] or p.kappa == 0.0:
            continue
        lik = action_likelihoods(eta, p)
        x_up = q * eta / (q * eta + (1.0 - q) * (1.0 - eta))
        x_dn = (1.0 - q) * eta / ((1.0 - q) * eta + q * (1.0 - eta))

        gains = []
        weights = []
        w_after: dict = {}

        def after(action: Firm) -> float:
            if action not in w_after:
                w_after[action] = value.evaluate(bayes_update_action(eta, action, p))
            return w_after[action]

        for x, p_sig in ((x_up, eta * q + (1.0 - eta) * (1.0 - q)),
                         (x_dn, eta * (1.0 - q) + (1.0 - eta) * q)):
            if cut_k <= x < x_post:  # visit A: buys now, would search at lower cost
                gains.append(after(Firm.B) - after(Firm.A))
                weights.append(phi * p_sig)
            if x_post < x <= stay_k:  # visit B: mirror
                gains.append(after(Firm.A) - after(Firm.B))
                weights.append((1.0 - phi) * p_sig)

        total = sum(weights)
        if total > 0.0:
            raw = sum(g * w for g, w in zip(gains, weights)) / total
            s_values[i] = min(max(raw, 0.0), p.kappa)

    return SubsidySchedule(grid=value.grid.copy(), s_values=s_values)


# ---------------------------------------------------------------------------
# Welfare-gap decomposition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WelfareDecomposition:
    """Planner-vs-evaluated gap split into wrong purchases and excess search.

    The reference arm always runs under the Pigouvian schedule; the evaluated
    arm runs private behavior plus whatever subsidy the caller attached.
    Pairs share all random streams, and both tallies are extended to a
    common arrival horizon using the exact per-arrival expectations at each
    run's final belief, which makes the two components sum to the total gap
    identically pair by pair.
    """

    total_gap: MCStats
    wrong_purchases_component: MCStats
    excess_search_component: MCStats
    n_pairs: int


def _extension_rates(res, params: ModelParams, subsidy) -> tuple:
    eta = res.final_eta
    if subsidy is not None:
        k_eff = np.maximum(params.kappa - np.interp(eta, subsidy.grid, subsidy.s_values), 0.0)
    else:
        k_eff = params.kappa
    pa_ah, pa_bh, ps_ah, ps_bh = _vector_likelihoods(eta, params, k_eff)
    p_correct = np.where(res.state_a_high, pa_ah, 1.0 - pa_bh)
    p_search = np.where(res.state_a_high, ps_ah, ps_bh)
    return p_correct, p_search


def welfare_gap_decompose(
    params: ModelParams,
    subsidy: Optional[SubsidySchedule],
    n_runs: int,
    seed: int,
    max_arrivals: int = 100_000,
    value: Optional[WelfareValue] = None,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> WelfareDecomposition:
    """CRN-paired decomposition against the Pigouvian-subsidized benchmark."""
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    if value is None:
        value = value_function_solve(params, rule=rule)
    pig = pigouvian_subsidy(value, params)
    runs = np.arange(n_runs, dtype=np.uint64)

    ref = simulate_batch(params, seed=seed, run_indices=runs, subsidy=pig,
                         max_arrivals=max_arrivals, rule=rule)
    ev = simulate_batch(params, seed=seed, run_indices=runs, subsidy=subsidy,
                        max_arrivals=max_arrivals, rule=rule)

    horizon = np.maximum(ref.arrivals, ev.arrivals).astype(float)
    pc_ref, ps_ref = _extension_rates(ref, params, pig)
    pc_ev, ps_ev = _extension_rates(ev, params, subsidy)

    wrong_ref = (ref.arrivals - ref.high_quality_purchases) + (horizon - ref.arrivals) * (1.0 - pc_ref)
    wrong_ev = (ev.arrivals - ev.high_quality_purchases) + (horizon - ev.arrivals) * (1.0 - pc_ev)
    search_ref = ref.searches + (horizon - ref.arrivals) * ps_ref
    search_ev = ev.searches + (horizon - ev.arrivals) * ps_ev

    wrong_comp = params.delta_gap * (wrong_ev - wrong_ref)
    excess_comp = params.kappa * (search_ev - search_ref)
    n_censored = int((ref.censored | ev.censored).sum())
    return WelfareDecomposition(
        total_gap=_sample_stats(wrong_comp + excess_comp, n_censored),
        wrong_purchases_component=_sample_stats(wrong_comp, n_censored),
        excess_search_component=_sample_stats(excess_comp, n_censored),
        n_pairs=n_runs,
    )
