"""Monte Carlo aggregation and the exact small-chain oracle.

Absorption probabilities, times, profits, and welfare with binomial or
sample standard errors; common-random-number sweeps; and an exhaustive
belief-tree enumeration that serves as the independent check on the
sampling engine for static-price configurations.
"""

from __future__ import annotations

import dataclasses
import itertools
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import engine
from .beliefs import BoundsVariant, DegenerateThresholdError, cascade_bounds
from .engine import (
    DEFAULT_RULE,
    AbsorptionRule,
    TrueState,
    _bayes_eta,
    _bayes_factor,
    _cells_at,
    _stop_state,
    simulate_batch,
)
from .params import ModelParams

#: Column order of the sweep CSV; one row per grid cell.
SWEEP_CSV_COLUMNS = (
    "q", "kappa", "lambda", "phi", "mu", "r", "alpha", "p_a", "p_b", "R",
    "n_censored", "p_wrong", "p_wrong_se", "p_up", "mean_arrivals",
    "mean_time", "pi_a", "pi_b", "welfare", "welfare_se",
)

#: ModelParams fields a sweep may vary.
SWEEP_AXES = (
    "q", "kappa", "lambda_rate", "first_visit_prob", "review_mu", "review_r",
    "calvo_hazard", "p_a", "p_b",
)


@dataclass(frozen=True)
class MCStats:
    n_runs: int
    n_censored: int
    mean: float
    std_error: float

    @property
    def ci95(self) -> tuple:
        half = 1.96 * self.std_error
        return (self.mean - half, self.mean + half)


def _binomial_stats(hits: np.ndarray, n_censored: int) -> MCStats:
    n = hits.size
    mean = float(np.sum(hits)) / n
    se = float(np.sqrt(mean * (1.0 - mean) / n))
    return MCStats(n, n_censored, mean, se)


def _sample_stats(values: np.ndarray, n_censored: int = 0) -> MCStats:
    n = values.size
    mean = float(np.sum(values)) / n
    if n > 1:
        se = float(np.std(values, ddof=1) / np.sqrt(n))
    else:
        se = 0.0
    return MCStats(n, n_censored, mean, se)


@dataclass(frozen=True)
class AbsorptionReport:
    params: ModelParams
    p_wrong: MCStats
    p_up: MCStats
    mean_arrivals: MCStats
    mean_time: MCStats


@dataclass(frozen=True)
class ProfitEstimate:
    params: ModelParams
    p_a: float
    p_b: float
    pi_a: MCStats
    pi_b: MCStats
    expected_sales_a: MCStats
    expected_sales_b: MCStats


def estimate_absorption(
    params: ModelParams,
    n_runs: int,
    seed: int,
    max_arrivals: int = 100_000,
    mirror_labels: bool = False,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> AbsorptionReport:
    """Frequencies and time moments over `n_runs` independent trajectories.

    The true state is drawn from the prior (A high with probability eta0).
    Censored runs are counted, contribute their truncated tallies to the
    moments, and are never silently dropped; if every run censors the
    estimate is meaningless and this raises.
    """
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")
    res = simulate_batch(
        params,
        seed=seed,
        run_indices=np.arange(n_runs, dtype=np.uint64),
        max_arrivals=max_arrivals,
        mirror_labels=mirror_labels,
        rule=rule,
    )
    n_censored = int(res.censored.sum())
    if n_censored == n_runs:
        raise RuntimeError(f"all {n_runs} runs censored at {max_arrivals} arrivals")
    return AbsorptionReport(
        params=params,
        p_wrong=_binomial_stats(res.wrong, n_censored),
        p_up=_binomial_stats(res.absorbed_up, n_censored),
        mean_arrivals=_sample_stats(res.arrivals.astype(float), n_censored),
        mean_time=_sample_stats(res.calendar_time, n_censored),
    )


def estimate_profits(
    p_a: float,
    p_b: float,
    params: ModelParams,
    n_runs: int,
    seed: int,
    max_arrivals: int = 100_000,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> ProfitEstimate:
    """Static-price profit estimates Pi_i = p_i * E[sales_i until absorption]."""
    for name, price in (("p_a", p_a), ("p_b", p_b)):
        if not 0.0 <= price <= params.p_max:
            raise ValueError(f"{name} must lie in [0, {params.p_max}], got {price}")
    cell = params.with_prices(p_a, p_b)
    res = simulate_batch(
        cell,
        seed=seed,
        run_indices=np.arange(n_runs, dtype=np.uint64),
        max_arrivals=max_arrivals,
        rule=rule,
    )
    n_censored = int(res.censored.sum())
    sales_a = _sample_stats(res.sales_a.astype(float), n_censored)
    sales_b = _sample_stats(res.sales_b.astype(float), n_censored)
    scale = lambda price, s: MCStats(s.n_runs, s.n_censored, price * s.mean, price * s.std_error)
    return ProfitEstimate(
        params=cell,
        p_a=p_a,
        p_b=p_b,
        pi_a=scale(p_a, sales_a),
        pi_b=scale(p_b, sales_b),
        expected_sales_a=sales_a,
        expected_sales_b=sales_b,
    )


# ---------------------------------------------------------------------------
# Exact enumeration oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StateChainResult:
    p_up: float
    p_down: float
    expected_arrivals: float
    expected_sales_a: float
    expected_sales_b: float
    truncation_mass: float


@dataclass(frozen=True)
class ExactChainResult:
    """Exhaustive belief-tree expectations, exact up to depth truncation."""

    params: ModelParams
    depth: int
    a_high: StateChainResult
    b_high: StateChainResult
    p_up: float
    p_wrong: float
    expected_arrivals: float
    expected_sales_a: float
    expected_sales_b: float
    truncation_mass: float

    @property
    def p_wrong_bracket(self) -> tuple:
        """Rigorous interval: unresolved mass could fall on either side."""
        return (self.p_wrong, self.p_wrong + self.truncation_mass)


_MAX_CHAIN_NODES = 200_000


def _chain_for_state(
    params: ModelParams, a_high: bool, depth: int, rule: AbsorptionRule
) -> StateChainResult:
    p_sig_a = params.q if a_high else 1.0 - params.q
    phi = params.first_visit_prob

    level = {params.eta0: 1.0}
    p_up = p_down = 0.0
    e_arrivals = e_sales_a = 0.0
    truncation = 0.0

    for t in range(depth + 1):
        if not level:
            break
        etas = np.array(list(level.keys()))
        probs = np.array(list(level.values()))
        pack = _cells_at(etas, params.p_a, params.p_b, params.kappa, params)

        absorbed, up_side = _stop_state(pack, etas, params, rule)
        p_up += float(np.sum(probs[absorbed & up_side]))
        p_down += float(np.sum(probs[absorbed & ~up_side]))

        interior = ~absorbed
        if not interior.any():
            level = {}
            break
        etas, probs = etas[interior], probs[interior]
        pack = engine._slice_pack(pack, interior)

        if t == depth:
            truncation = float(np.sum(probs))
            break

        e_arrivals += float(np.sum(probs))
        p_act_a = p_sig_a * (phi * pack.a_cells[0][0] + (1.0 - phi) * pack.a_cells[1][0]) + (
            1.0 - p_sig_a
        ) * (phi * pack.a_cells[0][1] + (1.0 - phi) * pack.a_cells[1][1])
        e_sales_a += float(np.sum(probs * p_act_a))

        ones = np.ones(etas.size, dtype=bool)
        eta_after_a = _bayes_eta(etas, *_bayes_factor(pack, ones))
        eta_after_b = _bayes_eta(etas, *_bayes_factor(pack, ~ones))
        nxt: dict = {}
        for eta_a, eta_b, prob, pa in zip(eta_after_a, eta_after_b, probs, p_act_a):
            if pa > 0.0:
                nxt[eta_a] = nxt.get(eta_a, 0.0) + prob * pa
            if pa < 1.0:
                nxt[eta_b] = nxt.get(eta_b, 0.0) + prob * (1.0 - pa)
        if len(nxt) > _MAX_CHAIN_NODES:
            raise RuntimeError(f"belief tree exceeded {_MAX_CHAIN_NODES} nodes at depth {t}")
        level = nxt

    return StateChainResult(
        p_up=p_up,
        p_down=p_down,
        expected_arrivals=e_arrivals,
        expected_sales_a=e_sales_a,
        expected_sales_b=e_arrivals - e_sales_a,
        truncation_mass=truncation,
    )


def exact_small_chain(
    params: ModelParams,
    depth: int = 60,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> ExactChainResult:
    """Exact absorption and sales expectations by belief-tree enumeration.

    Branches on actions with their exact probabilities under each true state
    and stops branches at absorption under the same stopping rule as the
    sampling engine.  Static prices only, no resets, no reviews, depth <= 60.
    """
    if params.calvo_hazard > 0.0 or params.review_mu > 0.0:
        raise ValueError("oracle covers static prices without reviews or resets")
    if not 1 <= depth <= 60:
        raise ValueError(f"depth must lie in [1, 60], got {depth}")

    res_a = _chain_for_state(params, True, depth, rule)
    res_b = _chain_for_state(params, False, depth, rule)
    w_a, w_b = params.eta0, 1.0 - params.eta0

    truncation = w_a * res_a.truncation_mass + w_b * res_b.truncation_mass
    if truncation >= 1e-6:
        warnings.warn(
            f"oracle truncation mass {truncation:.3g} >= 1e-6 at depth {depth}",
            RuntimeWarning,
            stacklevel=2,
        )
    return ExactChainResult(
        params=params,
        depth=depth,
        a_high=res_a,
        b_high=res_b,
        p_up=w_a * res_a.p_up + w_b * res_b.p_up,
        p_wrong=w_a * res_a.p_down + w_b * res_b.p_up,
        expected_arrivals=w_a * res_a.expected_arrivals + w_b * res_b.expected_arrivals,
        expected_sales_a=w_a * res_a.expected_sales_a + w_b * res_b.expected_sales_a,
        expected_sales_b=w_a * res_a.expected_sales_b + w_b * res_b.expected_sales_b,
        truncation_mass=truncation,
    )


# ---------------------------------------------------------------------------
# Common-random-number sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    params: ModelParams
    n_runs: int
    n_censored: int
    p_wrong: float
    p_wrong_se: float
    p_up: float
    mean_arrivals: float
    mean_time: float
    pi_a: float
    pi_b: float
    welfare: float
    welfare_se: float
    degenerate: str

    def csv_values(self) -> tuple:
        p = self.params
        return (
            p.q, p.kappa, p.lambda_rate, p.first_visit_prob, p.review_mu,
            p.review_r, p.calvo_hazard, p.p_a, p.p_b, self.n_runs,
            self.n_censored, self.p_wrong, self.p_wrong_se, self.p_up,
            self.mean_arrivals, self.mean_time, self.pi_a, self.pi_b,
            self.welfare, self.welfare_se,
        )


def sweep(
    base_params: ModelParams,
    axes: dict,
    n_runs: int,
    seed: int,
    max_arrivals: int = 100_000,
    rule: AbsorptionRule = DEFAULT_RULE,
) -> list:
    """One batch per grid cell, all cells sharing run-indexed streams (CRN).

    `axes` maps ModelParams field names to value sequences; the grid is their
    cartesian product in insertion order.  Shared streams make paired
    cell-to-cell comparisons nearly noise-free, which the weak-monotonicity
    tests rely on.  Cells whose cutoffs collapse are flagged, not skipped.
    """
    for name in axes:
        if name not in SWEEP_AXES:
            raise ValueError(f"unknown sweep axis {name!r}; allowed: {SWEEP_AXES}")
    if any(a > 0.0 for a in axes.get("calvo_hazard", [base_params.calvo_hazard])):
        raise ValueError("reset-hazard sweeps run through calvo_stationary, not sweep()")

    rows = []
    run_idx = np.arange(n_runs, dtype=np.uint64)
    names = list(axes.keys())
    for values in itertools.product(*(axes[n] for n in names)):
        cell = dataclasses.replace(base_params, **dict(zip(names, values)))
        degenerate = ""
        try:
            cascade_bounds(cell, BoundsVariant.VISIT_SYMMETRIC)
        except DegenerateThresholdError as err:
            degenerate = err.boundary
        res = simulate_batch(cell, seed=seed, run_indices=run_idx, max_arrivals=max_arrivals, rule=rule)
        n_censored = int(res.censored.sum())
        p_wrong = _binomial_stats(res.wrong, n_censored)
        welfare = _sample_stats(res.welfare, n_censored)
        rows.append(
            SweepRow(
                params=cell,
                n_runs=n_runs,
                n_censored=n_censored,
                p_wrong=p_wrong.mean,
                p_wrong_se=p_wrong.std_error,
                p_up=float(np.sum(res.absorbed_up)) / n_runs,
                mean_arrivals=float(np.sum(res.arrivals)) / n_runs,
                mean_time=float(np.sum(res.calendar_time)) / n_runs,
                pi_a=cell.p_a * float(np.sum(res.sales_a)) / n_runs,
                pi_b=cell.p_b * float(np.sum(res.sales_b)) / n_runs,
                welfare=welfare.mean,
                welfare_se=welfare.std_error,
                degenerate=degenerate,
            )
        )
    return rows
