"""Mixed-strategy price solver and Calvo stationary statistics.

The solver iterates a smoothed best reply on a price grid: profits of every
own price against the current opponent mixture are estimated by Monte Carlo,
mass concentrates on near-maximizers through a softmax with temperature tau,
and the mixture moves by relaxation rho.  Profit estimates for each ordered
price pair are cached with common random numbers and reused across
iterations, so the iteration is a deterministic map on the empirical game
and the L1 criterion is meaningful.  Convergence additionally requires
on-support profits flat within three pooled standard errors, because the L1
criterion alone can stall at high temperature.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import rng as crng
from .engine import (
    DEFAULT_RULE,
    AbsorptionRule,
    RunConfig,
    _cells_at,
    _stop_state,
    simulate_batch,
    simulate_run,
)
from .grid import PriceGrid
from .params import ModelParams

DEFAULT_SUPPORT_THRESHOLD = 1e-3


@dataclass(frozen=True)
class MixedStrategy:
    grid: PriceGrid
    mass: np.ndarray

    def __post_init__(self) -> None:
        m = np.asarray(self.mass, dtype=float)
        if m.shape != (self.grid.n_points,):
            raise ValueError(f"mass must have {self.grid.n_points} entries, got {m.shape}")
        if np.any(m < 0.0):
            raise ValueError("strategy masses must be nonnegative")
        if abs(float(m.sum()) - 1.0) > 1e-12:
            raise ValueError(f"strategy masses must sum to 1, got {m.sum()!r}")
        object.__setattr__(self, "mass", m)

    def support(self, threshold: float = DEFAULT_SUPPORT_THRESHOLD) -> np.ndarray:
        return np.flatnonzero(self.mass >= threshold)

    def mean_price(self) -> float:
        return float(np.dot(self.mass, self.grid.points))


def support_components(indices: np.ndarray, max_gap_points: int = 1) -> int:
    """Number of support components, bridging interior gaps of at most
    `max_gap_points` grid points."""
    if indices.size == 0:
        return 0
    breaks = np.diff(indices) > (max_gap_points + 1)
    return 1 + int(np.sum(breaks))


@dataclass
class SolveReport:
    params: ModelParams
    strategy: MixedStrategy
    support_indices: np.ndarray
    n_support_components: int
    width: float
    mean_price: float
    iterations: int
    converged: bool
    max_profit_deviation: float  # relative, over the final support
    profit_by_price: np.ndarray
    profit_se_by_price: np.ndarray
    l1_last: float
    support_threshold: float


class _PairCache:
    """Expected sales per ordered price pair, estimated once with shared streams.

    Entry (i, j) holds the mean and variance of each firm's sales count when
    A posts grid[i] and B posts grid[j]; every pair reuses run indices
    0..R-1, so estimates are common-random-number coupled across pairs and
    across solver iterations.
    """

    def __init__(self, params: ModelParams, grid: PriceGrid, n_runs: int, seed: int,
                 max_arrivals: int, chunk_lanes: int = 200_000):
        self.params = params
        self.grid = grid
        self.n_runs = n_runs
        self.seed = seed
        self.max_arrivals = max_arrivals
        self.pairs_per_chunk = max(1, chunk_lanes // n_runs)
        n = grid.n_points
        self.en_a = np.full((n, n), np.nan)
        self.var_a = np.full((n, n), np.nan)
        self.en_b = np.full((n, n), np.nan)
        self.var_b = np.full((n, n), np.nan)
        self.pair_evals = 0

    def ensure(self, pairs: list) -> None:
        todo = [(i, j) for (i, j) in pairs if np.isnan(self.en_a[i, j])]
        if not todo:
            return
        runs = np.arange(self.n_runs, dtype=np.uint64)
        pts = self.grid.points
        for start in range(0, len(todo), self.pairs_per_chunk):
            chunk = todo[start : start + self.pairs_per_chunk]
            p_a = np.repeat([pts[i] for (i, _) in chunk], self.n_runs)
            p_b = np.repeat([pts[j] for (_, j) in chunk], self.n_runs)
            res = simulate_batch(
                self.params,
                seed=self.seed,
                run_indices=np.tile(runs, len(chunk)),
                p_a=p_a,
                p_b=p_b,
                max_arrivals=self.max_arrivals,
            )
            sales_a = res.sales_a.reshape(len(chunk), self.n_runs)
            sales_b = res.sales_b.reshape(len(chunk), self.n_runs)
            for row, (i, j) in enumerate(chunk):
                self.en_a[i, j] = sales_a[row].mean()
                self.var_a[i, j] = sales_a[row].var(ddof=1)
                self.en_b[i, j] = sales_b[row].mean()
                self.var_b[i, j] = sales_b[row].var(ddof=1)
        self.pair_evals += len(todo)

    def profit_against(self, mix_idx: np.ndarray, mix_w: np.ndarray) -> tuple:
        """Role-averaged profit of every grid price against the mixture.

        Pi(p_i | sigma) = p_i * sum_j w_j (E[N_A](i,j) + E[N_B](j,i)) / 2.
        The standard error treats pair estimates as independent, which CRN
        coupling makes mildly conservative for differences.
        """
        pts = self.grid.points
        n = self.grid.n_points
        pairs = [(i, j) for i in range(n) for j in mix_idx]
        pairs += [(j, i) for j in mix_idx for i in range(n)]
        self.ensure(pairs)
        en = 0.5 * (self.en_a[:, mix_idx] + self.en_b.T[:, mix_idx])
        var = 0.25 * (self.var_a[:, mix_idx] + self.var_b.T[:, mix_idx])
        profit = pts * (en @ mix_w)
        se = pts * np.sqrt((var @ (mix_w**2)) / self.n_runs)
        return profit, se


def mix_solve(
    params: ModelParams,
    grid: PriceGrid,
    tau: float = 0.03,
    rho: float = 0.2,
    n_runs_per_pair: int = 20_000,
    eps: float = 0.005,
    max_iters: int = 120,
    seed: int = 0,
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
    max_arrivals: int = 100_000,
) -> SolveReport:
    """Approximate the symmetric mixed pricing equilibrium on `grid`.

    Starts from the uniform mixture and iterates softmax best replies with
    relaxation.  Declares convergence when the L1 step falls below `eps` and
    the on-support profit spread is within three pooled standard errors.
    Non-convergence is reported in the flag, never raised.
    """
    if tau <= 0.0:
        raise ValueError(f"softmax temperature must be > 0, got {tau}")
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"relaxation must lie in (0, 1], got {rho}")

    cache = _PairCache(params, grid, n_runs_per_pair, seed, max_arrivals)
    n = grid.n_points
    mass = np.full(n, 1.0 / n)

    converged = False
    iterations = 0
    l1 = np.inf
    profit = np.zeros(n)
    se = np.zeros(n)
    for iterations in range(1, max_iters + 1):
        supp = np.flatnonzero(mass >= support_threshold)
        if supp.size == 0:
            supp = np.array([int(np.argmax(mass))])
        w = mass[supp] / mass[supp].sum()
        profit, se = cache.profit_against(supp, w)

        z = (profit - profit.max()) / tau
        soft = np.exp(z)
        soft /= soft.sum()
        new_mass = (1.0 - rho) * mass + rho * soft
        new_mass = np.maximum(new_mass, 0.0)
        new_mass /= new_mass.sum()
        l1 = float(np.abs(new_mass - mass).sum())
        mass = new_mass

        supp_now = np.flatnonzero(mass >= support_threshold)
        if supp_now.size:
            w_now = mass[supp_now] / mass[supp_now].sum()
            mean_profit = float(np.dot(w_now, profit[supp_now]))
            max_dev = float(np.max(np.abs(profit[supp_now] - mean_profit)))
            pooled_se = float(np.sqrt(np.mean(se[supp_now] ** 2)))
            if l1 < eps and max_dev <= 3.0 * pooled_se:
                converged = True
                break

    strategy = MixedStrategy(grid=grid, mass=mass)
    supp = strategy.support(support_threshold)
    if supp.size:
        prices = grid.points[supp]
        width = float(prices.max() - prices.min())
        w_s = mass[supp] / mass[supp].sum()
        mean_profit = float(np.dot(w_s, profit[supp]))
        if mean_profit != 0.0:
            rel_dev = float(np.max(np.abs(profit[supp] - mean_profit)) / abs(mean_profit))
        else:
            rel_dev = 0.0
    else:
        width = 0.0
        rel_dev = 0.0
    return SolveReport(
        params=params,
        strategy=strategy,
        support_indices=supp,
        n_support_components=support_components(supp),
        width=width,
        mean_price=strategy.mean_price(),
        iterations=iterations,
        converged=converged,
        max_profit_deviation=rel_dev,
        profit_by_price=profit,
        profit_se_by_price=se,
        l1_last=l1,
        support_threshold=support_threshold,
    )


def indifference_check(
    strategy: MixedStrategy,
    params: ModelParams,
    n_runs: int,
    seed: int,
    support_threshold: float = DEFAULT_SUPPORT_THRESHOLD,
) -> float:
    """Max relative profit deviation across the support, with fresh streams.

    Re-estimates each support price's profit against opponent prices drawn
    from the strategy (one draw per run, shared across support points), using
    a seed namespace disjoint from the solver's.
    """
    supp = strategy.support(support_threshold)
    if supp.size <= 1:
        return 0.0
    fresh = crng.derive_seed(seed, 0x1D1F)
    u = crng.uniform_vec(fresh, np.arange(n_runs, dtype=np.uint64), crng.Channel.RESET, 0)
    cdf = np.cumsum(strategy.mass)
    opp_idx = np.searchsorted(cdf, u, side="right").clip(0, strategy.grid.n_points - 1)
    opp_prices = strategy.grid.points[opp_idx]

    runs = np.arange(n_runs, dtype=np.uint64)
    profits = np.zeros(supp.size)
    for row, i in enumerate(supp):
        p_i = strategy.grid.points[i]
        as_a = simulate_batch(params, seed=fresh, run_indices=runs, p_a=p_i, p_b=opp_prices)
        as_b = simulate_batch(params, seed=fresh, run_indices=runs, p_a=opp_prices, p_b=p_i)
        en = 0.5 * (as_a.sales_a.mean() + as_b.sales_b.mean())
        profits[row] = p_i * en
    w = strategy.mass[supp] / strategy.mass[supp].sum()
    mean_profit = float(np.dot(w, profits))
    if mean_profit == 0.0:
        return 0.0
    return float(np.max(np.abs(profits - mean_profit)) / abs(mean_profit))


# ---------------------------------------------------------------------------
# Calvo stationary statistics
# ---------------------------------------------------------------------------


@dataclass
class CalvoReport:
    hazard: float
    width_quantile: float  # p99 - p01 of pooled sampled prices
    width_minmax: float
    mean_price: float
    pi_wrong: float  # fraction of sampled arrivals with belief herding against the truth
    n_samples: int
    burn_in_events: int
    horizon_events: int
    censored_before_burn_in: bool


def calvo_stationary(
    params: ModelParams,
    grid: PriceGrid,
    horizon_events: int,
    burn_in_fraction: float,
    seed: int,
    run_index: int = 0,
) -> CalvoReport:
    """Long-run price and belief statistics under Poisson price resets.

    Simulates one trajectory for `horizon_events` events (arrivals plus
    resets), then samples (p_a, p_b, belief) at every arrival after burn-in.
    Width is the 1-99 percentile spread of the pooled sampled prices, robust
    to transient resets; the min-max width is reported alongside.  The
    wrong-side occupancy is the fraction of sampled arrivals at which the
    belief sits in a frozen region favoring the low-quality firm under the
    prices then posted.
    """
    if params.calvo_hazard <= 0.0:
        raise ValueError("calvo_stationary requires calvo_hazard > 0")
    if horizon_events < 10_000:
        raise ValueError(f"horizon_events must be >= 1e4, got {horizon_events}")
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError(f"burn-in fraction must lie in [0, 1), got {burn_in_fraction}")

    out = simulate_run(
        RunConfig(
            params=params,
            seed=seed,
            run_index=run_index,
            max_events=horizon_events,
            max_arrivals=horizon_events,
            record_path=True,
            reset_grid=grid,
        )
    )
    burn_in = int(burn_in_fraction * horizon_events)
    samples = [
        ev for ev in out.path if ev.event_type == "arrival" and ev.event_index > burn_in
    ]
    censored_early = (out.path[-1].event_index if out.path else 0) < burn_in
    if not samples:
        return CalvoReport(
            hazard=params.calvo_hazard,
            width_quantile=0.0,
            width_minmax=0.0,
            mean_price=float("nan"),
            pi_wrong=float("nan"),
            n_samples=0,
            burn_in_events=burn_in,
            horizon_events=horizon_events,
            censored_before_burn_in=censored_early,
        )

    p_a = np.array([ev.p_a for ev in samples])
    p_b = np.array([ev.p_b for ev in samples])
    pooled = np.concatenate([p_a, p_b])
    lo, hi = np.percentile(pooled, [1.0, 99.0])

    eta = np.array([ev.eta for ev in samples])
    pack = _cells_at(eta, p_a, p_b, params.kappa, params)
    stopped, up = _stop_state(pack, eta, params, DEFAULT_RULE)
    truth_is_a = out.true_high.name == "A"
    wrong = stopped & (up != truth_is_a)

    return CalvoReport(
        hazard=params.calvo_hazard,
        width_quantile=float(hi - lo),
        width_minmax=float(pooled.max() - pooled.min()),
        mean_price=float(pooled.mean()),
        pi_wrong=float(np.mean(wrong)),
        n_samples=len(samples),
        burn_in_events=burn_in,
        horizon_events=horizon_events,
        censored_before_burn_in=censored_early,
    )
