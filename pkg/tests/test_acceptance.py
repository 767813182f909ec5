"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines as they complete.  Tolerances are fixed here, not calibrated later.
"""

import dataclasses
from fractions import Fraction

import numpy as np
import pytest

from cascade_market.beliefs import (
    BoundsVariant,
    Firm,
    HerdOutcome,
    action_likelihoods,
    bayes_update_action,
    cascade_bounds,
    immediate_herd,
)
from cascade_market.engine import simulate_batch
from cascade_market.equilibrium import calvo_stationary, indifference_check, mix_solve
from cascade_market.estimators import estimate_absorption, exact_small_chain, sweep
from cascade_market.grid import PriceGrid
from cascade_market.params import ModelParams
from cascade_market.welfare import (
    per_arrival_welfare,
    pigouvian_subsidy,
    value_function_solve,
    welfare_gap_decompose,
)

SEED = 20_240

SOLVER_GRID = PriceGrid(p_max=1.0, step=0.02)
SOLVER_SETTINGS = dict(tau=0.03, rho=0.2, n_runs_per_pair=20_000, eps=0.005, max_iters=120)

HIGH_REGIME = ModelParams(q=0.80, kappa=0.05)
LOW_REGIME = ModelParams(q=0.55, kappa=0.20)


def report(criterion: str, ok: bool, detail: str) -> bool:
    print(f"[criterion {criterion}] {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


@pytest.fixture(scope="module")
def solve_high():
    return mix_solve(HIGH_REGIME, SOLVER_GRID, seed=SEED, **SOLVER_SETTINGS)


@pytest.fixture(scope="module")
def solve_low():
    return mix_solve(LOW_REGIME, SOLVER_GRID, seed=SEED, **SOLVER_SETTINGS)


@pytest.fixture(scope="module")
def solve_prominent():
    params = dataclasses.replace(HIGH_REGIME, first_visit_prob=0.7)
    return mix_solve(params, SOLVER_GRID, seed=SEED, **SOLVER_SETTINGS)


def test_criterion_1_closed_form_boundaries():
    b0 = cascade_bounds(ModelParams(q=0.8, kappa=0.0), BoundsVariant.VISIT_SYMMETRIC)
    ok = abs(b0.eta_bar - 0.8) <= 1e-12 and abs(b0.eta_under - 0.2) <= 1e-12

    b1 = cascade_bounds(ModelParams(q=0.55, kappa=0.2), BoundsVariant.SINGLE_THRESHOLD)
    ok &= abs(b1.eta_bar - 0.22 / 0.49) <= 1e-12

    b2 = cascade_bounds(ModelParams(q=0.8, kappa=0.05), BoundsVariant.VISIT_SYMMETRIC)
    ok &= abs(b2.eta_under - (1.0 - b2.eta_bar)) <= 1e-12

    assert report(
        "1",
        ok,
        f"zero-cost bounds ({b0.eta_bar:.12f}, {b0.eta_under:.12f}), "
        f"single-threshold bar {b1.eta_bar:.12f}, symmetric pair gap "
        f"{abs(b2.eta_under - (1 - b2.eta_bar)):.2e}",
    )


def test_criterion_2_immediate_herding():
    params = LOW_REGIME
    herd = immediate_herd(params, cascade_bounds(params, BoundsVariant.SINGLE_THRESHOLD))
    res = simulate_batch(params, seed=SEED, run_indices=np.arange(10_000, dtype=np.uint64))
    ok = herd is HerdOutcome.HERD_UP and int(res.arrivals.max()) == 0
    assert report(
        "2", ok, f"classified {herd.value}, max arrivals over 1e4 runs = {int(res.arrivals.max())}"
    )


def test_criterion_3_martingale():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(1000):
        p = ModelParams(
            q=rng.uniform(0.55, 0.95),
            kappa=rng.uniform(0.0, 0.3),
            p_a=rng.uniform(0.0, 0.6),
            p_b=rng.uniform(0.0, 0.6),
            first_visit_prob=rng.uniform(0.0, 1.0),
        )
        eta = rng.uniform(0.02, 0.98)
        lik = action_likelihoods(eta, p)
        p_act_a = eta * lik.act_a_given_a_high + (1 - eta) * lik.act_a_given_b_high
        expected = 0.0
        if p_act_a > 0.0:
            expected += p_act_a * bayes_update_action(eta, Firm.A, p)
        if p_act_a < 1.0:
            expected += (1.0 - p_act_a) * bayes_update_action(eta, Firm.B, p)
        worst = max(worst, abs(expected - eta))
    ok = worst <= 1e-12
    assert report("3", ok, f"max |E[eta'] - eta| = {worst:.2e} over 1000 states")


def test_criterion_4_lambda_invariance():
    p1 = ModelParams(q=0.65, kappa=0.1, lambda_rate=1.0)
    p4 = dataclasses.replace(p1, lambda_rate=4.0)
    runs = np.arange(20_000, dtype=np.uint64)
    b1 = simulate_batch(p1, seed=SEED, run_indices=runs)
    b4 = simulate_batch(p4, seed=SEED, run_indices=runs)
    sides_equal = bool(
        np.array_equal(b1.absorbed_up, b4.absorbed_up)
        and np.array_equal(b1.absorbed_down, b4.absorbed_down)
    )
    ratio_exact = bool(np.all(b1.calendar_time == 4.0 * b4.calendar_time))
    ok = sides_equal and ratio_exact
    assert report("4", ok, f"per-run sides equal: {sides_equal}, time ratio exactly 4: {ratio_exact}")


def test_criterion_5_oracle_agreement():
    ok = True
    details = []
    for q, kappa in ((0.8, 0.05), (0.65, 0.1), (0.7, 0.0)):
        p = ModelParams(q=q, kappa=kappa)
        oracle = exact_small_chain(p, depth=60)
        rep = estimate_absorption(p, 50_000, seed=SEED)
        lo, hi = oracle.p_wrong_bracket
        slack = 3.0 * rep.p_wrong.std_error
        cell_ok = oracle.truncation_mass < 1e-6 and lo - slack <= rep.p_wrong.mean <= hi + slack
        ok &= cell_ok
        details.append(f"(q={q},k={kappa}): oracle={oracle.p_wrong:.5f} mc={rep.p_wrong.mean:.5f}")
    assert report("5", ok, "; ".join(details))


def test_criterion_6_comparative_statics():
    q_rows = sweep(ModelParams(kappa=0.1), {"q": [0.55, 0.65, 0.8]}, 20_000, seed=SEED)
    q_ok = all(
        a.p_wrong >= b.p_wrong - 3 * np.hypot(a.p_wrong_se, b.p_wrong_se)
        for a, b in zip(q_rows, q_rows[1:])
    )
    k_rows = sweep(ModelParams(q=0.65), {"kappa": [0.0, 0.1, 0.2]}, 20_000, seed=SEED)
    k_ok = all(
        a.p_wrong <= b.p_wrong + 3 * np.hypot(a.p_wrong_se, b.p_wrong_se)
        for a, b in zip(k_rows, k_rows[1:])
    )
    ok = q_ok and k_ok
    assert report(
        "6",
        ok,
        f"p_wrong over q: {[round(r.p_wrong, 4) for r in q_rows]} (nonincreasing: {q_ok}); "
        f"over kappa: {[round(r.p_wrong, 4) for r in k_rows]} (nondecreasing: {k_ok})",
    )


def test_criterion_7a_solver_converged(solve_high, solve_low):
    ok = solve_high.converged and solve_low.converged
    assert report(
        "7a",
        ok,
        f"converged flags: high-precision regime {solve_high.converged} "
        f"({solve_high.iterations} iters, final L1 {solve_high.l1_last:.2e}, "
        f"on-support spread {solve_high.max_profit_deviation:.1%}), "
        f"low-precision regime {solve_low.converged}",
    )


def test_criterion_7b_on_support_indifference(solve_high, solve_low):
    dev_high = indifference_check(solve_high.strategy, HIGH_REGIME, 50_000, seed=SEED + 1)
    dev_low = indifference_check(solve_low.strategy, LOW_REGIME, 50_000, seed=SEED + 1)
    ok = dev_high <= 0.05 and dev_low <= 0.05
    assert report(
        "7b", ok, f"relative profit deviation: high {dev_high:.1%}, low {dev_low:.1%} (gate 5%)"
    )


def test_criterion_7c_support_connected(solve_high, solve_low):
    ok = solve_high.n_support_components == 1 and solve_low.n_support_components == 1
    assert report(
        "7c",
        ok,
        f"support components (1-point gaps bridged): high {solve_high.n_support_components}, "
        f"low {solve_low.n_support_components}",
    )


def test_criterion_7d_width_ordering(solve_high, solve_low):
    ok = solve_high.width <= solve_low.width
    assert report("7d", ok, f"width high {solve_high.width:.3f} <= low {solve_low.width:.3f}")


def test_criterion_7e_mean_price_ordering(solve_high, solve_low):
    ok = solve_high.mean_price <= solve_low.mean_price
    assert report(
        "7e", ok, f"mean price high {solve_high.mean_price:.3f} <= low {solve_low.mean_price:.3f}"
    )


def test_criterion_8_welfare_monotonicity():
    qs = np.linspace(0.55, 0.95, 10)
    kappas = np.linspace(0.0, 0.3, 10)
    etas = np.linspace(0.02, 0.98, 50)
    worst_q, worst_k = 0.0, 0.0
    for eta in etas:
        for k in kappas:
            vals = [per_arrival_welfare(float(eta), ModelParams(q=float(q), kappa=float(k))) for q in qs]
            worst_q = min(worst_q, float(np.min(np.diff(vals))))
        for q in qs:
            vals = [per_arrival_welfare(float(eta), ModelParams(q=float(q), kappa=float(k))) for k in kappas]
            worst_k = max(worst_k, float(np.max(np.diff(vals))))
    fd_ok = worst_q >= -1e-12 and worst_k <= 1e-12

    runs = np.arange(20_000, dtype=np.uint64)
    high = simulate_batch(HIGH_REGIME, seed=SEED, run_indices=runs)
    low = simulate_batch(LOW_REGIME, seed=SEED, run_indices=runs)
    diff = high.welfare - low.welfare
    se = diff.std(ddof=1) / np.sqrt(diff.size)
    order_ok = diff.mean() >= -3 * se
    ok = fd_ok and order_ok
    assert report(
        "8",
        ok,
        f"min fd over q {worst_q:.1e}, max fd over kappa {worst_k:.1e}; paired welfare gap "
        f"{diff.mean():.4f} (+-{se:.4f})",
    )


def test_criterion_9_subsidy():
    params = ModelParams(q=0.65, kappa=0.1)
    value = value_function_solve(params)
    schedule = pigouvian_subsidy(value, params)
    bounds_ok = bool(np.all(schedule.s_values >= 0.0) and np.all(schedule.s_values <= params.kappa))

    base = welfare_gap_decompose(params, None, 20_000, seed=SEED, value=value)
    welfare_ok = base.total_gap.mean >= -3 * base.total_gap.std_error

    under = welfare_gap_decompose(params, schedule, 20_000, seed=SEED, value=value)
    excess_ok = abs(under.excess_search_component.mean) <= 3 * under.excess_search_component.std_error + 1e-12

    ok = bounds_ok and welfare_ok and excess_ok
    assert report(
        "9",
        ok,
        f"s in [0, kappa]: {bounds_ok}; subsidized-vs-private gap "
        f"{base.total_gap.mean:.4f} (+-{base.total_gap.std_error:.4f}); "
        f"excess search under subsidy {under.excess_search_component.mean:.2e}",
    )


def test_criterion_10_calvo():
    grid = PriceGrid(p_max=1.0, step=0.01)
    tol = grid.step  # sampling tolerance: one reset-grid step
    reports = []
    for alpha in (0.1, 1.0, 5.0):
        params = dataclasses.replace(HIGH_REGIME, calvo_hazard=alpha)
        reports.append(
            calvo_stationary(params, grid, horizon_events=100_000, burn_in_fraction=0.2, seed=SEED)
        )
    widths = [r.width_quantile for r in reports]
    means = [r.mean_price for r in reports]
    wrongs = [r.pi_wrong for r in reports]
    width_ok = all(a >= b - tol for a, b in zip(widths, widths[1:]))
    mean_ok = all(a >= b - tol for a, b in zip(means, means[1:]))
    wrong_ok = wrongs[-1] <= wrongs[0]
    ok = width_ok and mean_ok and wrong_ok
    assert report(
        "10",
        ok,
        f"widths {[round(w, 4) for w in widths]} (nonincr: {width_ok}); "
        f"means {[round(m, 4) for m in means]} (nonincr: {mean_ok}); "
        f"pi_wrong {[round(w, 4) for w in wrongs]}",
    )


def test_criterion_11_prominence(solve_high, solve_prominent):
    runs = np.arange(20_000, dtype=np.uint64)
    base = simulate_batch(
        dataclasses.replace(HIGH_REGIME, first_visit_prob=0.3), seed=SEED, run_indices=runs
    )
    swapped = simulate_batch(
        dataclasses.replace(HIGH_REGIME, first_visit_prob=0.7),
        seed=SEED,
        run_indices=runs,
        mirror_labels=True,
    )
    swap_ok = bool(np.array_equal(base.wrong, swapped.wrong))

    plain7 = simulate_batch(
        dataclasses.replace(HIGH_REGIME, first_visit_prob=0.7), seed=SEED, run_indices=runs
    )
    neutral = simulate_batch(HIGH_REGIME, seed=SEED, run_indices=runs)
    pw3, pw7, pw5 = base.wrong.mean(), plain7.wrong.mean(), neutral.wrong.mean()
    se = np.sqrt(pw5 * (1 - pw5) / runs.size)
    min_ok = pw5 <= min(pw3, pw7) + 3 * se

    width_tol = 2 * SOLVER_GRID.step
    width_ok = solve_prominent.width >= solve_high.width - width_tol

    ok = swap_ok and min_ok and width_ok
    assert report(
        "11",
        ok,
        f"label-swap exact: {swap_ok}; pi_wrong (.3/.5/.7) = {pw3:.4f}/{pw5:.4f}/{pw7:.4f}; "
        f"width phi=.7 {solve_prominent.width:.3f} vs phi=.5 {solve_high.width:.3f}",
    )


def test_criterion_12_reviews():
    runs = np.arange(20_000, dtype=np.uint64)
    base = simulate_batch(ModelParams(q=0.65, kappa=0.1), seed=SEED, run_indices=runs)
    reviewed = simulate_batch(
        ModelParams(q=0.65, kappa=0.1, review_mu=0.5, review_r=0.8), seed=SEED, run_indices=runs
    )
    # paired difference of wrong-cascade indicators under shared streams
    d = base.wrong.astype(float) - reviewed.wrong.astype(float)
    se = d.std(ddof=1) / np.sqrt(d.size)
    lower_ok = d.mean() > 3 * se

    sharp = simulate_batch(
        ModelParams(q=0.65, kappa=0.1, review_mu=1.0, review_r=0.95), seed=SEED, run_indices=runs
    )
    sharp_ok = sharp.wrong.mean() < 0.01
    ok = lower_ok and sharp_ok
    assert report(
        "12",
        ok,
        f"p_wrong {base.wrong.mean():.4f} -> {reviewed.wrong.mean():.4f} "
        f"(paired drop {d.mean():.4f} > 3se {3 * se:.4f}); "
        f"mu=1,r=.95 gives {sharp.wrong.mean():.5f} < 0.01",
    )
