"""Command-line front end.

Subcommands map one-to-one to the package's experiment surfaces::

    bounds     cascade-boundary curves over a (q, kappa, price-diff) grid
    simulate   belief sample paths and absorption statistics per regime
    profits    Monte Carlo profit estimate for the configured price pair
    solve-mix  symmetric mixed-strategy price solver
    calvo      reset-hazard sweep of stationary price statistics + timeline
    welfare    continuation-value grid, subsidy schedule, gap decomposition
    sweep      common-random-number parameter sweep (CSV contract)

One master seed governs everything; per-command seeds derive by stable
hashing of (master, command), and runs inside a command are indexed streams
so sweeps stay common-random-number paired across cells.  Identical config
and seed produce byte-identical outputs regardless of --threads.

Exit codes: 0 success, 2 config error, 3 degenerate-parameter error,
4 non-convergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .beliefs import (
    BoundsVariant,
    DegenerateThresholdError,
    cascade_bounds,
    eta_star,
    immediate_herd,
)
from .config import ConfigError, ExperimentConfig, load_config
from .engine import RunConfig, simulate_batch, simulate_run
from .equilibrium import calvo_stationary, mix_solve
from .estimators import (
    SWEEP_CSV_COLUMNS,
    _binomial_stats,
    _sample_stats,
    estimate_profits,
    sweep,
)
from .grid import PriceGrid
from .output import write_csv, write_json
from .params import ModelParams
from .rng import derive_seed
from .welfare import pigouvian_subsidy, value_function_solve, welfare_gap_decompose

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DEGENERATE = 3
EXIT_NO_CONVERGENCE = 4

_COMMAND_IDS = {
    "bounds": 1,
    "simulate": 2,
    "profits": 3,
    "solve-mix": 4,
    "calvo": 5,
    "welfare": 6,
    "sweep": 7,
}

PATH_CSV_COLUMNS = ("run_id", "event_index", "time", "eta", "p_a", "p_b", "event_type", "action")
TIMES_CSV_COLUMNS = ("regime", "run_id", "time", "arrivals", "absorbed_side", "wrong")
BOUNDS_CSV_COLUMNS = (
    "q", "kappa", "price_diff", "eta_star", "eta_bar", "eta_under", "variant",
    "herd_at_half", "status",
)
CALVO_CSV_COLUMNS = (
    "alpha", "width_quantile", "width_minmax", "mean_price", "pi_wrong",
    "n_samples", "burn_in_events", "horizon_events",
)


def _stats_payload(s) -> dict:
    return {
        "n_runs": s.n_runs,
        "n_censored": s.n_censored,
        "mean": s.mean,
        "std_error": s.std_error,
        "ci95": list(s.ci95),
    }


def cmd_bounds(cfg: ExperimentConfig, seed: int, out: Path) -> int:
    variant = BoundsVariant(cfg.bounds.variant)
    rows = []
    for q in cfg.bounds.q:
        for kappa in cfg.bounds.kappa:
            for pd in cfg.bounds.price_diff:
                status = ""
                star = eta_star(pd, kappa, cfg.model.delta_gap)
                try:
                    params = dataclasses.replace(
                        cfg.model, q=q, kappa=kappa, p_a=cfg.model.p_b + pd, eta0=0.5
                    )
                except ValueError as err:
                    rows.append((q, kappa, pd, star, "", "", variant.value, "", f"invalid: {err}"))
                    continue
                try:
                    b = cascade_bounds(params, variant)
                    herd = immediate_herd(params, b).value
                    rows.append(
                        (q, kappa, pd, star, b.eta_bar, b.eta_under, variant.value, herd, status)
                    )
                except DegenerateThresholdError as err:
                    rows.append(
                        (q, kappa, pd, star, "", "", variant.value, "", f"degenerate: {err.boundary}")
                    )
    write_csv(out / "bounds.csv", BOUNDS_CSV_COLUMNS, rows, cfg.resolved_dict())
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, seed: int, out: Path, n_runs: int) -> int:
    cfg_dict = cfg.resolved_dict()
    path_rows = {}
    time_rows = []
    bound_rows = []
    reports = {}
    for ridx, regime in enumerate(cfg.simulate.regimes):
        params = dataclasses.replace(cfg.model, q=regime.q, kappa=regime.kappa, eta0=regime.eta0)
        try:
            b = cascade_bounds(params, BoundsVariant.VISIT_SYMMETRIC)
        except DegenerateThresholdError as err:
            print(f"error: regime {regime.label}: degenerate boundary {err.boundary}", file=sys.stderr)
            return EXIT_DEGENERATE
        bound_rows.append((regime.label, params.q, params.kappa, b.eta_bar, b.eta_under, b.variant.value))

        path_seed = derive_seed(seed, ridx, 0)
        rows = []
        for run_id in range(cfg.simulate.n_paths):
            outcome = simulate_run(
                RunConfig(params=params, seed=path_seed, run_index=run_id, record_path=True)
            )
            for ev in outcome.path:
                rows.append((run_id, ev.event_index, ev.time, ev.eta, ev.p_a, ev.p_b, ev.event_type, ev.action))
        path_rows[regime.label] = rows

        mc_seed = derive_seed(seed, ridx, 1)
        res = simulate_batch(params, seed=mc_seed, run_indices=np.arange(n_runs, dtype=np.uint64))
        for run_id in range(n_runs):
            side = "up" if res.absorbed_up[run_id] else ("down" if res.absorbed_down[run_id] else "censored")
            time_rows.append(
                (regime.label, run_id, res.calendar_time[run_id], int(res.arrivals[run_id]), side, bool(res.wrong[run_id]))
            )
        n_cen = int(res.censored.sum())
        reports[regime.label] = {
            "params": dataclasses.asdict(params),
            "p_wrong": _stats_payload(_binomial_stats(res.wrong, n_cen)),
            "p_up": _stats_payload(_binomial_stats(res.absorbed_up, n_cen)),
            "mean_arrivals": _stats_payload(_sample_stats(res.arrivals.astype(float), n_cen)),
            "mean_time": _stats_payload(_sample_stats(res.calendar_time, n_cen)),
        }

    for label, rows in path_rows.items():
        write_csv(out / f"paths_{label}.csv", PATH_CSV_COLUMNS, rows, cfg_dict)
    write_csv(out / "absorption_times.csv", TIMES_CSV_COLUMNS, time_rows, cfg_dict)
    write_csv(
        out / "simulate_bounds.csv",
        ("regime", "q", "kappa", "eta_bar", "eta_under", "variant"),
        bound_rows,
        cfg_dict,
    )
    write_json(out / "absorption_report.json", {"regimes": reports}, cfg_dict)
    return EXIT_OK


def cmd_profits(cfg: ExperimentConfig, seed: int, out: Path, n_runs: int) -> int:
    est = estimate_profits(cfg.model.p_a, cfg.model.p_b, cfg.model, n_runs, seed)
    payload = {
        "p_a": est.p_a,
        "p_b": est.p_b,
        "pi_a": _stats_payload(est.pi_a),
        "pi_b": _stats_payload(est.pi_b),
        "expected_sales_a": _stats_payload(est.expected_sales_a),
        "expected_sales_b": _stats_payload(est.expected_sales_b),
    }
    write_json(out / "profits.json", payload, cfg.resolved_dict())
    return EXIT_OK


def cmd_solve_mix(cfg: ExperimentConfig, seed: int, out: Path) -> int:
    s = cfg.solver
    grid = PriceGrid(p_max=s.p_max, step=s.step)
    report = mix_solve(
        cfg.model,
        grid,
        tau=s.tau,
        rho=s.rho,
        n_runs_per_pair=s.runs_per_pair,
        eps=s.eps,
        max_iters=s.max_iters,
        seed=seed,
        support_threshold=s.support_threshold,
    )
    cfg_dict = cfg.resolved_dict()
    write_csv(
        out / "mixed_strategy.csv",
        ("price", "mass"),
        list(zip(grid.points, report.strategy.mass)),
        cfg_dict,
    )
    write_json(
        out / "solve_report.json",
        {
            "grid": {"p_max": s.p_max, "step": s.step},
            "mass": report.strategy.mass.tolist(),
            "support_prices": grid.points[report.support_indices].tolist(),
            "n_support_components": report.n_support_components,
            "width": report.width,
            "mean_price": report.mean_price,
            "iterations": report.iterations,
            "converged": report.converged,
            "max_profit_deviation": report.max_profit_deviation,
            "l1_last": report.l1_last,
        },
        cfg_dict,
    )
    if not report.converged:
        print("warning: mixed-strategy solver did not meet its convergence gate", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _calvo_static_row(cfg: ExperimentConfig, seed: int, n_runs: int):
    params = cfg.model
    res = simulate_batch(params, seed=seed, run_indices=np.arange(n_runs, dtype=np.uint64))
    prices = np.array([params.p_a, params.p_b])
    return (
        0.0,
        float(abs(params.p_a - params.p_b)),
        float(abs(params.p_a - params.p_b)),
        float(prices.mean()),
        float(res.wrong.mean()),
        n_runs,
        0,
        0,
    )


def cmd_calvo(cfg: ExperimentConfig, seed: int, out: Path, n_runs: int, threads: int) -> int:
    cfg_dict = cfg.resolved_dict()
    grid = PriceGrid(p_max=cfg.solver.p_max, step=cfg.calvo.reset_grid_step)

    def one(item) -> tuple:
        idx, alpha = item
        if alpha == 0.0:
            return _calvo_static_row(cfg, derive_seed(seed, 0), n_runs)
        params = dataclasses.replace(cfg.model, calvo_hazard=alpha)
        # paired seeds across the hazard column: every cell shares one stream set
        rep = calvo_stationary(
            params,
            grid,
            horizon_events=cfg.calvo.horizon_events,
            burn_in_fraction=cfg.calvo.burn_in_fraction,
            seed=derive_seed(seed, 1),
        )
        return (
            alpha, rep.width_quantile, rep.width_minmax, rep.mean_price,
            rep.pi_wrong, rep.n_samples, rep.burn_in_events, rep.horizon_events,
        )

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        rows = list(pool.map(one, enumerate(cfg.calvo.alphas)))
    write_csv(out / "calvo_sweep.csv", CALVO_CSV_COLUMNS, rows, cfg_dict)

    showcase = next((a for a in cfg.calvo.alphas if a > 0.0), None)
    if showcase is not None:
        params = dataclasses.replace(cfg.model, calvo_hazard=showcase)
        outcome = simulate_run(
            RunConfig(
                params=params,
                seed=derive_seed(seed, 2),
                run_index=0,
                max_events=cfg.calvo.horizon_events,
                max_arrivals=cfg.calvo.horizon_events,
                record_path=True,
                reset_grid=grid,
            )
        )
        rows = [
            (0, ev.event_index, ev.time, ev.eta, ev.p_a, ev.p_b, ev.event_type, ev.action)
            for ev in outcome.path
        ]
        write_csv(out / "calvo_timeline.csv", PATH_CSV_COLUMNS, rows, cfg_dict)
    return EXIT_OK


def cmd_welfare(cfg: ExperimentConfig, seed: int, out: Path) -> int:
    cfg_dict = cfg.resolved_dict()
    value = value_function_solve(cfg.model, n_grid=cfg.welfare.grid_points, tol=cfg.welfare.tol)
    write_csv(out / "welfare_value.csv", ("eta", "value"), list(zip(value.grid, value.values)), cfg_dict)
    schedule = pigouvian_subsidy(value, cfg.model)
    write_csv(out / "subsidy.csv", ("eta", "value"), list(zip(schedule.grid, schedule.s_values)), cfg_dict)

    base = welfare_gap_decompose(cfg.model, None, cfg.welfare.decompose_runs, seed, value=value)
    subsidized = welfare_gap_decompose(cfg.model, schedule, cfg.welfare.decompose_runs, seed, value=value)
    write_json(
        out / "welfare_decomposition.json",
        {
            "value_converged": value.converged,
            "value_residual": value.residual,
            "value_snap_error": value.snap_error,
            "private": {
                "total_gap": _stats_payload(base.total_gap),
                "wrong_purchases": _stats_payload(base.wrong_purchases_component),
                "excess_search": _stats_payload(base.excess_search_component),
            },
            "subsidized": {
                "total_gap": _stats_payload(subsidized.total_gap),
                "wrong_purchases": _stats_payload(subsidized.wrong_purchases_component),
                "excess_search": _stats_payload(subsidized.excess_search_component),
            },
        },
        cfg_dict,
    )
    if not value.converged:
        print("warning: value iteration did not converge", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_sweep(cfg: ExperimentConfig, seed: int, out: Path, n_runs: int) -> int:
    rows = sweep(cfg.model, dict(cfg.sweep.axes), n_runs, seed, max_arrivals=cfg.run.max_arrivals)
    write_csv(out / "sweep.csv", SWEEP_CSV_COLUMNS, [r.csv_values() for r in rows], cfg.resolved_dict())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cascade-market", description=__doc__)
    parser.add_argument("command", choices=sorted(_COMMAND_IDS))
    parser.add_argument("--config", default=None, help="TOML config file (optional)")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--runs", type=int, default=None, help="Monte Carlo run count override")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    master = cfg.run.seed if args.seed is None else args.seed
    out = Path(args.out if args.out is not None else cfg.run.out_dir)
    n_runs = cfg.run.runs if args.runs is None else args.runs
    threads = cfg.run.threads if args.threads is None else args.threads
    if n_runs < 1 or threads < 1:
        print("config error: runs and threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    seed = derive_seed(master, _COMMAND_IDS[args.command])

    try:
        if args.command == "bounds":
            return cmd_bounds(cfg, seed, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, seed, out, n_runs)
        if args.command == "profits":
            return cmd_profits(cfg, seed, out, n_runs)
        if args.command == "solve-mix":
            return cmd_solve_mix(cfg, seed, out)
        if args.command == "calvo":
            return cmd_calvo(cfg, seed, out, n_runs, threads)
        if args.command == "welfare":
            return cmd_welfare(cfg, seed, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, seed, out, n_runs)
    except DegenerateThresholdError as err:
        print(f"degenerate parameters: {err}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (ConfigError, ValueError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
