"""Declarative experiment configuration (TOML with nested sections).

Every field has a default, so an empty file (or no file) runs the baseline
parameterization.  Unknown keys anywhere are rejected so a typo cannot
silently fall back to a default.
"""

from __future__ import annotations

import dataclasses
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from .params import ModelParams


class ConfigError(ValueError):
    """Malformed, unknown, or out-of-range configuration input."""


@dataclass(frozen=True)
class RunSection:
    seed: int = 20240
    runs: int = 20_000
    max_arrivals: int = 100_000
    out_dir: str = "out"
    threads: int = 1


@dataclass(frozen=True)
class SolverSection:
    p_max: float = 1.0
    step: float = 0.02
    tau: float = 0.03
    rho: float = 0.2
    runs_per_pair: int = 20_000
    eps: float = 0.005
    max_iters: int = 120
    support_threshold: float = 1e-3


@dataclass(frozen=True)
class RegimeSection:
    label: str
    q: float
    kappa: float
    eta0: float = 0.5


@dataclass(frozen=True)
class SimulateSection:
    n_paths: int = 20
    regimes: tuple = (
        RegimeSection(label="high_precision", q=0.80, kappa=0.05, eta0=0.5),
        RegimeSection(label="low_precision", q=0.55, kappa=0.20, eta0=0.4),
    )


@dataclass(frozen=True)
class CalvoSection:
    alphas: tuple = (0.1, 1.0, 5.0)
    horizon_events: int = 100_000
    burn_in_fraction: float = 0.2
    reset_grid_step: float = 0.01


@dataclass(frozen=True)
class WelfareSection:
    grid_points: int = 2001
    tol: float = 1e-8
    decompose_runs: int = 20_000


@dataclass(frozen=True)
class BoundsSection:
    q: tuple = (0.55, 0.65, 0.80)
    kappa: tuple = (0.0, 0.1, 0.2)
    price_diff: tuple = (0.0,)
    variant: str = "visit_symmetric"


@dataclass(frozen=True)
class SweepSection:
    axes: dict = field(default_factory=lambda: {"q": (0.55, 0.65, 0.80), "kappa": (0.0, 0.1, 0.2)})


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams = field(default_factory=ModelParams)
    run: RunSection = field(default_factory=RunSection)
    solver: SolverSection = field(default_factory=SolverSection)
    simulate: SimulateSection = field(default_factory=SimulateSection)
    calvo: CalvoSection = field(default_factory=CalvoSection)
    welfare: WelfareSection = field(default_factory=WelfareSection)
    bounds: BoundsSection = field(default_factory=BoundsSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def resolved_dict(self) -> dict:
        """Plain nested dict of every resolved value, for output headers."""
        out = dataclasses.asdict(self)
        out["simulate"]["regimes"] = [dataclasses.asdict(r) for r in self.simulate.regimes]
        return out


def _build(cls, data: dict, where: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = set(data) - set(fields)
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{where}]")
    kwargs = {}
    for name, value in data.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid [{where}] section: {err}") from err


def config_from_dict(raw: dict) -> ExperimentConfig:
    known = {
        "model", "run", "solver", "simulate", "calvo", "welfare", "bounds", "sweep",
    }
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")

    sim_raw = dict(raw.get("simulate", {}))
    regimes_raw = sim_raw.pop("regimes", None)
    simulate = _build(SimulateSection, sim_raw, "simulate")
    if regimes_raw is not None:
        if not isinstance(regimes_raw, list) or not regimes_raw:
            raise ConfigError("[simulate] regimes must be a non-empty array of tables")
        regimes = tuple(_build(RegimeSection, r, "simulate.regimes") for r in regimes_raw)
        simulate = dataclasses.replace(simulate, regimes=regimes)

    sweep_raw = raw.get("sweep", None)
    if sweep_raw is None:
        sweep = SweepSection()
    else:
        from .estimators import SWEEP_AXES

        unknown_axes = set(sweep_raw) - set(SWEEP_AXES)
        if unknown_axes:
            raise ConfigError(f"unknown sweep axis(es) {sorted(unknown_axes)}; allowed: {SWEEP_AXES}")
        sweep = SweepSection(axes={k: tuple(v) for k, v in sweep_raw.items()})

    return ExperimentConfig(
        model=_build(ModelParams, raw.get("model", {}), "model"),
        run=_build(RunSection, raw.get("run", {}), "run"),
        solver=_build(SolverSection, raw.get("solver", {}), "solver"),
        simulate=simulate,
        calvo=_build(CalvoSection, raw.get("calvo", {}), "calvo"),
        welfare=_build(WelfareSection, raw.get("welfare", {}), "welfare"),
        bounds=_build(BoundsSection, raw.get("bounds", {}), "bounds"),
        sweep=sweep,
    )


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = tomllib.loads(p.read_text(encoding="utf-8"))
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    return config_from_dict(raw)
