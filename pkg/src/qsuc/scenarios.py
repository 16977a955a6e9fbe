"""Stochastic wind and load realizations.

Wind speeds are Weibull draws pushed through a cut-in / rated / cut-out
turbine power curve; loads are Beta draws rescaled to [load_min, load_max].
A :class:`ScenarioSet` bundles K equally weighted scenarios. Everything is
seeded: scenario h uses a child seed derived from (master seed, h), so a set
can be generated scenario-by-scenario in parallel and still come out
identical to a sequential run.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

PROBABILITY_ATOL = 1e-9


@dataclass(frozen=True)
class TurbinePowerCurve:
    """Piecewise speed-to-power map of a wind turbine.

    Zero below cut_in and above cut_out, rated_power above rated_speed, and
    the cubic ramp ``rated * (v**3 - cut_in**3) / (rated_speed**3 - cut_in**3)``
    in between.
    """

    cut_in: float
    rated_speed: float
    cut_out: float
    rated_power: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.cut_in < self.rated_speed < self.cut_out:
            raise ParameterError(
                f"power curve needs 0 <= cut_in < rated_speed < cut_out, got "
                f"({self.cut_in}, {self.rated_speed}, {self.cut_out})"
            )
        if self.rated_power <= 0.0:
            raise ParameterError(f"rated_power must be positive, got {self.rated_power}")

    def power(self, speeds: np.ndarray) -> np.ndarray:
        v = np.asarray(speeds, dtype=float)
        out = np.zeros_like(v)
        ramp = (v >= self.cut_in) & (v < self.rated_speed)
        flat = (v >= self.rated_speed) & (v <= self.cut_out)
        denom = self.rated_speed**3 - self.cut_in**3
        out[ramp] = self.rated_power * (v[ramp] ** 3 - self.cut_in**3) / denom
        out[flat] = self.rated_power
        return out


@dataclass(frozen=True)
class Scenario:
    wind: tuple[float, ...]
    load: tuple[float, ...]
    probability: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "wind", tuple(float(w) for w in self.wind))
        object.__setattr__(self, "load", tuple(float(d) for d in self.load))


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: tuple[Scenario, ...]
    seed: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenarios", tuple(self.scenarios))

    def __len__(self) -> int:
        return len(self.scenarios)

    @property
    def horizon(self) -> int:
        return len(self.scenarios[0].wind)


def validate_scenario_set(sset: ScenarioSet) -> list[str]:
    out = []
    if not sset.scenarios:
        return ["scenario set is empty"]
    horizon = len(sset.scenarios[0].wind)
    total = 0.0
    for h, sc in enumerate(sset.scenarios):
        if len(sc.wind) != horizon or len(sc.load) != horizon:
            out.append(f"scenario {h}: wind/load length differs from scenario 0 ({horizon})")
        if any(w < 0.0 or not np.isfinite(w) for w in sc.wind):
            out.append(f"scenario {h}: wind values must be finite and non-negative")
        if any(d < 0.0 or not np.isfinite(d) for d in sc.load):
            out.append(f"scenario {h}: load values must be finite and non-negative")
        if sc.probability < 0.0:
            out.append(f"scenario {h}: probability must be non-negative")
        total += sc.probability
    if abs(total - 1.0) > PROBABILITY_ATOL:
        out.append(f"probabilities sum to {total}, expected 1 within {PROBABILITY_ATOL}")
    return out


def _check_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise ParameterError(f"{name} must be positive, got {value}")


def sample_wind_series(
    shape: float,
    scale: float,
    turbine: TurbinePowerCurve,
    horizon: int,
    seed,
) -> np.ndarray:
    """Draw one wind-power series: Weibull speeds through the power curve."""
    _check_positive("Weibull shape", shape)
    _check_positive("Weibull scale", scale)
    rng = np.random.default_rng(seed)
    speeds = scale * rng.weibull(shape, size=horizon)
    return turbine.power(speeds)


def sample_load_series(
    alpha: float,
    beta: float,
    load_min: float,
    load_max: float,
    horizon: int,
    seed,
) -> np.ndarray:
    """Draw one load series: Beta(alpha, beta) rescaled to [load_min, load_max]."""
    _check_positive("Beta alpha", alpha)
    _check_positive("Beta beta", beta)
    if load_min > load_max:
        raise ParameterError(f"load_min must not exceed load_max, got {load_min} > {load_max}")
    if load_min < 0.0:
        raise ParameterError(f"load_min must be non-negative, got {load_min}")
    rng = np.random.default_rng(seed)
    return load_min + (load_max - load_min) * rng.beta(alpha, beta, size=horizon)


def build_scenario_set(
    wind_shape: float,
    wind_scale: float,
    turbine: TurbinePowerCurve,
    load_alpha: float,
    load_beta: float,
    load_min: float,
    load_max: float,
    n_scenarios: int,
    horizon: int,
    seed: int,
) -> ScenarioSet:
    """Sample K scenarios with probability 1/K each.

    Scenario h draws from child seeds (seed, h, 0) for wind and (seed, h, 1)
    for load, so the result does not depend on generation order.
    """
    if n_scenarios < 1:
        raise ParameterError(f"need at least one scenario, got {n_scenarios}")
    if horizon < 1:
        raise ParameterError(f"horizon must be >= 1, got {horizon}")
    if seed < 0:
        raise ParameterError(f"seed must be non-negative, got {seed}")
    prob = 1.0 / n_scenarios
    scenarios = []
    for h in range(n_scenarios):
        wind = sample_wind_series(
            wind_shape, wind_scale, turbine, horizon, np.random.SeedSequence([seed, h, 0])
        )
        load = sample_load_series(
            load_alpha, load_beta, load_min, load_max, horizon, np.random.SeedSequence([seed, h, 1])
        )
        scenarios.append(Scenario(wind=tuple(wind), load=tuple(load), probability=prob))
    return ScenarioSet(scenarios=tuple(scenarios), seed=seed)


def scenario_set_to_dict(sset: ScenarioSet) -> dict:
    return {
        "scenarios": [
            {"wind": list(sc.wind), "load": list(sc.load), "probability": sc.probability}
            for sc in sset.scenarios
        ],
        "seed": sset.seed,
    }


def scenario_set_from_dict(doc: dict) -> ScenarioSet:
    scenarios = tuple(
        Scenario(wind=tuple(sc["wind"]), load=tuple(sc["load"]), probability=float(sc["probability"]))
        for sc in doc["scenarios"]
    )
    return ScenarioSet(scenarios=scenarios, seed=int(doc.get("seed", 0)))


def load_scenario_set(path) -> ScenarioSet:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_set_from_dict(json.load(fh))


def save_scenario_set(sset: ScenarioSet, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(scenario_set_to_dict(sset), fh, indent=2, sort_keys=True)
        fh.write("\n")
