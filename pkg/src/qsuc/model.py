"""Deterministic unit-commitment problem data.

A :class:`SucInstance` carries the generator fleet, the horizon, the load-shed
penalty and the floor used for the Benders bound variable. Instances are
immutable; validation reports violations as data instead of raising, so a CLI
can show all problems at once.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Generator:
    """One thermal unit and its cost/limit data.

    Costs are quadratic in output: ``c_quad * p**2 + c_prim * p`` per period
    while running, plus ``c_cons`` per committed period. ``ramp_down`` is
    non-positive so the ramp constraint reads
    ``ramp_down <= p[t+1] - p[t] <= ramp_up`` without sign juggling.
    """

    id: int
    c_quad: float
    c_prim: float
    c_cons: float
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float

    def marginal_cost_at_max(self) -> float:
        """Derivative of the running cost at full output."""
        return 2.0 * self.c_quad * self.p_max + self.c_prim


@dataclass(frozen=True)
class SucInstance:
    generators: tuple[Generator, ...]
    horizon: int
    shed_cost: float
    lb_floor: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "generators", tuple(self.generators))

    @property
    def n_units(self) -> int:
        return len(self.generators)


def validate_instance(inst: SucInstance) -> list[str]:
    """Check every invariant; return one message per violation.

    An empty list means the instance is well formed. Violations are ordinary
    data so callers can report them all instead of dying on the first.
    """
    out = []
    for g in inst.generators:
        tag = f"generator {g.id}"
        if not 0.0 <= g.p_min <= g.p_max:
            out.append(f"{tag}: requires 0 <= p_min <= p_max, got p_min={g.p_min}, p_max={g.p_max}")
        if g.c_quad < 0.0:
            out.append(f"{tag}: c_quad must be non-negative, got {g.c_quad}")
        if not g.ramp_down <= 0.0 <= g.ramp_up:
            out.append(
                f"{tag}: requires ramp_down <= 0 <= ramp_up, got "
                f"ramp_down={g.ramp_down}, ramp_up={g.ramp_up}"
            )
        for name in ("c_quad", "c_prim", "c_cons", "p_min", "p_max", "ramp_up", "ramp_down"):
            if not math.isfinite(getattr(g, name)):
                out.append(f"{tag}: {name} must be finite")
    if inst.horizon < 1:
        out.append(f"horizon must be >= 1, got {inst.horizon}")
    if inst.generators:
        worst = max(g.marginal_cost_at_max() for g in inst.generators)
        if not inst.shed_cost > worst:
            out.append(
                f"shed_cost must exceed the dearest marginal cost at p_max "
                f"({worst}) so shedding stays a last resort, got {inst.shed_cost}"
            )
    if not math.isfinite(inst.lb_floor):
        out.append(f"lb_floor must be finite, got {inst.lb_floor}")
    return out


def num_commitment_vars(inst: SucInstance) -> int:
    """Binary on/off variables: one per (generator, period) cell."""
    return inst.n_units * inst.horizon


def commitment_cost(inst: SucInstance, u) -> float:
    """Fixed cost of a commitment matrix, sum of c_cons over on cells.

    ``u`` is indexable as u[g][t] with values in {0, 1}.
    """
    return float(
        sum(
            g.c_cons * u[gi][t]
            for gi, g in enumerate(inst.generators)
            for t in range(inst.horizon)
        )
    )


def instance_to_dict(inst: SucInstance) -> dict:
    return {
        "generators": [asdict(g) for g in inst.generators],
        "horizon": inst.horizon,
        "shed_cost": inst.shed_cost,
        "lb_floor": inst.lb_floor,
    }


def instance_from_dict(doc: dict) -> SucInstance:
    gens = tuple(Generator(**g) for g in doc["generators"])
    return SucInstance(
        generators=gens,
        horizon=int(doc["horizon"]),
        shed_cost=float(doc["shed_cost"]),
        lb_floor=float(doc.get("lb_floor", 0.0)),
    )


def load_instance(path) -> SucInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))


def save_instance(inst: SucInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(inst), fh, indent=2, sort_keys=True)
        fh.write("\n")
