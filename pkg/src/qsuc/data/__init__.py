"""Bundled synthetic study instances.

Both instances are invented for this repository so that every consumer,
from unit tests to the CLI quick-start, exercises identical data. Neither
comes from any published measurement; treat the numbers as arbitrary but
fixed.

``tiny``       two generators over three periods, two scenarios; small
               enough to brute-force all 64 commitments.
``reference``  four generators over six periods, ten sampled scenarios;
               the default instance for the solve command.
"""

from __future__ import annotations

import json
from importlib import resources

from ..model import SucInstance, instance_from_dict
from ..scenarios import ScenarioSet, scenario_set_from_dict


def _read(name: str) -> dict:
    return json.loads(resources.files(__name__).joinpath(name).read_text("utf-8"))


def tiny() -> tuple[SucInstance, ScenarioSet]:
    return (
        instance_from_dict(_read("tiny_instance.json")),
        scenario_set_from_dict(_read("tiny_scenarios.json")),
    )


def reference() -> tuple[SucInstance, ScenarioSet]:
    return (
        instance_from_dict(_read("reference_instance.json")),
        scenario_set_from_dict(_read("reference_scenarios.json")),
    )
