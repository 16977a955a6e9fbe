"""Hybrid quantum-classical solver for stochastic unit commitment.

Benders decomposition with a QUBO master problem: inequality constraints
enter through a slack-free augmented Lagrangian penalty, minimized either
monolithically or block by block so a small sampler (exhaustive scan,
simulated annealing, or a remote annealer service) suffices. Scenario
dispatch subproblems are convex QPs whose commitment-copy duals supply the
cuts.
"""

from .admm import AdmmConfig, AdmmOutcome, BlockPartition, partition_by_unit, run_qphr_admm
from .benders import (
    BendersCut,
    BendersTrace,
    build_cut,
    build_master,
    run_benders,
    solve_master,
)
from .errors import (
    EncodingRangeError,
    NumericalError,
    ParameterError,
    QsucError,
    RemoteProtocolError,
    RemoteVerificationError,
    SizeLimitError,
    TransportError,
)
from .model import Generator, SucInstance, load_instance, save_instance, validate_instance
from .phr import LinearConstraint, PhrOutcome, PhrState, run_qphr_alm
from .qubo import (
    BinaryEncoding,
    IsingModel,
    Qubo,
    hamiltonian_diagonal,
    ising_energy,
    qubit_accounting,
    qubo_to_ising,
    qubo_value,
)
from .samplers import SampleResult, SaSchedule, make_sampler
from .scenarios import Scenario, ScenarioSet, build_scenario_set, load_scenario_set
from .subqp import DispatchSolution, build_subproblem, solve_dispatch

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig",
    "AdmmOutcome",
    "BinaryEncoding",
    "BendersCut",
    "BendersTrace",
    "BlockPartition",
    "DispatchSolution",
    "EncodingRangeError",
    "Generator",
    "IsingModel",
    "LinearConstraint",
    "NumericalError",
    "ParameterError",
    "PhrOutcome",
    "PhrState",
    "Qubo",
    "QsucError",
    "RemoteProtocolError",
    "RemoteVerificationError",
    "SampleResult",
    "SaSchedule",
    "Scenario",
    "ScenarioSet",
    "SizeLimitError",
    "SucInstance",
    "TransportError",
    "build_cut",
    "build_master",
    "build_scenario_set",
    "build_subproblem",
    "hamiltonian_diagonal",
    "ising_energy",
    "load_instance",
    "load_scenario_set",
    "make_sampler",
    "partition_by_unit",
    "qubit_accounting",
    "qubo_to_ising",
    "qubo_value",
    "run_benders",
    "run_qphr_admm",
    "run_qphr_alm",
    "save_instance",
    "solve_dispatch",
    "solve_master",
    "validate_instance",
    "__version__",
]
