"""Built-in six-variable program with known constrained optima.

The program is linear in six binaries with up to three inequality
constraints. Adding the constraints one at a time moves the optimum
through four known bitstrings, which mimics how cuts accumulate on a
master problem and gives the penalty loop a compact conformance check:
a row passes iff the loop lands exactly on its target string.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm import AdmmConfig, BlockPartition, run_qphr_admm
from .errors import ParameterError
from .phr import LinearConstraint, PhrState, run_qphr_alm
from .qubo import Qubo
from .samplers import make_sampler

BUNDLED_N = 6

_OBJECTIVE = (6.0, 3.0, -5.0, -6.0, 4.0, -7.0)

# each reads a.x + b <= 0; variable 0 is the leftmost bit
_CONSTRAINTS = (
    LinearConstraint({1: -2.0, 4: -2.0, 5: -1.0}, 3.0),
    LinearConstraint({0: -1.0, 2: 1.0, 3: -1.0, 5: 2.0}, 0.0),
    LinearConstraint({0: -1.0, 2: 1.0, 3: 1.0}, 0.0),
)


@dataclass(frozen=True)
class VerificationRow:
    """One conformance case: a constraint count, a schedule, a target."""

    label: str
    n_constraints: int
    sigma0: float
    target: str


ROWS = (
    VerificationRow("unconstrained", 0, 0.3, "001101"),
    VerificationRow("one constraint", 1, 0.3, "011101"),
    VerificationRow("two constraints", 2, 0.5, "011110"),
    VerificationRow("three constraints", 3, 0.5, "110101"),
)

# schedule that converges fast on the two-constraint row (to a tied optimum)
FAST_SIGMA0 = 0.8
FAST_ETA = 1.14

# schedule inside the region where the loop stalls instead of converging
STALL_SIGMA0 = 1.5
STALL_ETA = 1.2


def bundled_objective() -> Qubo:
    return Qubo.from_terms(BUNDLED_N, np.array(_OBJECTIVE), {}, 0.0)


def bundled_constraints(count: int) -> list[LinearConstraint]:
    if not 0 <= count <= len(_CONSTRAINTS):
        raise ParameterError(
            f"constraint count must be in 0..{len(_CONSTRAINTS)}, got {count}"
        )
    return list(_CONSTRAINTS[:count])


@dataclass(frozen=True)
class RowResult:
    row: VerificationRow
    bitstring: str
    matched: bool
    converged: bool
    iterations: int
    objective: float


def run_row(
    row: VerificationRow,
    sampler=None,
    sigma0: float | None = None,
    eta: float = 1.05,
    delta: float = 0.01,
    max_iter: int = 50,
    monolithic: bool = False,
    block_size: int = 2,
) -> RowResult:
    """Solve one row and compare against its target bitstring.

    The default configuration splits the six variables into three blocks
    of two and solves each block exhaustively. ``sigma0``/``eta`` override
    the row's schedule, which is how the off-row schedule points (fast and
    non-convergent) are probed.
    """
    if sampler is None:
        sampler = make_sampler("exhaustive")
    objective = bundled_objective()
    constraints = bundled_constraints(row.n_constraints)
    s0 = row.sigma0 if sigma0 is None else sigma0
    if monolithic:
        state = PhrState.fresh(
            len(constraints), sigma0=s0, eta=eta, delta=delta, max_iter=max_iter
        )
        outcome = run_qphr_alm(objective, constraints, state, sampler)
        iterations = outcome.iterations
    else:
        part = BlockPartition.uniform(BUNDLED_N, block_size)
        cfg = AdmmConfig(sigma0=s0, eta=eta, delta=delta, max_sweeps=max_iter)
        outcome = run_qphr_admm(objective, constraints, part, cfg, sampler)
        iterations = outcome.sweeps
    return RowResult(
        row=row,
        bitstring=outcome.bitstring,
        matched=outcome.bitstring == row.target,
        converged=outcome.converged,
        iterations=iterations,
        objective=outcome.objective,
    )


def run_all(
    sampler=None,
    sigma0: float | None = None,
    eta: float = 1.05,
    delta: float = 0.01,
    max_iter: int = 50,
    monolithic: bool = False,
) -> list[RowResult]:
    return [
        run_row(
            row,
            sampler=sampler,
            sigma0=sigma0,
            eta=eta,
            delta=delta,
            max_iter=max_iter,
            monolithic=monolithic,
        )
        for row in ROWS
    ]


def row_for_constraints(count: int) -> VerificationRow:
    for row in ROWS:
        if row.n_constraints == count:
            return row
    raise ParameterError(f"no bundled row with {count} constraints")
