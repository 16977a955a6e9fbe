"""Augmented Lagrangian treatment of linear inequalities over binaries.

Constraints ``a . x + b <= 0`` never get slack bits. Each one contributes a
quadratic penalty ``(sigma*g + lambda)^2 / (2 sigma) - lambda^2 / (2 sigma)``
only while its multiplier-shifted value is positive; otherwise the penalty is
a constant on the feasible side and is dropped from the Hamiltonian entirely.
The outer loop alternates sampling the penalized QUBO with multiplier and
penalty-weight updates until the joint residual falls below tolerance.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .qubo import Qubo, as_bits, bits_to_index, bits_to_string, qubo_value


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse inequality ``sum_i coeffs[i] * x_i + bound <= 0``."""

    coeffs: dict[int, float]
    bound: float

    def __post_init__(self) -> None:
        cleaned = {int(i): float(a) for i, a in self.coeffs.items() if a != 0.0}
        if not cleaned:
            raise ParameterError("constraint has no nonzero coefficients")
        for i, a in cleaned.items():
            if i < 0:
                raise ParameterError(f"negative variable index {i}")
            if not math.isfinite(a):
                raise ParameterError(f"coefficient on x_{i} must be finite")
        if not math.isfinite(self.bound):
            raise ParameterError("bound must be finite")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def from_dense(cls, coeffs, bound: float) -> "LinearConstraint":
        return cls({i: float(a) for i, a in enumerate(coeffs) if a != 0.0}, float(bound))

    def value(self, x: np.ndarray) -> float:
        """g(x) = a . x + bound; non-positive means satisfied."""
        return float(sum(a * x[i] for i, a in self.coeffs.items()) + self.bound)


class PenaltyCase(enum.Enum):
    """Whether a constraint enters the Hamiltonian at the current iterate."""

    DROPPED = "dropped"  # multiplier-shifted value <= 0: constant term, omitted
    PENALIZED = "penalized"


@dataclass
class PhrState:
    """Multipliers and penalty schedule shared by one solve."""

    lambdas: np.ndarray
    sigma: float
    eta: float = 1.05
    delta: float = 0.01
    iteration: int = 0
    max_iter: int = 100

    @classmethod
    def fresh(
        cls,
        n_constraints: int,
        sigma0: float = 0.3,
        eta: float = 1.05,
        delta: float = 0.01,
        max_iter: int = 100,
    ) -> "PhrState":
        if sigma0 <= 0.0:
            raise ParameterError(f"initial penalty must be positive, got {sigma0}")
        if eta < 1.0:
            raise ParameterError(f"penalty growth must be >= 1, got {eta}")
        if delta <= 0.0:
            raise ParameterError(f"residual tolerance must be positive, got {delta}")
        if max_iter < 1:
            raise ParameterError(f"max_iter must be >= 1, got {max_iter}")
        return cls(
            lambdas=np.zeros(n_constraints),
            sigma=float(sigma0),
            eta=float(eta),
            delta=float(delta),
            max_iter=int(max_iter),
        )


def classify(c: LinearConstraint, lam: float, sigma: float, x: np.ndarray) -> PenaltyCase:
    """Drop iff lambda + sigma*g(x) <= 0 (the boundary counts as dropped)."""
    if lam + sigma * c.value(x) <= 0.0:
        return PenaltyCase.DROPPED
    return PenaltyCase.PENALIZED


def penalty_qubo(c: LinearConstraint, lam: float, sigma: float, n: int) -> Qubo:
    """QUBO expansion of ``(sigma*g + lam)^2/(2 sigma) - lam^2/(2 sigma)``.

    With g = a.x + b and x_i^2 = x_i: pairwise terms sigma*a_i*a_j, linear
    terms sigma*a_i^2/2 + a_i*(sigma*b + lam), constant sigma*b^2/2 + lam*b.
    """
    items = sorted(c.coeffs.items())
    linear = np.zeros(n)
    quad: dict[tuple[int, int], float] = {}
    shift = sigma * c.bound + lam
    for pos, (i, a) in enumerate(items):
        linear[i] = sigma * a * a / 2.0 + a * shift
        for j, aj in items[pos + 1 :]:
            quad[(i, j)] = sigma * a * aj
    offset = sigma * c.bound**2 / 2.0 + lam * c.bound
    return Qubo.from_terms(n, linear, quad, offset)


def assemble(
    obj: Qubo,
    constraints: list[LinearConstraint],
    state: PhrState,
    x_prev: np.ndarray,
) -> Qubo:
    """Objective plus penalties for constraints active at the previous iterate.

    The objective itself is never rescaled or modified; only penalty terms
    are added on top.
    """
    total = obj
    for c, lam in zip(constraints, state.lambdas):
        if classify(c, lam, state.sigma, x_prev) is PenaltyCase.PENALIZED:
            total = total + penalty_qubo(c, lam, state.sigma, obj.n)
    return total


def update_multiplier(lam: float, sigma: float, g_val: float) -> float:
    """Clamped ascent step: max(lam + sigma * g, 0)."""
    return max(lam + sigma * g_val, 0.0)


def residual(constraints: list[LinearConstraint], state: PhrState, x: np.ndarray) -> float:
    """Euclidean norm of max(-lambda/sigma, g(x)) across constraints.

    Zero iff every constraint is satisfied and complementary; used as the
    stop test against delta.
    """
    total = 0.0
    for c, lam in zip(constraints, state.lambdas):
        total += max(-lam / state.sigma, c.value(x)) ** 2
    return math.sqrt(total)


@dataclass(frozen=True)
class PhrTraceRow:
    iteration: int
    bitstring: str
    residual: float
    sigma: float
    lambdas: tuple[float, ...]


@dataclass
class PhrOutcome:
    bitstring: str
    converged: bool
    iterations: int
    objective: float
    residual: float
    trace: list[PhrTraceRow] = field(default_factory=list)


def run_qphr_alm(
    obj: Qubo,
    constraints: list[LinearConstraint],
    state: PhrState,
    sampler,
) -> PhrOutcome:
    """Alternate sampling and multiplier updates until the residual closes.

    Iteration 1 samples the bare objective (all multipliers start at zero and
    nothing has been classified as active yet). Each subsequent Hamiltonian is
    assembled with the multipliers and penalty weight in force when its
    iterate was drawn; multipliers then take their ascent step and the stop
    test runs against the updated state. Testing before the update would keep
    a stale multiplier in the residual and can lock a two-cycle between a
    feasible point and its violated neighbor.

    A closed residual alone is not enough to stop: the assembled penalty is
    only a local model (classification is frozen at the current iterate), so
    the residual can close at a point the refreshed model immediately
    abandons. Convergence therefore also requires the iterate to still
    minimize the next Hamiltonian; the sample drawn for that check is not
    wasted, it becomes the next iterate whenever it refutes the stop. On
    hitting the iteration cap the best feasible iterate seen is returned if
    one exists, else the last iterate, with converged=False either way.
    """
    hamiltonian = obj
    trace: list[PhrTraceRow] = []
    best_feasible: tuple[tuple[float, int], np.ndarray] | None = None
    x = np.zeros(obj.n, dtype=np.uint8)
    x_pending: np.ndarray | None = None
    for _ in range(state.max_iter):
        state.iteration += 1
        if x_pending is None:
            result = sampler(hamiltonian)
            x = as_bits(result.bitstring, obj.n)
        else:
            x, x_pending = x_pending, None
        g_vals = [c.value(x) for c in constraints]
        if all(g <= 0.0 for g in g_vals):
            key = (qubo_value(obj, x), bits_to_index(x))
            if best_feasible is None or key < best_feasible[0]:
                best_feasible = (key, x.copy())
        hamiltonian = assemble(obj, constraints, state, x)
        state.lambdas = np.array(
            [
                update_multiplier(lam, state.sigma, g)
                for lam, g in zip(state.lambdas, g_vals)
            ]
        )
        state.sigma *= state.eta
        r = residual(constraints, state, x)
        trace.append(
            PhrTraceRow(
                iteration=state.iteration,
                bitstring=bits_to_string(x),
                residual=r,
                sigma=state.sigma,
                lambdas=tuple(state.lambdas),
            )
        )
        if r <= state.delta:
            confirm = sampler(hamiltonian)
            if qubo_value(hamiltonian, x) <= confirm.energy + 1e-9:
                return PhrOutcome(
                    bitstring=bits_to_string(x),
                    converged=True,
                    iterations=state.iteration,
                    objective=qubo_value(obj, x),
                    residual=r,
                    trace=trace,
                )
            x_pending = as_bits(confirm.bitstring, obj.n)
    final = best_feasible[1] if best_feasible is not None else x
    return PhrOutcome(
        bitstring=bits_to_string(final),
        converged=False,
        iterations=state.iteration,
        objective=qubo_value(obj, final),
        residual=residual(constraints, state, final),
        trace=trace,
    )
