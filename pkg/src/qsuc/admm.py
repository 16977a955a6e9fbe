"""Block-coordinate minimization of the penalized master QUBO.

The variable set is split into disjoint blocks; each sweep minimizes one
block at a time with every other variable frozen at its current value, so a
sampler only ever sees a QUBO of the largest block size. Multipliers and the
penalty weight follow the same schedule as the monolithic loop but update
once per sweep, after all blocks have moved.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .phr import LinearConstraint, PhrState, assemble, residual, update_multiplier
from .qubo import Qubo, as_bits, bits_to_index, bits_to_string, qubo_value


@dataclass(frozen=True)
class BlockPartition:
    """Ordered disjoint index blocks covering [0, n)."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        blocks = tuple(tuple(int(i) for i in b) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        seen: set[int] = set()
        for b in blocks:
            if not b:
                raise ParameterError("empty block")
            if seen.intersection(b):
                raise ParameterError("blocks must be disjoint")
            seen.update(b)
        if not seen or seen != set(range(max(seen) + 1)):
            raise ParameterError("blocks must cover 0..n-1 without gaps")

    @property
    def n(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def max_block(self) -> int:
        return max(len(b) for b in self.blocks)

    @classmethod
    def uniform(cls, n: int, size: int) -> "BlockPartition":
        if n < 1 or size < 1:
            raise ParameterError("need n >= 1 and block size >= 1")
        return cls(tuple(tuple(range(s, min(s + size, n))) for s in range(0, n, size)))


def partition_by_unit(n_units: int, horizon: int, levels: int) -> BlockPartition:
    """One block per generator schedule, then one for the encoded bound.

    Sizes are [horizon] * n_units + [levels]; the largest sampler call is
    therefore max(horizon, levels) variables.
    """
    if n_units < 1 or horizon < 1 or levels < 1:
        raise ParameterError("need n_units, horizon and levels all >= 1")
    blocks = [tuple(range(g * horizon, (g + 1) * horizon)) for g in range(n_units)]
    base = n_units * horizon
    blocks.append(tuple(range(base, base + levels)))
    return BlockPartition(tuple(blocks))


def restrict_to_block(q: Qubo, part: BlockPartition, m: int, x_full: np.ndarray) -> Qubo:
    """Freeze everything outside block m; exact on the block's assignments.

    Cross terms with frozen variables fold into linear coefficients and
    frozen-frozen terms into the offset, so for any block assignment y the
    restricted value equals the full value at the spliced assignment.
    """
    block = part.blocks[m]
    local = {g: k for k, g in enumerate(block)}
    size = len(block)
    linear = np.zeros(size)
    quad: dict[tuple[int, int], float] = {}
    offset = q.offset
    for i, c in enumerate(q.linear):
        if i in local:
            linear[local[i]] += c
        else:
            offset += c * x_full[i]
    for (i, j), v in q.quadratic.items():
        ii, jj = local.get(i), local.get(j)
        if ii is not None and jj is not None:
            quad[(min(ii, jj), max(ii, jj))] = v
        elif ii is not None:
            linear[ii] += v * x_full[j]
        elif jj is not None:
            linear[jj] += v * x_full[i]
        else:
            offset += v * x_full[i] * x_full[j]
    return Qubo.from_terms(size, linear, quad, float(offset))


@dataclass(frozen=True)
class AdmmConfig:
    sigma0: float = 0.3
    eta: float = 1.05
    delta: float = 0.01
    max_sweeps: int = 100

    def __post_init__(self) -> None:
        if self.sigma0 <= 0.0:
            raise ParameterError(f"initial penalty must be positive, got {self.sigma0}")
        if self.eta < 1.0:
            raise ParameterError(f"penalty growth must be >= 1, got {self.eta}")
        if self.delta <= 0.0:
            raise ParameterError(f"residual tolerance must be positive, got {self.delta}")
        if self.max_sweeps < 1:
            raise ParameterError(f"max_sweeps must be >= 1, got {self.max_sweeps}")


@dataclass(frozen=True)
class AdmmTraceRow:
    sweep: int
    block: int
    bitstring: str
    residual: float
    sigma: float


@dataclass
class AdmmOutcome:
    bitstring: str
    converged: bool
    sweeps: int
    objective: float
    residual: float
    trace: list[AdmmTraceRow] = field(default_factory=list)


def sweep(
    obj: Qubo,
    constraints: list[LinearConstraint],
    part: BlockPartition,
    state: PhrState,
    x: np.ndarray,
    sampler,
    trace: list[AdmmTraceRow] | None = None,
    sweep_no: int = 0,
) -> np.ndarray:
    """One pass over all blocks, each seeing the latest values of the others.

    The penalty classification is refreshed against the current mixed iterate
    before every block solve, so a constraint activated by an earlier block's
    move is penalized within the same sweep.
    """
    x = x.copy()
    for m, block in enumerate(part.blocks):
        hamiltonian = assemble(obj, constraints, state, x)
        sub = restrict_to_block(hamiltonian, part, m, x)
        result = sampler(sub)
        y = as_bits(result.bitstring, len(block))
        for k, g in enumerate(block):
            x[g] = y[k]
        if trace is not None:
            trace.append(
                AdmmTraceRow(
                    sweep=sweep_no,
                    block=m,
                    bitstring=bits_to_string(x),
                    residual=residual(constraints, state, x),
                    sigma=state.sigma,
                )
            )
    return x


def run_qphr_admm(
    obj: Qubo,
    constraints: list[LinearConstraint],
    part: BlockPartition,
    cfg: AdmmConfig,
    sampler,
) -> AdmmOutcome:
    """Sweep until the residual closes or the sweep cap is hit.

    Starts from the all-zeros assignment. Multipliers and penalty weight
    update once per sweep, after all blocks; the stop test then runs against
    the updated state on the full iterate the sweep produced (checking before
    the update can lock a two-cycle, as in the monolithic loop). On the cap
    the best feasible iterate seen is returned if any exists, else the last
    one, flagged unconverged.
    """
    if part.n != obj.n:
        raise ParameterError(f"partition covers {part.n} variables, objective has {obj.n}")
    state = PhrState.fresh(
        len(constraints), cfg.sigma0, cfg.eta, cfg.delta, cfg.max_sweeps
    )
    trace: list[AdmmTraceRow] = []
    x = np.zeros(obj.n, dtype=np.uint8)
    best_feasible: tuple[tuple[float, int], np.ndarray] | None = None
    for sweep_no in range(1, cfg.max_sweeps + 1):
        state.iteration = sweep_no
        x = sweep(obj, constraints, part, state, x, sampler, trace, sweep_no)
        g_vals = [c.value(x) for c in constraints]
        if all(g <= 0.0 for g in g_vals):
            key = (qubo_value(obj, x), bits_to_index(x))
            if best_feasible is None or key < best_feasible[0]:
                best_feasible = (key, x.copy())
        state.lambdas = np.array(
            [
                update_multiplier(lam, state.sigma, g)
                for lam, g in zip(state.lambdas, g_vals)
            ]
        )
        state.sigma *= state.eta
        r = residual(constraints, state, x)
        if r <= state.delta:
            return AdmmOutcome(
                bitstring=bits_to_string(x),
                converged=True,
                sweeps=sweep_no,
                objective=qubo_value(obj, x),
                residual=r,
                trace=trace,
            )
    final = best_feasible[1] if best_feasible is not None else x
    return AdmmOutcome(
        bitstring=bits_to_string(final),
        converged=False,
        sweeps=cfg.max_sweeps,
        objective=qubo_value(obj, final),
        residual=residual(constraints, state, final),
        trace=trace,
    )
