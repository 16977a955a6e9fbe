"""Hybrid decomposition loop tying the QUBO master to dispatch subproblems.

One iteration: solve the cut-constrained master for a commitment schedule
and an encoded recourse bound, dispatch every scenario at that schedule,
aggregate the probability-weighted costs into an upper bound, and convert
the dispatch duals into a new supporting-plane constraint on the bound
variable. The loop stops when the relative UB/LB gap closes or the
iteration budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .admm import AdmmConfig, BlockPartition, partition_by_unit, run_qphr_admm
from .errors import EncodingRangeError, NumericalError, ParameterError
from .model import SucInstance, commitment_cost, num_commitment_vars, validate_instance
from .phr import LinearConstraint, PhrState, run_qphr_alm
from .qubo import BinaryEncoding, Qubo, as_bits, encoding_terms
from .scenarios import ScenarioSet, validate_scenario_set
from .subqp import aggregate_ub, build_subproblem, solve_dispatch

DEFAULT_GAP_TOL = 1e-3
DEFAULT_MAX_K = 20


@dataclass(frozen=True)
class BendersCut:
    """Supporting plane of the recourse cost: bound >= constant + theta . u."""

    theta: np.ndarray  # (N, T) aggregated dispatch sensitivities
    constant: float
    source_iter: int

    def __post_init__(self):
        if not (np.isfinite(self.theta).all() and np.isfinite(self.constant)):
            raise ParameterError("cut coefficients must be finite")

    def as_constraint(self, enc: BinaryEncoding) -> LinearConstraint:
        """Express the cut over master bits as a <= 0 inequality.

        Commitment bits carry theta, bound bits carry the negated encoding
        weights, and the constant lands in the bound term.
        """
        coeffs: dict[int, float] = {}
        flat = self.theta.ravel()
        for i, v in enumerate(flat):
            if v != 0.0:
                coeffs[i] = float(v)
        for j, weight in enumerate(encoding_terms(enc)):
            coeffs[enc.base_index + j] = -float(weight)
        return LinearConstraint(coeffs=coeffs, bound=float(self.constant))


@dataclass
class BendersRow:
    k: int
    bitstring: str
    u: np.ndarray
    lb: float
    ub_candidate: float
    best_ub: float
    gap: float
    master_converged: bool
    cut_constant: float | None


@dataclass
class BendersTrace:
    rows: list[BendersRow] = field(default_factory=list)
    cuts: list[BendersCut] = field(default_factory=list)
    u_best: np.ndarray | None = None
    best_ub: float = float("inf")
    lb: float = 0.0
    gap: float = float("inf")
    converged: bool = False
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "iterations": self.iterations,
            "best_ub": self.best_ub,
            "lb": self.lb,
            "gap": self.gap,
            "u_best": None if self.u_best is None else self.u_best.astype(int).tolist(),
            "history": [
                {
                    "k": r.k,
                    "bitstring": r.bitstring,
                    "lb": r.lb,
                    "ub_candidate": r.ub_candidate,
                    "best_ub": r.best_ub,
                    "gap": r.gap,
                    "master_converged": r.master_converged,
                }
                for r in self.rows
            ],
            "cuts": [
                {
                    "source_iter": c.source_iter,
                    "constant": c.constant,
                    "theta": c.theta.tolist(),
                }
                for c in self.cuts
            ],
        }


def build_cut(solutions, u_l, source_iter: int = 0) -> BendersCut:
    """Aggregate per-scenario duals into one cut anchored at ``u_l``.

    Solutions must all be optimal; their objectives are probability-weighted
    already, so plain sums give the recourse value and slope.
    """
    u_l = np.asarray(u_l, dtype=float)
    for h, sol in enumerate(solutions):
        if sol.status != "optimal":
            raise NumericalError(f"scenario {h} solution is {sol.status}, not optimal")
    theta = np.sum([sol.duals for sol in solutions], axis=0)
    value = float(sum(sol.objective for sol in solutions))
    constant = value - float(theta.ravel() @ u_l.ravel())
    return BendersCut(theta=theta, constant=constant, source_iter=source_iter)


def build_master(
    inst: SucInstance, enc: BinaryEncoding, cuts
) -> tuple[Qubo, list[LinearConstraint]]:
    """Master objective and constraint set over commitment plus bound bits.

    The objective is linear: fixed commitment costs on the schedule bits and
    the encoding weights on the bound bits. Raises when a cut's constant
    exceeds what the encoding can represent, since clipping would silently
    invalidate the lower bound.
    """
    nt = num_commitment_vars(inst)
    if enc.base_index != nt:
        raise ParameterError(f"encoding base index {enc.base_index}, expected {nt}")
    n = nt + enc.levels
    linear = np.zeros(n)
    for g, gen in enumerate(inst.generators):
        linear[g * inst.horizon : (g + 1) * inst.horizon] = gen.c_cons
    weights = encoding_terms(enc)
    linear[enc.base_index : enc.base_index + enc.levels] = weights
    objective = Qubo(n=n, linear=linear, quadratic={}, offset=0.0)

    constraints = []
    for cut in cuts:
        if cut.constant > enc.max_value:
            raise EncodingRangeError(
                f"cut constant {cut.constant:.6g} exceeds encodable bound "
                f"{enc.max_value:.6g}; increase the encoding's chi or levels"
            )
        constraints.append(cut.as_constraint(enc))
    if inst.lb_floor > 0.0:
        coeffs = {
            enc.base_index + j: -float(w) for j, w in enumerate(weights)
        }
        constraints.append(LinearConstraint(coeffs=coeffs, bound=float(inst.lb_floor)))
    return objective, constraints


def required_bound(cuts, u, lb_floor: float = 0.0) -> float:
    """Smallest bound value satisfying every cut at commitment ``u``."""
    u = np.asarray(u, dtype=float).ravel()
    req = max(lb_floor, 0.0)
    for cut in cuts:
        req = max(req, cut.constant + float(cut.theta.ravel() @ u))
    return req


def tighten_bound_bits(enc: BinaryEncoding, cuts, u, lb_floor: float = 0.0) -> np.ndarray:
    """Re-encode the bound at the least representable value covering the cuts.

    Heuristic master solves can park the bound bits far above the binding
    cut; since the bound's objective weight is positive, lowering it to the
    requirement is always an improvement and restores the master value's
    meaning as a lower bound on the commitment's true cost.
    """
    req = required_bound(cuts, u, lb_floor)
    quanta = min(int(np.ceil(req / enc.chi - 1e-9)), 2**enc.levels - 1)
    bits = np.zeros(enc.levels, dtype=np.uint8)
    for j in range(enc.levels):  # little-endian: bit j carries chi * 2**j
        bits[j] = (quanta >> j) & 1
    return bits


def solve_master(
    inst: SucInstance,
    enc: BinaryEncoding,
    cuts,
    sampler,
    monolithic: bool = False,
    partition: BlockPartition | None = None,
    sigma0: float | None = None,
    sigma_ladder: tuple[float, ...] = (1.0, 0.25, 4.0),
    eta: float = 1.05,
    delta: float = 0.01,
    max_iter: int = 100,
) -> tuple[np.ndarray, float, bool]:
    """Best commitment the penalty heuristic can find for the current cuts.

    Returns ``(master bits, master value, converged)``. Three refinements
    keep the heuristic honest on cut-constrained masters, where the raw
    penalty loop can halt at poor feasible points:

    * ``sigma0=None`` scales the initial penalty weight to ``1/|g(0)|_inf``.
      The bound variable carries objective weight 1, so the multipliers of
      the binding cuts sum to exactly 1 at any continuous optimum; the
      first ascent step then lands at the right magnitude instead of
      overshooting and thrashing.
    * The loop runs once per ladder entry (multiples of the base weight);
      every iterate any run visits becomes a candidate.
    * Each candidate commitment is scored with its bound bits re-encoded at
      the binding-cut requirement, and the best scored candidate wins. The
      bound enters every cut the same way, so this is exact elimination,
      not an approximation.
    """
    nt = num_commitment_vars(inst)
    objective, constraints = build_master(inst, enc, cuts)
    if partition is None:
        partition = partition_by_unit(inst.n_units, inst.horizon, enc.levels)
    if sigma0 is None:
        zeros = np.zeros(objective.n, dtype=np.uint8)
        g0 = max((abs(c.value(zeros)) for c in constraints), default=1.0)
        sigma0 = 1.0 / max(g0, 1.0)

    seen: set[str] = set()
    converged = False
    for factor in sigma_ladder:
        s = sigma0 * factor
        if monolithic:
            state = PhrState.fresh(
                len(constraints), sigma0=s, eta=eta, delta=delta, max_iter=max_iter
            )
            outcome = run_qphr_alm(objective, constraints, state, sampler)
        else:
            cfg = AdmmConfig(sigma0=s, eta=eta, delta=delta, max_sweeps=max_iter)
            outcome = run_qphr_admm(objective, constraints, partition, cfg, sampler)
        converged = converged or outcome.converged
        seen.add(outcome.bitstring)
        seen.update(row.bitstring for row in outcome.trace)

    best: tuple[float, str, np.ndarray] | None = None
    for bs in sorted(seen):
        bits = as_bits(bs, objective.n)
        u = bits[:nt].reshape(inst.n_units, inst.horizon).astype(float)
        bits[nt:] = tighten_bound_bits(enc, cuts, u, inst.lb_floor)
        value = float(objective.linear @ bits)
        key = "".join(str(int(v)) for v in bits)
        if best is None or (value, key) < (best[0], best[1]):
            best = (value, key, bits)
    assert best is not None
    return best[2], best[0], converged


def run_benders(
    inst: SucInstance,
    scenarios: ScenarioSet,
    enc: BinaryEncoding,
    sampler,
    gap_tol: float = DEFAULT_GAP_TOL,
    max_k: int = DEFAULT_MAX_K,
    monolithic: bool = False,
    admm_cfg: AdmmConfig | None = None,
    partition: BlockPartition | None = None,
    sigma0: float | None = None,
    sigma_ladder: tuple[float, ...] = (1.0, 0.25, 4.0),
    eta: float = 1.05,
    delta: float = 0.01,
    master_max_iter: int = 100,
    dispatch_tol: float = 1e-6,
) -> BendersTrace:
    """Run the decomposition until the relative gap closes.

    The master is solved by the block-splitting penalty loop over a
    per-unit partition (or monolithically on request). ``admm_cfg``, when
    given, pins the penalty schedule; otherwise ``sigma0=None`` scales it
    per master. Scenario dispatches fan out independently and merge in
    scenario order. Non-convergence at ``max_k`` is flagged on the trace,
    not raised.
    """
    if admm_cfg is not None:
        sigma0 = admm_cfg.sigma0
        eta = admm_cfg.eta
        delta = admm_cfg.delta
        master_max_iter = admm_cfg.max_sweeps
    errors = []
    errors += validate_instance(inst)
    errors += validate_scenario_set(scenarios)
    if scenarios.horizon != inst.horizon:
        errors.append("scenario horizon differs from instance horizon")
    if errors:
        raise ParameterError("; ".join(errors))
    if gap_tol <= 0.0 or max_k < 1:
        raise ParameterError("gap_tol must be positive and max_k at least 1")

    nt = num_commitment_vars(inst)
    trace = BendersTrace()
    for k in range(max_k + 1):
        bits, lb, master_converged = solve_master(
            inst,
            enc,
            trace.cuts,
            sampler,
            monolithic=monolithic,
            partition=partition,
            sigma0=sigma0,
            sigma_ladder=sigma_ladder,
            eta=eta,
            delta=delta,
            max_iter=master_max_iter,
        )
        u_l = bits[:nt].reshape(inst.n_units, inst.horizon).astype(float)
        trace.lb = lb

        solutions = []
        for scenario in scenarios.scenarios:  # ordered merge keeps runs reproducible
            prob = build_subproblem(inst, scenario, u_l)
            solutions.append(solve_dispatch(prob, tol=dispatch_tol))
        ub_candidate = aggregate_ub(solutions, commitment_cost(inst, u_l))
        if ub_candidate < trace.best_ub:
            trace.best_ub = ub_candidate
            trace.u_best = u_l.copy()

        gap = (trace.best_ub - lb) / max(1.0, abs(trace.best_ub))
        trace.gap = gap
        trace.iterations = k

        cut_constant = None
        if gap > gap_tol and k < max_k:
            cut = build_cut(solutions, u_l, source_iter=k)
            trace.cuts.append(cut)
            cut_constant = cut.constant

        trace.rows.append(
            BendersRow(
                k=k,
                bitstring="".join(str(int(v)) for v in bits),
                u=u_l,
                lb=lb,
                ub_candidate=ub_candidate,
                best_ub=trace.best_ub,
                gap=gap,
                master_converged=master_converged,
                cut_constant=cut_constant,
            )
        )
        if gap <= gap_tol:
            trace.converged = True
            break
    return trace
