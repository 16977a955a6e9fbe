"""Per-scenario economic dispatch as a convex QP with recoverable duals.

Variables are stacked as [generation (N*T), shed (T), commitment copies
(N*T)]. The commitment copies are pinned to the master's 0/1 schedule by
equality rows; their multipliers are exactly the sensitivities the Benders
cut needs, so the solver must deliver duals, not just a primal point. The
solve is a standard operator-splitting QP iteration (splitting parameter
per row, over-relaxation, periodic penalty rebalancing) against
``l <= A z <= u``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import NumericalError, ParameterError
from .model import SucInstance
from .scenarios import Scenario

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 50_000

_SIGMA_REG = 1e-6
_ALPHA = 1.6
_RHO_BASE = 0.1
_RHO_EQ_BOOST = 1e3
_RHO_PERIOD = 100  # rebalance splitting weights every this many iterations


@dataclass
class DispatchProblem:
    """Assembled QP for one scenario at a fixed commitment."""

    instance: SucInstance
    scenario: Scenario
    u: np.ndarray  # (N, T) commitment targets; binary unless relaxed
    quad: np.ndarray  # diagonal of the quadratic cost term
    lin: np.ndarray
    a_mat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    copy_rows: np.ndarray  # (N, T) row index of each commitment-copy equality


@dataclass
class DispatchSolution:
    p_gen: np.ndarray  # (N, T) MW
    p_shed: np.ndarray  # (T,) MW
    objective: float  # probability-weighted cost
    duals: np.ndarray  # (N, T) sensitivity of objective to each u cell
    status: str
    iterations: int
    primal_residual: float
    dual_residual: float


def build_subproblem(
    inst: SucInstance,
    scenario: Scenario,
    u,
    relaxed: bool = False,
) -> DispatchProblem:
    """Assemble the dispatch QP at commitment ``u``.

    ``relaxed`` admits arbitrary finite commitment targets, which dual
    finite-difference probes need; the default insists on binary entries.
    Shedding keeps every instance feasible as long as net load is
    non-negative in every period.
    """
    n_units, horizon = inst.n_units, inst.horizon
    u = np.asarray(u, dtype=float)
    if u.shape != (n_units, horizon):
        raise ParameterError(f"commitment shape {u.shape}, expected {(n_units, horizon)}")
    if relaxed:
        if not np.isfinite(u).all():
            raise ParameterError("relaxed commitment targets must be finite")
    elif not np.isin(u, (0.0, 1.0)).all():
        raise ParameterError("commitment targets must be binary (use relaxed=True otherwise)")
    if len(scenario.wind) != horizon:
        raise ParameterError("scenario horizon differs from instance horizon")
    net_load = np.asarray(scenario.load) - np.asarray(scenario.wind)
    if (net_load < 0.0).any():
        raise ParameterError(
            "wind exceeds load in some period; the balance equality has no "
            "spill variable, so such scenarios are not representable"
        )

    nt = n_units * horizon
    n_var = 2 * nt + horizon
    ipgen = lambda g, t: g * horizon + t
    ished = lambda t: nt + t
    iu = lambda g, t: nt + horizon + g * horizon + t

    pi = scenario.probability
    quad = np.zeros(n_var)
    lin = np.zeros(n_var)
    for g, gen in enumerate(inst.generators):
        for t in range(horizon):
            quad[ipgen(g, t)] = 2.0 * pi * gen.c_quad
            lin[ipgen(g, t)] = pi * gen.c_prim
    lin[nt : nt + horizon] = pi * inst.shed_cost

    n_rows = 2 * nt + n_units * max(horizon - 1, 0) + horizon + nt + horizon
    a_mat = np.zeros((n_rows, n_var))
    lower = np.zeros(n_rows)
    upper = np.zeros(n_rows)
    row = 0
    for g, gen in enumerate(inst.generators):  # output below committed capacity
        for t in range(horizon):
            a_mat[row, ipgen(g, t)] = 1.0
            a_mat[row, iu(g, t)] = -gen.p_max
            lower[row], upper[row] = -np.inf, 0.0
            row += 1
    for g, gen in enumerate(inst.generators):  # output above committed minimum
        for t in range(horizon):
            a_mat[row, ipgen(g, t)] = 1.0
            a_mat[row, iu(g, t)] = -gen.p_min
            lower[row], upper[row] = 0.0, np.inf
            row += 1
    for g, gen in enumerate(inst.generators):  # ramping between periods
        for t in range(horizon - 1):
            a_mat[row, ipgen(g, t + 1)] = 1.0
            a_mat[row, ipgen(g, t)] = -1.0
            lower[row], upper[row] = gen.ramp_down, gen.ramp_up
            row += 1
    for t in range(horizon):  # power balance with shed slack
        for g in range(n_units):
            a_mat[row, ipgen(g, t)] = 1.0
        a_mat[row, ished(t)] = 1.0
        lower[row] = upper[row] = net_load[t]
        row += 1
    copy_rows = np.zeros((n_units, horizon), dtype=int)
    for g in range(n_units):  # pin commitment copies; duals live here
        for t in range(horizon):
            a_mat[row, iu(g, t)] = 1.0
            lower[row] = upper[row] = u[g, t]
            copy_rows[g, t] = row
            row += 1
    for t in range(horizon):  # shed is one-sided
        a_mat[row, ished(t)] = 1.0
        lower[row], upper[row] = 0.0, np.inf
        row += 1
    assert row == n_rows

    return DispatchProblem(
        instance=inst,
        scenario=scenario,
        u=u,
        quad=quad,
        lin=lin,
        a_mat=a_mat,
        lower=lower,
        upper=upper,
        copy_rows=copy_rows,
    )


def solve_dispatch(
    prob: DispatchProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> DispatchSolution:
    """Splitting iteration to KKT optimality within ``tol``.

    Returns primal dispatch, shed, the probability-weighted objective and
    the duals of the commitment-copy rows, oriented so that
    ``duals[g, t] = d objective / d u[g, t]``. Raises if the residuals do
    not close within ``max_iter``.
    """
    a_mat, lower_b, upper_b = prob.a_mat, prob.lower, prob.upper
    n_var = a_mat.shape[1]
    n_rows = a_mat.shape[0]

    rho = np.full(n_rows, _RHO_BASE)
    rho[lower_b == upper_b] *= _RHO_EQ_BOOST

    def factor(rho_vec):
        m = np.diag(prob.quad + _SIGMA_REG) + (a_mat.T * rho_vec) @ a_mat
        return cho_factor(m)

    chol = factor(rho)
    x = np.zeros(n_var)
    z = np.zeros(n_rows)
    y = np.zeros(n_rows)
    prim_res = dual_res = np.inf
    for it in range(1, max_iter + 1):
        rhs = _SIGMA_REG * x - prob.lin + a_mat.T @ (rho * z - y)
        x_hat = cho_solve(chol, rhs)
        ax_hat = a_mat @ x_hat
        x = _ALPHA * x_hat + (1.0 - _ALPHA) * x
        ax_relaxed = _ALPHA * ax_hat + (1.0 - _ALPHA) * z
        z_prev = z
        z = np.clip(ax_relaxed + y / rho, lower_b, upper_b)
        y = y + rho * (ax_relaxed - z)

        if it % 25 == 0 or it == max_iter:
            ax = a_mat @ x
            prim_vec = ax - z
            dual_vec = prob.quad * x + prob.lin + a_mat.T @ y
            prim_res = float(np.abs(prim_vec).max(initial=0.0))
            dual_res = float(np.abs(dual_vec).max(initial=0.0))
            prim_lim = tol + tol * max(
                np.abs(ax).max(initial=0.0), np.abs(z).max(initial=0.0)
            )
            dual_lim = tol + tol * max(
                np.abs(prob.quad * x).max(initial=0.0),
                np.abs(prob.lin).max(initial=0.0),
                np.abs(a_mat.T @ y).max(initial=0.0),
            )
            if prim_res <= prim_lim and dual_res <= dual_lim:
                break
            if it % _RHO_PERIOD == 0:
                scale = np.sqrt(
                    (prim_res / max(prim_lim, 1e-16))
                    / max(dual_res / max(dual_lim, 1e-16), 1e-16)
                )
                scale = float(np.clip(scale, 1e-4, 1e4))
                if scale > 5.0 or scale < 0.2:
                    rho = np.clip(rho * scale, 1e-6, 1e6)
                    chol = factor(rho)
    else:
        raise NumericalError(
            f"dispatch QP did not reach tolerance {tol} in {max_iter} iterations "
            f"(primal {prim_res:.2e}, dual {dual_res:.2e})"
        )

    n_units, horizon = prob.instance.n_units, prob.instance.horizon
    nt = n_units * horizon
    p_gen = x[:nt].reshape(n_units, horizon)
    p_shed = x[nt : nt + horizon]
    objective = float(0.5 * x @ (prob.quad * x) + prob.lin @ x)
    # value function sensitivity to the copy row's rhs is -y on that row
    duals = -y[prob.copy_rows]
    return DispatchSolution(
        p_gen=p_gen,
        p_shed=p_shed,
        objective=objective,
        duals=duals,
        status="optimal",
        iterations=it,
        primal_residual=prim_res,
        dual_residual=dual_res,
    )


def aggregate_ub(solutions, commitment_cost: float) -> float:
    """Total cost of one Benders iterate: dispatch costs plus fixed cost.

    Scenario objectives are already probability-weighted, so they sum
    directly. Every solution must be optimal; anything else would silently
    corrupt the upper bound.
    """
    for h, sol in enumerate(solutions):
        if sol.status != "optimal":
            raise NumericalError(f"scenario {h} dispatch is {sol.status}, not optimal")
    return float(sum(sol.objective for sol in solutions) + commitment_cost)
