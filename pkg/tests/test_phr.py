"""Slack-free augmented Lagrangian loop and its penalty algebra."""

import itertools

import numpy as np
import pytest

from qsuc import PhrState, Qubo, make_sampler, qubo_value, run_qphr_alm
from qsuc.errors import ParameterError
from qsuc.phr import (
    LinearConstraint,
    PenaltyCase,
    assemble,
    classify,
    penalty_qubo,
    residual,
    update_multiplier,
)

EX = make_sampler("exhaustive")


def test_linear_constraint_value_and_cleanup():
    c = LinearConstraint({0: 2.0, 2: -1.0, 3: 0.0}, bound=-1.5)
    assert 3 not in c.coeffs  # zero coefficients are dropped on construction
    assert c.value(np.array([1, 0, 1, 1])) == 2.0 - 1.0 - 1.5


def test_linear_constraint_validation():
    with pytest.raises(ParameterError):
        LinearConstraint({}, bound=0.0)
    with pytest.raises(ParameterError):
        LinearConstraint({0: 0.0}, bound=1.0)
    with pytest.raises(ParameterError):
        LinearConstraint({-1: 2.0}, bound=0.0)
    with pytest.raises(ParameterError):
        LinearConstraint({0: float("inf")}, bound=0.0)


def test_classify_follows_the_multiplier_shift():
    c = LinearConstraint({0: 1.0}, bound=-2.0)
    x = np.array([1, 0])  # g = -1
    assert classify(c, lam=0.0, sigma=1.0, x=x) is PenaltyCase.DROPPED
    assert classify(c, lam=0.9, sigma=1.0, x=x) is PenaltyCase.DROPPED
    assert classify(c, lam=1.5, sigma=1.0, x=x) is PenaltyCase.PENALIZED


def test_penalty_qubo_expands_the_shifted_square():
    # the QUBO must equal (sigma*g + lam)^2/(2 sigma) - lam^2/(2 sigma)
    # at every assignment, not just near the linearization point
    rng = np.random.default_rng(np.random.SeedSequence([811]))
    for _ in range(10):
        n = int(rng.integers(2, 7))
        coeffs = {i: float(rng.uniform(-4.0, 4.0)) for i in range(n) if rng.random() < 0.8}
        if not coeffs:
            coeffs = {0: 1.0}
        c = LinearConstraint(coeffs, bound=float(rng.uniform(-3.0, 3.0)))
        lam = float(rng.uniform(0.0, 2.0))
        sigma = float(rng.uniform(0.2, 3.0))
        q = penalty_qubo(c, lam, sigma, n)
        for bits in itertools.product((0, 1), repeat=n):
            x = np.array(bits)
            g = c.value(x)
            expected = (sigma * g + lam) ** 2 / (2.0 * sigma) - lam**2 / (2.0 * sigma)
            assert qubo_value(q, x) == pytest.approx(expected, abs=1e-9)


def test_assemble_adds_only_penalized_constraints():
    obj = Qubo.from_terms(2, [1.0, -1.0])
    active = LinearConstraint({0: 1.0, 1: 1.0}, bound=-1.0)  # g(11) = 1
    inactive = LinearConstraint({0: 1.0}, bound=-5.0)
    state = PhrState.fresh(2, sigma0=1.0)
    h = assemble(obj, [active, inactive], state, np.array([1, 1]))
    assert h.n == 2
    # the inactive constraint contributes nothing at any assignment
    expected_extra = penalty_qubo(active, 0.0, 1.0, 2)
    for bits in itertools.product((0, 1), repeat=2):
        x = np.array(bits)
        assert qubo_value(h, x) == pytest.approx(
            qubo_value(obj, x) + qubo_value(expected_extra, x), abs=1e-12
        )


def test_update_multiplier_clamps_at_zero():
    assert update_multiplier(1.0, 2.0, 0.5) == 2.0
    assert update_multiplier(1.0, 2.0, -1.0) == 0.0
    assert update_multiplier(0.0, 1.0, -3.0) == 0.0


def test_residual_zero_iff_feasible_and_complementary():
    c1 = LinearConstraint({0: 1.0}, bound=-1.0)
    c2 = LinearConstraint({1: 1.0}, bound=-1.0)
    state = PhrState.fresh(2, sigma0=1.0)
    x = np.array([0, 0])  # both satisfied with slack, multipliers zero
    assert residual([c1, c2], state, x) == 0.0
    state.lambdas = np.array([0.5, 0.0])  # slack with a live multiplier
    assert residual([c1, c2], state, x) == pytest.approx(0.5)
    state.lambdas = np.zeros(2)
    assert residual([c1, c2], state, np.array([1, 1])) == 0.0  # tight is fine


def test_state_validation():
    for kwargs in (
        dict(sigma0=0.0),
        dict(eta=0.9),
        dict(delta=0.0),
        dict(max_iter=0),
    ):
        with pytest.raises(ParameterError):
            PhrState.fresh(1, **kwargs)


def test_unconstrained_solve_converges_immediately():
    obj = Qubo.from_terms(3, [2.0, -3.0, 1.0])
    out = run_qphr_alm(obj, [], PhrState.fresh(0), EX)
    assert out.converged and out.iterations == 1
    assert out.bitstring == "010"
    assert out.objective == -3.0


def test_constrained_solve_lands_on_the_planted_optimum():
    # minimize -x0 - 2 x1 - 4 x2 subject to x0 + x1 + x2 <= 2
    obj = Qubo.from_terms(3, [-1.0, -2.0, -4.0])
    cons = [LinearConstraint({0: 1.0, 1: 1.0, 2: 1.0}, bound=-2.0)]
    out = run_qphr_alm(obj, cons, PhrState.fresh(1, sigma0=0.3), EX)
    assert out.converged
    assert out.bitstring == "011"
    assert out.objective == -6.0


def test_infeasible_problem_is_flagged_not_crashed():
    obj = Qubo.from_terms(2, [1.0, 1.0])
    cons = [LinearConstraint({0: 1.0, 1: 1.0}, bound=1.0)]  # g >= 1 always
    out = run_qphr_alm(obj, cons, PhrState.fresh(1, max_iter=30), EX)
    assert not out.converged
    assert out.iterations == 30
    assert out.residual > 0.0


def test_trace_records_geometric_sigma_growth():
    obj = Qubo.from_terms(2, [-1.0, -1.0])
    cons = [LinearConstraint({0: 1.0, 1: 1.0}, bound=-1.0)]
    state = PhrState.fresh(1, sigma0=0.5, eta=1.2, max_iter=40)
    out = run_qphr_alm(obj, cons, state, EX)
    sigmas = [row.sigma for row in out.trace]
    for a, b in zip(sigmas, sigmas[1:]):
        assert b == pytest.approx(a * 1.2)
    assert [row.iteration for row in out.trace] == list(range(1, len(sigmas) + 1))
    assert all(lam >= 0.0 for row in out.trace for lam in row.lambdas)


def test_converged_iterate_minimizes_its_refreshed_model():
    # the stop test requires the final iterate to survive one more sample
    obj = Qubo.from_terms(4, [-3.0, -1.0, -2.0, -1.5])
    cons = [
        LinearConstraint({0: 1.0, 1: 1.0, 2: 1.0, 3: 1.0}, bound=-2.0),
        LinearConstraint({0: 2.0, 2: -1.0}, bound=-1.0),
    ]
    out = run_qphr_alm(obj, cons, PhrState.fresh(2, sigma0=0.3), EX)
    assert out.converged
    x = np.array([int(ch) for ch in out.bitstring])
    assert all(c.value(x) <= out.trace[-1].residual + 1e-9 for c in cons)
