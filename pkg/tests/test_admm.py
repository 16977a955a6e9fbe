"""Block-coordinate solver: partitions, restriction exactness, sweeps."""

import itertools

import numpy as np
import pytest

from qsuc import AdmmConfig, BlockPartition, Qubo, make_sampler, qubo_value, run_qphr_admm
from qsuc.admm import partition_by_unit, restrict_to_block
from qsuc.errors import ParameterError
from qsuc.phr import LinearConstraint, PhrState, run_qphr_alm

EX = make_sampler("exhaustive")


def random_qubo(rng, n):
    linear = rng.uniform(-10.0, 10.0, size=n)
    quad = {
        (i, j): float(rng.uniform(-10.0, 10.0))
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < 0.6
    }
    return Qubo.from_terms(n, linear, quad, float(rng.uniform(-2.0, 2.0)))


def test_partition_validation():
    with pytest.raises(ParameterError):
        BlockPartition(((0, 1), (1, 2)))  # overlap
    with pytest.raises(ParameterError):
        BlockPartition(((0, 1), (3,)))  # gap at 2
    with pytest.raises(ParameterError):
        BlockPartition(((0,), ()))  # empty block
    part = BlockPartition(((2, 0), (1, 3)))
    assert part.n == 4 and part.max_block == 2


def test_uniform_partition_covers_in_order():
    part = BlockPartition.uniform(7, 3)
    assert part.blocks == ((0, 1, 2), (3, 4, 5), (6,))
    with pytest.raises(ParameterError):
        BlockPartition.uniform(0, 2)


def test_partition_by_unit_block_sizes():
    part = partition_by_unit(n_units=3, horizon=4, levels=6)
    assert [len(b) for b in part.blocks] == [4, 4, 4, 6]
    assert part.n == 3 * 4 + 6
    # the largest sampler call is max(horizon, levels) variables
    assert part.max_block == 6
    with pytest.raises(ParameterError):
        partition_by_unit(0, 4, 6)


def test_restrict_to_block_is_exact():
    # full value at the spliced assignment equals the restricted value,
    # for every block assignment and several frozen contexts
    rng = np.random.default_rng(np.random.SeedSequence([821]))
    q = random_qubo(rng, 9)
    part = BlockPartition.uniform(9, 3)
    for m, block in enumerate(part.blocks):
        for _ in range(4):
            x_full = rng.integers(0, 2, size=9).astype(np.uint8)
            sub = restrict_to_block(q, part, m, x_full)
            assert sub.n == len(block)
            for bits in itertools.product((0, 1), repeat=len(block)):
                spliced = x_full.copy()
                for k, g in enumerate(block):
                    spliced[g] = bits[k]
                assert qubo_value(sub, np.array(bits)) == pytest.approx(
                    qubo_value(q, spliced), abs=1e-9
                )


def test_config_validation():
    for kwargs in (
        dict(sigma0=0.0),
        dict(eta=0.5),
        dict(delta=-1.0),
        dict(max_sweeps=0),
    ):
        with pytest.raises(ParameterError):
            AdmmConfig(**kwargs)


def test_partition_size_mismatch_is_rejected():
    q = Qubo.from_terms(5, [1.0] * 5)
    part = BlockPartition.uniform(4, 2)
    with pytest.raises(ParameterError):
        run_qphr_admm(q, [], part, AdmmConfig(), EX)


def test_unconstrained_sweep_reaches_separable_optimum():
    # separable objective: each block solve is independently exact
    q = Qubo.from_terms(6, [1.0, -2.0, 3.0, -1.0, -0.5, 2.0])
    out = run_qphr_admm(q, [], BlockPartition.uniform(6, 2), AdmmConfig(), EX)
    assert out.converged and out.sweeps == 1
    assert out.bitstring == "010110"


def test_block_and_monolithic_agree_on_a_coupled_problem():
    # drop the cheapest of the three constrained variables: optimum 110111
    obj = Qubo.from_terms(6, [-3.0, -2.0, -1.0, -3.0, -2.0, -1.0])
    cons = [LinearConstraint({0: 1.0, 2: 1.0, 4: 1.0}, bound=-2.0)]
    mono = run_qphr_alm(obj, cons, PhrState.fresh(1, sigma0=0.3), EX)
    block = run_qphr_admm(obj, cons, BlockPartition.uniform(6, 2), AdmmConfig(), EX)
    assert mono.converged and block.converged
    assert mono.bitstring == "110111"
    assert block.bitstring == "110111"


def test_constraint_evaluation_spans_all_blocks():
    # a constraint coupling variables in different blocks still gates the
    # result: without it the optimum is all ones
    obj = Qubo.from_terms(4, [-1.0, -1.0, -1.0, -1.0])
    cons = [LinearConstraint({0: 1.0, 3: 1.0}, bound=-1.0)]
    out = run_qphr_admm(obj, cons, BlockPartition.uniform(4, 2), AdmmConfig(), EX)
    x = np.array([int(ch) for ch in out.bitstring])
    assert cons[0].value(x) <= 0.0
    assert x[1] == 1 and x[2] == 1  # unconstrained variables stay on


def test_trace_rows_cover_every_block_of_every_sweep():
    obj = Qubo.from_terms(4, [-1.0, 2.0, -1.0, 2.0])
    cons = [LinearConstraint({0: 1.0, 2: 1.0}, bound=-1.0)]
    out = run_qphr_admm(obj, cons, BlockPartition.uniform(4, 2), AdmmConfig(), EX)
    assert [(r.sweep, r.block) for r in out.trace] == [
        (s, b) for s in range(1, out.sweeps + 1) for b in range(2)
    ]
    sigmas = {r.sweep: r.sigma for r in out.trace}
    values = sorted(sigmas.items())
    for (_, a), (_, b) in zip(values, values[1:]):
        assert b == pytest.approx(a * 1.05)


def test_cap_returns_best_feasible_with_flag():
    obj = Qubo.from_terms(2, [1.0, 1.0])
    cons = [LinearConstraint({0: 1.0, 1: 1.0}, bound=1.0)]  # unsatisfiable
    out = run_qphr_admm(obj, cons, BlockPartition.uniform(2, 1), AdmmConfig(max_sweeps=15), EX)
    assert not out.converged
    assert out.sweeps == 15
