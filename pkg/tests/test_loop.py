import numpy as np
import pytest

from reluverify import (
    InputBox,
    Layer,
    Network,
    OutputProperty,
    Query,
    Status,
    evaluate,
    verify,
    verify_cegar,
    verify_cegarette,
    verify_direct,
)

from conftest import (
    forward_batch,
    oracle_verdict,
    random_oracle_network,
    random_query,
    sample_box,
)


def test_running_example_direct(query121):
    v, stats = verify_direct(query121)
    assert v.status is Status.UNSAT
    assert stats.refinement_steps == 0
    assert stats.iterations == 1


def test_running_example_cegar(query121):
    v, stats = verify_cegar(query121)
    assert v.status is Status.UNSAT
    assert stats.refinement_steps >= 1
    assert stats.thresholds == [800.0] * stats.iterations
    # The first abstract attempt is smaller than the network itself.
    assert stats.abstract_hidden_sizes[0] == [1]


def test_running_example_cegarette(query121):
    v, stats = verify_cegarette(query121)
    assert v.status is Status.UNSAT
    assert stats.refinement_steps == 0
    assert stats.iterations == 1
    assert stats.thresholds[0] == pytest.approx(1486.0, abs=1e-9)


def test_point_box_sat_query(net121):
    q = Query(net121, InputBox([21.0], [21.0]), OutputProperty(700.0))
    for fn in (verify_direct, verify_cegar, verify_cegarette):
        v, stats = fn(q)
        assert v.status is Status.SAT
        assert evaluate(net121, v.witness)[0] > 700.0 - 1e-6


def test_cegar_zero_refinements_when_abstraction_suffices():
    # A single hidden neuron cannot be merged, so the saturated abstraction
    # already equals the network and the first solve settles it.
    net = Network([Layer([[2.0]], [0.0], True), Layer([[1.0]], [0.0], False)], 1)
    q = Query(net, InputBox([0.0], [1.0]), OutputProperty(5.0))
    v, stats = verify_cegar(q)
    assert v.status is Status.UNSAT
    assert stats.refinement_steps == 0


def test_cegarette_sat_with_zero_refinements(net121):
    # Lowering the threshold makes the first abstract counterexample genuine.
    q = Query(net121, InputBox([20.0], [21.0]), OutputProperty(600.0))
    v, stats = verify_cegarette(q)
    assert v.status is Status.SAT
    assert stats.refinement_steps == 0
    assert evaluate(net121, v.witness)[0] > 600.0 - 1e-6


def test_cross_mode_agreement_with_oracle():
    rng = np.random.default_rng(81)
    for _ in range(100):
        q = random_query(rng, net=random_oracle_network(rng))
        truth = oracle_verdict(q)
        for mode in ("direct", "cegar", "cegarette"):
            v, stats = verify(q, mode)
            assert v.status.value == truth, mode
            if v.status is Status.SAT:
                assert evaluate(q.network, v.witness)[0] > q.output.threshold - 1e-6
                assert q.input.contains(v.witness)
            assert stats.iterations <= 1 + (stats.initial_excess or 0)
            assert stats.refinement_steps == stats.iterations - 1


def test_stats_shape_and_monotone_sizes():
    rng = np.random.default_rng(82)
    for _ in range(30):
        q = random_query(rng, net=random_oracle_network(rng), nonneg=True)
        v, stats = verify_cegarette(q)
        assert len(stats.abstract_hidden_sizes) == stats.iterations
        assert len(stats.thresholds) == stats.iterations
        assert len(stats.solver_times) == stats.iterations
        totals = [sum(sz) for sz in stats.abstract_hidden_sizes]
        assert all(a <= b for a, b in zip(totals, totals[1:]))


def test_states_over_approximate_along_the_run():
    rng = np.random.default_rng(83)
    for _ in range(40):
        q = random_query(rng, net=random_oracle_network(rng), nonneg=True)
        trace = []
        verify_cegarette(q, state_trace=trace)
        assert trace
        X = sample_box(rng, q.input, 100)
        orig = forward_batch(q.network, X)[:, 0]
        for state in trace:
            abst = forward_batch(state.network, X)[:, 0]
            assert np.all(abst >= orig - 1e-9)


def test_timeout_propagates_with_partial_stats(query121):
    v, stats = verify_cegar(query121, timeout=0.0)
    assert v.status is Status.TIMEOUT
    assert stats.iterations >= 1
    assert stats.mode == "cegar"


def test_refine_batch_accelerates_cegar():
    rng = np.random.default_rng(84)
    for _ in range(10):
        q = random_query(rng, net=random_oracle_network(rng), nonneg=True)
        v1, s1 = verify_cegar(q, refine_batch=1)
        v3, s3 = verify_cegar(q, refine_batch=3)
        assert v1.status is v3.status
        assert s3.refinement_steps <= s1.refinement_steps


def test_unknown_mode_rejected(query121):
    with pytest.raises(ValueError):
        verify(query121, "fastest")
