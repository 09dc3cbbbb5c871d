import numpy as np
import pytest

from reluverify import (
    BoundMethod,
    InputBox,
    Layer,
    Network,
    abstract_to_saturation,
    evaluate,
    ibp,
    output_gap,
    preprocess,
    sbt,
)

from conftest import forward_batch, random_box, random_network, sample_box


@pytest.fixture
def abstract121(net121):
    return abstract_to_saturation(preprocess(net121), nonneg_inputs=True).network


def test_ibp_running_example(net121, abstract121):
    box = InputBox([20.0], [21.0])
    bm = ibp(net121, box)
    assert bm.pre[0][0] == pytest.approx([200.0, 20.0], abs=1e-9)
    assert bm.pre[0][1] == pytest.approx([210.0, 21.0], abs=1e-9)
    assert bm.output_interval == pytest.approx((680.0, 714.0), abs=1e-9)
    assert ibp(abstract121, box).output_interval == pytest.approx((1400.0, 1470.0), abs=1e-9)


def test_point_box_bounds():
    rng = np.random.default_rng(41)
    for _ in range(30):
        net = random_network(rng)
        x = rng.uniform(-1.0, 1.0, size=net.input_size)
        box = InputBox(x, x)
        y = evaluate(net, x)[0]
        for method, bm in (("ibp", ibp(net, box)), ("sbt", sbt(net, box)[1])):
            lo, hi = bm.output_interval
            scale = max(1.0, abs(y))
            assert lo - 1e-9 * scale <= y <= hi + 1e-9 * scale, method
            assert hi - lo <= 1e-9 * scale


def test_ibp_monotone_in_box():
    rng = np.random.default_rng(42)
    for _ in range(40):
        net = random_network(rng)
        box = random_box(rng, net.input_size)
        shrink = rng.uniform(0.1, 0.5, size=net.input_size) * (box.upper - box.lower)
        inner = InputBox(box.lower + 0.5 * shrink, box.upper - 0.5 * shrink)
        lo1, hi1 = ibp(net, box).output_interval
        lo2, hi2 = ibp(net, inner).output_interval
        assert lo2 >= lo1 - 1e-12 and hi2 <= hi1 + 1e-12


def test_sbt_stable_network_is_exact(net121):
    box = InputBox([20.0], [21.0])
    sym, bm = sbt(net121, box)
    assert np.all(sym.relu_modes[0] == 1)  # both ReLUs stably active
    assert bm.output_interval == pytest.approx((680.0, 714.0), abs=1e-9)
    # Exact affine bounds: lower and upper expressions coincide.
    (lc, lk), (uc, uk) = sym.post_lower[-1], sym.post_upper[-1]
    assert np.array_equal(lc, uc) and np.array_equal(lk, uk)


def test_sbt_unstable_relu():
    net = Network([Layer([[1.0]], [0.0], True), Layer([[1.0]], [0.0], False)], 1)
    box = InputBox([-1.0], [1.0])
    sym, bm = sbt(net, box)
    assert sym.relu_modes[0][0] == 0
    assert bm.post[0][0][0] == pytest.approx(0.0, abs=0)
    assert bm.post[0][1][0] == pytest.approx(1.0, abs=0)
    assert bm.output_interval == pytest.approx((0.0, 1.0), abs=0)


def test_sbt_contained_in_ibp_and_sound():
    rng = np.random.default_rng(43)
    for _ in range(200):
        net = random_network(rng)
        box = random_box(rng, net.input_size)
        ibp_map = ibp(net, box)
        _, sbt_map = sbt(net, box)
        assert ibp_map.contains(sbt_map, slack=1e-12)
        ys = forward_batch(net, sample_box(rng, box, 500))[:, 0]
        for bm in (ibp_map, sbt_map):
            lo, hi = bm.output_interval
            assert np.all(ys >= lo - 1e-9) and np.all(ys <= hi + 1e-9)


def test_bounds_dump_is_json_serializable(net121):
    import json

    bm = ibp(net121, InputBox([20.0], [21.0]))
    doc = json.loads(json.dumps(bm.to_dict()))
    assert doc["pre"][0] == [[200.0, 20.0], [210.0, 21.0]]
    assert doc["post"][1] == [[680.0], [714.0]]


def test_output_gap_running_example(net121, abstract121):
    box = InputBox([20.0], [21.0])
    assert output_gap(abstract121, net121, box, BoundMethod.IBP) == pytest.approx(686.0, abs=1e-9)
    assert output_gap(abstract121, net121, box, BoundMethod.SBT) == pytest.approx(686.0, abs=1e-9)


def test_output_gap_identical_networks(net121):
    box = InputBox([20.0], [21.0])
    assert output_gap(net121, net121, box, BoundMethod.IBP) == 0.0
    assert output_gap(net121, net121, box, BoundMethod.SBT) == 0.0


def test_output_gap_pointwise_guarantee():
    rng = np.random.default_rng(44)
    for _ in range(60):
        net = random_network(rng)
        abstract = abstract_to_saturation(preprocess(net), nonneg_inputs=True).network
        box = random_box(rng, net.input_size, nonneg=True)
        for method in (BoundMethod.IBP, BoundMethod.SBT):
            d = output_gap(abstract, net, box, method)
            assert d >= 0.0
            X = sample_box(rng, box, 1000)
            orig = forward_batch(net, X)[:, 0]
            abst = forward_batch(abstract, X)[:, 0]
            assert np.all(orig + d <= abst + 1e-9)
