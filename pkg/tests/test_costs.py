import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stap.costs import (BPRCost, LinearCost, MergeNode, ObjectiveError, adaptive_simpson,
                        jin_zhang_jacobian, jin_zhang_times)
from stap.fixtures import toy, toy_network
from stap.interactions import GenSpec, generate_weights
from stap.io import Link, Network
from stap.weights import WeightMatrix


def _single_link(fft=10.0, b=1.0, p=1.0, cap=1.0):
    return Network(2, 2, 1, (Link(0, 1, cap, 1.0, fft, b, p),))


def test_effective_flow_identity():
    net = Network(3, 2, 1, (Link(0, 1, 1, 1, 1, 0.15, 4), Link(1, 2, 1, 1, 1, 0.15, 4)))
    assert BPRCost(net).effective_flow(np.array([3.0, 5.0]), 0) == 3.0


def test_effective_flow_toy_row():
    _, _, m = toy("symmetric-full")
    assert m.effective_flow(np.array([0, 60.0, 0, 0]), 1) == pytest.approx(30.0)


def test_effective_flow_uniform_weights():
    net = toy_network()
    m = BPRCost(net, WeightMatrix(np.full((4, 4), 0.25)))
    assert np.allclose(m.effective_flows(np.full(4, 4.0)), 4.0)


def test_bpr_time_at_capacity():
    m = BPRCost(_single_link(fft=6, b=0.15, p=4, cap=2.0))
    assert m.link_time(np.array([2.0]), 0) == pytest.approx(6.9)


def test_toy_link_times():
    _, _, sep = toy("separable")
    assert sep.link_time(np.array([0, 60.0, 0, 0]), 1) == 70.0
    assert sep.link_time(np.array([5.0, 0, 0, 0]), 0) == 20.0
    _, _, sym = toy("symmetric-full")
    assert sym.link_time(np.array([0, 60.0, 0, 0]), 2) == pytest.approx(20.02)
    _, _, part = toy("symmetric-partial")
    assert part.link_time(np.array([4.0, 0, 0, 0]), 1) == pytest.approx(11.0)


def test_jacobian_entries_toy():
    _, _, sep = toy("separable")
    x = np.array([1.0, 2, 3, 4])
    assert sep.cost_jacobian_entry(x, 0, 1) == 0.0
    _, _, sym = toy("symmetric-full")
    assert sym.cost_jacobian_entry(x, 0, 1) == sym.cost_jacobian_entry(x, 1, 0) == 0.167


def test_bpr_jacobian_matches_central_differences(sf, rng):
    net, _, _ = sf
    w = generate_weights(net, GenSpec(2, symmetric=False, seed=4))
    m = BPRCost(net, w)
    for _ in range(5):
        x = rng.uniform(0, 2, net.n_links) * net.capacity
        jac = m.jacobian(x).toarray()
        for a, b in rng.integers(0, net.n_links, size=(20, 2)):
            h = 1e-4 * max(1.0, x[b])
            xp, xm = x.copy(), x.copy()
            xp[b] += h
            xm[b] -= h
            fd = (m.link_time(xp, a) - m.link_time(xm, a)) / (2 * h)
            assert jac[a, b] == pytest.approx(fd, rel=1e-5, abs=1e-12)
            assert m.cost_jacobian_entry(x, a, b) == pytest.approx(jac[a, b], rel=1e-14)


def test_symmetric_linear_jacobian_is_exactly_symmetric(rng):
    for sc in ("separable", "symmetric-full", "symmetric-partial"):
        _, _, m = toy(sc)
        x = rng.uniform(0, 30, 4)
        j = m.jacobian(x).toarray()
        assert np.array_equal(j, j.T)


def test_beckmann_values():
    _, _, sep = toy("separable")
    assert sep.beckmann_objective(np.zeros(4)) == 0.0
    assert sep.beckmann_objective(np.array([0, 60.0, 0, 0])) == pytest.approx(2400.0)
    single = BPRCost(_single_link())
    assert single.beckmann_objective(np.array([2.0])) == pytest.approx(40.0)


def test_beckmann_refuses_interacting_models():
    _, _, sym = toy("symmetric-full")
    with pytest.raises(ObjectiveError):
        sym.beckmann_objective(np.zeros(4))


def test_line_integral_toy_symmetric_full():
    _, _, m = toy("symmetric-full")
    li = m.line_integral_objective(np.array([0, 60.0, 0, 0]))
    assert li.value == pytest.approx(1500.0)
    assert not li.heuristic
    assert m.line_integral_objective(np.zeros(4)).value == 0.0


def test_line_integral_flags_asymmetric_models():
    _, _, m = toy("asymmetric-full")
    assert m.line_integral_objective(np.ones(4)).heuristic
    assert m.objective(np.ones(4)) is None


@pytest.mark.parametrize("scenario", ["symmetric-full", "symmetric-partial", "separable"])
def test_line_integral_equals_quadratic_form(scenario, rng):
    _, _, m = toy(scenario, exact=True)
    for _ in range(100):
        x = rng.uniform(0, 60, 4)
        assert m.line_integral_objective(x).value == pytest.approx(m.quadratic_form(x),
                                                                   rel=1e-12, abs=1e-8)


def test_path_discrepancy_zero_for_symmetric_linear(rng):
    _, _, m = toy("symmetric-full", exact=True)
    for _ in range(10):
        assert m.path_discrepancy(rng.uniform(0, 60, 4)) <= 1e-8
    _, _, a = toy("asymmetric-full", exact=True)
    assert a.path_discrepancy(np.array([10.0, 20, 30, 0])) > 1e-3


def test_line_integral_gradient_is_link_times(rng):
    _, _, m = toy("symmetric-full", exact=True)
    for _ in range(10):
        x = rng.uniform(1, 60, 4)
        t = m.link_times(x)
        for a in range(4):
            h = 1e-3
            e = np.zeros(4)
            e[a] = h
            fd = (m.line_integral_objective(x + e).value
                  - m.line_integral_objective(x - e).value) / (2 * h)
            assert fd == pytest.approx(t[a], rel=1e-6)


def test_beckmann_strictly_convex_on_sioux_falls(sf, rng):
    net, _, m = sf
    for _ in range(10):
        x = rng.uniform(0, 1.5, net.n_links) * net.capacity
        d = rng.normal(size=net.n_links) * net.capacity * 0.05
        f0, f1, f2 = (m.beckmann_objective(np.maximum(x + s * d, 0)) for s in (-1, 0, 1))
        x_lo = x - d
        if np.any(x_lo < 0):
            continue
        assert f0 - 2 * f1 + f2 > 0


def test_quadrature_fallback_matches_closed_form(sf, rng):
    net, _, _ = sf
    w = generate_weights(net, GenSpec(2, seed=2))
    m = BPRCost(net, w)
    x = rng.uniform(0, 1.2, net.n_links) * net.capacity
    closed = m.line_integral_objective(x).value
    m._antiderivative = lambda f, idx=slice(None): None  # force quadrature
    assert m.line_integral_objective(x).value == pytest.approx(closed, rel=1e-9)


def test_adaptive_simpson_polynomial():
    assert adaptive_simpson(lambda s: s ** 4, 0.0, 2.0, 1e-10) == pytest.approx(32 / 5)


def test_merge_times():
    m = MergeNode(1.0, 2.0, 10.0)
    assert jin_zhang_times(m, 2, 3) == (1.0, 2.0)
    assert jin_zhang_times(MergeNode(1.0, 2.0, 6.0), 4, 8) == pytest.approx((2.0, 3.0))


def test_merge_jacobian_branches():
    assert not jin_zhang_jacobian(MergeNode(1, 2, 10), 2, 3).any()
    j = jin_zhang_jacobian(MergeNode(1, 2, 6), 4, 8)
    assert np.allclose(j, 1 / 6)
    assert np.allclose(np.linalg.eigvalsh(j), [0, 2 / 6])
    # the kink takes the congested branch
    assert np.allclose(jin_zhang_jacobian(MergeNode(1, 2, 6), 3, 3), 1 / 6)


def test_merge_needs_positive_capacity():
    with pytest.raises(ValueError):
        MergeNode(1, 1, 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 100), st.floats(0, 100), st.floats(0.1, 50), st.floats(0.01, 5))
def test_merge_jacobian_symmetric_psd(x1, x2, u3, k):
    j = jin_zhang_jacobian(MergeNode(1.0, 2.0, u3, k), x1, x2)
    assert np.array_equal(j, j.T)
    assert np.linalg.eigvalsh(j).min() >= -1e-12


def test_apply_shift_keeps_cached_times_consistent(sf, rng):
    net, _, _ = sf
    m = BPRCost(net, generate_weights(net, GenSpec(3, symmetric=False, seed=1)))
    x = rng.uniform(0, 1, net.n_links) * net.capacity
    f = m.effective_flows(x)
    t = m.times_from_effective(f)
    dg = m._dg(f)
    links = np.array([3, 10, 40])
    signs = np.array([1.0, -1.0, 1.0])
    m.apply_shift(x, f, t, dg, links, signs, 17.5)
    assert np.allclose(t, m.link_times(x), rtol=1e-12)
    assert np.allclose(dg, m.derivatives(x), rtol=1e-12)


def test_direction_curvature_matches_dense(sf, rng):
    net, _, _ = sf
    m = BPRCost(net, generate_weights(net, GenSpec(2, symmetric=False, seed=9)))
    x = rng.uniform(0, 1, net.n_links) * net.capacity
    dg = m.derivatives(x)
    jac = m.jacobian(x).toarray()
    links = rng.choice(net.n_links, 8, replace=False)
    signs = rng.choice([-1.0, 1.0], 8)
    d = np.zeros(net.n_links)
    d[links] = signs
    assert m.direction_curvature(dg, links, signs) == pytest.approx(d @ jac @ d, rel=1e-12)
