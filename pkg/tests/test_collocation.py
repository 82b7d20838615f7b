import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre as npleg

from mlsdc_kit.collocation import (
    build_q,
    build_s,
    integrate_q,
    integrate_s,
    lobatto_nodes,
    make_rule,
)

NODE_COUNTS = [2, 3, 4, 5, 7, 9, 13]


def _bisect(f, a, b, iters=200):
    fa = f(a)
    for _ in range(iters):
        c = 0.5 * (a + b)
        fc = f(c)
        if fc == 0:
            return c
        if np.sign(fc) == np.sign(fa):
            a, fa = c, fc
        else:
            b = c
    return 0.5 * (a + b)


def _simpson(g, a, b, panels=10_000):
    x = np.linspace(a, b, 2 * panels + 1)
    y = g(x)
    h = (b - a) / (2 * panels)
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def test_lobatto_trivial_cases():
    np.testing.assert_array_equal(lobatto_nodes(2), [0.0, 1.0])
    np.testing.assert_allclose(lobatto_nodes(3), [0.0, 0.5, 1.0], atol=1e-15)


def test_lobatto_five_nodes_bisection_oracle():
    dP4 = npleg.Legendre.basis(4).deriv()
    oracle = [_bisect(dP4, -0.9, -0.1), 0.0, _bisect(dP4, 0.1, 0.9)]
    expected = [0.0] + [(1 + x) / 2 for x in oracle] + [1.0]
    np.testing.assert_allclose(lobatto_nodes(5), expected, atol=1e-14)
    np.testing.assert_allclose(
        lobatto_nodes(5),
        [0, 0.172673164646011, 0.5, 0.827326835353989, 1],
        atol=1e-14,
    )
    assert abs(lobatto_nodes(5)[1] - (1 - np.sqrt(3 / 7)) / 2) < 1e-15


@pytest.mark.parametrize("n", NODE_COUNTS)
def test_lobatto_nodes_are_roots_of_legendre_derivative(n):
    t = lobatto_nodes(n)
    assert t[0] == 0.0 and t[-1] == 1.0
    assert np.all(np.diff(t) > 0)
    if n > 2:
        dP = npleg.Legendre.basis(n - 1).deriv()
        # each interior node brackets a sign change of P'_M
        for x in 2 * t[1:-1] - 1:
            root = _bisect(dP, x - 1e-6, x + 1e-6)
            assert abs(root - x) < 2e-14


@pytest.mark.parametrize("n", [0, 1, -3])
def test_lobatto_rejects_small_counts(n):
    with pytest.raises(ValueError):
        lobatto_nodes(n)


def test_build_q_trapezoid():
    np.testing.assert_allclose(build_q([0.0, 1.0]), [[0, 0], [0.5, 0.5]], atol=1e-15)


def test_build_q_three_nodes_against_simpson_oracle():
    nodes = np.array([0.0, 0.5, 1.0])
    basis = [
        lambda x: 2 * (x - 0.5) * (x - 1.0),
        lambda x: -4 * x * (x - 1.0),
        lambda x: 2 * x * (x - 0.5),
    ]
    oracle = np.array([[_simpson(l, 0.0, b) for l in basis] for b in nodes])
    np.testing.assert_allclose(oracle[1], [5 / 24, 1 / 3, -1 / 24], atol=1e-13)
    np.testing.assert_allclose(oracle[2], [1 / 6, 2 / 3, 1 / 6], atol=1e-13)
    np.testing.assert_allclose(build_q(nodes), oracle, atol=1e-13)


def test_build_q_rejects_duplicates():
    with pytest.raises(ValueError):
        build_q([0.0, 0.5, 0.5, 1.0])


def test_build_s_examples():
    np.testing.assert_allclose(build_s(build_q([0.0, 1.0])), [[0.5, 0.5]], atol=1e-15)
    s = build_s(build_q([0.0, 0.5, 1.0]))
    np.testing.assert_allclose(s[0], [5 / 24, 1 / 3, -1 / 24], atol=1e-15)
    np.testing.assert_allclose(s[1], [-1 / 24, 1 / 3, 5 / 24], atol=1e-15)


@pytest.mark.parametrize("n", NODE_COUNTS)
def test_rule_invariants(n):
    rule = make_rule(n)
    M = n - 1
    t, q, s = rule.nodes, rule.q, rule.s
    assert q.shape == (n, n) and s.shape == (M, n)
    assert np.all(q[0] == 0.0)
    np.testing.assert_allclose(t + t[::-1], 1.0, atol=1e-14)
    np.testing.assert_allclose(s, q[1:] - q[:-1], atol=1e-15)
    np.testing.assert_allclose(s.sum(axis=0), q[-1] - q[0], atol=1e-14)
    for p in range(M + 1):
        np.testing.assert_allclose(q @ t**p, t ** (p + 1) / (p + 1), atol=1e-13)
    for p in range(2 * M):
        assert abs(q[-1] @ t**p - 1.0 / (p + 1)) < 1e-12


def test_last_row_matches_classical_lobatto_weights():
    # classical weights on [-1,1]: 2 / (M (M+1) P_M(x_j)^2)
    for n in (3, 5, 7):
        M = n - 1
        x = 2 * lobatto_nodes(n) - 1
        w = 2.0 / (M * (M + 1) * npleg.legval(x, [0] * M + [1]) ** 2)
        np.testing.assert_allclose(make_rule(n).q[-1], w / 2, atol=1e-14)


def test_integrate_q_examples():
    rule = make_rule(3)
    np.testing.assert_array_equal(integrate_q(rule, np.zeros((3, 4)), 1.0), 0.0)
    out = integrate_q(rule, np.full((3, 5), 2.5), 1.0)
    np.testing.assert_allclose(out, 2.5 * rule.nodes[:, None] * np.ones((1, 5)), atol=1e-15)
    out = integrate_q(rule, (rule.nodes**2)[:, None], 1.0)
    assert abs(out[-1, 0] - 1 / 3) < 1e-14
    assert np.all(out[0] == 0.0)


def test_integrate_rejects_ragged_or_wrong_count():
    rule = make_rule(3)
    with pytest.raises(ValueError):
        integrate_q(rule, [[1.0, 2.0], [1.0], [3.0, 4.0]], 1.0)
    with pytest.raises(ValueError):
        integrate_s(rule, np.ones((4, 2)), 1.0)


def test_integrate_s_examples():
    rule = make_rule(5)
    np.testing.assert_array_equal(integrate_s(rule, np.zeros((5, 3)), 0.3), 0.0)
    out = integrate_s(rule, np.full((5, 2), 1.5), 1.0)
    np.testing.assert_allclose(out, 1.5 * np.diff(rule.nodes)[:, None] * np.ones((1, 2)), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(
    n=st.sampled_from([3, 5, 7, 9]),
    dt=st.floats(0.01, 2.0),
    seed=st.integers(0, 2**32 - 1),
)
def test_s_telescopes_to_last_q_row(n, dt, seed):
    rule = make_rule(n)
    vals = np.random.default_rng(seed).standard_normal((n, 6))
    np.testing.assert_allclose(
        integrate_s(rule, vals, dt).sum(axis=0),
        integrate_q(rule, vals, dt)[-1],
        atol=1e-13 * max(1.0, dt),
    )
