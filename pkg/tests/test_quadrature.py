"""Half-interval Gauss and Lobatto rules."""

import numpy as np
import pytest

from cdgmhd.quadrature import build_quadrature


def test_rejects_unsupported_degree():
    with pytest.raises(ValueError):
        build_quadrature(4)
    with pytest.raises(ValueError):
        build_quadrature(-1)


def test_counts_per_degree():
    for k, (n, l) in {0: (1, 2), 1: (2, 2), 2: (3, 3), 3: (4, 3)}.items():
        q = build_quadrature(k)
        assert (q.n_gauss, q.n_lobatto) == (n, l)


def test_degree_zero_lobatto_endpoints():
    q = build_quadrature(0)
    assert np.allclose(q.lobatto_x, [0.0, 1.0])
    assert np.allclose(q.lobatto_w, [0.5, 0.5])
    assert q.first_lobatto_weight == 0.5


def test_degree_one_gauss_nodes():
    q = build_quadrature(1)
    expect = 0.5 * (np.array([-1, 1]) / np.sqrt(3.0) + 1.0)
    assert np.allclose(q.gauss_x, expect, rtol=1e-15)


def test_degree_two_lobatto_weights():
    q = build_quadrature(2)
    assert np.allclose(q.lobatto_x, [0.0, 0.5, 1.0])
    assert np.allclose(q.lobatto_w, [1 / 6, 2 / 3, 1 / 6])
    assert np.isclose(q.first_lobatto_weight, 1 / 6)


def test_weights_sum_to_one():
    for k in range(4):
        q = build_quadrature(k)
        assert np.isclose(q.gauss_w.sum(), 1.0, rtol=1e-15)
        assert np.isclose(q.lobatto_w.sum(), 1.0, rtol=1e-15)


def test_monomial_exactness():
    # int_0^1 s^p ds = 1/(p+1); Gauss rule exact to 2n-1, Lobatto to 2l-3.
    for k in range(4):
        q = build_quadrature(k)
        for p in range(2 * q.n_gauss):
            assert np.isclose(q.gauss_w @ q.gauss_x**p, 1.0 / (p + 1), rtol=1e-13)
        for p in range(2 * q.n_lobatto - 2):
            assert np.isclose(q.lobatto_w @ q.lobatto_x**p, 1.0 / (p + 1), rtol=1e-13)


def test_lobatto_covers_solution_degree():
    # The endpoint rule must integrate degree-k polynomials exactly so that
    # cell averages decompose over the endpoint values.
    for k in range(4):
        q = build_quadrature(k)
        assert 2 * q.n_lobatto - 3 >= k
        assert q.lobatto_x[0] == 0.0 and q.lobatto_x[-1] == 1.0
