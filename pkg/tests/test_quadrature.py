import math

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss

from vinoreg.estimator import gauss_hermite


def test_one_and_two_point_rules():
    x, w = gauss_hermite(1)
    assert x.tolist() == [0.0] and w[0] == pytest.approx(math.sqrt(math.pi), abs=1e-15)
    x, w = gauss_hermite(2)
    np.testing.assert_allclose(x, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-15)
    np.testing.assert_allclose(w, [math.sqrt(math.pi) / 2] * 2, atol=1e-15)


def test_second_moment_with_five_nodes():
    x, w = gauss_hermite(5)
    assert abs(np.sum(w * x**2) - math.sqrt(math.pi) / 2) <= 1e-12


@pytest.mark.parametrize("n", [3, 4, 12, 24, 57, 100])
def test_weights_sum_to_root_pi(n):
    _, w = gauss_hermite(n)
    assert abs(w.sum() - math.sqrt(math.pi)) <= 1e-12


@pytest.mark.parametrize("n", [4, 12, 24, 60])
def test_matches_numpy_rule(n):
    x, w = gauss_hermite(n)
    xr, wr = hermgauss(n)
    np.testing.assert_allclose(x, xr, atol=1e-13)
    np.testing.assert_allclose(w, wr, rtol=1e-10, atol=1e-300)


@pytest.mark.parametrize("n", [6, 12])
def test_exact_for_polynomials_up_to_degree_2n_minus_1(n):
    x, w = gauss_hermite(n)
    for k in range(0, 2 * n, 2):
        exact = math.gamma((k + 1) / 2)
        assert np.sum(w * x**k) == pytest.approx(exact, rel=1e-11)
        assert abs(np.sum(w * x ** (k + 1))) <= 1e-10 * max(1.0, exact)


@pytest.mark.parametrize("bad", [0, 101, 2.5, -3, True])
def test_out_of_range_counts(bad):
    with pytest.raises(ValueError):
        gauss_hermite(bad)


def test_returned_arrays_are_copies():
    x, _ = gauss_hermite(8)
    x[:] = 0.0
    assert gauss_hermite(8)[0].any()
