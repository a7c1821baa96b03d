import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from lambdipole.special import C0, _bessel_any, bessel_j, first_zero_j1


def ascending_series(order, r, terms=80):
    """J_order(r) from the ascending series in exact rational arithmetic."""
    x = Fraction(r) / 2
    total = sum(
        Fraction((-1) ** k, math.factorial(k) * math.factorial(k + order)) * x ** (2 * k + order)
        for k in range(terms)
    )
    return float(total)


def test_values_at_origin():
    assert bessel_j(0, 0.0) == 1.0
    assert bessel_j(1, 0.0) == 0.0


@pytest.mark.parametrize("order", [0, 1])
def test_matches_scipy_on_0_50(order):
    r = np.linspace(0.0, 50.0, 20001)
    ref = sp.jv(order, r)
    assert np.abs(bessel_j(order, r) - ref).max() <= 1e-12


@pytest.mark.parametrize("r", [0.1, 1.0, 3.8317, 7.5, 12.0])
def test_matches_ascending_series(r):
    for order in (0, 1):
        assert bessel_j(order, r) == pytest.approx(ascending_series(order, r), abs=1e-13)


def test_j0_near_c0():
    assert bessel_j(0, 3.8317) == pytest.approx(-0.4028, abs=5e-5)


@given(st.floats(min_value=0.0, max_value=50.0))
@settings(max_examples=300, deadline=None)
def test_bounded_by_one(r):
    assert abs(bessel_j(0, r)) <= 1.0
    assert abs(bessel_j(1, r)) <= 1.0


@pytest.mark.parametrize("bad", [-1e-12, -3.0, math.nan, math.inf])
def test_domain_errors(bad):
    with pytest.raises(ValueError):
        bessel_j(0, bad)


def test_order_outside_0_1_rejected():
    with pytest.raises(ValueError):
        bessel_j(2, 1.0)


def test_array_shape_and_scalar_type():
    r = np.linspace(0, 5, 12).reshape(3, 4)
    assert bessel_j(1, r).shape == (3, 4)
    assert isinstance(bessel_j(1, 2.0), float)


def test_first_zero():
    c0 = first_zero_j1()
    assert 3.8316 < c0 < 3.8318
    assert abs(bessel_j(1, c0)) <= 1e-13
    assert bessel_j(0, c0) < 0
    assert c0 == pytest.approx(sp.jn_zeros(1, 1)[0], abs=1e-14)
    assert c0 == C0
    assert f"{c0:.4f}" == "3.8317"


def test_recurrence_consistency():
    r = np.linspace(0.5, 20.0, 500)
    res = _bessel_any(0, r) + _bessel_any(2, r) - 2.0 / r * _bessel_any(1, r)
    assert np.abs(res).max() <= 1e-10


def test_derivative_of_j1_at_c0():
    h = 1e-6
    deriv = (bessel_j(1, C0 + h) - bessel_j(1, C0 - h)) / (2 * h)
    assert abs(deriv - bessel_j(0, C0)) <= 1e-6
