"""Jet arithmetic and the two differentiation engines."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fslab.engines import FiniteDifferenceEngine, JetEngine, central_weights
from fslab.errors import DegenerateFiberVector
from fslab.jets import Jet
from fslab.metrics import MetricField

finite = st.floats(-2.0, 2.0, allow_nan=False)


def test_jet_product_rule():
    x, y = Jet.variables([1.5, -0.5], 3)
    f = x * x * y + 3.0 * y * y * y
    assert f.value == pytest.approx(1.5**2 * -0.5 + 3 * -0.125)
    assert f.partial(1, 0) == pytest.approx(2 * 1.5 * -0.5)
    assert f.partial(1, 1) == pytest.approx(3.0)
    assert f.partial(0, 3) == pytest.approx(18.0)
    assert f.partial(2, 1) == pytest.approx(2.0)


@given(finite, st.floats(0.2, 3.0))
@settings(max_examples=40, deadline=None)
def test_jet_elementary_functions(a, b):
    x, y = Jet.variables([a, b], 4)
    f = np.sin(x) * np.exp(x) + np.sqrt(y) + np.log(y) + y**1.5
    # d^4/dx^4 of sin(x) e^x is -4 sin(x) e^x
    assert f.partial(4, 0) == pytest.approx(-4 * math.sin(a) * math.exp(a), abs=1e-9)
    d3y = 3 / 8 * b**-2.5 + 2 / b**3 + 1.5 * 0.5 * -0.5 * b**-1.5
    assert f.partial(0, 3) == pytest.approx(d3y, rel=1e-10)


def test_jet_derivative_drops_order():
    x, y = Jet.variables([0.3, 0.7], 4)
    f = x**3 * y
    g = f.d(0)
    assert g.order == 3
    assert g.partial(0, 0) == pytest.approx(3 * 0.09 * 0.7)
    assert g.partial(1, 1) == pytest.approx(6 * 0.3)


def test_batched_jets():
    x, y = Jet.variables([np.array([1.0, 2.0]), np.array([3.0, 4.0])], 2)
    f = x * y
    np.testing.assert_allclose(f.partial(1, 1), [1.0, 1.0])
    np.testing.assert_allclose(f.value, [3.0, 8.0])


def test_central_weights_reproduce_monomials():
    for m in range(1, 7):
        off, w = central_weights(m)
        for deg in range(m + 4):
            exact = math.factorial(m) if deg == m else 0.0
            assert np.dot(w, off.astype(float) ** deg) == pytest.approx(exact, abs=1e-9)


def _poly_metric():
    def F(x1, x2, y1, y2):
        return 0.3 * x1 * x1 * y1 * y2 - x2 * y2**3 + 0.5 * y1**5 + x1 * x2 * y1 + 2.0 * y2**2 * y1 * x2
    return MetricField("poly", F)


def _poly_derivs(x1, x2, y1, y2):
    # selected exact partials (x1, x2, y1, y2 multi-indices)
    return {
        (0, 0, 1, 0): 0.6 * 0 + 0.3 * x1 * x1 * y2 + 2.5 * y1**4 + x1 * x2 + 2.0 * y2**2 * x2,
        (0, 0, 0, 3): -6.0 * x2,
        (0, 0, 5, 0): 60.0,
        (2, 0, 1, 1): 0.6,
        (0, 1, 1, 2): 4.0,
        (0, 0, 3, 0): 30.0 * y1**2,
        (1, 1, 1, 0): 1.0,
    }


@pytest.mark.parametrize("engine, tol", [(JetEngine(), 1e-9), (FiniteDifferenceEngine(), 1e-6)])
@given(finite, finite, st.floats(0.0, 2 * math.pi), st.floats(1.0, 2.0))
@settings(max_examples=15, deadline=None)
def test_engines_exact_on_polynomials(engine, tol, x1, x2, ang, r):
    # fiber steps scale with |y|; below |y| = 1 the 5th-order stencils hit round-off
    y1, y2 = r * math.cos(ang), r * math.sin(ang)
    jet = engine.jet(_poly_metric(), np.array([x1, x2]), np.array([y1, y2]), 5)
    for alpha, exact in _poly_derivs(x1, x2, y1, y2).items():
        assert jet.partial(*alpha) == pytest.approx(exact, abs=tol * max(1.0, abs(exact)))


def test_engines_agree_on_randers():
    from fslab.metrics import randers

    m = randers("0.2*u1", "0.1*u2*u2")
    x = np.array([[0.3, -0.4], [0.1, 0.6]])
    y = np.array([[1.0, 0.2], [0.5, -1.0]])
    a = JetEngine().jet(m, x, y, 4)
    b = FiniteDifferenceEngine().jet(m, x, y, 4)
    np.testing.assert_allclose(b.c, a.c, atol=1e-6)


def test_zero_fiber_rejected():
    from fslab.metrics import euclidean

    with pytest.raises(DegenerateFiberVector):
        JetEngine().jet(euclidean(), np.zeros(2), np.array([0.0, 1e-13]), 2)
