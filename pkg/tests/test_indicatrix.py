"""Indicatrix traces, the averaged metric and the cumulative source integrals."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from fslab import indicatrix as ind
from fslab.errors import NoClosure
from fslab.metrics import euclidean, preset, randers
from fslab.plane import trifocal_seed

P0 = np.array([[0.3], [-0.2]])


@pytest.fixture(scope="module")
def euclid_trace():
    return ind.trace_indicatrix(euclidean(), P0)


@pytest.fixture(scope="module")
def randers_trace():
    return ind.trace_indicatrix(randers("0.3", "0"), P0)


def test_seed_points():
    np.testing.assert_allclose(ind.seed_point(euclidean(), P0, (3.0, 4.0))[:, 0], [0.6, 0.8])
    np.testing.assert_allclose(ind.seed_point(randers("0.3", "0"), P0, (1.0, 0.0))[:, 0], [1 / 1.3, 0.0])
    s = ind.seed_point(preset("plane:trifocal-rot"), np.zeros((2, 1)), (1.0, 0.0))[:, 0]
    np.testing.assert_allclose(s, [4 / 3, 0.0], atol=1e-12)
    assert abs(trifocal_seed().phi(s[0], s[1])) < 1e-12


def test_euclidean_trace(euclid_trace):
    tr = euclid_trace
    assert tr.period == pytest.approx(2 * np.pi, abs=1e-10)
    assert np.max(np.abs(tr.lam)) < 1e-12
    assert np.max(np.abs(tr.alpha)) == 0.0 and np.max(np.abs(tr.omega)) == 0.0
    np.testing.assert_allclose(np.hypot(*tr.c), 1.0, atol=1e-10)
    np.testing.assert_allclose(tr.c[:, -1], tr.c[:, 0], atol=1e-9)


def test_trace_tangent_is_V0(randers_trace):
    tr = randers_trace
    dF = tr.extras["dF"]
    V0 = np.array([-dF[1], dF[0]]) / tr.w
    dc = tr.series(tr.c).derivative(tr.theta)
    np.testing.assert_allclose(dc, V0, atol=1e-8)


def test_randers_main_scalar_periodic(randers_trace):
    lam = randers_trace.lam
    assert np.ptp(lam) > 1e-3
    assert abs(lam[-1] - lam[0]) < 1e-8


def test_main_scalar_integrates_to_log_w(randers_trace):
    tr = randers_trace
    cum = tr.series(tr.lam).cumulative(tr.theta)
    np.testing.assert_allclose(cum, np.log(tr.w) - np.log(tr.w[0]), atol=1e-5)
    assert abs(cum[-1]) < 1e-5


def test_main_scalar_is_derivative_of_log_w(randers_trace):
    tr = randers_trace
    d = tr.series(np.log(tr.w)).derivative(tr.theta)
    np.testing.assert_allclose(d, tr.lam, atol=1e-7)


def test_F_conservation_fine_step():
    tr = ind.trace_indicatrix(randers("0.3", "0.1"), P0, step=1e-3, spray=False)
    assert tr.F_drift < 1e-7
    coarse = ind.trace_indicatrix(randers("0.3", "0.1"), P0, step=2e-3, spray=False)
    assert abs(tr.period - coarse.period) < 1e-6


def test_period_step_halving():
    m = preset("randers:0.2*u1,0.1*u2*u2")
    a = ind.trace_indicatrix(m, P0, step=1e-2, spray=False)
    b = ind.trace_indicatrix(m, P0, step=5e-3, spray=False)
    assert abs(a.period - b.period) < 1e-6


def test_mu_positive_and_mass(randers_trace):
    tr = randers_trace
    assert np.all(tr.mu > 0)
    # total induced mass equals the central affine length and the polar oracle
    assert tr.mu.sum() == pytest.approx(tr.period, rel=1e-9)
    polar = ind.polar_quadrature(randers("0.3", "0"), P0, 256)
    assert polar.period[0] == pytest.approx(tr.period, rel=1e-9)


def test_no_closure():
    with pytest.raises(NoClosure):
        ind.trace_indicatrix(euclidean(), P0, theta_max=3.0)


def test_trifocal_lambda_profiles_are_shifts(trifocal_traces):
    a, b = trifocal_traces[8], trifocal_traces[0]
    assert a.period == pytest.approx(b.period, rel=1e-9)
    sa, sb = a.series(a.lam), b.series(b.lam)
    corr = np.fft.ifft(np.fft.fft(a.lam[:-1]) * np.conj(np.fft.fft(b.lam[:-1]))).real
    k = int(np.argmax(corr))
    h = a.period / a.n
    t = np.linspace(0.0, a.period, 200, endpoint=False)
    res = minimize_scalar(lambda s: np.max(np.abs(sa(t + s) - sb(t))), bracket=((k - 1) * h, k * h, (k + 1) * h))
    assert res.fun < 1e-6


# -- averaged metric ------------------------------------------------------------------


def test_euclidean_averaged_metric(euclid_trace):
    gam = ind.averaged_metric(euclid_trace)
    np.testing.assert_allclose(gam.gamma, 2 * np.pi * np.eye(2), atol=1e-7)
    assert gam.positive_definite


def test_averaged_metric_seed_invariance(randers_trace):
    g0 = ind.averaged_metric(randers_trace).gamma
    for k in (17, 101):
        g1 = ind.averaged_metric(randers_trace.shifted(k)).gamma
        assert np.max(np.abs(g1 - g0)) / np.max(np.abs(g0)) < 1e-6


def test_averaged_metric_self_convergence():
    m = randers("0.3", "0")
    g256 = ind.averaged_metric(ind.trace_indicatrix(m, P0, n=256, spray=False)).gamma
    g512 = ind.averaged_metric(ind.trace_indicatrix(m, P0, n=512, spray=False)).gamma
    assert np.max(np.abs(g256 - g512)) < 1e-7


# -- source integrals -------------------------------------------------------------------


def test_source_integrals_vanish_for_minkowski(euclid_trace, randers_trace):
    for tr in (euclid_trace, randers_trace):
        src = ind.source_integrals(tr)
        assert np.max(np.abs(src.beta)) == 0.0
        assert np.max(np.abs(src.gammaInt)) == 0.0


def test_source_integrals_start_at_zero(trifocal_trace):
    for method in ("spectral", "trapezoid"):
        src = ind.source_integrals(trifocal_trace, method)
        assert np.all(src.beta[:, 0] == 0.0) and np.all(src.gammaInt[:, 0] == 0.0)
        assert np.all(np.isfinite(src.beta_at(trifocal_trace.period)))


def test_source_integrals_methods_agree(trifocal_trace):
    a = ind.source_integrals(trifocal_trace, "spectral")
    b = ind.source_integrals(trifocal_trace, "trapezoid")
    # the trapezoid rule is O(h^2) against the spectral integral
    h = trifocal_trace.period / trifocal_trace.n
    assert np.max(np.abs(a.beta - b.beta)) < 1.0 * h * h


def test_source_integrals_step_halving(trifocal, trifocal_trace):
    fine = ind.trace_indicatrix(trifocal, trifocal_trace.basePoint, step=5e-3)
    b0 = ind.source_integrals(trifocal_trace).beta_at(trifocal_trace.period)
    b1 = ind.source_integrals(fine).beta_at(fine.period)
    np.testing.assert_allclose(b1, b0, atol=1e-6)


def test_trace_csv(randers_trace):
    text = randers_trace.to_csv()
    lines = text.splitlines()
    assert lines[0] == "theta,y1,y2,lambda,w,alpha1,alpha2,omega1,omega2,mu"
    assert len(lines) == randers_trace.n + 2
