"""Compatible connections: recovery, torsion, Levi-Civita comparison, Wagner."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fslab import connection as cn
from fslab import indicatrix as ind
from fslab.errors import InconsistentConstants, NotMetrical, RiemannianCase
from fslab.metrics import euclidean, preset, randers

RANDERS_X = "randers:0.3*u2*u2,0"
RANDERS_PTS = np.array([[0.5, -0.4, 0.2, 0.3, 0.7], [0.5, 0.3, -0.6, 1.0, -0.2]])
WAGNER_IDX = [0, 2, 4, 6, 8]


@pytest.fixture(scope="module")
def randers_x_traces():
    return ind.trace_many(preset(RANDERS_X), RANDERS_PTS)


@pytest.fixture(scope="module")
def solve(trifocal_trace):
    return cn.solve_constants(trifocal_trace)


def _indicatrix_samples(trace):
    return np.repeat(trace.basePoint[:, None], trace.n, 1), trace.c[:, :-1]


# -- compatibility residual ------------------------------------------------------------


def test_compatibility_zero_connection():
    ang = np.linspace(0, 2 * np.pi, 32, endpoint=False)
    v = np.stack([np.cos(ang), np.sin(ang)])
    assert cn.compatibility_residual(euclidean(), cn.zero_connection(), np.zeros((2, 32)), v) == 0.0


def test_compatibility_nonzero_connection():
    G = np.zeros((2, 2, 2))
    G[0, 0, 0] = 1.0
    rng = np.random.default_rng(0)
    v = rng.normal(size=(2, 50))
    res = cn.compatibility_residual(euclidean(), cn.constant_connection(G), np.zeros((2, 50)), v)
    assert res == pytest.approx(np.max(np.abs(v[0] * v[0] / np.hypot(*v))), rel=1e-12)
    assert res > 0


def test_compatibility_closed_form(trifocal, closed_form, trifocal_traces):
    for tr in trifocal_traces:
        assert cn.compatibility_residual(trifocal, closed_form, *_indicatrix_samples(tr)) < 1e-5


# -- solving for the constants -----------------------------------------------------------


def test_euclidean_is_riemannian():
    tr = ind.trace_indicatrix(euclidean(), np.zeros(2))
    with pytest.raises(RiemannianCase) as exc:
        cn.solve_constants(tr)
    assert exc.value.solve.riemannianFlag
    assert exc.value.solve.conic_residual < 1e-8


def test_constants_consistent(solve):
    assert not solve.riemannianFlag
    assert len(solve.k_estimates[0]) == 9
    assert solve.spread < 1e-4
    assert solve.formula_residual < 1e-4


def test_f_matches_closed_form_connection(solve, closed_form, trifocal_trace):
    p = trifocal_trace.basePoint
    oracle = cn.f_from_connection(trifocal_trace, closed_form(p[0], p[1]))
    np.testing.assert_allclose(solve.fOnTrace, oracle, atol=1e-6)


def test_f_solves_first_order_equation(solve, trifocal_trace):
    tr = trifocal_trace
    d = tr.series(solve.fOnTrace * tr.w).derivative(tr.theta)
    np.testing.assert_allclose(d, tr.alpha, atol=1e-6)


def test_seed_independence(solve, trifocal_trace):
    k0 = 77
    other = cn.solve_constants(trifocal_trace.shifted(k0))
    moved = np.roll(solve.fOnTrace[:, :-1], -k0, axis=1)
    np.testing.assert_allclose(other.fOnTrace[:, :-1], moved, atol=1e-5)
    assert np.max(np.abs(other.k - solve.k)) > 1e-3  # the constants themselves move


def test_inconsistent_randers(randers_x_traces):
    for tr in randers_x_traces:
        with pytest.raises(InconsistentConstants):
            cn.solve_constants(tr)


def test_wag01_contraction(trifocal_traces):
    for tr in trifocal_traces:
        assert np.max(np.abs(np.einsum("ik,ik->k", tr.c, tr.alpha))) < 1e-6


# -- building the connection ------------------------------------------------------------------


def test_build_matches_closed_form(trifocal, solve, closed_form, trifocal_trace):
    p = trifocal_trace.basePoint
    built = cn.build_connection(trifocal, p, solve)
    np.testing.assert_allclose(built.Gamma, closed_form(p[0], p[1]), atol=1e-4)
    assert built.spread < 1e-4


def test_build_reference_fibers_agree(trifocal, solve, trifocal_trace):
    a = cn.build_connection(trifocal, trifocal_trace.basePoint, solve, reference=0).Gamma
    b = cn.build_connection(trifocal, trifocal_trace.basePoint, solve, reference=131).Gamma
    np.testing.assert_allclose(a, b, atol=1e-5)


def test_minkowski_connection_vanishes():
    m = randers("0.3", "0")
    tr = ind.trace_indicatrix(m, np.array([0.2, 0.1]))
    s = cn.solve_constants(tr)
    assert np.max(np.abs(s.fOnTrace)) == 0.0
    built = cn.build_connection(m, tr.basePoint, s)
    assert np.max(np.abs(built.Gamma)) == 0.0


def test_recovered_field_compatibility(trifocal, recovered_field):
    rng = np.random.default_rng(5)
    pts = rng.uniform(-0.9, 0.9, size=(2, 400))
    ang = rng.uniform(0, 2 * np.pi, 400)
    v = ind.seed_point(trifocal, pts, np.stack([np.cos(ang), np.sin(ang)]))
    assert cn.compatibility_residual(trifocal, recovered_field, pts, v) < 1e-4


def test_connection_field_json(recovered_field):
    d = json.loads(recovered_field.to_json())
    assert len(d["points"]) == 25
    assert np.asarray(d["Gamma"]).shape == (25, 2, 2, 2)


# -- torsion -------------------------------------------------------------------------------


def test_symmetric_connection_has_no_torsion():
    G = np.arange(8.0).reshape(2, 2, 2)
    G = G + np.swapaxes(G, 1, 2)
    np.testing.assert_allclose(cn.torsion_decompose(G).rho, 0.0)


def test_rotational_torsion(closed_form):
    t = cn.torsion_decompose(closed_form(1.0, 2.0))
    np.testing.assert_allclose(t.rho, [2.0, -1.0], atol=1e-15)


@given(arrays(np.float64, (2, 2, 2), elements=st.floats(-5, 5)))
@settings(max_examples=50, deadline=None)
def test_torsion_is_semi_symmetric(G):
    t = cn.torsion_decompose(G)
    assert t.residual < 1e-12
    np.testing.assert_allclose(cn.torsion_from_form(t.rho), t.T, atol=1e-12)


# -- Levi-Civita comparison -------------------------------------------------------------------------


def test_levi_civita_euclidean():
    rep = cn.levi_civita_compare(euclidean(), cn.zero_connection(), np.zeros(2))
    assert rep.identityResidual < 1e-10
    assert rep.metricityResidual < 1e-10
    np.testing.assert_allclose(rep.gamma, 2 * np.pi * np.eye(2), atol=1e-10)


def test_levi_civita_plane(trifocal, closed_form):
    for p in ([0.5, 0.5], [-0.3, 0.2]):
        rep = cn.levi_civita_compare(trifocal, closed_form, np.array(p))
        assert rep.identityResidual < 1e-4
        assert rep.metricityResidual < 1e-4


def test_levi_civita_rejects_incompatible(trifocal):
    with pytest.raises(NotMetrical):
        cn.levi_civita_compare(trifocal, cn.zero_connection(), np.array([0.5, 0.5]))


# -- Wagner and Landsberg --------------------------------------------------------------------------------


def test_wagner_trifocal(trifocal, trifocal_traces):
    traces = [trifocal_traces[i] for i in WAGNER_IDX]
    pts = np.stack([t.basePoint for t in traces], axis=1)
    rep = cn.wagner_test(trifocal, pts, traces=traces)
    assert rep.scatterResidual < 1e-3
    assert rep.pdeResidual < 1e-3
    assert rep.verdict == "ConsistentWithGeneralizedBerwald"
    assert rep.to_csv().startswith("A,dA\n")


def test_wagner_euclidean():
    with pytest.raises(RiemannianCase):
        cn.wagner_test(euclidean(), np.array([[0.0, 0.5], [0.0, 0.5]]))


def test_wagner_randers_disagrees(trifocal, trifocal_traces, randers_x_traces):
    base = cn.wagner_test(trifocal, np.zeros((2, 5)), traces=[trifocal_traces[i] for i in WAGNER_IDX])
    rep = cn.wagner_test(preset(RANDERS_X), RANDERS_PTS, traces=randers_x_traces)
    assert rep.scatterResidual > 10 * max(base.scatterResidual, 1e-6)
    assert rep.pdeResidual > 1e-3
    assert rep.verdict == "NotGeneralizedBerwald"


def test_landsberg_verdicts(trifocal):
    v = cn.landsberg_berwald_check(randers("0.3", "0"), np.array([0.2, 0.1]))
    assert v.name == "BerwaldConfirmed" and v.fMax < 1e-6
    assert cn.landsberg_berwald_check(euclidean(), np.zeros(2)).name == "BerwaldConfirmed"
    assert cn.landsberg_berwald_check(trifocal, np.array([0.5, 0.5])).name == "NotLandsberg"
