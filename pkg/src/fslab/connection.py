"""Compatible linear connections on Finsler surfaces.

The unique compatible connection of a non-Riemannian generalized Berwald
surface is recovered from indicatrix data.  Along the trace ``c_p`` the
functions ``f_i`` in ``Gamma^k_ij = G^k_ij + d(f_i V^k)/dy^j`` satisfy
``(f_i w)' = alpha_i``, so ``f_i = (beta_i + k_i) / w`` with
``beta_i = int alpha_i`` and constants ``k_i`` fixed by the integrated second
order condition

    gammaInt_i(s) + alpha_i(s) - alpha_i(0) - beta_i(s) lam(s)
        = k_i (lam(s) - lam(0)).

Fiber derivatives of the 1-homogeneous extension of ``f_i`` follow from the
Euler relation (radial direction) and ``f_i' = alpha_i / w - lam f_i``
(tangential direction).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .core import LineElementJets, _values
from .engines import default_engine
from .errors import (
    FiberDependence,
    InconsistentConstants,
    NotMetrical,
    RiemannianCase,
    SingularAveragedMetric,
)
from .indicatrix import IndicatrixTrace, averaged_metric_field, source_integrals, trace_many

RIEMANNIAN_RANGE = 1e-6


# -- connections -------------------------------------------------------------


@dataclass
class LinearConnection:
    """Coefficients ``Gamma[k, i, j]`` with ``nabla_{d_i} d_j = Gamma^k_ij d_k``."""

    func: object
    name: str = "connection"
    analytic: bool = False

    def __call__(self, u1, u2) -> np.ndarray:
        out = np.asarray(self.func(u1, u2), dtype=float)
        if not np.all(np.isfinite(out)):
            raise ValueError(f"{self.name} has non-finite coefficients")
        return out


def zero_connection() -> LinearConnection:
    return LinearConnection(
        lambda u1, u2: np.zeros((2, 2, 2) + np.broadcast(np.asarray(u1), np.asarray(u2)).shape),
        "zero",
        analytic=True,
    )


def constant_connection(G) -> LinearConnection:
    G = np.asarray(G, dtype=float).reshape(2, 2, 2)

    def f(u1, u2):
        shape = np.broadcast(np.asarray(u1), np.asarray(u2)).shape
        return np.broadcast_to(G.reshape((2, 2, 2) + (1,) * len(shape)), (2, 2, 2) + shape).copy()

    return LinearConnection(f, "constant", analytic=True)


def semi_symmetric_connection(rho, name: str = "semi-symmetric") -> LinearConnection:
    """``Gamma^k_ij = -rho_j delta^k_i + delta_ij rho^k`` (Euclidean raising)."""
    from .plane import closed_form_connection

    return LinearConnection(closed_form_connection(rho), name, analytic=True)


class ConnectionField(LinearConnection):
    """Connection sampled on a rectangular node grid, bicubic in between."""

    def __init__(self, u1_nodes, u2_nodes, gamma, name: str = "recovered"):
        self.u1 = np.asarray(u1_nodes, dtype=float)
        self.u2 = np.asarray(u2_nodes, dtype=float)
        self.gamma = np.asarray(gamma, dtype=float)  # (2, 2, 2, n1, n2)
        k = min(3, len(self.u1) - 1, len(self.u2) - 1)
        self._splines = [
            [[RectBivariateSpline(self.u1, self.u2, self.gamma[a, b, c], kx=k, ky=k) for c in range(2)] for b in range(2)]
            for a in range(2)
        ]
        super().__init__(self._eval, name, analytic=False)

    def _eval(self, u1, u2, d1: int = 0, d2: int = 0):
        u1, u2 = np.broadcast_arrays(np.asarray(u1, dtype=float), np.asarray(u2, dtype=float))
        out = np.empty((2, 2, 2) + u1.shape)
        for a in range(2):
            for b in range(2):
                for c in range(2):
                    out[a, b, c] = self._splines[a][b][c].ev(u1, u2, dx=d1, dy=d2)
        return out

    def derivative(self, u1, u2, axis: int) -> np.ndarray:
        return self._eval(u1, u2, int(axis == 0), int(axis == 1))

    def to_json(self) -> str:
        pts, gam = [], []
        for a, x in enumerate(self.u1):
            for b, y in enumerate(self.u2):
                pts.append([float(x), float(y)])
                gam.append(np.round(self.gamma[:, :, :, a, b], 12).tolist())
        return json.dumps({"points": pts, "Gamma": gam}, indent=1)


def compatibility_residual(m, conn: LinearConnection, points, vectors, engine=None) -> float:
    """``max |dF/dx^i - y^j Gamma^k_ij dF/dy^k|`` over the sample line elements."""
    engine = engine or default_engine(m)
    p = np.asarray(points, dtype=float)
    v = np.asarray(vectors, dtype=float)
    p, v = np.broadcast_arrays(p, v)
    jet = engine.jet(m, p, v, 1, wrt="xy")
    Fx = np.array([jet.partial(1, 0, 0, 0), jet.partial(0, 1, 0, 0)])
    Fy = np.array([jet.partial(0, 0, 1, 0), jet.partial(0, 0, 0, 1)])
    G = conn(p[0], p[1])
    res = Fx - np.einsum("j...,kij...,k...->i...", v, G, Fy)
    return float(np.max(np.abs(res)))


# -- recovery from the indicatrix ---------------------------------------------


@dataclass
class ConnectionSolve:
    """Integration constants and ``f_i`` along one trace."""

    basePoint: np.ndarray
    trace: IndicatrixTrace = field(repr=False)
    k: np.ndarray
    fOnTrace: np.ndarray
    riemannianFlag: bool
    spread: float = 0.0
    s_index: int = 0
    k_estimates: np.ndarray | None = None
    formula_residual: float = 0.0
    conic_residual: float | None = None

    @property
    def df(self) -> np.ndarray:
        """``f_i'`` along the trace."""
        tr = self.trace
        return tr.alpha / tr.w - tr.lam * self.fOnTrace


def conic_fit_residual(trace: IndicatrixTrace) -> float:
    """Algebraic residual of the best centred conic through the trace points."""
    y1, y2 = trace.c[0, :-1], trace.c[1, :-1]
    A = np.stack([y1 * y1, 2 * y1 * y2, y2 * y2], axis=1)
    coef, *_ = np.linalg.lstsq(A, np.ones_like(y1), rcond=None)
    return float(np.max(np.abs(A @ coef - 1.0)))


def _k_estimates(tr: IndicatrixTrace, beta, gam, s_idx):
    lam, a = tr.lam, tr.alpha
    num = gam[:, s_idx] + a[:, s_idx] - a[:, [0]] - beta[:, s_idx] * lam[s_idx]
    return num / (lam[s_idx] - lam[0])


def solve_constants(trace: IndicatrixTrace, src=None, n_checks: int = 8, tol: float | None = None) -> ConnectionSolve:
    """Constants ``k_i(p)`` and ``f_i`` along the trace.

    ``s`` is the grid point maximizing ``|lam(s) - lam(0)|``; ``n_checks``
    further admissible points (at least half that separation) give the
    spread.  The tolerance defaults to ``max(1e-6, 10 x self-convergence)``
    where the self-convergence error compares against the half-resolution
    trace.
    """
    src = src or source_integrals(trace)
    lam = trace.lam
    sep = np.abs(lam - lam[0])
    if np.ptp(lam) < RIEMANNIAN_RANGE:
        solve = ConnectionSolve(
            trace.basePoint, trace, np.zeros(2), np.zeros((2, len(lam))), True,
            conic_residual=conic_fit_residual(trace),
        )
        exc = RiemannianCase(f"main scalar is constant at p={trace.basePoint} (range {np.ptp(lam):.2e})")
        exc.solve = solve
        raise exc
    s0 = int(np.argmax(sep))
    admissible = np.flatnonzero(sep >= 0.5 * sep[s0])
    admissible = admissible[admissible != s0]
    pick = admissible[np.linspace(0, len(admissible) - 1, min(n_checks, len(admissible))).round().astype(int)]
    s_idx = np.concatenate([[s0], pick])
    est = _k_estimates(trace, src.beta, src.gammaInt, s_idx)
    k = est[:, 0]
    spread = float(np.max(np.abs(est - k[:, None])))
    # integrated relation along the whole trace
    num = src.gammaInt + trace.alpha - trace.alpha[:, [0]] - src.beta * lam
    resid = float(np.max(np.abs(num - k[:, None] * (lam - lam[0]))))
    if tol is None:
        half = _half_resolution_k(trace, s0)
        tol = max(1e-6, 10.0 * float(np.max(np.abs(half - k))))
    solve = ConnectionSolve(
        trace.basePoint, trace, k, (src.beta + k[:, None]) / trace.w, False, spread, s0, est, resid,
    )
    if spread > tol:
        raise InconsistentConstants(
            f"integration constants disagree at p={trace.basePoint}: spread {spread:.3g} > {tol:.3g}", spread
        )
    return solve


def _half_resolution_k(trace: IndicatrixTrace, s0: int) -> np.ndarray:
    """``k`` recomputed from every other sample (self-convergence estimate)."""
    if s0 % 2:
        s0 -= 1
    sub = slice(None, None, 2)
    half = IndicatrixTrace(
        trace.basePoint, trace.theta[sub], trace.c[:, sub], trace.lam[sub], trace.w[sub],
        trace.alpha[:, sub], trace.omega[:, sub], trace.mu[sub], trace.period, trace.g[..., sub],
    )
    src = source_integrals(half)
    return _k_estimates(half, src.beta, src.gammaInt, np.array([s0 // 2]))[:, 0]


@dataclass
class ConnectionAtPoint:
    """Recovered ``Gamma[k, i, j]`` at a base point and its fiber spread."""

    basePoint: np.ndarray
    Gamma: np.ndarray
    spread: float
    fiber_indices: np.ndarray
    perFiber: np.ndarray = field(repr=False)


def gamma_along_trace(solve: ConnectionSolve) -> np.ndarray:
    """``Gamma^k_ij`` evaluated at every trace sample, shape ``(2, 2, 2, N+1)``."""
    tr = solve.trace
    f, df = solve.fOnTrace, solve.df
    y, lam = tr.c, tr.lam
    dF, ddF, Gij = tr.extras["dF"], tr.extras["ddF"], tr.extras["Gij"]
    V = np.array([-dF[1], dF[0]])
    V0 = V / tr.w
    dV = np.array([-ddF[1], ddF[0]])  # dV[k, j] = dV^k/dy^j
    # gradient of f_i from Euler (along y) and the tangential derivative (along V0)
    M = np.stack([np.stack([y[0], y[1]], -1), np.stack([V0[0], V0[1]], -1)], -2)  # (N+1, 2, 2)
    rhs = np.stack([f, df], axis=1)  # (i, row, N+1)
    grad = np.linalg.solve(M[None], np.moveaxis(rhs, -1, 1)[..., None])[..., 0]  # (i, N+1, j)
    grad = np.moveaxis(grad, 1, -1)  # (i, j, N+1)
    return Gij + np.einsum("ij...,k...->kij...", grad, V) + np.einsum("i...,kj...->kij...", f, dV)


def build_connection(m, p, solve: ConnectionSolve, engine=None, n_fibers: int = 8, tol: float = 1e-4, reference: int = 0) -> ConnectionAtPoint:
    """Coefficients at ``p`` from the trace data, checked on ``n_fibers`` fibers.

    ``reference`` selects the trace sample whose value is reported.
    """
    if solve.riemannianFlag:
        raise RiemannianCase(f"no unique compatible connection at p={solve.basePoint}")
    G = gamma_along_trace(solve)
    n = solve.trace.n
    idx = (reference + np.arange(n_fibers) * n // n_fibers) % n
    per = G[..., idx]
    ref = G[..., reference % n]
    spread = float(np.max(np.abs(per - ref[..., None])))
    if spread > tol:
        raise FiberDependence(f"connection depends on the fiber at p={solve.basePoint}: spread {spread:.3g}", spread)
    return ConnectionAtPoint(np.asarray(p, dtype=float).reshape(2), ref, spread, idx, per)


def recover_connection(m, points, engine=None, n: int = 256, tol: float = 1e-4, traces=None):
    """Trace, solve and build at every base point; returns ``(results, traces)``."""
    points = np.asarray(points, dtype=float).reshape(2, -1)
    traces = traces or trace_many(m, points, engine, n)
    out = []
    for b, tr in enumerate(traces):
        solve = solve_constants(tr)
        out.append(build_connection(m, points[:, b], solve, engine, tol=tol))
    return out, traces


def connection_field(m, u1_nodes, u2_nodes, engine=None, n: int = 256, tol: float = 1e-4) -> ConnectionField:
    """Recovered connection on a node grid, interpolated bicubically."""
    U1, U2 = np.meshgrid(u1_nodes, u2_nodes, indexing="ij")
    pts = np.stack([U1.ravel(), U2.ravel()])
    res, _ = recover_connection(m, pts, engine, n, tol)
    gam = np.stack([r.Gamma for r in res], axis=-1).reshape((2, 2, 2) + U1.shape)
    return ConnectionField(u1_nodes, u2_nodes, gam, name=f"recovered:{m.name}")


def f_from_connection(trace: IndicatrixTrace, Gamma) -> np.ndarray:
    """``f_i = g(y^m Gamma_im - G_i, V) / g(V, V)`` for a known connection.

    ``Gamma[k, i, m]`` is taken at the base point; ``G^k_i`` come from the
    trace's spray data.
    """
    y, g = trace.c, trace.g
    dF = trace.extras["dF"]
    V = np.array([-dF[1], dF[0]])
    diff = np.einsum("m...,kim->ki...", y, np.asarray(Gamma)) - trace.extras["Gi"]
    gV = np.einsum("kl...,l...->k...", g, V)
    return np.einsum("ki...,k...->i...", diff, gV) / np.einsum("k...,k...->...", V, gV)


# -- torsion ------------------------------------------------------------------


@dataclass
class TorsionDecomposition:
    T: np.ndarray
    rho: np.ndarray
    residual: float


def torsion_decompose(Gamma) -> TorsionDecomposition:
    """``T^k_ij = Gamma^k_ij - Gamma^k_ji`` and ``rho = (T^2_12, -T^1_12)``."""
    G = np.asarray(Gamma, dtype=float)
    T = G - np.swapaxes(G, 1, 2)
    rho = np.array([T[1, 0, 1], -T[0, 0, 1]])
    residual = float(np.max(np.abs(T - torsion_from_form(rho))))
    return TorsionDecomposition(T, rho, residual)


def torsion_from_form(rho) -> np.ndarray:
    """``T^k_ij = rho_i delta^k_j - rho_j delta^k_i``."""
    rho = np.asarray(rho, dtype=float)
    eye = np.eye(2)
    return np.einsum("i...,kj->kij...", rho, eye) - np.einsum("j...,ki->kij...", rho, eye)


# -- comparison with the averaged Levi-Civita connection ---------------------


def _fd_weights():
    return np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0


def field_derivative(field_fn, p, h: float = 1e-2, richardson: bool = True) -> np.ndarray:
    """``d field / du^a`` at ``p`` as ``out[a, ...]``; field_fn maps (2, n) -> (..., n)."""
    p = np.asarray(p, dtype=float).reshape(2)
    offs, wts = _fd_weights()

    def deriv(step):
        pts = []
        for a in range(2):
            for o in offs:
                q = p.copy()
                q[a] += o * step
                pts.append(q)
        vals = np.asarray(field_fn(np.array(pts).T))
        vals = vals.reshape(vals.shape[:-1] + (2, len(offs)))
        return np.moveaxis(np.tensordot(vals, wts, axes=([-1], [0])) / step, -1, 0)

    d = deriv(h)
    if richardson:
        d = (16.0 * deriv(h / 2) - d) / 15.0
    return d


def christoffel(gamma, dgamma) -> np.ndarray:
    """Levi-Civita symbols ``Gs[k, i, j]`` from ``gamma[i, j]`` and ``dgamma[a, i, j]``."""
    gi = np.linalg.inv(gamma)
    # low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    low = 0.5 * (np.einsum("ijl->lij", dgamma) + np.einsum("jil->lij", dgamma) - dgamma)
    return np.einsum("kl,lij->kij", gi, low)


@dataclass
class ComparisonReport:
    basePoint: np.ndarray
    gamma: np.ndarray
    christoffel: np.ndarray
    rho: np.ndarray
    rhoSharp: np.ndarray
    predicted: np.ndarray
    identityResidual: float
    metricityResidual: float
    conformalFactorSpread: float


def levi_civita_compare(m, conn, p, engine=None, h: float = 1e-2, n: int = 256, tol: float = 1e-4, Gamma=None) -> ComparisonReport:
    """Check ``nabla = nabla* - rho(Y) X + gamma(X, Y) rho#`` and ``nabla gamma = 0``.

    ``gamma`` is the averaged metric (polar quadrature) and its derivatives
    come from a Richardson-extrapolated 5-point stencil of step ``h``.
    """
    p = np.asarray(p, dtype=float).reshape(2)
    engine = engine or default_engine(m)
    gfield = lambda pts: averaged_metric_field(m, pts, n, engine)
    gam = gfield(p.reshape(2, 1))[..., 0]
    if np.any(np.linalg.eigvalsh(gam) <= 0):
        raise SingularAveragedMetric(f"averaged metric not positive definite at {p}")
    dg = field_derivative(gfield, p, h)
    Gs = christoffel(gam, dg)
    G = np.asarray(conn(p[0], p[1]), dtype=float).reshape(2, 2, 2) if Gamma is None else np.asarray(Gamma)
    rho = torsion_decompose(G).rho
    rs = np.linalg.solve(gam, rho)
    eye = np.eye(2)
    pred = Gs - np.einsum("j,ki->kij", rho, eye) + np.einsum("ij,k->kij", gam, rs)
    ident = float(np.max(np.abs(G - pred)))
    nab = dg - np.einsum("mij,ml->ijl", G, gam) - np.einsum("mil,jm->ijl", G, gam)
    metr = float(np.max(np.abs(nab)) / np.max(np.abs(gam)))
    ratio = gam / gam[0, 0]
    cf = float(np.max(np.abs(ratio - np.eye(2))))
    report = ComparisonReport(p, gam, Gs, rho, rs, pred, ident, metr, cf)
    if metr > tol:
        raise NotMetrical(f"connection is not metrical for the averaged metric at {p}: {metr:.3g}")
    return report


# -- Wagner's criterion -------------------------------------------------------


def _branches(series, n_dense: int = 4096):
    """Monotone pieces ``[(t0, t1, sign)]`` of a periodic scalar series."""
    L = series.period
    t = np.linspace(0.0, L, n_dense, endpoint=False)
    d = series.derivative(t)
    s = np.sign(d)
    idx = np.flatnonzero(s != np.roll(s, -1))
    ext = []
    for i in idx:
        a, b = t[i], t[i] + L / n_dense
        for _ in range(60):
            mid = 0.5 * (a + b)
            if np.sign(series.derivative(mid)) == s[i]:
                a = mid
            else:
                b = mid
        ext.append(0.5 * (a + b))
    if not ext:
        return []
    ext = sorted(ext)
    out = []
    for k, t0 in enumerate(ext):
        t1 = ext[(k + 1) % len(ext)] + (L if k + 1 == len(ext) else 0.0)
        sign = np.sign(series.derivative(0.5 * (t0 + t1)))
        out.append((t0, t1, sign))
    return out


def _branch_profile(series, t0, t1, sign, A):
    """``dA`` on a monotone branch at the main-scalar values ``A``."""
    a = np.full_like(A, t0)
    b = np.full_like(A, t1)
    for _ in range(60):
        mid = 0.5 * (a + b)
        below = (series(mid) - A) * sign < 0
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    return series.derivative(0.5 * (a + b))


@dataclass
class WagnerReport:
    basePoints: np.ndarray
    scatterResidual: float
    pdeResidual: float
    scatter: np.ndarray = field(repr=False)
    verdict: str = ""

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["A", "dA"])
        for a, b in self.scatter.T:
            w.writerow([f"{a:.12e}", f"{b:.12e}"])
        return buf.getvalue()


def _scatter_distance(ref, other, n_levels: int, trim: float) -> float:
    """Largest gap from ``other``'s scatter branches to the nearest ``ref`` branch."""
    worst = 0.0
    for s, t0, t1, sign, lo, hi in other:
        span = hi - lo
        A = np.linspace(lo + trim * span, hi - trim * span, n_levels)
        prof = _branch_profile(s, t0, t1, sign, A)
        best = np.full_like(A, np.inf)
        for r in ref:
            if r[3] != sign:
                continue
            inside = (A >= r[4]) & (A <= r[5])
            if np.any(inside):
                best[inside] = np.minimum(best[inside], np.abs(_branch_profile(r[0], r[1], r[2], r[3], A[inside]) - prof[inside]))
        miss = ~np.isfinite(best)
        if np.any(miss):
            # levels the reference never reaches: distance to its dense scatter curve
            ts = np.linspace(0.0, ref[0][0].period, 2048, endpoint=False)
            cloud = np.stack([ref[0][0](ts), ref[0][0].derivative(ts)])
            pt = np.stack([A[miss], prof[miss]])
            best[miss] = np.min(np.hypot(pt[0][:, None] - cloud[0], pt[1][:, None] - cloud[1]), axis=1)
        worst = max(worst, float(np.max(best)))
    return worst


def wagner_test(m, basePoints, engine=None, n: int = 256, traces=None, threshold: float = 1e-3, n_levels: int = 64, trim: float = 0.02) -> WagnerReport:
    """Scatter collapse of ``(A, dA/dtheta)`` and the direct PDE residual.

    Each trace contributes a closed scatter curve split into monotone
    branches.  Every branch is compared with the nearest branch of the same
    monotonicity from the first trace on their common range of ``A``
    (trimmed by ``trim`` of the range at both ends); the residual is the
    largest such gap, so the curves must coincide as point sets.
    """
    pts = np.asarray(basePoints, dtype=float).reshape(2, -1)
    traces = traces or trace_many(m, pts, engine, n)
    if all(np.ptp(tr.lam) < RIEMANNIAN_RANGE for tr in traces):
        raise RiemannianCase("main scalar vanishes at every base point; the test is vacuous")
    per_trace = []
    scatter = []
    pde = 0.0
    for tr in traces:
        s = tr.series(tr.lam)
        scatter.append(np.stack([tr.lam, tr.dlam]))
        pde = max(pde, float(np.max(np.abs(tr.extras["wagner"]))))
        br = []
        for t0, t1, sign in _branches(s):
            lo, hi = sorted((float(s(t0)), float(s(t1))))
            br.append((s, t0, t1, float(sign), lo, hi))
        per_trace.append(br)
    resid = 0.0
    ref = next(br for br in per_trace if br)
    for br in per_trace:
        if not br:
            resid = np.inf  # constant main scalar next to a varying one
            continue
        resid = max(resid, _scatter_distance(ref, br, n_levels, trim), _scatter_distance(br, ref, n_levels, trim))
    ok = resid < threshold and pde < threshold
    verdict = "ConsistentWithGeneralizedBerwald" if ok else "NotGeneralizedBerwald"
    return WagnerReport(pts, float(resid), pde, np.concatenate(scatter, axis=1), verdict)


# -- Landsberg implies Berwald -------------------------------------------------


@dataclass
class Verdict:
    name: str
    alphaMax: float
    fMax: float | None = None
    gammaVsCanonical: float | None = None
    detail: str = ""


def landsberg_berwald_check(m, p, engine=None, n: int = 256, tol: float = 1e-6, neighbours: float = 0.3) -> Verdict:
    """Classify ``p`` as ``NotLandsberg``, ``BerwaldConfirmed`` or ``Violation``."""
    p = np.asarray(p, dtype=float).reshape(2)
    pts = np.stack([p, p + [neighbours, 0.0], p + [0.0, neighbours]], axis=1)
    traces = trace_many(m, pts, engine, n)
    tr = traces[0]
    amax = float(np.max(np.abs(tr.alpha)))
    if amax >= tol:
        return Verdict("NotLandsberg", amax)
    if np.ptp(tr.lam) < RIEMANNIAN_RANGE:
        calc = LineElementJets.at(m, np.broadcast_to(p[:, None], tr.c.shape), tr.c, engine)
        gmax = float(np.max(np.abs(_values(calc.Gijk))))
        name = "BerwaldConfirmed" if gmax < tol else "Violation"
        return Verdict(name, amax, 0.0, gmax, "Riemannian: Landsberg and Berwald coincide")
    try:
        w = wagner_test(m, pts, engine, n, traces=traces)
    except RiemannianCase:
        w = None
    if w is not None and w.verdict != "ConsistentWithGeneralizedBerwald":
        return Verdict("NotLandsberg", amax, detail="Landsberg but not generalized Berwald")
    solve = solve_constants(tr)
    fmax = float(np.max(np.abs(solve.fOnTrace)))
    G = gamma_along_trace(solve)
    canon = tr.extras["Gij"]
    gdev = float(np.max(np.abs(G - canon)))
    ok = fmax < tol and gdev < tol
    return Verdict("BerwaldConfirmed" if ok else "Violation", amax, fmax, gdev)
