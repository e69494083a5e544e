"""Indicatrix curves in central affine arcwise parametrization.

The indicatrix at ``p`` is traced as the integral curve of ``V0`` starting at
``seed_point(p, (1, 0))``.  Along it we sample the main scalar ``lambda``,
``w = sqrt(g(V, V))``, the Landsberg contractions ``alpha_i``, the spray terms
``omega_i`` and the induced measure.  Several base points are traced at once
(the batch axis is the base point).

Periodic data on a uniform parameter grid is integrated and interpolated
spectrally (trigonometric interpolation), which is exact to rounding for the
smooth closed curves we deal with.  A trapezoid/cubic-spline path is kept for
comparison.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .core import LineElementJets, _values
from .engines import default_engine
from .errors import NoClosure, SingularMetric

CLOSURE_TOL = 1e-6


def seed_point(m, p, direction=(1.0, 0.0)) -> np.ndarray:
    """``direction / F(p, direction)``: a point on the indicatrix at ``p``."""
    p = np.asarray(p, dtype=float)
    d = np.asarray(direction, dtype=float)
    d = np.broadcast_to(d.reshape((2,) + (1,) * (p.ndim - 1)), p.shape) if d.ndim == 1 else d
    if np.any(np.hypot(d[0], d[1]) < 1e-12):
        raise ValueError("seed direction must be nonzero")
    F = np.asarray(m(p, d), dtype=float)
    if np.any(~np.isfinite(F)) or np.any(F <= 0.0):
        raise SingularMetric("F <= 0 along the seed direction")
    return d / F


# -- periodic series ---------------------------------------------------------


class PeriodicSeries:
    """Trigonometric interpolant of samples ``f[..., k] = f(k L / N)``."""

    def __init__(self, samples, period: float):
        f = np.asarray(samples, dtype=float)
        self.n = f.shape[-1]
        self.period = float(period)
        F = np.fft.rfft(f, axis=-1) / self.n
        c = 2.0 * F
        c[..., 0] = F[..., 0]
        if self.n % 2 == 0:
            c[..., -1] = F[..., -1]
        self.coef = c
        self.omega = 2.0 * np.pi * np.arange(c.shape[-1]) / self.period

    @property
    def mean(self) -> np.ndarray:
        return self.coef[..., 0].real

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        e = np.exp(1j * np.multiply.outer(t, self.omega))
        return np.real(np.tensordot(self.coef, e, axes=([-1], [-1])))

    def derivative(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        w = 1j * self.omega
        if self.n % 2 == 0:
            w = w.copy()
            w[-1] = 0.0
        e = np.exp(1j * np.multiply.outer(t, self.omega)) * w
        return np.real(np.tensordot(self.coef, e, axes=([-1], [-1])))

    def cumulative(self, t) -> np.ndarray:
        """``int_0^t f``; the mean contributes linearly."""
        t = np.asarray(t, dtype=float)
        om = self.omega[1:]
        e = (np.exp(1j * np.multiply.outer(t, om)) - 1.0) / (1j * om)
        osc = np.real(np.tensordot(self.coef[..., 1:], e, axes=([-1], [-1])))
        return np.multiply.outer(self.mean, t) + osc


# -- polar quadrature oracle -------------------------------------------------


@dataclass
class PolarQuadrature:
    """Indicatrix integrals computed in the polar angle ``phi`` of ``T_pM``.

    On ``u = (cos phi, sin phi)`` the curve point is ``u / F(u)`` and
    ``mu = sqrt(det g) / F^2 dphi``, so no curve integration is needed.
    """

    period: np.ndarray
    gamma: np.ndarray
    n: int


def polar_quadrature(m, points, n: int = 256, engine=None) -> PolarQuadrature:
    points = np.asarray(points, dtype=float)
    engine = engine or default_engine(m)
    phi = 2.0 * np.pi * np.arange(n) / n
    batch = points.shape[1:]
    P = np.broadcast_to(points[..., None], points.shape + (n,))
    U = np.broadcast_to(
        np.stack([np.cos(phi), np.sin(phi)]).reshape((2,) + (1,) * len(batch) + (n,)), P.shape
    )
    calc = LineElementJets(engine.jet(m, P, U, 2, wrt="y"), P, U)
    det = calc.detg.value
    if np.any(det <= 0.0):
        raise SingularMetric("det g <= 0 on the polar grid")
    dens = np.sqrt(det) / calc.F.value**2 * (2.0 * np.pi / n)
    g = _values(calc.g)
    return PolarQuadrature(dens.sum(-1), np.sum(g * dens, axis=-1), n)


def averaged_metric_field(m, points, n: int = 256, engine=None) -> np.ndarray:
    """``gamma_ij`` at each base point via the polar quadrature, shape ``(2, 2, *batch)``."""
    return polar_quadrature(m, points, n, engine).gamma


# -- traces ------------------------------------------------------------------


@dataclass
class IndicatrixTrace:
    """A sampled indicatrix in the central affine parameter.

    Arrays carry the sample axis last with ``N + 1`` samples, the last one
    at ``theta = period`` (the closing point).  ``mu`` holds closed-curve
    quadrature weights of the induced measure.
    """

    basePoint: np.ndarray
    theta: np.ndarray
    c: np.ndarray
    lam: np.ndarray
    w: np.ndarray
    alpha: np.ndarray | None
    omega: np.ndarray | None
    mu: np.ndarray
    period: float
    g: np.ndarray
    dlam: np.ndarray | None = None
    closure: float = 0.0
    F_drift: float = 0.0
    predicted_period: float = 0.0
    step: float = 0.0
    extras: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.theta) - 1

    def series(self, values) -> PeriodicSeries:
        return PeriodicSeries(np.asarray(values)[..., :-1], self.period)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["theta", "y1", "y2", "lambda", "w", "alpha1", "alpha2", "omega1", "omega2", "mu"])
        a = self.alpha if self.alpha is not None else np.zeros((2, self.n + 1))
        o = self.omega if self.omega is not None else np.zeros((2, self.n + 1))
        for k in range(self.n + 1):
            row = [self.theta[k], self.c[0, k], self.c[1, k], self.lam[k], self.w[k], a[0, k], a[1, k], o[0, k], o[1, k], self.mu[k]]
            wr.writerow([f"{x:.12e}" for x in row])
        return buf.getvalue()

    def shifted(self, k0: int) -> "IndicatrixTrace":
        """The same curve with its start moved to sample ``k0``."""
        n = self.n
        idx = (np.arange(n + 1) + k0) % n

        def roll(a):
            return None if a is None else np.asarray(a)[..., idx]

        weights = np.full(n + 1, self.period / n)
        weights[0] = weights[-1] = 0.5 * self.period / n
        mu = roll(self.mu / weights) * weights

        return IndicatrixTrace(
            self.basePoint, self.theta, roll(self.c), roll(self.lam), roll(self.w), roll(self.alpha),
            roll(self.omega), mu, self.period, roll(self.g), roll(self.dlam), self.closure,
            self.F_drift, self.predicted_period, self.step,
            {k: roll(v) for k, v in self.extras.items()},
        )


def _v0(m, engine, P, Y):
    calc = LineElementJets(engine.jet(m, P, Y, 2, wrt="y"), P, Y)
    if np.any(calc.detg.value <= 0.0):
        raise SingularMetric("det g <= 0 along the trace")
    return _values(calc.V0)


def _rk4_pass(m, engine, P, seed, L, n, nsub):
    """Integrate ``c' = V0(c)`` over one predicted period with fixed steps."""
    h = L / (n * nsub)
    out = np.empty(seed.shape + (n + 1,))
    Y = seed.copy()
    out[..., 0] = Y
    for k in range(n):
        for _ in range(nsub):
            k1 = _v0(m, engine, P, Y)
            k2 = _v0(m, engine, P, Y + 0.5 * h * k1)
            k3 = _v0(m, engine, P, Y + 0.5 * h * k2)
            k4 = _v0(m, engine, P, Y + h * k3)
            Y = Y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[..., k + 1] = Y
    return out, h


def trace_many(m, points, engine=None, n: int = 256, step: float = 1e-2, theta_max=None, spray: bool = True, polar_n: int = 256) -> list[IndicatrixTrace]:
    """Trace the indicatrices at several base points together.

    The step is ``L / (n * nsub)`` with ``nsub`` chosen so that it does not
    exceed ``step``; ``L`` is predicted by the polar quadrature.  Closure is
    detected by one Newton step on the return map across the seed's tangent
    line; if the detected period differs from the prediction the pass is
    repeated once with the detected value.
    """
    engine = engine or default_engine(m)
    P = np.asarray(points, dtype=float).reshape(2, -1)
    B = P.shape[1]
    seed = seed_point(m, P)
    L = polar_quadrature(m, P, polar_n, engine).period
    L_pred = L.copy()
    if theta_max is not None and np.any(L > theta_max):
        raise NoClosure(f"indicatrix does not close within theta_max={theta_max}")
    t0 = _v0(m, engine, P, seed)
    nsub = max(1, int(np.ceil(np.max(L) / (n * step))))
    for attempt in range(2):
        curve, h = _rk4_pass(m, engine, P, seed, L, n, nsub)
        end = curve[..., -1]
        t_end = _v0(m, engine, P, end)
        gap = end - seed
        delta = -np.sum(gap * t0, axis=0) / np.sum(t_end * t0, axis=0)
        closure = np.hypot(*(gap + delta * t_end))
        if np.any(~np.isfinite(closure)) or np.any(closure > CLOSURE_TOL) or np.any(L + delta <= 1.0):
            bad = int(np.argmax(np.where(np.isfinite(closure), closure, np.inf)))
            raise NoClosure(f"trace at p={P[:, bad]} misses its seed by {closure[bad]:.3g}")
        period = L + delta
        if np.all(np.abs(delta) < 1e-10 * L):
            break
        L = period
    # sample quantities on the uniform grid
    Pn = np.broadcast_to(P[..., None], curve.shape)
    order = 5 if spray and m.x_dependent else 4
    wrt = "xy" if spray and m.x_dependent else "y"
    calc = LineElementJets(engine.jet(m, Pn, curve, order, wrt=wrt), Pn, curve)
    lam = calc.lam.value
    w = calc.w.value
    g = _values(calc.g)
    dlam = calc.vf_V0(calc.lam).value
    Fv = calc.F.value
    V0 = _values(calc.V0)
    dens = np.sqrt(calc.detg.value) * (curve[0] * V0[1] - curve[1] * V0[0]) / Fv
    extras = {"dF": _values(calc.dF), "ddF": _values(calc.ddF)}
    if spray and m.x_dependent:
        alpha, omega = _values(calc.alpha), _values(calc.omega)
        extras["Gij"] = _values(calc.Gij)
        extras["Gi"] = _values(calc.Gi)
        lam1 = calc.vf_V0(calc.lam)
        lam2 = calc.vf_V0(lam1)
        extras["wagner"] = np.array(
            [(lam1 * calc.horizontal(i, lam1) - lam2 * calc.horizontal(i, calc.lam)).value for i in (0, 1)]
        )
    else:
        alpha = np.zeros((2,) + lam.shape)
        omega = np.zeros((2,) + lam.shape)
        extras["Gij"] = np.zeros((2, 2, 2) + lam.shape)
        extras["Gi"] = np.zeros((2, 2) + lam.shape)
        extras["wagner"] = np.zeros((2,) + lam.shape)
    traces = []
    for b in range(B):
        hq = period[b] / n
        weights = np.full(n + 1, hq)
        weights[0] = weights[-1] = 0.5 * hq
        tr = IndicatrixTrace(
            basePoint=P[:, b].copy(),
            theta=np.arange(n + 1) * (period[b] / n),
            c=curve[:, b],
            lam=lam[b],
            w=w[b],
            alpha=alpha[:, b],
            omega=omega[:, b],
            mu=dens[b] * weights,
            period=float(period[b]),
            g=g[:, :, b],
            dlam=dlam[b],
            closure=float(closure[b]),
            F_drift=float(np.max(np.abs(Fv[b] - 1.0))),
            predicted_period=float(L_pred[b]),
            step=float(h[b]),
            extras={k: v[..., b, :] for k, v in extras.items()},
        )
        traces.append(tr)
    return traces


def trace_indicatrix(m, p, seed=None, engine=None, n: int = 256, step: float = 1e-2, theta_max=None, spray: bool = True) -> IndicatrixTrace:
    """Trace one indicatrix; ``seed`` must be ``seed_point(m, p)`` or omitted.

    A different start on the same curve is obtained with
    :meth:`IndicatrixTrace.shifted`.
    """
    p = np.asarray(p, dtype=float).reshape(2, 1)
    if seed is not None:
        ref = seed_point(m, p)[:, 0]
        if np.hypot(*(np.asarray(seed, dtype=float) - ref)) > 1e-9:
            raise ValueError("trace_indicatrix starts at seed_point(p, (1, 0)); use shifted() for other starts")
    return trace_many(m, p, engine, n, step, theta_max, spray)[0]


# -- averaging and cumulative integrals -------------------------------------


@dataclass
class AveragedMetric:
    gamma: np.ndarray
    mass: float

    @property
    def positive_definite(self) -> bool:
        return bool(np.all(np.linalg.eigvalsh(self.gamma) > 0))


def averaged_metric(trace: IndicatrixTrace) -> AveragedMetric:
    """``gamma_ij = sum_k g_ij(c_k) mu_k`` over the closed trace."""
    if trace.period <= 0:
        raise NoClosure("trace has no period")
    gamma = np.einsum("ijk,k->ij", trace.g, trace.mu)
    gamma = 0.5 * (gamma + gamma.T)
    return AveragedMetric(gamma, float(trace.mu.sum()))


@dataclass
class SourceIntegrals:
    """``beta_i(t) = int_0^t alpha_i`` and ``gammaInt_i(s) = int_0^s omega_i``.

    Sampled on the trace grid and evaluable at any ``t`` in ``[0, period]``.
    """

    theta: np.ndarray
    beta: np.ndarray
    gammaInt: np.ndarray
    method: str
    _beta_at: object = field(repr=False, default=None)
    _gamma_at: object = field(repr=False, default=None)

    def beta_at(self, t):
        return self._beta_at(t)

    def gamma_at(self, t):
        return self._gamma_at(t)


def source_integrals(trace: IndicatrixTrace, method: str = "spectral") -> SourceIntegrals:
    """Cumulative integrals of ``alpha`` and ``omega`` along the trace."""
    if method == "spectral":
        sa, so = trace.series(trace.alpha), trace.series(trace.omega)
        b_at, g_at = sa.cumulative, so.cumulative
    elif method == "trapezoid":
        h = np.diff(trace.theta)

        def cum(f):
            return np.concatenate([np.zeros(f.shape[:-1] + (1,)), np.cumsum(0.5 * h * (f[..., 1:] + f[..., :-1]), axis=-1)], axis=-1)

        b_at = CubicSpline(trace.theta, cum(trace.alpha), axis=-1)
        g_at = CubicSpline(trace.theta, cum(trace.omega), axis=-1)
    else:
        raise ValueError(f"unknown integration method {method!r}")
    return SourceIntegrals(trace.theta, b_at(trace.theta), g_at(trace.theta), method, b_at, g_at)
