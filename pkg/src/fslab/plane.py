"""Generalized Berwald planes from a divergence-free 1-form and a seed curve.

On the Euclidean plane a 1-form ``rho`` with divergence-free dual defines a
flat, metrical, semi-symmetric connection whose parallel transport rotates
vectors by ``-(f(q) - f(p))`` with ``rho_2 = df/du1``, ``rho_1 = -df/du2``.
Translating a convex seed curve around the origin by this transport yields a
Finsler metric for which the connection is compatible.

The construction is evaluated exactly: ``F(p, v) = F0(Rot(f(p) - f(0)) v)``
where ``F0`` is the gauge of the seed.  The gauge is a ray root find on
floats and a chord iteration on jets (implicit function theorem), so the
resulting metric works with both differentiation engines.
"""

from __future__ import annotations

import configparser
import csv
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import ConfigError, NotDivergenceFree, RootBracketFailure
from .expr import Expression
from .jets import Jet, basis, jet_value
from .metrics import MetricField

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)
_GL_NODES = 0.5 * (_GL_NODES + 1.0)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS


def rotate(angle, v1, v2):
    """Counterclockwise rotation of ``(v1, v2)``; works on jets."""
    c, s = np.cos(angle), np.sin(angle)
    return c * v1 - s * v2, s * v1 + c * v2


# -- 1-forms and their potentials --------------------------------------------


@dataclass(frozen=True)
class OneFormField:
    """``rho = rho1 du1 + rho2 du2`` given by callables of ``(u1, u2)``.

    ``potential`` is optional; when given it must satisfy
    ``rho2 = df/du1`` and ``rho1 = -df/du2``.
    """

    rho1: Callable
    rho2: Callable
    name: str = "rho"
    potential_func: Callable | None = None

    def __call__(self, u1, u2):
        return self.rho1(u1, u2), self.rho2(u1, u2)

    def divergence(self, u1, u2) -> np.ndarray:
        """Euclidean divergence of the dual vector field ``(rho1, rho2)``."""
        x1, x2 = Jet.variables([u1, u2], 1)
        r1, r2 = self(x1, x2)
        return _partial(r1, 1, 0) + _partial(r2, 0, 1)

    def exterior_derivative(self, u1, u2) -> np.ndarray:
        """Component of ``d rho = (d1 rho2 - d2 rho1) du1 ^ du2``."""
        x1, x2 = Jet.variables([u1, u2], 1)
        r1, r2 = self(x1, x2)
        return _partial(r2, 1, 0) - _partial(r1, 0, 1)


def _partial(j, a, b):
    if not isinstance(j, Jet):
        return np.zeros(np.shape(j))
    return j.partial(a, b)


def zero_form() -> OneFormField:
    zero = lambda u1, u2: 0.0 * u1
    return OneFormField(zero, zero, "zero", potential_func=lambda u1, u2: 0.0 * u1)


def rotational_form() -> OneFormField:
    """``rho = u2 du1 - u1 du2`` with potential ``-(u1^2 + u2^2)/2``."""
    return OneFormField(
        lambda u1, u2: u2 * 1.0,
        lambda u1, u2: -u1 * 1.0,
        "u2*du1-u1*du2",
        potential_func=lambda u1, u2: -0.5 * (u1 * u1 + u2 * u2),
    )


def form_from_expressions(rho1: str, rho2: str) -> OneFormField:
    e1, e2 = Expression(rho1), Expression(rho2)
    for e in (e1, e2):
        if set(e.variables) - {"u1", "u2"}:
            raise ConfigError(f"1-form components may only use u1, u2: {e.source!r}")
    return OneFormField(
        lambda u1, u2: e1(u1=u1, u2=u2) + 0.0 * u1,
        lambda u1, u2: e2(u1=u1, u2=u2) + 0.0 * u1,
        f"{e1.source}*du1+{e2.source}*du2",
    )


def _line_potential(rho: OneFormField, p1, p2, o1=0.0, o2=0.0, first: int = 0):
    """Line integral of the rotated field along an axis-aligned two-segment path.

    ``first = 0`` moves along u1 first, ``first = 1`` along u2 first.  Uses
    Gauss-Legendre quadrature, so jets pass through.
    """
    total = 0.0
    if first == 0:
        d1 = p1 - o1
        for s, w in zip(_GL_NODES, _GL_WEIGHTS):
            total = total + w * d1 * rho.rho2(o1 + s * d1, o2 + 0.0 * d1)
        d2 = p2 - o2
        for s, w in zip(_GL_NODES, _GL_WEIGHTS):
            total = total - w * d2 * rho.rho1(p1 + 0.0 * d2, o2 + s * d2)
    else:
        d2 = p2 - o2
        for s, w in zip(_GL_NODES, _GL_WEIGHTS):
            total = total - w * d2 * rho.rho1(o1 + 0.0 * d2, o2 + s * d2)
        d1 = p1 - o1
        for s, w in zip(_GL_NODES, _GL_WEIGHTS):
            total = total + w * d1 * rho.rho2(o1 + s * d1, p2 + 0.0 * d1)
    return total


@dataclass
class Potential:
    """Scalar potential ``f`` of a divergence-free 1-form, ``f(origin) = 0``."""

    rho: OneFormField
    origin: tuple = (0.0, 0.0)
    path_discrepancy: float = 0.0

    def __call__(self, u1, u2):
        o1, o2 = self.origin
        if self.rho.potential_func is not None:
            return self.rho.potential_func(u1, u2) - self.rho.potential_func(o1, o2)
        return _line_potential(self.rho, u1, u2, o1, o2, first=0)


def potential(rho: OneFormField, origin=(0.0, 0.0), check_radius: float = 2.0, tol: float = 1e-6) -> Potential:
    """Potential of ``rho`` by line integration, verified on a second path.

    Raises :class:`NotDivergenceFree` when the two axis-aligned paths disagree
    by more than ``tol`` on a sample grid of half-width ``check_radius``.
    """
    o1, o2 = float(origin[0]), float(origin[1])
    g = np.linspace(-check_radius, check_radius, 7)
    U1, U2 = np.meshgrid(g + o1, g + o2, indexing="ij")
    a = _line_potential(rho, U1, U2, o1, o2, first=0)
    b = _line_potential(rho, U1, U2, o1, o2, first=1)
    gap = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
    if gap > tol:
        raise NotDivergenceFree(f"potential of {rho.name} is path dependent (gap {gap:.3g})")
    pot = Potential(rho, (o1, o2), gap)
    if rho.potential_func is not None:
        given = pot(U1, U2)
        err = float(np.max(np.abs(np.asarray(given) - np.asarray(a))))
        if err > tol:
            raise NotDivergenceFree(f"declared potential of {rho.name} is inconsistent (gap {err:.3g})")
    return pot


# -- parallel transport -------------------------------------------------------


@dataclass
class TransportedVector:
    """A parallel field along a curve: ODE samples next to the rotation form."""

    t: np.ndarray
    X: np.ndarray
    closed: np.ndarray
    r0: float
    phi: np.ndarray
    phi0: float

    @property
    def ode_vs_closed(self) -> float:
        return float(np.max(np.hypot(*(self.X - self.closed))))

    @property
    def norm_drift(self) -> float:
        return float(np.max(np.abs(np.hypot(*self.X) - self.r0)))

    @property
    def closed_norm_drift(self) -> float:
        return float(np.max(np.abs(np.hypot(*self.closed) - self.r0)))


def _curve_velocity(c, t, h=1e-3):
    return (c(t - 2 * h) - 8 * c(t - h) + 8 * c(t + h) - c(t + 2 * h)) / (12 * h)


def transport(rho: OneFormField, c, X0, tGrid, dc=None, max_step: float = 1e-3, pot: Potential | None = None) -> TransportedVector:
    """Parallel transport of ``X0`` along ``c`` with RK4 on the transport ODE.

    ``c(t)`` returns a length-2 array (vectorized in ``t``); ``dc`` is its
    velocity (fourth-order differences when omitted).  The closed rotation
    form ``r0 (cos(phi + phi0), -sin(phi + phi0))`` with ``phi = f o c`` is
    evaluated alongside.
    """
    tGrid = np.asarray(tGrid, dtype=float)
    dc = dc or (lambda t: _curve_velocity(c, t))
    X0 = np.asarray(X0, dtype=float)

    def rhs(t, X):
        u = np.asarray(c(t), dtype=float)
        du = np.asarray(dc(t), dtype=float)
        r1, r2 = rho(u[0], u[1])
        k = du[0] * r2 - du[1] * r1
        return np.array([X[1] * k, -X[0] * k])

    out = np.empty((2, len(tGrid)))
    out[:, 0] = X0
    X = X0.copy()
    for n in range(1, len(tGrid)):
        a, b = tGrid[n - 1], tGrid[n]
        m = max(1, int(np.ceil(abs(b - a) / max_step - 1e-9)))
        h = (b - a) / m
        t = a
        for _ in range(m):
            k1 = rhs(t, X)
            k2 = rhs(t + h / 2, X + h / 2 * k1)
            k3 = rhs(t + h / 2, X + h / 2 * k2)
            k4 = rhs(t + h, X + h * k3)
            X = X + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = a + (_ + 1) * h
        out[:, n] = X
    pot = pot or potential(rho)
    pts = np.asarray(c(tGrid), dtype=float)
    phi = np.asarray(pot(pts[0], pts[1]), dtype=float) * np.ones(len(tGrid))
    r0 = float(np.hypot(*X0))
    phi0 = float(np.arctan2(-X0[1], X0[0]) - phi[0])
    closed = r0 * np.array([np.cos(phi + phi0), -np.sin(phi + phi0)])
    return TransportedVector(tGrid, out, closed, r0, phi, phi0)


def holonomy_check(rho: OneFormField, loop, X0, n: int = 2000, dloop=None) -> float:
    """``|X(1) - X(0)|`` after RK4 transport around ``loop`` on ``[0, 1]``."""
    tv = transport(rho, loop, X0, np.linspace(0.0, 1.0, n + 1), dc=dloop, max_step=1.0 / n)
    return float(np.hypot(*(tv.X[:, -1] - tv.X[:, 0])))


def transport_from_origin(rho: OneFormField, p, X0=(1.0, 0.0), first: int = 0, max_step: float = 1e-3) -> np.ndarray:
    """Transport ``X0`` from the origin to ``p`` along an axis-aligned path (ODE)."""
    p = np.asarray(p, dtype=float)
    X = np.asarray(X0, dtype=float)
    corner = np.array([p[0], 0.0]) if first == 0 else np.array([0.0, p[1]])
    for a, b in ((np.zeros(2), corner), (corner, p)):
        seg = lambda t, a=a, b=b: a[:, None] * (1 - np.atleast_1d(t)) + b[:, None] * np.atleast_1d(t)
        seg_c = lambda t, seg=seg: seg(t)[:, 0] if np.ndim(t) == 0 else seg(t)
        dseg = lambda t, a=a, b=b: b - a
        if np.allclose(a, b):
            continue
        X = transport(rho, seg_c, X, [0.0, 1.0], dc=dseg, max_step=max_step / max(np.hypot(*(b - a)), 1e-12)).X[:, -1]
    return X


def radial_curve(t):
    t = np.asarray(t, dtype=float)
    return np.array([t, t])


def radial_velocity(t):
    t = np.asarray(t, dtype=float)
    return np.array([np.ones_like(t), np.ones_like(t)])


def circle_curve(t):
    t = np.asarray(t, dtype=float)
    return np.array([np.cos(t), np.sin(t) + 1.0])


def circle_velocity(t):
    t = np.asarray(t, dtype=float)
    return np.array([-np.sin(t), np.cos(t)])


def radial_focus_formula(t):
    """Focal vector along ``(t, t)`` in the form quoted with the construction."""
    t = np.asarray(t, dtype=float)
    return np.array([np.cos(t * t), -np.sin(t * t)])


def circle_focus_formula(t):
    """Focal vector along ``(cos t, 1 + sin t)`` in the quoted form."""
    t = np.asarray(t, dtype=float)
    return np.array([np.cos(1.0 + np.sin(t)), -np.sin(1.0 + np.sin(t))])


# -- seed curves and their gauges ---------------------------------------------


@dataclass
class SeedIndicatrix:
    """Implicit seed curve ``Phi(y1, y2) = 0`` around the origin.

    ``Phi`` must be negative inside and positive outside and accept jets.
    ``foci`` lists marked points that are carried along by the transport
    (used for figures).
    """

    phi: Callable
    name: str = "seed"
    foci: tuple = ()
    r_in: float = field(default=0.0)
    r_out: float = field(default=0.0)
    convex: bool = True
    min_turn: float = 0.0

    def __post_init__(self):
        if self.r_in <= 0.0 or self.r_out <= 0.0:
            self._certify()

    def _radial_roots(self, ang, lo=1e-3, hi=1e3):
        u1, u2 = np.cos(ang), np.sin(ang)
        a = np.full_like(ang, lo)
        b = np.full_like(ang, hi)
        if np.any(self.phi(a * u1, a * u2) >= 0) or np.any(self.phi(b * u1, b * u2) <= 0):
            raise RootBracketFailure(f"seed {self.name} does not enclose the origin")
        for _ in range(80):
            m = 0.5 * (a + b)
            inside = self.phi(m * u1, m * u2) < 0
            a = np.where(inside, m, a)
            b = np.where(inside, b, m)
        return 0.5 * (a + b)

    def _certify(self, n: int = 720):
        ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        r = self._radial_roots(ang)
        self.r_in, self.r_out = float(r.min()), float(r.max())
        pts = r * np.array([np.cos(ang), np.sin(ang)])
        e = np.roll(pts, -1, axis=1) - pts
        turn = e[0] * np.roll(e[1], -1) - e[1] * np.roll(e[0], -1)
        self.min_turn = float(turn.min())
        self.convex = bool(np.all(turn > 0))

    def boundary(self, n: int = 720, rotation: float = 0.0) -> np.ndarray:
        ang = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        r = self._radial_roots(ang)
        x, y = rotate(rotation, r * np.cos(ang), r * np.sin(ang))
        return np.array([x, y])

    def gauge_float(self, v1, v2, bisections: int = 12, newton: int = 8):
        """``s > 0`` with ``Phi(v/s) = 0`` by bracketed bisection plus Newton.

        Newton steps that leave the bracket fall back to bisection.
        """
        v1 = np.asarray(v1, dtype=float)
        v2 = np.asarray(v2, dtype=float)
        n = np.hypot(v1, v2)
        # work with t = 1/s so that Phi(t v) = 0
        a = 0.999 * self.r_in / n
        b = 1.001 * self.r_out / n
        fa, fb = self.phi(a * v1, a * v2), self.phi(b * v1, b * v2)
        if np.any(fa >= 0) or np.any(fb <= 0):
            raise RootBracketFailure(f"ray misses seed {self.name}")
        for _ in range(bisections):
            m = 0.5 * (a + b)
            inside = self.phi(m * v1, m * v2) < 0
            a = np.where(inside, m, a)
            b = np.where(inside, b, m)
        t = 0.5 * (a + b)
        for _ in range(newton):
            f = self.phi(t * v1, t * v2)
            dt = 1e-6 * t
            df = (self.phi((t + dt) * v1, (t + dt) * v2) - self.phi((t - dt) * v1, (t - dt) * v2)) / (2 * dt)
            inside = f < 0
            a = np.where(inside, t, a)
            b = np.where(inside, b, t)
            step = f / df
            nt = t - step
            bad = ~np.isfinite(nt) | (nt < a) | (nt > b)
            nt = np.where(bad, 0.5 * (a + b), nt)
            done = np.all(np.abs(nt - t) <= 1e-14 * np.abs(t))
            t = nt
            if done:
                break
        else:
            for _ in range(60):
                m = 0.5 * (a + b)
                inside = self.phi(m * v1, m * v2) < 0
                a = np.where(inside, m, a)
                b = np.where(inside, b, m)
            t = 0.5 * (a + b)
        return 1.0 / t

    def gauge(self, v1, v2):
        """The seed's Minkowski functional; jets get an implicit-function jet."""
        if not isinstance(v1, Jet) and not isinstance(v2, Jet):
            return self.gauge_float(v1, v2)
        ref = v1 if isinstance(v1, Jet) else v2
        a1, a2 = jet_value(v1), jet_value(v2)
        a1, a2 = np.broadcast_arrays(np.asarray(a1, dtype=float), np.asarray(a2, dtype=float))
        s0 = self.gauge_float(a1, a2)
        t0 = 1.0 / s0
        T = Jet.variable(0, basis(1, 1), t0)
        slope = self.phi(T * a1, T * a2).partial(1)
        t = Jet.constant(t0, ref.nvars, ref.order)
        # chord iteration: each pass fixes one more Taylor degree
        for _ in range(ref.order + 1):
            t = t - self.phi(t * v1, t * v2) * (1.0 / slope)
        return t.reciprocal()


def trifocal_seed(spacing: float = 1.0, total: float = 4.0) -> SeedIndicatrix:
    """Points whose distances to ``(-a, 0)``, ``0`` and ``(a, 0)`` sum to ``total``."""
    a = float(spacing)

    def phi(y1, y2):
        return (
            np.sqrt((y1 + a) * (y1 + a) + y2 * y2)
            + np.sqrt(y1 * y1 + y2 * y2)
            + np.sqrt((y1 - a) * (y1 - a) + y2 * y2)
            - total
        )

    return SeedIndicatrix(phi, "trifocal", foci=((-a, 0.0), (0.0, 0.0), (a, 0.0)))


def circle_seed(radius: float = 1.0) -> SeedIndicatrix:
    r = float(radius)
    return SeedIndicatrix(
        lambda y1, y2: np.sqrt(y1 * y1 + y2 * y2) - r, "circle", foci=((0.0, 0.0),), r_in=r, r_out=r
    )


def seed_from_expression(source: str) -> SeedIndicatrix:
    e = Expression(source)
    if set(e.variables) - {"y1", "y2"}:
        raise ConfigError(f"seed expression may only use y1, y2: {source!r}")
    return SeedIndicatrix(lambda y1, y2: e(y1=y1, y2=y2) + 0.0 * y1, f"expr:{e.source}")


# -- the translated field -----------------------------------------------------


@dataclass
class TranslatedIndicatrix:
    """The seed carried to ``p``: the seed rotated by ``-(f(p) - f(0))``."""

    point: np.ndarray
    angle: float
    seed: SeedIndicatrix

    def phi(self, v1, v2):
        w1, w2 = rotate(-self.angle, v1, v2)
        return self.seed.phi(w1, w2)

    @property
    def foci(self) -> np.ndarray:
        f = np.array(self.seed.foci, dtype=float).reshape(-1, 2).T
        return np.array(rotate(self.angle, f[0], f[1]))

    @property
    def focal_vector(self) -> np.ndarray:
        return np.array(rotate(self.angle, 1.0, 0.0))

    def boundary(self, n: int = 720) -> np.ndarray:
        return self.seed.boundary(n, rotation=self.angle)


def translated_indicatrix(seed: SeedIndicatrix, rho: OneFormField, p, pot: Potential | None = None) -> TranslatedIndicatrix:
    pot = pot or potential(rho)
    p = np.asarray(p, dtype=float)
    angle = -float(pot(p[0], p[1]))
    return TranslatedIndicatrix(p, angle, seed)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sampled point sets (2, n)."""
    d = np.hypot(a[0][:, None] - b[0][None, :], a[1][:, None] - b[1][None, :])
    return float(max(d.min(axis=0).max(), d.min(axis=1).max()))


def metric_from_field(seed: SeedIndicatrix, rho: OneFormField, name: str | None = None, pot: Potential | None = None) -> MetricField:
    """The Finsler metric whose indicatrix at ``p`` is the transported seed.

    ``F(p, v) = F0(Rot(f(p)) v)`` with ``F0`` the seed gauge and ``f`` the
    potential normalized by ``f(0) = 0``.
    """
    if not seed.convex:
        raise ValueError(f"seed {seed.name} failed the convexity certificate")
    pot = pot or potential(rho)

    def F(x1, x2, y1, y2):
        w1, w2 = rotate(pot(x1, x2), y1, y2)
        return seed.gauge(w1, w2)

    xdep = rho.name != "zero"
    return MetricField(
        name or f"plane:{seed.name}/{rho.name}",
        F,
        x_dependent=xdep,
        params={"seed": seed, "rho": rho, "potential": pot},
    )


def closed_form_connection(rho: OneFormField):
    """``Gamma^k_ij = -rho_j delta^k_i + delta_ij rho^k`` (Euclidean raising)."""

    def gamma(u1, u2):
        r = np.array(np.broadcast_arrays(*[np.asarray(c, dtype=float) for c in rho(u1, u2)]))
        out = np.zeros((2, 2, 2) + r.shape[1:])
        for k in range(2):
            for i in range(2):
                for j in range(2):
                    out[k, i, j] = -r[j] * (k == i) + (i == j) * r[k]
        return out

    return gamma


_CONSTRUCTIONS = {
    "trifocal-rot": (trifocal_seed, rotational_form),
    "trifocal-flat": (trifocal_seed, zero_form),
    "circle-rot": (circle_seed, rotational_form),
}


def construction(cid: str) -> MetricField:
    """Named constructions: ``trifocal-rot``, ``trifocal-flat``, ``circle-rot``."""
    try:
        make_seed, make_form = _CONSTRUCTIONS[cid]
    except KeyError:
        raise ConfigError(f"unknown plane construction {cid!r}; choose from {sorted(_CONSTRUCTIONS)}") from None
    return metric_from_field(make_seed(), make_form(), name=f"plane:{cid}")


def construction_from_config(source) -> MetricField:
    """Build a plane metric from an INI ``[construction]`` section.

    Keys: ``rho1``, ``rho2`` (expressions in u1, u2) and ``seed`` (an
    expression in y1, y2, negative inside the curve) or ``seed = trifocal``.
    """
    cp = configparser.ConfigParser()
    if isinstance(source, configparser.SectionProxy):
        sec = source
    else:
        text = Path(source).read_text() if not str(source).lstrip().startswith("[") else str(source)
        cp.read_string(text)
        if "construction" not in cp:
            raise ConfigError("missing [construction] section")
        sec = cp["construction"]
    for key in ("rho1", "rho2", "seed"):
        if key not in sec:
            raise ConfigError(f"[construction] is missing key {key!r}")
    rho = form_from_expressions(sec["rho1"], sec["rho2"])
    s = sec["seed"].strip()
    seed = trifocal_seed() if s == "trifocal" else circle_seed() if s == "circle" else seed_from_expression(s)
    return metric_from_field(seed, rho, name=f"plane:config/{rho.name}")


# -- figures -----------------------------------------------------------------

RADIAL_TS = (0.0, 0.75, 1.25)
CIRCLE_TS = tuple(float(k * np.pi / 4) for k in range(9))


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _svg(base: np.ndarray, curve: np.ndarray, foci: np.ndarray, title: str, half: float = 2.5) -> str:
    x0, y0 = base[0] - half, -(base[1] + half)
    w = 2 * half
    pts = " ".join(f"{_fmt(base[0] + a)},{_fmt(-(base[1] + b))}" for a, b in curve.T)
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{_fmt(x0)} {_fmt(y0)} {_fmt(w)} {_fmt(w)}" width="400" height="400">',
        f"<title>{title}</title>",
        f'<rect x="{_fmt(x0)}" y="{_fmt(y0)}" width="{_fmt(w)}" height="{_fmt(w)}" fill="white"/>',
        f'<line x1="{_fmt(x0)}" y1="0.000000" x2="{_fmt(x0 + w)}" y2="0.000000" stroke="#bbbbbb" stroke-width="0.01"/>',
        f'<line x1="0.000000" y1="{_fmt(y0)}" x2="0.000000" y2="{_fmt(y0 + w)}" stroke="#bbbbbb" stroke-width="0.01"/>',
        f'<polygon points="{pts}" fill="none" stroke="#1f4e9c" stroke-width="0.02"/>',
    ]
    for a, b in foci.T:
        lines.append(
            f'<circle cx="{_fmt(base[0] + a)}" cy="{_fmt(-(base[1] + b))}" r="0.04" fill="#c0392b"/>'
        )
    lines.append(f'<circle cx="{_fmt(base[0])}" cy="{_fmt(-base[1])}" r="0.03" fill="black"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


@dataclass
class FigureFrame:
    family: str
    t: float
    base: np.ndarray
    focal_vector: np.ndarray
    curve: np.ndarray
    svg_path: Path


def figure_frames(seed=None, rho=None, radial_ts=RADIAL_TS, circle_ts=CIRCLE_TS, n: int = 720, max_step: float = 1e-3):
    """Translated seeds along the radial and circle paths.

    Focal vectors come from the transport ODE (origin to ``c(0)`` along an
    axis-aligned path, then along ``c``); the drawn curve is the seed rotated
    by the potential, i.e. the closed form of the same transport.
    """
    seed = seed or trifocal_seed()
    rho = rho or rotational_form()
    pot = potential(rho)
    frames = []
    families = (
        ("radial", radial_curve, radial_velocity, radial_ts),
        ("circle", circle_curve, circle_velocity, circle_ts),
    )
    for fam, c, dc, ts in families:
        if not len(ts):
            continue
        ts = np.asarray(sorted(ts), dtype=float)
        start = c(np.array(0.0))
        X0 = transport_from_origin(rho, start, (1.0, 0.0), max_step=max_step)
        grid = np.unique(np.concatenate([[0.0], ts]))
        tv = transport(rho, c, X0, grid, dc=dc, max_step=max_step, pot=pot)
        for t in ts:
            k = int(np.searchsorted(grid, t))
            base = c(np.array(t))
            tr = translated_indicatrix(seed, rho, base, pot)
            frames.append(FigureFrame(fam, float(t), base, tv.X[:, k], tr.boundary(n), Path()))
    return frames


def render_figures(outdir, seed=None, rho=None, radial_ts=RADIAL_TS, circle_ts=CIRCLE_TS, n: int = 720) -> list[Path]:
    """Write one SVG per frame plus ``figures.csv``; returns the written paths."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    seed = seed or trifocal_seed()
    frames = figure_frames(seed, rho, radial_ts, circle_ts, n)
    written = []
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["family", "index", "t", "kind", "k", "x", "y"])
    for idx, fr in enumerate(frames):
        vec = fr.focal_vector
        foci = np.array([[-vec[0], 0.0, vec[0]], [-vec[1], 0.0, vec[1]]])
        if seed.name != "trifocal":
            ang = np.arctan2(vec[1], vec[0])
            f = np.array(seed.foci, dtype=float).reshape(-1, 2).T
            foci = np.array(rotate(ang, f[0], f[1]))
        name = f"{fr.family}_{idx:02d}.svg"
        path = out / name
        path.write_text(_svg(fr.base, fr.curve, foci, f"{fr.family} t={_fmt(fr.t)}"))
        fr.svg_path = path
        written.append(path)
        w.writerow([fr.family, idx, _fmt(fr.t), "base", 0, _fmt(fr.base[0]), _fmt(fr.base[1])])
        for k, (a, b) in enumerate(foci.T):
            w.writerow([fr.family, idx, _fmt(fr.t), "focus", k, _fmt(a), _fmt(b)])
        for k, (a, b) in enumerate(fr.curve.T):
            w.writerow([fr.family, idx, _fmt(fr.t), "boundary", k, _fmt(a), _fmt(b)])
    csv_path = out / "figures.csv"
    csv_path.write_text(buf.getvalue())
    written.append(csv_path)
    return written
