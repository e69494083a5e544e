"""Pointwise Finsler tensor calculus on a planar chart.

Everything is derived from one jet of the fundamental function ``F`` at a
batch of line elements ``(p, v)``.  :class:`LineElementJets` holds that jet
and lazily builds the jets of ``E``, ``g_ij``, the Cartan tensors, the Berwald
frame, the spray and its fiber-derivative tower, and the Landsberg tensor.
Evaluating those jets at the base point gives the plain arrays returned by
:func:`metric_jet` and :func:`spray_jets`.

Array conventions: tensor indices come first, batch axes last, e.g.
``g[i, j, ...]`` and ``Gijk[l, i, j, k, ...]``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from functools import cached_property

import numpy as np

from .engines import default_engine
from .errors import SingularMetric
from .jets import Jet

R2 = (0, 1)


def _sum(terms):
    terms = list(terms)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def _values(obj):
    """Base-point values of a (nested list of) jets as an array."""
    if isinstance(obj, Jet):
        return obj.value
    return np.array([_values(o) for o in obj])


class VectorField:
    """A vector field on the slit tangent bundle, ``a^i d/dx^i + b^i d/dy^i``.

    Components are jets (or ``None`` for zero); applying the field to a jet
    differentiates it.
    """

    def __init__(self, calc: "LineElementJets", xs=(None, None), ys=(None, None)):
        self.calc = calc
        self.xs = xs
        self.ys = ys

    def __call__(self, f: Jet) -> Jet:
        terms = []
        for i in R2:
            if self.xs[i] is not None:
                terms.append(self.xs[i] * f.d(self.calc.xv[i]))
            if self.ys[i] is not None:
                terms.append(self.ys[i] * f.d(self.calc.yv[i]))
        return _sum(terms)

    def scaled(self, s) -> "VectorField":
        return VectorField(
            self.calc,
            tuple(None if a is None else a * s for a in self.xs),
            tuple(None if b is None else b * s for b in self.ys),
        )


def bracket(A: VectorField, B: VectorField, f: Jet) -> Jet:
    return A(B(f)) - B(A(f))


class LineElementJets:
    """Lazy jet-level calculus at a batch of line elements.

    Parameters
    ----------
    F : Jet
        Jet of the fundamental function in ``(x1, x2, y1, y2)`` (4 variables)
        or in ``(y1, y2)`` only (base point frozen).
    x, y : array_like
        Base values, shape ``(2, *batch)``.
    """

    def __init__(self, F: Jet, x, y):
        self.F = F
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if F.nvars == 4:
            self.xv, self.yv = (0, 1), (2, 3)
        elif F.nvars == 2:
            self.xv, self.yv = (None, None), (0, 1)
        else:
            raise ValueError("expected a jet in 2 or 4 variables")
        self.order = F.order

    @classmethod
    def at(cls, metric, p, v, engine=None, order=5, wrt="xy"):
        engine = engine or default_engine(metric)
        p = np.asarray(p, dtype=float)
        v = np.asarray(v, dtype=float)
        p, v = np.broadcast_arrays(p, v)
        return cls(engine.jet(metric, p, v, order, wrt=wrt), p, v)

    @property
    def has_x(self) -> bool:
        return self.F.nvars == 4

    def _var(self, idx, value):
        from .jets import basis

        return Jet.variable(idx, basis(self.F.nvars, self.order), value)

    # fiber calculus ------------------------------------------------------
    @cached_property
    def Y(self):
        return [self._var(self.yv[i], self.y[i]) for i in R2]

    @cached_property
    def E(self):
        return self.F * self.F * 0.5

    @cached_property
    def dF(self):
        return [self.F.d(self.yv[i]) for i in R2]

    @cached_property
    def ddF(self):
        return [[self.dF[i].d(self.yv[j]) for j in R2] for i in R2]

    @cached_property
    def dE(self):
        return [self.E.d(self.yv[i]) for i in R2]

    @cached_property
    def g(self):
        g01 = self.dE[0].d(self.yv[1])
        return [[self.dE[0].d(self.yv[0]), g01], [g01, self.dE[1].d(self.yv[1])]]

    @cached_property
    def detg(self):
        g = self.g
        return g[0][0] * g[1][1] - g[0][1] * g[0][1]

    @cached_property
    def ginv(self):
        g, inv = self.g, self.detg.reciprocal()
        off = -g[0][1] * inv
        return [[g[1][1] * inv, off], [off, g[0][0] * inv]]

    @cached_property
    def cartan(self):
        """Lowered first Cartan tensor ``C_ijk = 1/2 dg_ij/dy^k``."""
        dg = [[[self.g[i][j].d(self.yv[k]) * 0.5 for k in R2] for j in R2] for i in R2]
        return dg

    @cached_property
    def cartan_trace(self):
        C, gi = self.cartan, self.ginv
        return [_sum(gi[j][k] * C[i][j][k] for j in R2 for k in R2) for i in R2]

    @cached_property
    def V(self):
        return [-self.dF[1], self.dF[0]]

    def gprod(self, a, b):
        return _sum(self.g[i][j] * a[i] * b[j] for i in R2 for j in R2)

    @cached_property
    def gVV(self):
        return self.gprod(self.V, self.V)

    @cached_property
    def w(self):
        """``sqrt(g(V, V))`` (equal to ``sqrt(det g)``)."""
        return np.sqrt(self.gVV)

    @cached_property
    def V0(self):
        inv = self.w.reciprocal()
        return [self.V[i] * inv for i in R2]

    @cached_property
    def C0(self):
        inv = self.F.reciprocal()
        return [self.Y[i] * inv for i in R2]

    @cached_property
    def lam(self):
        """Main scalar ``V0^j V0^k V0^l C_jkl``."""
        C, V0 = self.cartan, self.V0
        return _sum(V0[i] * V0[j] * V0[k] * C[i][j][k] for i in R2 for j in R2 for k in R2)

    @cached_property
    def vf_V0(self):
        return VectorField(self, ys=tuple(self.V0))

    @cached_property
    def vf_C(self):
        return VectorField(self, ys=tuple(self.Y))

    # spray and horizontal calculus --------------------------------------
    def _need_x(self):
        if not self.has_x:
            raise ValueError("spray data needs a jet in (x, y)")

    @cached_property
    def G(self):
        """Geodesic spray coefficients ``G^l``."""
        self._need_x()
        Y, E, x = self.Y, self.E, self.xv
        rhs = [
            _sum(Y[k] * self.dE[m].d(x[k]) for k in R2) - E.d(x[m]) for m in R2
        ]
        gi = self.ginv
        return [_sum(gi[l][m] * rhs[m] for m in R2) * 0.5 for l in R2]

    @cached_property
    def Gi(self):
        return [[self.G[l].d(self.yv[i]) for i in R2] for l in R2]

    @cached_property
    def Gij(self):
        return [[[self.Gi[l][i].d(self.yv[j]) for j in R2] for i in R2] for l in R2]

    @cached_property
    def Gijk(self):
        return [
            [[[self.Gij[l][i][j].d(self.yv[k]) for k in R2] for j in R2] for i in R2]
            for l in R2
        ]

    def Xh(self, i: int) -> VectorField:
        """Horizontal lift ``X_i^h = d/dx^i - G^l_i d/dy^l``."""
        xs = [None, None]
        xs[i] = 1.0
        return VectorField(self, xs=tuple(xs), ys=tuple(-self.Gi[l][i] for l in R2))

    def horizontal(self, i: int, f: Jet) -> Jet:
        return f.d(self.xv[i]) - _sum(self.Gi[l][i] * f.d(self.yv[l]) for l in R2)

    @cached_property
    def vf_S(self):
        return VectorField(self, xs=tuple(self.Y), ys=tuple(self.G[l] * -2.0 for l in R2))

    @cached_property
    def vf_S0(self):
        return self.vf_S.scaled(self.F.reciprocal())

    @cached_property
    def vf_V0h(self):
        V0 = self.V0
        ys = tuple(-_sum(V0[i] * self.Gi[l][i] for i in R2) for l in R2)
        return VectorField(self, xs=tuple(V0), ys=ys)

    @cached_property
    def landsberg_mixed(self):
        """``P^l_ij`` from the horizontal derivative of ``g``."""
        g, gi, Gij = self.g, self.ginv, self.Gij
        inner = [
            [
                [
                    self.horizontal(i, g[j][m])
                    - _sum(Gij[k][i][j] * g[k][m] for k in R2)
                    - _sum(Gij[k][i][m] * g[j][k] for k in R2)
                    for m in R2
                ]
                for j in R2
            ]
            for i in R2
        ]
        return [
            [[_sum(gi[l][m] * inner[i][j][m] for m in R2) * 0.5 for j in R2] for i in R2]
            for l in R2
        ]

    @cached_property
    def landsberg(self):
        """Lowered ``P_ijk = g_kl P^l_ij``."""
        P = self.landsberg_mixed
        return [
            [[_sum(self.g[k][l] * P[l][i][j] for l in R2) for k in R2] for j in R2]
            for i in R2
        ]

    @cached_property
    def landsberg_from_spray(self):
        """Right-hand side of the Landsberg/mixed-curvature identity,
        ``-(F/2) l_m g^{kl} P^m_ijk`` with ``P^m_ijk = -G^m_ijk``."""
        Fh = self.F * 0.5
        out = []
        for l in R2:
            row = []
            for i in R2:
                col = []
                for j in R2:
                    col.append(
                        _sum(
                            Fh * self.dF[m] * self.ginv[k][l] * self.Gijk[m][i][j][k]
                            for m in R2
                            for k in R2
                        )
                    )
                row.append(col)
            out.append(row)
        return out

    @cached_property
    def alpha(self):
        """``alpha_i = V0^j V0^k P_ijk = (F/2) V0^j V0^k G^l_ijk dF/dy^l``."""
        V0 = self.V0
        return [
            _sum(
                self.F * 0.5 * V0[j] * V0[k] * self.Gijk[l][i][j][k] * self.dF[l]
                for j in R2
                for k in R2
                for l in R2
            )
            for i in R2
        ]

    @cached_property
    def omega(self):
        """``omega_i = V0^j V0^k G^l_ijk g(V0, d/dy^l)``."""
        V0 = self.V0
        gV0 = [_sum(self.g[l][m] * V0[m] for m in R2) for l in R2]
        return [
            _sum(V0[j] * V0[k] * self.Gijk[l][i][j][k] * gV0[l] for j in R2 for k in R2 for l in R2)
            for i in R2
        ]


# -- public data types --------------------------------------------------------


@dataclass
class MetricJet:
    """Pointwise metric data at ``(p, v)``; batch axes trail the index axes."""

    F: np.ndarray
    E: np.ndarray
    g: np.ndarray
    gInv: np.ndarray
    detG: np.ndarray
    cartan: np.ndarray
    cartanTrace: np.ndarray
    l: np.ndarray
    V: np.ndarray
    V0: np.ndarray
    C0: np.ndarray
    mainScalar: np.ndarray

    def to_json(self) -> str:
        return json.dumps({k: np.asarray(v).tolist() for k, v in asdict(self).items()})


@dataclass
class SprayJets:
    """Spray coefficients, their fiber derivatives and the Landsberg tensor.

    ``horizontalBasis[i, l]`` is the ``d/dy^l`` coefficient of ``X_i^h``
    (the ``d/dx^i`` coefficient is 1).
    """

    G: np.ndarray
    Gi: np.ndarray
    Gij: np.ndarray
    Gijk: np.ndarray
    landsberg: np.ndarray
    landsbergMixed: np.ndarray
    horizontalBasis: np.ndarray

    def to_json(self) -> str:
        return json.dumps({k: np.asarray(v).tolist() for k, v in asdict(self).items()})


def _check_regular(calc: LineElementJets):
    det = calc.detg.value
    if np.any(~np.isfinite(det)) or np.any(det <= 0.0):
        raise SingularMetric("det g <= 0 at a requested line element")


def metric_jet_from(calc: LineElementJets) -> MetricJet:
    _check_regular(calc)
    return MetricJet(
        F=calc.F.value,
        E=calc.E.value,
        g=_values(calc.g),
        gInv=_values(calc.ginv),
        detG=calc.detg.value,
        cartan=_values(calc.cartan),
        cartanTrace=_values(calc.cartan_trace),
        l=_values(calc.dF),
        V=_values(calc.V),
        V0=_values(calc.V0),
        C0=_values(calc.C0),
        mainScalar=calc.lam.value,
    )


def metric_jet(m, p, v, d=None) -> MetricJet:
    """All fiber tensor data of ``m`` at ``(p, v)`` (batched over trailing axes)."""
    calc = LineElementJets.at(m, p, v, d, order=3, wrt="y")
    return metric_jet_from(calc)


def spray_jets_from(calc: LineElementJets) -> SprayJets:
    _check_regular(calc)
    Gi = _values(calc.Gi)  # [l, i]
    return SprayJets(
        G=_values(calc.G),
        Gi=Gi,
        Gij=_values(calc.Gij),
        Gijk=_values(calc.Gijk),
        landsberg=_values(calc.landsberg),
        landsbergMixed=_values(calc.landsberg_mixed),
        horizontalBasis=-np.swapaxes(Gi, 0, 1),
    )


def spray_jets(m, p, v, d=None) -> SprayJets:
    """Spray tower and Landsberg tensor of ``m`` at ``(p, v)``."""
    calc = LineElementJets.at(m, p, v, d, order=5, wrt="xy")
    return spray_jets_from(calc)


# -- identity checks ----------------------------------------------------------


def identity_residuals(calc: LineElementJets, lam_fd_step: float | None = None, metric=None, engine=None) -> dict:
    """Residuals of the pointwise identities of the surface calculus.

    Returns max-abs residuals (over the batch) keyed by identity name.  Spray
    identities are included when ``calc`` carries base-point derivatives.
    """
    _check_regular(calc)
    Y, F = calc.Y, calc.F
    out = {}
    out["euler_F"] = np.abs(_values(_sum(Y[i] * calc.dF[i] for i in R2)) - F.value)
    CE = calc.vf_C(calc.E)
    out["euler_E"] = np.abs(CE.value - 2.0 * calc.E.value)
    C = _values(calc.cartan)
    yC = np.einsum("k...,ijk...->ij...", calc.y, C)
    # relative to |C|, absolute when C is (numerically) zero
    scale = max(float(np.max(np.abs(C))), 1.0)
    out["cartan_null"] = np.max(np.abs(yC), axis=(0, 1)) / scale
    det, gvv = calc.detg.value, calc.gVV.value
    out["det_g_equals_gVV"] = np.abs(det - gvv) / np.abs(det)
    lnw = np.log(calc.detg) * 0.5
    trace = _values(calc.cartan_trace)
    out["mainscalar1"] = np.max(
        np.abs(np.array([lnw.d(calc.yv[i]).value for i in R2]) - trace), axis=0
    )
    lam = calc.lam.value
    V0 = _values(calc.V0)
    out["mainscalar2_trace"] = np.abs(lam - np.einsum("j...,j...->...", V0, trace))
    out["mainscalar2"] = np.abs(lam - calc.vf_V0(lnw).value)
    V0V0 = [calc.vf_V0(calc.V0[i]) for i in R2]
    out["wag015"] = np.max(
        np.abs(
            np.array(
                [
                    (V0V0[i] + calc.lam * calc.V0[i] + Y[i] * (F * F).reciprocal()).value
                    for i in R2
                ]
            )
        ),
        axis=0,
    )
    if calc.has_x and calc.order >= 5:
        P = _values(calc.landsberg_mixed)
        Q = _values(calc.landsberg_from_spray)
        out["eq4"] = np.max(np.abs(P - Q), axis=(0, 1, 2))
        Pl = _values(calc.landsberg)
        out["wag01"] = np.abs(np.einsum("i...,j...,k...,ijk...->...", calc.y, V0, V0, Pl))
        alpha = _values(calc.alpha)
        out["alpha_vs_landsberg"] = np.max(
            np.abs(alpha - np.einsum("j...,k...,ijk...->i...", V0, V0, Pl)), axis=0
        )
        out["wag01_omega"] = np.abs(np.einsum("i...,i...->...", calc.y, _values(calc.omega)))
    if lam_fd_step is not None and metric is not None:
        out["mainscalar2_fd"] = np.abs(lam - _lam_fd(calc, metric, engine, lam_fd_step))
    return {k: float(np.max(v)) for k, v in out.items()}


def _lam_fd(calc, metric, engine, h):
    """``V0(ln sqrt(det g))`` by a central difference along ``V0``."""
    engine = engine or default_engine(metric)
    V0 = _values(calc.V0)
    vals = []
    for s in (-2.0, -1.0, 1.0, 2.0):
        c2 = LineElementJets(engine.jet(metric, calc.x, calc.y + s * h * V0, 2, wrt="y"), calc.x, calc.y + s * h * V0)
        vals.append(0.5 * np.log(c2.detg.value))
    return (vals[0] - 8.0 * vals[1] + 8.0 * vals[2] - vals[3]) / (12.0 * h)


def spray_homogeneity(m, p, v, d=None) -> float:
    """``max |G(p, 2v) - 4 G(p, v)|`` relative to ``|G(p, v)|`` scale."""
    a = spray_jets(m, p, v, d).G
    b = spray_jets(m, p, 2.0 * np.asarray(v, dtype=float), d).G
    return float(np.max(np.abs(b - 4.0 * a)))


@dataclass
class CartanPermutationReport:
    """Residuals of the Berwald-frame bracket relations at ``(p, v)``."""

    S0_V0_on_x: float
    S0_V0_on_y: float
    V0_V0h_on_x: float
    V0_V0h_on_y: float
    contracted_on_F: float
    V0_F: float
    horizontal_F: float

    @property
    def max_residual(self) -> float:
        return max(asdict(self).values())


def bracket_check(m, p, v, d=None) -> CartanPermutationReport:
    """Check ``[S0, V0] = -(1/F) V0^h`` and the ``[V0, V0^h]`` relation.

    Both brackets are applied to the coordinate functions ``x^i`` and ``y^i``;
    the ``[V0, V0^h]`` relation is additionally contracted with ``dF``.
    """
    calc = LineElementJets.at(m, p, v, d, order=5, wrt="xy")
    _check_regular(calc)
    F = calc.F
    invF = F.reciprocal()
    V0, S0, V0h, S = calc.vf_V0, calc.vf_S0, calc.vf_V0h, calc.vf_S
    lam = calc.lam
    Slam = S(lam)
    coords_x = [calc._var(calc.xv[i], calc.x[i]) for i in R2]
    coords_y = calc.Y

    def first_rhs(f):
        return -(invF * S0(f)) - lam * V0h(f) - Slam * V0(f)

    def second_res(f):
        return (bracket(S0, V0, f) + invF * V0h(f)).value

    def first_res(f):
        return (bracket(V0, V0h, f) - first_rhs(f)).value

    def worst(vals):
        return float(np.max(np.abs(np.array(vals))))

    contracted = bracket(V0, V0h, F) + invF * S0(F) + lam * V0h(F) + Slam * V0(F)
    return CartanPermutationReport(
        S0_V0_on_x=worst([second_res(c) for c in coords_x]),
        S0_V0_on_y=worst([second_res(c) for c in coords_y]),
        V0_V0h_on_x=worst([first_res(c) for c in coords_x]),
        V0_V0h_on_y=worst([first_res(c) for c in coords_y]),
        contracted_on_F=worst([contracted.value]),
        V0_F=worst([V0(F).value]),
        horizontal_F=worst([calc.horizontal(i, F).value for i in R2]),
    )
