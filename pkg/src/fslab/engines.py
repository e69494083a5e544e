"""Differentiation engines.

Both engines return the same object: a :class:`~fslab.jets.Jet` of the
fundamental function ``F`` at a batch of line elements ``(x, y)``.  Variables
are ordered ``(x1, x2, y1, y2)`` for ``wrt="xy"`` and ``(y1, y2)`` for
``wrt="y"`` (base point frozen).

* :class:`JetEngine` (``"dual"``) pushes jets through the metric's evaluator.
* :class:`FiniteDifferenceEngine` (``"fd"``) treats the evaluator as a black
  box and fills in every Taylor coefficient from central difference stencils
  with one Richardson extrapolation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateFiberVector, NonSmoothEvaluation
from .jets import Jet, basis

MIN_FIBER_NORM = 1e-12


def _prepare(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[0] != 2 or y.shape[0] != 2:
        raise ValueError("points and fiber vectors need a leading axis of length 2")
    batch = np.broadcast_shapes(x.shape[1:], y.shape[1:])
    x = np.broadcast_to(x, (2,) + batch)
    y = np.broadcast_to(y, (2,) + batch)
    if np.any(np.hypot(y[0], y[1]) < MIN_FIBER_NORM):
        raise DegenerateFiberVector("fiber vector on the zero section")
    return x, y


def _check_finite(values, name):
    if not np.all(np.isfinite(values)):
        raise NonSmoothEvaluation(f"{name} returned non-finite values")


class DiffEngine:
    """Common interface; ``jet`` is the only required method."""

    name = "abstract"

    def jet(self, metric, x, y, order: int, wrt: str = "xy") -> Jet:
        raise NotImplementedError

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class JetEngine(DiffEngine):
    """Forward-mode differentiation with truncated Taylor arithmetic."""

    name = "dual"

    def jet(self, metric, x, y, order, wrt="xy"):
        x, y = _prepare(x, y)
        if not metric.jet_capable:
            raise TypeError(f"metric {metric.name!r} cannot be evaluated on jets; use the fd engine")
        if wrt == "xy":
            x1, x2, y1, y2 = Jet.variables([x[0], x[1], y[0], y[1]], order)
            nv = 4
        elif wrt == "y":
            y1, y2 = Jet.variables([y[0], y[1]], order)
            x1, x2 = x[0], x[1]
            nv = 2
        else:
            raise ValueError(f"wrt must be 'xy' or 'y', got {wrt!r}")
        out = metric.func(x1, x2, y1, y2)
        if not isinstance(out, Jet):
            out = Jet.constant(np.broadcast_to(out, x.shape[1:]), nv, order)
        if out.c.shape[1:] != x.shape[1:]:
            out = Jet(np.broadcast_to(out.c, out.c.shape[:1] + x.shape[1:]), nv, order)
        _check_finite(out.c, metric.name)
        return out


@lru_cache(maxsize=None)
def central_weights(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Offsets and weights of the 4th-order central stencil for d^m/dt^m."""
    if m == 0:
        return np.array([0]), np.array([1.0])
    p = (m + 1) // 2 + 1
    offsets = np.arange(-p, p + 1)
    A = np.vander(offsets.astype(float), increasing=True).T
    rhs = np.zeros(len(offsets))
    rhs[m] = math.factorial(m)
    return offsets, np.linalg.solve(A, rhs)


@lru_cache(maxsize=None)
def _order_plan(nv: int, k: int):
    """Lattice points and per-monomial weights for all monomials of degree k."""
    b = basis(nv, k)
    alphas = [tuple(e) for e in b.exponents[b.degree_offsets[k] : b.degree_offsets[k + 1]]]
    points: dict[tuple[int, ...], int] = {}
    rows = []
    for alpha in alphas:
        stencils = [central_weights(a) for a in alpha]
        entries = []
        for combo in itertools.product(*[range(len(s[0])) for s in stencils]):
            off = tuple(int(stencils[v][0][combo[v]]) for v in range(nv))
            w = math.prod(stencils[v][1][combo[v]] for v in range(nv))
            if w == 0.0:
                continue
            idx = points.setdefault(off, len(points))
            entries.append((idx, w))
        rows.append(entries)
    offsets = np.array(list(points.keys()), dtype=float).reshape(-1, nv)
    W = np.zeros((len(alphas), len(points)))
    for r, entries in enumerate(rows):
        for idx, w in entries:
            W[r, idx] += w
    return offsets, W, np.array(alphas)


@dataclass
class FiniteDifferenceEngine(DiffEngine):
    """Central differences with a single Richardson step.

    ``steps[k]`` is the base step for derivatives of total order ``k``; fiber
    steps are scaled by ``|y|`` so the stencil respects homogeneity.
    """

    steps: dict = field(
        default_factory=lambda: {1: 1e-2, 2: 1.5e-2, 3: 2e-2, 4: 2e-2, 5: 3.5e-2, 6: 4e-2}
    )
    richardson: bool = True
    name = "fd"

    def _derivs(self, metric, base, scales, nv, k, h, x):
        offsets, W, alphas = _order_plan(nv, k)
        batch = base.shape[1:]
        step = h * scales  # (nv, *batch)
        pts = base[:, None, ...] + offsets.T.reshape((nv, -1) + (1,) * len(batch)) * step[:, None, ...]
        vals = self._evaluate(metric, pts, nv, x)
        D = np.tensordot(W, vals, axes=(1, 0))  # (n_alpha, *batch)
        powers = np.ones_like(D)
        for v in range(nv):
            powers = powers * step[v][None, ...] ** alphas[:, v].reshape((-1,) + (1,) * len(batch))
        return D / powers

    def _evaluate(self, metric, pts, nv, x):
        if nv == 4:
            vals = metric.func(pts[0], pts[1], pts[2], pts[3])
        else:
            vals = metric.func(x[0][None, ...], x[1][None, ...], pts[0], pts[1])
        vals = np.broadcast_to(np.asarray(vals, dtype=float), pts.shape[1:])
        _check_finite(vals, metric.name)
        return vals

    def jet(self, metric, x, y, order, wrt="xy"):
        x, y = _prepare(x, y)
        batch = x.shape[1:]
        yscale = np.hypot(y[0], y[1])
        if wrt == "xy":
            nv = 4
            base = np.stack([x[0], x[1], y[0], y[1]])
            scales = np.stack([np.ones(batch), np.ones(batch), yscale, yscale])
        elif wrt == "y":
            nv = 2
            base = np.stack([y[0], y[1]])
            scales = np.stack([yscale, yscale])
        else:
            raise ValueError(f"wrt must be 'xy' or 'y', got {wrt!r}")
        b = basis(nv, order)
        c = np.zeros((b.size,) + batch)
        f0 = self._evaluate(metric, base[:, None, ...], nv, x)[0]
        c[0] = f0
        for k in range(1, order + 1):
            h = self.steps[k]
            D = self._derivs(metric, base, scales, nv, k, h, x)
            if self.richardson:
                D2 = self._derivs(metric, base, scales, nv, k, h / 2, x)
                D = (16.0 * D2 - D) / 15.0
            lo, hi = b.degree_offsets[k], b.degree_offsets[k + 1]
            c[lo:hi] = D / b.factorials[lo:hi].reshape((-1,) + (1,) * len(batch))
        return Jet(c, nv, order)


ENGINES = {"dual": JetEngine, "fd": FiniteDifferenceEngine}


def get_engine(name: str = "dual") -> DiffEngine:
    try:
        return ENGINES[name]()
    except KeyError:
        raise ValueError(f"unknown engine {name!r}; choose from {sorted(ENGINES)}") from None


def default_engine(metric) -> DiffEngine:
    """The jet engine when the metric supports it, finite differences otherwise."""
    return JetEngine() if metric.jet_capable else FiniteDifferenceEngine()
