"""Finsler fundamental functions on a planar chart, presets and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .engines import default_engine
from .errors import ConfigError, NonSmoothEvaluation
from .expr import Expression


@dataclass(frozen=True)
class MetricField:
    """A fundamental function ``F(x1, x2, y1, y2)`` on one chart.

    ``func`` must be written with numpy operations so that it accepts floats,
    arrays and (when ``jet_capable``) :class:`~fslab.jets.Jet` arguments.
    The declared differentiation orders document what downstream operations
    may request; spray jets need ``max_order_y >= 5``.
    """

    name: str
    func: Callable
    jet_capable: bool = True
    x_dependent: bool = True
    max_order_y: int = 5
    max_order_x: int = 2
    params: dict = field(default_factory=dict, compare=False)

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return self.func(x[0], x[1], y[0], y[1])


def euclidean() -> MetricField:
    return MetricField(
        "euclidean",
        lambda x1, x2, y1, y2: np.sqrt(y1 * y1 + y2 * y2),
        x_dependent=False,
    )


def randers(b1="0.3", b2="0") -> MetricField:
    """``F = |y| + b1*y1 + b2*y2`` with ``b`` constant or given by expressions in u1, u2."""
    e1, e2 = Expression(str(b1)), Expression(str(b2))
    for e in (e1, e2):
        if set(e.variables) - {"u1", "u2"}:
            raise ConfigError(f"Randers drift may only depend on u1, u2: {e.source!r}")

    def F(x1, x2, y1, y2):
        return np.sqrt(y1 * y1 + y2 * y2) + e1(u1=x1, u2=x2) * y1 + e2(u1=x1, u2=x2) * y2

    xdep = bool(e1.variables or e2.variables)
    return MetricField(
        f"randers:{e1.source},{e2.source}", F, x_dependent=xdep, params={"b": (e1.source, e2.source)}
    )


def from_expression(source: str, name: str | None = None) -> MetricField:
    """A metric given directly as an expression in u1, u2, y1, y2."""
    e = Expression(source)
    return MetricField(
        name or f"expr:{e.source}",
        lambda x1, x2, y1, y2: e(u1=x1, u2=x2, y1=y1, y2=y2),
        x_dependent=bool({"u1", "u2"} & set(e.variables)),
    )


def preset(spec: str) -> MetricField:
    """Resolve ``"euclidean"``, ``"randers:b1,b2"`` or ``"plane:<id>"``."""
    spec = spec.strip()
    kind, _, arg = spec.partition(":")
    if kind == "euclidean":
        return euclidean()
    if kind == "randers":
        parts = [p for p in arg.split(",")] if arg else ["0.3", "0"]
        if len(parts) != 2:
            raise ConfigError(f"randers preset needs two components, got {arg!r}")
        return randers(*parts)
    if kind == "plane":
        from . import plane

        return plane.construction(arg or "trifocal-rot")
    if kind == "expr":
        return from_expression(arg)
    raise ConfigError(f"unknown metric preset {spec!r}")


@dataclass
class ValidationReport:
    """Worst-case violations of the Finsler axioms over a sample set."""

    homogeneity: float
    min_value: float
    min_eigenvalue: float
    n_samples: int

    @property
    def homogeneous(self) -> bool:
        return self.homogeneity < 1e-8

    @property
    def positive(self) -> bool:
        return self.min_value > 0.0

    @property
    def strongly_convex(self) -> bool:
        return self.min_eigenvalue > 1e-10

    @property
    def ok(self) -> bool:
        return self.homogeneous and self.positive and self.strongly_convex

    def as_dict(self) -> dict:
        return {
            "homogeneity": self.homogeneity,
            "min_value": self.min_value,
            "min_eigenvalue": self.min_eigenvalue,
            "n_samples": self.n_samples,
            "ok": self.ok,
        }


def validate_metric(m: MetricField, points, vectors, engine=None) -> ValidationReport:
    """Check F1-F3 numerically at the line elements ``(points[:, k], vectors[:, k])``.

    Homogeneity is measured as ``|F(p, t v) - t F(p, v)|`` for ``t`` in
    ``{0.5, 2}``; strong convexity as the smallest eigenvalue of the fiber
    Hessian of ``E = F^2 / 2``.
    """
    x = np.asarray(points, dtype=float).reshape(2, -1)
    y = np.asarray(vectors, dtype=float).reshape(2, -1)
    x, y = np.broadcast_arrays(x, y)
    if x.shape[1] == 0:
        raise ValueError("no samples")
    engine = engine or default_engine(m)
    F = np.asarray(m(x, y), dtype=float)
    if not np.all(np.isfinite(F)):
        raise NonSmoothEvaluation(f"{m.name} returned non-finite values")
    hom = 0.0
    for t in (0.5, 2.0):
        Ft = np.asarray(m(x, t * y), dtype=float)
        if not np.all(np.isfinite(Ft)):
            raise NonSmoothEvaluation(f"{m.name} returned non-finite values")
        hom = max(hom, float(np.max(np.abs(Ft - t * F))))
    jet = engine.jet(m, x, y, 2, wrt="y")
    E = jet * jet * 0.5
    g = np.array(
        [[E.partial(2, 0), E.partial(1, 1)], [E.partial(1, 1), E.partial(0, 2)]]
    )
    g = np.moveaxis(g, (0, 1), (-2, -1))
    if not np.all(np.isfinite(g)):
        raise NonSmoothEvaluation(f"{m.name} has a non-finite Hessian")
    eig = np.linalg.eigvalsh(g)
    return ValidationReport(
        homogeneity=hom,
        min_value=float(np.min(F)),
        min_eigenvalue=float(np.min(eig)),
        n_samples=int(np.prod(F.shape)),
    )


def random_samples(n: int, rng: np.random.Generator, radius: float = 1.0):
    """Base points in ``[-radius, radius]^2`` and unit-circle fiber directions."""
    pts = rng.uniform(-radius, radius, size=(2, n))
    ang = rng.uniform(0.0, 2.0 * np.pi, size=n)
    vec = np.stack([np.cos(ang), np.sin(ang)]) * rng.uniform(0.5, 2.0, size=n)
    return pts, vec
