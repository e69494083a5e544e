"""Batch front end: ``fslab {analyze,connection,wagner,curvature,figures}``.

Runs are described by an INI file::

    [metric]
    preset = plane:trifocal-rot      ; or: construction = other.ini

    [grid]
    u1 = -0.5, 0.5, 3                ; lo, hi, count
    u2 = -0.5, 0.5, 3
    ; points = 0.5 0.5; -0.4 0.3     ; explicit list instead of u1/u2

    [run]
    samples = 256                    ; indicatrix samples per trace
    engine = dual                    ; overridden by --engine
    tol_scale = 1                    ; overridden by --tol-scale

    [curvature]
    connection = recovered           ; recovered | closed-form | zero
    nodes = 5

    [figures]
    radial_t = 0, 0.75, 1.25
    circle_t = 0, 0.785398, 1.570796

A ``[construction]`` section (keys ``rho1``, ``rho2``, ``seed``) may replace
``[metric]``.  Exit codes: 0 success, 2 invariant failure, 3 config error.
Every run writes ``summary.json`` with a ``verdict`` field.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import connection as cn
from . import curvature as cv
from . import indicatrix as ind
from . import plane
from .core import LineElementJets, identity_residuals
from .engines import FiniteDifferenceEngine, default_engine, get_engine
from .errors import ConfigError, FinslerLabError, FiberDependence, InconsistentConstants, NotMetrical, RiemannianCase
from .metrics import preset, validate_metric

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG = 0, 2, 3

# invariant tolerances of the analysis suites (before --tol-scale)
IDENTITY_TOLS = {
    "euler_F": 1e-8,
    "euler_E": 1e-8,
    "cartan_null": 1e-7,
    "det_g_equals_gVV": 1e-6,
    "mainscalar1": 1e-5,
    "mainscalar2": 1e-5,
    "mainscalar2_trace": 1e-5,
    "wag015": 1e-4,
    "eq4": 1e-4,
    "wag01": 1e-6,
    "alpha_vs_landsberg": 1e-6,
    "wag01_omega": 1e-6,
}
TRACE_F_TOL = 1e-7
COMPAT_TOL = 1e-4
SUM_TOL = 1e-5
FLAT_TOL = 1e-4
FOCAL_TOL = 1e-6


@dataclass
class RunConfig:
    command: str
    metric: object
    points: np.ndarray
    engine_name: str | None
    tol_scale: float
    out: Path
    samples: int = 256
    sections: dict = field(default_factory=dict)

    @property
    def engine(self):
        if self.engine_name is None:
            return default_engine(self.metric)
        if self.engine_name == "dual" and not self.metric.jet_capable:
            return FiniteDifferenceEngine()
        return get_engine(self.engine_name)


def _floats(text: str, key: str) -> list[float]:
    try:
        return [float(s) for s in text.replace(",", " ").split()]
    except ValueError:
        raise ConfigError(f"{key}: expected numbers, got {text!r}") from None


def _axis(text: str, key: str) -> np.ndarray:
    vals = _floats(text, key)
    if len(vals) != 3 or vals[2] < 1 or vals[2] != int(vals[2]):
        raise ConfigError(f"{key}: expected 'lo, hi, count' with count >= 1, got {text!r}")
    return np.linspace(vals[0], vals[1], int(vals[2]))


def _grid(cp: configparser.ConfigParser) -> np.ndarray:
    if "grid" not in cp:
        return np.zeros((2, 1))
    sec = cp["grid"]
    if "points" in sec:
        rows = [r for r in sec["points"].split(";") if r.strip()]
        pts = [_floats(r, "grid.points") for r in rows]
        if not pts or any(len(p) != 2 for p in pts):
            raise ConfigError(f"grid.points: expected 'u1 u2; u1 u2; ...', got {sec['points']!r}")
        return np.array(pts, dtype=float).T
    for key in ("u1", "u2"):
        if key not in sec:
            raise ConfigError(f"grid.{key} is missing")
    U1, U2 = np.meshgrid(_axis(sec["u1"], "grid.u1"), _axis(sec["u2"], "grid.u2"), indexing="ij")
    return np.stack([U1.ravel(), U2.ravel()])


def _metric(cp: configparser.ConfigParser, base: Path):
    if "metric" in cp:
        sec = cp["metric"]
        if "preset" in sec:
            return preset(sec["preset"])
        if "construction" in sec:
            path = (base / sec["construction"]).resolve()
            if not path.exists():
                raise ConfigError(f"metric.construction: file {str(path)!r} does not exist")
            return plane.construction_from_config(path)
        raise ConfigError("metric: needs a 'preset' or 'construction' key")
    if "construction" in cp:
        return plane.construction_from_config(cp["construction"])
    raise ConfigError("config needs a [metric] or [construction] section")


def load_config(args) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file {str(path)!r} does not exist")
        try:
            cp.read(path)
        except configparser.Error as exc:
            raise ConfigError(f"cannot parse {str(path)!r}: {exc}") from None
        base = path.parent
    else:
        base = Path(".")
    if args.command == "figures" and "metric" not in cp and "construction" not in cp:
        metric = None
    else:
        metric = _metric(cp, base)
    run = cp["run"] if "run" in cp else {}
    engine = args.engine or run.get("engine")
    if engine is not None and engine not in ("dual", "fd"):
        raise ConfigError(f"run.engine: expected 'dual' or 'fd', got {engine!r}")
    try:
        tol_scale = float(args.tol_scale if args.tol_scale is not None else run.get("tol_scale", "1"))
        samples = int(run.get("samples", "256"))
    except ValueError as exc:
        raise ConfigError(f"run: {exc}") from None
    if tol_scale <= 0 or samples < 16:
        raise ConfigError("run.tol_scale must be positive and run.samples at least 16")
    points = _grid(cp)
    if points.shape[1] == 0:
        raise ConfigError("grid is empty")
    sections = {s: dict(cp[s]) for s in cp.sections()}
    return RunConfig(args.command, metric, points, engine, tol_scale, Path(args.out), samples, sections)


# -- helpers -----------------------------------------------------------------


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("FSL_THREADS", "1")))
    except ValueError:
        return 1


def _trace_grid(cfg: RunConfig, points=None):
    """Traces at the grid points, split over ``FSL_THREADS`` workers."""
    pts = cfg.points if points is None else points
    k = min(_threads(), pts.shape[1])
    chunks = np.array_split(np.arange(pts.shape[1]), k)
    with ThreadPoolExecutor(max_workers=k) as pool:
        parts = pool.map(lambda idx: ind.trace_many(cfg.metric, pts[:, idx], cfg.engine, cfg.samples), chunks)
        return [tr for part in parts for tr in part]


def _num(x):
    """JSON-safe rounded float (deterministic output)."""
    if x is None:
        return None
    x = float(x)
    if not np.isfinite(x):
        return str(x)
    return float(f"{x:.12e}")


def _arr(a):
    return np.vectorize(_num, otypes=[object])(np.asarray(a, dtype=float)).tolist()


def _write(out: Path, name: str, text: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _summary(cfg: RunConfig, verdict: str, ok: bool, body: dict) -> int:
    data = {"command": cfg.command, "metric": cfg.metric.name if cfg.metric else None, "verdict": verdict, "ok": ok}
    data.update(body)
    _write(cfg.out, "summary.json", json.dumps(data, indent=1, sort_keys=True) + "\n")
    print(f"{cfg.command}: {verdict} -> {cfg.out / 'summary.json'}")
    return EXIT_OK if ok else EXIT_INVARIANT


# -- commands ------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig) -> int:
    m, eng = cfg.metric, cfg.engine
    ang = 2.0 * np.pi * np.arange(8) / 8
    fib = np.stack([np.cos(ang), np.sin(ang)])
    B = cfg.points.shape[1]
    P = np.repeat(cfg.points, 8, axis=1)
    Y = np.tile(fib, B)
    val = validate_metric(m, P, Y, eng)
    order = 5 if m.x_dependent else 4
    calc = LineElementJets.at(m, P, Y, eng, order=order, wrt="xy" if m.x_dependent else "y")
    ids = identity_residuals(calc)
    failed = sorted(k for k, v in ids.items() if k in IDENTITY_TOLS and not v < IDENTITY_TOLS[k] * cfg.tol_scale)
    traces = _trace_grid(cfg)
    rows = []
    for b, tr in enumerate(traces):
        gam = ind.averaged_metric(tr)
        if tr.F_drift >= TRACE_F_TOL * cfg.tol_scale:
            failed.append(f"trace_F_drift[{b}]")
        if not gam.positive_definite:
            failed.append(f"averaged_metric[{b}]")
        rows.append({
            "basePoint": _arr(tr.basePoint),
            "period": _num(tr.period),
            "closure": _num(tr.closure),
            "F_drift": _num(tr.F_drift),
            "lambdaRange": _num(np.ptp(tr.lam)),
            "nonRiemannian": bool(np.ptp(tr.lam) >= cn.RIEMANNIAN_RANGE),
            "averagedMetric": _arr(gam.gamma),
        })
        _write(cfg.out / "traces", f"trace_{b:03d}.csv", tr.to_csv())
    if not val.ok:
        failed.append("validation")
    ok = not failed
    verdict = "pass" if ok else "fail"
    body = {
        "validation": {k: _num(v) if isinstance(v, float) else v for k, v in val.as_dict().items()},
        "identities": {k: _num(v) for k, v in sorted(ids.items())},
        "tolerances": {k: _num(v * cfg.tol_scale) for k, v in sorted(IDENTITY_TOLS.items())},
        "failed": failed,
        "nonRiemannian": any(r["nonRiemannian"] for r in rows),
        "traces": rows,
    }
    return _summary(cfg, verdict, ok, body)


def cmd_connection(cfg: RunConfig) -> int:
    m = cfg.metric
    traces = _trace_grid(cfg)
    rows, gammas, failed, verdicts = [], [], [], []
    for b, tr in enumerate(traces):
        p = cfg.points[:, b]
        row = {"basePoint": _arr(p)}
        try:
            solve = cn.solve_constants(tr)
            built = cn.build_connection(m, p, solve, cfg.engine, tol=1e-4 * cfg.tol_scale)
        except RiemannianCase:
            row["verdict"] = "RiemannianCase"
            rows.append(row)
            verdicts.append("RiemannianCase")
            continue
        except (InconsistentConstants, FiberDependence) as exc:
            row["verdict"] = type(exc).__name__
            row["spread"] = _num(exc.spread)
            rows.append(row)
            verdicts.append(type(exc).__name__)
            continue
        G = built.Gamma
        tor = cn.torsion_decompose(G)
        compat = cn.compatibility_residual(m, cn.constant_connection(G), np.repeat(p[:, None], tr.n, 1), tr.c[:, :-1], cfg.engine)
        try:
            lc = cn.levi_civita_compare(m, None, p, cfg.engine, n=cfg.samples, tol=1e-4 * cfg.tol_scale, Gamma=G)
            lc_id, lc_met = lc.identityResidual, lc.metricityResidual
        except NotMetrical as exc:
            lc_id, lc_met = None, None
            failed.append(f"metricity[{b}]: {exc}")
        if compat >= COMPAT_TOL * cfg.tol_scale:
            failed.append(f"compatibility[{b}]")
        row.update({
            "verdict": "Recovered",
            "k": _arr(solve.k),
            "kSpread": _num(solve.spread),
            "fiberSpread": _num(built.spread),
            "Gamma": _arr(G),
            "rho": _arr(tor.rho),
            "torsionResidual": _num(tor.residual),
            "compatibilityResidual": _num(compat),
            "leviCivitaResidual": _num(lc_id),
            "metricityResidual": _num(lc_met),
        })
        rows.append(row)
        gammas.append((p, G))
        verdicts.append("Recovered")
    grid = {"points": [_arr(p) for p, _ in gammas], "Gamma": [_arr(G) for _, G in gammas]}
    _write(cfg.out, "gamma_grid.json", json.dumps(grid, indent=1) + "\n")
    kinds = sorted(set(verdicts))
    verdict = kinds[0] if len(kinds) == 1 else "Mixed:" + "+".join(kinds)
    ok = not failed
    return _summary(cfg, verdict, ok, {"points": rows, "failed": failed})


def cmd_wagner(cfg: RunConfig) -> int:
    traces = _trace_grid(cfg)
    try:
        rep = cn.wagner_test(cfg.metric, cfg.points, cfg.engine, cfg.samples, traces=traces, threshold=1e-3 * cfg.tol_scale)
    except RiemannianCase:
        return _summary(cfg, "RiemannianCase", True, {})
    _write(cfg.out, "wagner_scatter.csv", rep.to_csv())
    solves = []
    for tr in traces:
        try:
            cn.solve_constants(tr)
            solves.append("Consistent")
        except InconsistentConstants:
            solves.append("InconsistentConstants")
        except RiemannianCase:
            solves.append("RiemannianCase")
    agree = (rep.verdict == "NotGeneralizedBerwald") == ("InconsistentConstants" in solves)
    body = {
        "scatterResidual": _num(rep.scatterResidual),
        "pdeResidual": _num(rep.pdeResidual),
        "solveConstants": solves,
        "detectorsAgree": agree,
    }
    return _summary(cfg, rep.verdict, agree, body)


def _curvature_connection(cfg: RunConfig):
    sec = cfg.sections.get("curvature", {})
    kind = sec.get("connection", "recovered" if cfg.metric.x_dependent else "zero")
    if kind == "zero":
        return cn.zero_connection()
    if kind == "closed-form":
        rho = cfg.metric.params.get("rho")
        if rho is None:
            raise ConfigError("curvature.connection = closed-form needs a plane construction metric")
        return cn.semi_symmetric_connection(rho)
    if kind != "recovered":
        raise ConfigError(f"curvature.connection: expected recovered, closed-form or zero, got {kind!r}")
    try:
        k = int(sec.get("nodes", "5"))
    except ValueError:
        raise ConfigError(f"curvature.nodes: expected an integer, got {sec.get('nodes')!r}") from None
    if k < 4:
        raise ConfigError("curvature.nodes must be at least 4")
    lo, hi = cfg.points.min(axis=1) - 0.1, cfg.points.max(axis=1) + 0.1
    n1, n2 = np.linspace(lo[0], hi[0], k), np.linspace(lo[1], hi[1], k)
    U1, U2 = np.meshgrid(n1, n2, indexing="ij")
    nodes = np.stack([U1.ravel(), U2.ravel()])
    res, _ = cn.recover_connection(cfg.metric, nodes, cfg.engine, cfg.samples, traces=_trace_grid(cfg, nodes))
    gam = np.stack([r.Gamma for r in res], axis=-1).reshape((2, 2, 2) + U1.shape)
    field_ = cn.ConnectionField(n1, n2, gam, name=f"recovered:{cfg.metric.name}")
    _write(cfg.out, "gamma_grid.json", field_.to_json() + "\n")
    return field_


def cmd_curvature(cfg: RunConfig) -> int:
    conn = _curvature_connection(cfg)
    reps = cv.divergence_representation_check(cfg.metric, conn, cfg.points, cfg.engine, cfg.samples)
    _write(cfg.out, "curvature.csv", cv.reports_to_csv(reps))
    sum_max = max(r.sumResidual for r in reps)
    r_max = max(r.connCurvatureNorm for r in reps)
    failed = []
    if sum_max >= SUM_TOL * cfg.tol_scale:
        failed.append("divergence_representation")
    if conn.name != "zero" and r_max >= FLAT_TOL * cfg.tol_scale:
        failed.append("flatness")
    ok = not failed
    body = {
        "connection": conn.name,
        "maxSumResidual": _num(sum_max),
        "maxConnCurvature": _num(r_max),
        "kappaStarRange": [_num(min(r.kappaStar for r in reps)), _num(max(r.kappaStar for r in reps))],
        "failed": failed,
    }
    return _summary(cfg, "pass" if ok else "fail", ok, body)


def cmd_figures(cfg: RunConfig) -> int:
    sec = cfg.sections.get("figures", {})
    radial = _floats(sec["radial_t"], "figures.radial_t") if "radial_t" in sec else plane.RADIAL_TS
    circle = _floats(sec["circle_t"], "figures.circle_t") if "circle_t" in sec else plane.CIRCLE_TS
    frames = plane.figure_frames(radial_ts=radial, circle_ts=circle)
    paths = plane.render_figures(cfg.out, radial_ts=radial, circle_ts=circle)
    pot = plane.potential(plane.rotational_form())
    err_closed, err_quoted = 0.0, 0.0
    rows = []
    for fr in frames:
        phi = float(pot(fr.base[0], fr.base[1]))
        closed = np.array([np.cos(phi), -np.sin(phi)])
        quoted = plane.radial_focus_formula(fr.t) if fr.family == "radial" else plane.circle_focus_formula(fr.t)
        e1 = float(np.hypot(*(fr.focal_vector - closed)))
        e2 = float(np.hypot(*(fr.focal_vector - quoted)))
        err_closed, err_quoted = max(err_closed, e1), max(err_quoted, e2)
        rows.append({"family": fr.family, "t": _num(fr.t), "base": _arr(fr.base), "focalVector": _arr(fr.focal_vector)})
    ok = err_closed < FOCAL_TOL * cfg.tol_scale
    body = {
        "frames": rows,
        "files": sorted(p.name for p in paths),
        "focalErrorVsRotationForm": _num(err_closed),
        "focalErrorVsQuotedFormulas": _num(err_quoted),
    }
    return _summary(cfg, "pass" if ok else "fail", ok, body)


COMMANDS = {
    "analyze": cmd_analyze,
    "connection": cmd_connection,
    "wagner": cmd_wagner,
    "curvature": cmd_curvature,
    "figures": cmd_figures,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fslab", description="Numerical laboratory for Finsler surfaces.")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="INI run configuration")
    ap.add_argument("--out", default="fslab-out", help="output directory")
    ap.add_argument("--engine", choices=["dual", "fd"], help="differentiation engine")
    ap.add_argument("--tol-scale", type=float, dest="tol_scale", help="multiply all pass tolerances")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FinslerLabError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
