"""Config-driven experiment runner.

    reslab run --config exp.json --out results/
    reslab validate --config exp.json
    reslab recipes --out recipes/

Exit codes: 0 success, 2 configuration error, 3 numerical failure (partial
artifacts are still written).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .asymptotics import (RegimeError, classify_regime, lri_bounds, match_resonances,
                          predict_all)
from .counting import (CountParams, counting_report, log_strip_census,
                       potential_id, resonance_free_probe, resonances_in, sasymp_probe)
from .hardy import Hm1Model, Hm2Model, PolyRootError, hm1_locate, hm2_locate
from .potential import PotentialError, QuadratureError, from_json
from .rootfind import (LogStrip, NewtonDivergence, WindingBudgetError, ZeroOnContour,
                       region_from_dict)
from .scattering import ConditioningError, EngineParams, ScatteringError

EXPERIMENTS = ("find", "match", "count", "census", "free_probe", "sasymp", "hardy", "regime")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

NUMERICAL_ERRORS = (ConditioningError, ScatteringError, QuadratureError, WindingBudgetError,
                    ZeroOnContour, NewtonDivergence, PolyRootError, np.linalg.LinAlgError)


class ConfigError(ValueError):
    """The experiment configuration is malformed or inconsistent."""


# -- schema --------------------------------------------------------------------------

_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_CPLX = {"oneOf": [_NUM, {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2}]}
_POTENTIAL = {"type": "object", "minProperties": 1, "maxProperties": 1}


def _obj(props: dict, required: tuple = ()) -> dict:
    return {"type": "object", "additionalProperties": False, "properties": props,
            "required": list(required)}


_REGION = {"oneOf": [
    _obj({"rectangle": _obj({"re0": _NUM, "re1": _NUM, "im0": _NUM, "im1": _NUM},
                            ("re0", "re1", "im0", "im1"))}, ("rectangle",)),
    _obj({"log_strip": _obj({"M1": _NUM, "M2": _POS, "r0": _NUM, "r1": _POS,
                             "half": {"enum": ["left", "right", "both"]}},
                            ("M2", "r0", "r1"))}, ("log_strip",)),
]}

_ENGINE = _obj({"rtol": _POS, "atol": _POS, "h_max": _POS, "c_osc": _POS,
                "m_cap": {"oneOf": [_POS, {"type": "null"}]},
                "method": {"enum": ["DOP853", "RK45", "Radau", "LSODA"]},
                "picard_iters": {"type": "integer", "minimum": 1},
                "picard_max_iters": {"type": "integer", "minimum": 1},
                "picard_nodes": {"type": "integer", "minimum": 4},
                "layer_frac": _POS})

_SEARCH = _obj({"min_box": _POS, "tol": _POS, "tile_width": _POS, "top_margin": _POS,
                "max_boxes": {"type": "integer", "minimum": 1}})

_MODEL = {"oneOf": [
    _obj({"hm1": _obj({"C": _CPLX, "M": _NUM, "L": _POS, "C0": _POS}, ("C", "M", "L"))},
         ("hm1",)),
    _obj({"hm2": _obj({"C1": _CPLX, "C2": _CPLX, "M": {"type": "integer"},
                       "N": {"type": "integer"}, "L": _POS, "K": _POS, "eta": _POS},
                      ("C1", "C2", "M", "N", "L", "K", "eta"))}, ("hm2",)),
]}

_NRANGE = {"type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}


def _needs(experiment: str, *keys: str) -> dict:
    return {"if": {"properties": {"experiment": {"const": experiment}}},
            "then": {"required": list(keys)}}


CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "name": {"type": "string"},
        "experiment": {"enum": list(EXPERIMENTS)},
        "potential": _POTENTIAL,
        "perturbation": _POTENTIAL,
        "region": _REGION,
        "engine": _ENGINE,
        "search": _SEARCH,
        "radii": {"type": "array", "items": _POS, "minItems": 1},
        "M": _POS,
        "M_inner": {"type": "number", "minimum": 0},
        "r_min": {"type": "number", "minimum": 0},
        "r_range": {"type": "array", "items": _POS, "minItems": 2, "maxItems": 2},
        "thetas": {"type": "array", "items": _NUM, "minItems": 1},
        "known_zeros": {"type": "array", "items": _CPLX},
        "n_range": _NRANGE,
        "half": {"enum": ["left", "right", "both"]},
        "use_symmetry": {"type": "boolean"},
        "radius_frac": _POS,
        "model": _MODEL,
    },
    "allOf": [
        _needs("find", "potential", "region"),
        _needs("match", "potential", "n_range"),
        _needs("count", "potential", "radii"),
        _needs("census", "potential", "M", "radii"),
        _needs("free_probe", "potential", "M", "r_range"),
        _needs("sasymp", "potential", "thetas", "radii"),
        _needs("hardy", "model", "n_range"),
        _needs("regime", "potential"),
    ],
}


def validate_config(cfg) -> None:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: {exc.message}") from None


def load_config(path: str | Path) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    validate_config(cfg)
    return cfg


# -- output helpers ------------------------------------------------------------------

def fmt(v) -> str:
    """Canonical text for CSV cells; floats keep 17 significant digits."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def write_csv(path: Path, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def read_csv(path: Path) -> tuple:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


def emit_plot_data(out: Path, scatter: dict, sequences=(), re_max: float | None = None,
                   n_curve: int = 200) -> list:
    """Columnar ``re im`` files for gnuplot.

    ``scatter`` maps a name to an array of points (one ``scatter_<name>.dat``
    each); every sequence gets ``curve_<label>_<half>.dat`` holding the
    polyline ``Im = im_const - log_coeff log|Re|``.
    """
    written = []
    for name, pts in scatter.items():
        path = out / f"scatter_{name}.dat"
        pts = np.asarray(pts, dtype=complex).ravel()
        with open(path, "w") as fh:
            fh.write("# re im\n")
            for z in pts:
                fh.write(f"{fmt(z.real)} {fmt(z.imag)}\n")
        written.append(path)
    for seq in sequences:
        top = re_max if re_max is not None else 50 * seq.spacing
        x = np.linspace(0.5 * seq.spacing, top, n_curve) * seq.sign
        y = seq.curve(x)
        path = out / f"curve_{seq.label or 'string'}_{seq.half}.dat"
        with open(path, "w") as fh:
            fh.write("# re im\n")
            for a, b in zip(x, y):
                fh.write(f"{fmt(a)} {fmt(b)}\n")
        written.append(path)
    return written


# -- building blocks -------------------------------------------------------------------

def build_engine(cfg: dict, mcap: float | None = None, mcap_set: bool = False) -> EngineParams:
    eng = EngineParams(**cfg.get("engine", {}))
    if mcap_set:
        eng = eng.with_cap(mcap)
    return eng


def build_params(cfg: dict, eng: EngineParams, seed: int, workers: int) -> CountParams:
    return CountParams(engine=eng, seed=seed, workers=workers, **cfg.get("search", {}))


def _build_potential(body: dict):
    try:
        return from_json(body)
    except (PotentialError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad potential: {exc}") from None


def _cx(v) -> complex:
    return complex(v[0], v[1]) if isinstance(v, list) else complex(v)


def build_model(body: dict):
    (kind, m), = body.items()
    try:
        if kind == "hm1":
            return Hm1Model(_cx(m["C"]), m["M"], m["L"]), m.get("C0")
        return Hm2Model(_cx(m["C1"]), _cx(m["C2"]), m["M"], m["N"], m["L"], m["K"]), m["eta"]
    except ValueError as exc:
        raise ConfigError(f"bad model: {exc}") from None


def prepare(cfg: dict, seed: int = 0, workers: int = 1, mcap: float | None = None,
            mcap_set: bool = False) -> dict:
    """Validate and build every object the experiment needs; raises ConfigError."""
    validate_config(cfg)
    try:
        eng = build_engine(cfg, mcap, mcap_set)
        params = build_params(cfg, eng, seed, workers)
    except TypeError as exc:
        raise ConfigError(f"bad engine/search block: {exc}") from None
    job = {"cfg": cfg, "engine": eng, "params": params}
    if "potential" in cfg:
        V = _build_potential(cfg["potential"])
        if "name" in cfg:
            V = replace(V, label=cfg["name"])
        job["V"] = V
    if "perturbation" in cfg:
        job["W"] = _build_potential(cfg["perturbation"])
    if "region" in cfg:
        try:
            job["region"] = region_from_dict(cfg["region"])
        except ValueError as exc:
            raise ConfigError(f"bad region: {exc}") from None
    if "model" in cfg:
        job["model"], job["model_arg"] = build_model(cfg["model"])
    if "n_range" in cfg:
        n0, n1 = cfg["n_range"]
        if not 1 <= n0 <= n1:
            raise ConfigError("n_range must satisfy 1 <= n0 <= n1")
    exp = cfg["experiment"]
    if exp in ("match", "regime"):
        try:
            if exp == "regime":
                classify_regime(job["V"])
            else:
                predict_all(job["V"])
        except (ValueError, KeyError) as exc:
            raise ConfigError(f"no prediction for this potential: {exc}") from None
    return job


# -- experiments ---------------------------------------------------------------------

def _resonance_rows(items) -> list:
    return [(r.lam.real, r.lam.imag, r.multiplicity, r.residual, r.verified_winding)
            for r in items]


RES_HEADER = ["re", "im", "multiplicity", "residual", "verified"]


def run_find(job: dict, out: Path) -> tuple:
    rs = resonances_in(job["V"], job["region"], job["params"])
    write_csv(out / "resonances.csv", RES_HEADER, _resonance_rows(rs.items))
    emit_plot_data(out, {"resonances": rs.lambdas})
    summary = {"potential": rs.potential_id, "region": job["cfg"]["region"],
               "count": rs.total_multiplicity, "boundary_winding": rs.boundary_winding,
               "complete": rs.complete, "notes": rs.meta.get("notes", [])}
    return summary, rs.complete


def match_region(V, sequences, n_range, m_cap, half: str) -> LogStrip:
    """A log strip holding every predicted point in ``n_range`` with a margin."""
    pts = np.concatenate([s.points(range(n_range[0], n_range[1] + 1)) for s in sequences])
    sp = max(s.spacing for s in sequences)
    r = np.abs(pts)
    r0 = max(float(r.min()) - sp, 0.0)
    r1 = float(r.max()) + sp
    depth = float(np.max((-pts.imag + sp) / np.log1p(r)))
    M = max(depth, max(s.log_coeff for s in sequences) + 1.0)
    if m_cap is not None:
        M = min(M, m_cap)
    return LogStrip(0.0, M, r0, r1, half)


def run_match(job: dict, out: Path) -> tuple:
    cfg, V, params = job["cfg"], job["V"], job["params"]
    half = cfg.get("half", "right")
    n_range = cfg["n_range"]
    ns = range(n_range[0], n_range[1] + 1)
    seqs = []
    for h in (["right", "left"] if half == "both" else [half]):
        seqs += predict_all(V, h)
    region = match_region(V, seqs, n_range, params.engine.m_cap, half)
    if "region" in job:
        region = job["region"]
    rs = resonances_in(V, region, params)
    table = match_resonances(rs, seqs, ns, cfg.get("radius_frac", 0.45))
    write_csv(out / "resonances.csv", RES_HEADER, _resonance_rows(rs.items))
    header = ["n", "half", "re_pred", "im_pred", "re_comp", "im_comp", "abs_err", "multiplicity"]
    labels = sorted({s.label or "string" for s in seqs})
    for label in labels:
        rows = []
        for row in table.rows:
            if (row.label or "string") != label:
                continue
            comp = row.comp if row.comp is not None else complex(float("nan"), float("nan"))
            rows.append((row.n, row.half, row.pred.real, row.pred.imag, comp.real, comp.imag,
                         row.abs_err, row.multiplicity))
        write_csv(out / f"residuals_{label}.csv", header, rows)
    emit_plot_data(out, {"resonances": rs.lambdas}, seqs, re_max=region.r1)
    ok = rs.complete and not table.unmatched_predicted
    summary = {"potential": rs.potential_id, "region": region.to_dict(),
               "complete": rs.complete, "boundary_winding": rs.boundary_winding,
               "sequences": table.summary,
               "unmatched_predicted": [[lab, n, h, z] for lab, n, h, z in
                                       table.unmatched_predicted],
               "unmatched_computed": table.unmatched_computed,
               "ambiguous": table.ambiguous, "notes": rs.meta.get("notes", [])}
    if "W" in job:
        b = lri_bounds(V.extras.get("base", V), job["W"])
        summary["lri"] = {"M0": b.M0, "M1": b.M1, "window": list(b.window),
                          "window_ok": b.window_ok}
    return summary, ok


def _report_outputs(rep, out: Path, extra_cols: dict) -> dict:
    header = ["r", "count", "predicted", "ratio"] + list(extra_cols)
    rows = [(r, c, p, q, *(extra_cols[k][i] for k in extra_cols))
            for i, (r, c, p, q) in enumerate(zip(rep.radii, rep.counts, rep.predicted,
                                                  rep.ratio))]
    write_csv(out / "counts.csv", header, rows)
    lams = np.array([complex(*z) for z in rep.meta.get("lambdas", [])], dtype=complex)
    emit_plot_data(out, {"resonances": lams})
    summary = rep.summary()
    summary.update({k: rep.meta[k] for k in rep.meta if k not in ("lambdas", "engine")})
    return summary


def run_count(job: dict, out: Path) -> tuple:
    cfg = job["cfg"]
    rep = counting_report(job["V"], cfg["radii"], job["params"], cfg.get("M"),
                          cfg.get("use_symmetry", True))
    extra = {k: rep.meta.get(k, [0] * len(rep.radii)) for k in ("right", "left", "axis")}
    summary = _report_outputs(rep, out, extra)
    return summary, bool(rep.meta.get("complete", True))


def run_census(job: dict, out: Path) -> tuple:
    cfg = job["cfg"]
    rep = log_strip_census(job["V"], cfg["M"], cfg["radii"], job["params"],
                           cfg.get("M_inner", 0.0), cfg.get("use_symmetry", True),
                           cfg.get("r_min", 0.0))
    extra = {"left": rep.meta.get("left", []), "axis": rep.meta.get("axis", [0] * len(rep.radii))}
    if "string_counts" in rep.meta:
        extra["string"] = rep.meta["string_counts"]
    summary = _report_outputs(rep, out, extra)
    return summary, bool(rep.meta.get("complete", True))


def run_free_probe(job: dict, out: Path) -> tuple:
    cfg = job["cfg"]
    try:
        res = resonance_free_probe(job["V"], cfg["M"], tuple(cfg["r_range"]), job["params"])
    except ValueError as exc:
        if isinstance(exc, NUMERICAL_ERRORS):
            raise
        raise ConfigError(str(exc)) from None
    write_csv(out / "profile.csv", ["r", "min_detS_dev", "max_detS_dev", "min_abs_A"],
              [(r["r"], r["min_detS_dev"], r["max_detS_dev"], r["min_abs_A"]) for r in res.rows])
    summary = {"potential": potential_id(job["V"]), "M": res.M, "r_range": list(res.r_range),
               "windings": res.windings, "zero_found": res.zero_found, "zeros": res.zeros,
               "status": res.status, "min_detS_dev": res.min_detS_dev,
               "max_detS_dev": res.max_detS_dev}
    return summary, not res.zero_found


def run_sasymp(job: dict, out: Path) -> tuple:
    cfg = job["cfg"]
    known = [_cx(z) for z in cfg.get("known_zeros", [])]
    rows = sasymp_probe(job["V"], cfg["thetas"], cfg["radii"], known, job["params"].min_box,
                        job["engine"])
    write_csv(out / "sasymp.csv", ["theta", "r", "re", "im", "log_abs_detS", "ratio", "skipped"],
              [(r.theta, r.r, r.lam.real, r.lam.imag, r.log_abs_detS, r.ratio, r.skipped)
               for r in rows])
    summary = {"potential": potential_id(job["V"]), "rows": len(rows),
               "skipped": sum(r.skipped for r in rows)}
    return summary, True


def run_hardy(job: dict, out: Path) -> tuple:
    cfg = job["cfg"]
    model, arg = job["model"], job["model_arg"]
    n0, n1 = cfg["n_range"]
    halves = ["right", "left"] if cfg.get("half", "right") == "both" else [cfg.get("half", "right")]
    zeros = []
    try:
        for h in halves:
            if isinstance(model, Hm1Model):
                zeros += hm1_locate(model, range(n0, n1 + 1), arg, h)
            else:
                zeros += hm2_locate(model, range(n0, n1 + 1), arg, h)
    except ValueError as exc:
        if isinstance(exc, NUMERICAL_ERRORS):
            raise
        raise ConfigError(str(exc)) from None
    write_csv(out / "hardy.csv",
              ["n", "half", "re_seed", "im_seed", "re", "im", "multiplicity", "residual",
               "winding", "verified"],
              [(z.n, z.half, z.seed.real, z.seed.imag, z.lam.real, z.lam.imag, z.multiplicity,
                z.residual, z.winding, z.verified) for z in zeros])
    emit_plot_data(out, {"seeds": [z.seed for z in zeros], "zeros": [z.lam for z in zeros]})
    ok = all(z.verified for z in zeros)
    summary = {"model": cfg["model"], "zeros": len(zeros),
               "verified": sum(z.verified for z in zeros), "all_verified": ok}
    return summary, ok


def run_regime(job: dict, out: Path) -> tuple:
    rep = classify_regime(job["V"])
    seqs = predict_all(job["V"])
    summary = {"potential": potential_id(job["V"]), "case_id": rep.case_id, "T1": rep.T1,
               "T2": rep.T2, "T3": rep.T3, "A": rep.A, "B": rep.B, "alpha": rep.alpha,
               "beta": rep.beta, "C_A": rep.C_A, "C_B": rep.C_B,
               "strings": [{"label": s.label, "spacing": s.spacing, "phase": s.phase,
                            "im_const": s.im_const, "log_coeff": s.log_coeff,
                            "multiplicity": s.multiplicity} for s in seqs]}
    emit_plot_data(out, {}, seqs)
    return summary, True


RUNNERS = {"find": run_find, "match": run_match, "count": run_count, "census": run_census,
           "free_probe": run_free_probe, "sasymp": run_sasymp, "hardy": run_hardy,
           "regime": run_regime}


def run(cfg: dict, out: str | Path, seed: int = 0, workers: int = 1,
        mcap: float | None = None, mcap_set: bool = False) -> int:
    """Run one experiment and write its artifacts into ``out``; returns the exit code."""
    try:
        job = prepare(cfg, seed, workers, mcap, mcap_set)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    exp = cfg["experiment"]
    try:
        summary, ok = RUNNERS[exp](job, out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RegimeError, *NUMERICAL_ERRORS) as exc:
        write_json(out / "summary.json", {"experiment": exp, "error": f"{type(exc).__name__}: {exc}",
                                          "ok": False})
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    summary = {"experiment": exp, "ok": ok, "seed": seed, "version": __version__, **summary}
    write_json(out / "summary.json", summary)
    return EXIT_OK if ok else EXIT_NUMERICAL


# -- recipes -------------------------------------------------------------------------

def _vjk(a=0.0, b=1.0, j=0, k=0, C1=1.0, C2=1.0):
    return {"vjk": {"a": a, "b": b, "j": j, "k": k, "C1": C1, "C2": C2}}


def _two_hump(a, b, c, j, k, l, C=(1.0, 1.0, 2.0, 1.0)):
    return {"two_hump": {"a": a, "b": b, "c": c, "j": j, "k": k, "l": l,
                         "C1": C[0], "C2": C[1], "C3": C[2], "C4": C[3]}}


RECIPES = {
    "c01_square_well_oracle": {
        "experiment": "find", "potential": _vjk(),
        "region": {"rectangle": {"re0": -0.5, "re1": 70.0, "im0": -14.0, "im1": -0.1}}},
    "c02_vjk_string": {"experiment": "match", "potential": _vjk(), "n_range": [10, 40]},
    "c03_smooth_bump": {
        "experiment": "match", "n_range": [20, 40],
        "potential": {"sum": [_vjk(), {"bump": {"x0": -1.0, "x1": 0.5, "height": 1.0,
                                               "order": 12}}]}},
    "c04a_window_perturbation": {
        "experiment": "match", "n_range": [20, 40],
        "potential": {"sum": [_vjk(), {"step": {"x0": 0.3, "x1": 0.6, "height": 1.0}}]},
        "perturbation": {"step": {"x0": 0.3, "x1": 0.6, "height": 1.0}}},
    "c04b_wide_perturbation_census": {
        "experiment": "census", "M": 16.0, "M_inner": 10.5, "radii": [40, 60, 80, 100],
        "engine": {"m_cap": 16.0},
        "potential": {"sum": [_vjk(), {"step": {"x0": 0.05, "x1": 0.95, "height": 1.0}}]}},
    "c05_counting_law": {"experiment": "count", "potential": _vjk(), "radii": [25, 50, 100]},
    "c06_two_hump_case1": {"experiment": "match", "potential": _two_hump(0, 1, 3, 0, 0, 0),
                           "n_range": [10, 25]},
    "c06_two_hump_case1_census": {"experiment": "census", "potential": _two_hump(0, 1, 3, 0, 0, 0),
                                  "M": 3.0, "radii": [30, 60]},
    "c07_two_hump_case2": {"experiment": "match", "potential": _two_hump(0, 2, 3, 0, 0, 6),
                           "n_range": [10, 25]},
    "c07_two_hump_case2_census": {"experiment": "census", "potential": _two_hump(0, 2, 3, 0, 0, 6),
                                  "M": 5.0, "radii": [30, 60]},
    "c08_two_hump_case3": {"experiment": "match", "potential": _two_hump(0, 1, 2, 0, 0, 4),
                           "n_range": [10, 25]},
    "c09_fractional_edges": {
        "experiment": "match", "n_range": [10, 30],
        "potential": {"stepin": {"a": 0.0, "b": 1.0, "mu": -0.5, "nu": -0.5, "v0": [1.0]}}},
    "c10_resonance_free_strip": {"experiment": "free_probe", "potential": _vjk(0, 1, 5, 5),
                                 "M": 0.9, "r_range": [20, 100]},
    "c11_hardy_hm1": {"experiment": "hardy", "model": {"hm1": {"C": 1.0, "M": 1, "L": 1.0}},
                      "n_range": [5, 50]},
    "c11_hardy_hm2": {"experiment": "hardy", "half": "both", "n_range": [10, 30],
                      "model": {"hm2": {"C1": 2.0, "C2": 1.0, "M": 1, "N": 2, "L": 1.0,
                                        "K": 2.0, "eta": 0.3}}},
    "regime_case1": {"experiment": "regime", "potential": _two_hump(0, 1, 3, 0, 0, 0)},
    "regime_case2": {"experiment": "regime", "potential": _two_hump(0, 2, 3, 0, 0, 6)},
    "regime_case3": {"experiment": "regime", "potential": _two_hump(0, 1, 2, 0, 0, 4)},
    "sasymp_square_well": {"experiment": "sasymp", "potential": _vjk(),
                           "thetas": [-0.7853981633974483, -0.1], "radii": [20, 40, 60, 80, 100]},
}

TEST_RECIPES = {
    "c12_property_suites": "pytest tests/test_acceptance.py -k property_suites",
    "c13_sme_residual_decay": "pytest tests/test_acceptance.py -k sme",
}


def write_recipes(out: Path) -> list:
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, cfg in RECIPES.items():
        validate_config(cfg)
        p = out / f"{name}.json"
        write_json(p, cfg)
        paths.append(p)
    with open(out / "commands.txt", "w") as fh:
        for name in RECIPES:
            fh.write(f"reslab run --config {name}.json --out results/{name}\n")
        for name, cmd in TEST_RECIPES.items():
            fh.write(f"{cmd}  # {name}\n")
    return paths


# -- entry point -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="reslab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--mcap", type=float, default=None,
                   help="conditioning cap M in |Im| <= M log(1+|lam|); 0 disables it")
    v = sub.add_parser("validate", help="check a config against the schema")
    v.add_argument("--config", required=True)
    rc = sub.add_parser("recipes", help="list or write the reproduction configs")
    rc.add_argument("--out", default=None)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "validate":
        try:
            cfg = load_config(args.config)
            prepare(cfg)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print("ok")
        return EXIT_OK
    if args.command == "recipes":
        if args.out is None:
            for name, cfg in RECIPES.items():
                print(f"{name}\t{cfg['experiment']}")
            for name, cmd in TEST_RECIPES.items():
                print(f"{name}\t{cmd}")
        else:
            for p in write_recipes(Path(args.out)):
                print(p)
        return EXIT_OK
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    mcap_set = args.mcap is not None
    mcap = None if (args.mcap is not None and args.mcap <= 0) else args.mcap
    return run(cfg, args.out, args.seed, max(1, args.workers), mcap, mcap_set)


if __name__ == "__main__":
    sys.exit(main())
