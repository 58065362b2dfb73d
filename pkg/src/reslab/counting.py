"""Resonance censuses over regions of the lower half-plane.

Regions are tiled by rectangles, zeros of the Wronskian are located tile by
tile, and the result is certified by comparing winding numbers with the sum
of located multiplicities. On top of that sit the counting-law report, the
log-strip census, the resonance-free strip probe and the ``det S`` growth
probe.
"""

from __future__ import annotations

import math
import multiprocessing as mp
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import Sequence

import numpy as np

from .potential import PotentialSpec, sing_width
from .rootfind import (LogStrip, Rectangle, ResonanceSet, find_zeros,
                       sort_resonances, winding_numbers)
from .scattering import (DEFAULT_ENGINE, ConditioningError, EngineParams, WronskianEvaluator,
                         check_cap, det_s_minus)


@dataclass(frozen=True)
class CountParams:
    """Settings shared by all censuses.

    ``tile_width`` defaults to ``pi / |ch supp V|``, about one string zero
    per tile. ``workers > 1`` spreads tile chunks over processes; chunk ``i``
    uses seed ``seed + i`` so that results only depend on the chunking.
    """

    engine: EngineParams = DEFAULT_ENGINE
    min_box: float = 1e-4
    tol: float = 1e-10
    tile_width: float | None = None
    top_margin: float = 0.25
    max_boxes: int = 50_000
    seed: int = 0
    workers: int = 1

    def meta(self) -> dict:
        d = asdict(self)
        d["engine"] = asdict(self.engine)
        return d


DEFAULT_COUNT = CountParams()


@dataclass
class CountingReport:
    potential_id: str
    region: dict
    radii: list
    counts: list
    predicted: list
    ratio: list
    meta: dict = field(default_factory=dict)

    @property
    def onset_R(self):
        return self.meta.get("onset_R")

    def summary(self) -> dict:
        return {"potential": self.potential_id, "region": self.region, "radii": self.radii,
                "counts": self.counts, "predicted": self.predicted, "ratio": self.ratio,
                "onset_R": self.onset_R}

    def rows(self) -> list:
        return [{"r": r, "count": c, "predicted": p, "ratio": q}
                for r, c, p, q in zip(self.radii, self.counts, self.predicted, self.ratio)]


def potential_id(V: PotentialSpec) -> str:
    return V.label or V.kind


# -- tiling -----------------------------------------------------------------------

def _strip_depth(M: float, x: float, r1: float) -> float:
    """Largest ``y`` with ``y <= M log(1 + |x + iy|)`` and ``|x + iy| <= r1``."""
    y = M * math.log1p(min(r1, abs(x)))
    for _ in range(60):
        y_new = M * math.log1p(min(r1, math.hypot(x, y)))
        if abs(y_new - y) < 1e-12 * (1 + y):
            break
        y = y_new
    return y_new


def _columns(x0: float, x1: float, width: float) -> np.ndarray:
    n = max(1, int(math.ceil((x1 - x0) / width - 1e-9)))
    return np.linspace(x0, x1, n + 1)


def tile_strip(strip: LogStrip, width: float, margin: float = 0.25) -> list:
    """Rectangles covering one or both halves of a log strip.

    Columns on the right half start slightly left of the imaginary axis so
    that zeros on the axis lie inside a tile rather than on its edge; the
    left half mirrors the right.
    """
    y_max = _strip_depth(strip.M2, strip.r1, strip.r1)
    x_lo = math.sqrt(max(strip.r0 ** 2 - y_max ** 2, 0.0))
    x_lo = x_lo - 0.1 * width if x_lo > 0.1 * width else -0.1 * width
    xs = _columns(x_lo, strip.r1, width)
    right = []
    for u, v in zip(xs[:-1], xs[1:]):
        top = margin if strip.M1 == 0 else \
            -strip.M1 * math.log1p(max(u, strip.r0, 0.0)) + margin
        bottom = -_strip_depth(strip.M2, max(abs(u), abs(v)), strip.r1) - margin
        if top > bottom:
            right.append(Rectangle(float(u), float(v), float(bottom), float(top)))
    tiles = []
    if strip.half in ("right", "both"):
        tiles += right
    if strip.half in ("left", "both"):
        tiles += [Rectangle(-t.re1, -t.re0, t.im0, t.im1) for t in right]
    return tiles


def tile_rectangle(rect: Rectangle, width: float) -> list:
    xs = _columns(rect.re0, rect.re1, width)
    return [Rectangle(float(u), float(v), rect.im0, rect.im1) for u, v in zip(xs[:-1], xs[1:])]


def tile_region(region, width: float, margin: float = 0.25) -> list:
    if isinstance(region, LogStrip):
        return tile_strip(region, width, margin)
    if isinstance(region, Rectangle):
        return tile_rectangle(region, width)
    raise ValueError(f"cannot tile region of type {type(region).__name__}")


def _check_region_cap(region, m_cap) -> None:
    if m_cap is None:
        return
    if isinstance(region, LogStrip):
        if region.M2 > m_cap:
            raise ConditioningError(f"log strip depth {region.M2} exceeds the cap {m_cap}")
    elif isinstance(region, Rectangle):
        check_cap(np.array([complex(region.re0, region.im0), complex(region.re1, region.im0)]),
                  m_cap)


# -- locating zeros ---------------------------------------------------------------

@dataclass
class TileResult:
    items: list
    complete: bool
    tile_windings: list
    evaluations: int
    calls: int
    notes: list


def _find_chunk(args) -> TileResult:
    V, eng, tiles, p, seed = args
    f = WronskianEvaluator(V, eng)
    res = find_zeros(f, tiles, p.min_box, p.tol, p.max_boxes, seed)
    return TileResult(res.items, res.complete, res.boundary_windings, res.evaluations,
                      f.calls, res.notes)


def _dedupe(items: list, min_box: float) -> list:
    out: list = []
    for r in sort_resonances(items):
        if out and abs(r.lam - out[-1].lam) < 2 * min_box and r.multiplicity == out[-1].multiplicity:
            continue
        out.append(r)
    return out


def locate_in_tiles(V: PotentialSpec, tiles: list, params: CountParams = DEFAULT_COUNT) -> TileResult:
    """All zeros of the Wronskian inside the tiles, merged and sorted."""
    if V.ch_supp is None or not tiles:
        return TileResult([], True, [0] * len(tiles), 0, 0, [])
    n_chunks = max(1, min(params.workers, len(tiles)))
    bounds = np.linspace(0, len(tiles), n_chunks + 1).round().astype(int)
    jobs = [(V, params.engine, tiles[i:j], params, params.seed + k)
            for k, (i, j) in enumerate(zip(bounds[:-1], bounds[1:]))]
    if n_chunks == 1:
        parts = [_find_chunk(jobs[0])]
    else:
        with ProcessPoolExecutor(n_chunks, mp_context=mp.get_context("spawn")) as ex:
            parts = list(ex.map(_find_chunk, jobs))
    items = [r for p in parts for r in p.items]
    total = sum(r.multiplicity for r in items)
    windings = [w for p in parts for w in p.tile_windings]
    notes = [n for p in parts for n in p.notes]
    complete = all(p.complete for p in parts)
    if any(w is None for w in windings) or sum(w for w in windings if w) != total:
        complete = False
        notes.append("tile windings do not match located multiplicities")
    return TileResult(_dedupe(items, params.min_box), complete, windings,
                      sum(p.evaluations for p in parts), sum(p.calls for p in parts), notes)


def _tile_width(V: PotentialSpec, params: CountParams) -> float:
    if params.tile_width is not None:
        return params.tile_width
    return math.pi / max(V.width, 1e-3)


def region_winding(V: PotentialSpec, region, eng: EngineParams = DEFAULT_ENGINE) -> tuple:
    """Total winding of the Wronskian over the region boundary, with a status string."""
    try:
        contours = region.boundaries()
    except ValueError as exc:
        return None, f"no boundary: {exc}"
    f = WronskianEvaluator(V, eng)
    h = min(0.5, 0.75 / f.phase_rate) if f.phase_rate > 0 else 0.5
    res = winding_numbers(f, contours, h)
    bad = [r.status for r in res if r.status != "ok"]
    if bad:
        return None, bad[0]
    return int(sum(r.winding for r in res)), "ok"


def resonances_in(V: PotentialSpec, region, params: CountParams = DEFAULT_COUNT) -> ResonanceSet:
    """Every resonance inside ``region`` with a completeness certificate.

    ``complete`` is true only when all tiles were resolved, every zero passed
    its verification circle and the winding over the region boundary equals
    the sum of multiplicities found inside.
    """
    pid = potential_id(V)
    if V.ch_supp is None:
        return ResonanceSet(pid, region, [], {"certificate": "trivial"}, True, 0)
    _check_region_cap(region, params.engine.m_cap)
    tiles = tile_region(region, _tile_width(V, params), params.top_margin)
    tr = locate_in_tiles(V, tiles, params)
    inside = [r for r in tr.items if bool(region.contains(r.lam))]
    total = sum(r.multiplicity for r in inside)
    bw, status = region_winding(V, region, params.engine)
    notes = list(tr.notes)
    complete = tr.complete and all(r.verified_winding for r in inside)
    if bw is None:
        complete = False
        notes.append(f"region boundary winding unavailable ({status})")
    elif bw != total:
        complete = False
        notes.append(f"boundary winding {bw} != located multiplicity {total}")
    meta = {"tiles": len(tiles), "evaluations": tr.evaluations, "calls": tr.calls,
            "tile_certificate": tr.complete, "notes": notes, "engine": params.meta()}
    return ResonanceSet(pid, region, inside, meta, complete, bw)


# -- counting law -------------------------------------------------------------------

def onset_radius(radii: Sequence[float], values: Sequence[float], tol: float,
                 target: float = 1.0) -> float | None:
    """Smallest radius from which ``values`` stay within ``tol`` of ``target``.

    Returns ``None`` when the largest radius is not yet within tolerance.
    """
    onset = None
    for r, v in zip(reversed(list(radii)), reversed(list(values))):
        if not np.isfinite(v) or abs(v - target) > tol:
            break
        onset = float(r)
    return onset


def default_strip_depth(V: PotentialSpec, m_cap: float | None) -> float:
    """One unit deeper than the deepest predicted resonance string, capped."""
    from .asymptotics import predict_all
    try:
        kappa = max(s.log_coeff for s in predict_all(V))
    except (ValueError, KeyError):
        kappa = None
    cap = 10.0 if m_cap is None else m_cap
    return cap if kappa is None else min(cap, kappa + 1.0)


def _axis_tol(z: np.ndarray) -> np.ndarray:
    return 1e-8 * (1 + np.abs(z))


def _split_halves(lams: np.ndarray):
    tol = _axis_tol(lams)
    return lams.real > tol, lams.real < -tol, np.abs(lams.real) <= tol


def counting_report(V: PotentialSpec, radii: Sequence[float], params: CountParams = DEFAULT_COUNT,
                    M: float | None = None, use_symmetry: bool = True) -> CountingReport:
    """Counts of resonances in ``{Im lam < 0, |lam| <= r}`` against ``(2/pi) |ch supp V| r``.

    Zeros are collected in the log strip of depth ``M`` (default: one unit
    below the predicted string), since all large resonances of the supported
    potentials lie in such strips. For real ``V`` only the right half is
    searched and its count doubled, plus the zeros on the imaginary axis.
    """
    radii = [float(r) for r in radii]
    width = V.width
    predicted = [2.0 / math.pi * width * r for r in radii]
    pid = potential_id(V)
    if V.ch_supp is None:
        region = LogStrip(0.0, 1.0, 0.0, max(radii)).to_dict()
        return CountingReport(pid, region, radii, [0] * len(radii), predicted,
                              [0.0] * len(radii), {"onset_R": None, "strip_M": None})
    if M is None:
        M = default_strip_depth(V, params.engine.m_cap)
    _check_region_cap(LogStrip(0.0, M, 0.0, 1.0), params.engine.m_cap)
    symmetric = use_symmetry and V.is_real()
    strip = LogStrip(0.0, M, 0.0, max(radii), "right" if symmetric else "both")
    tiles = tile_region(strip, _tile_width(V, params), params.top_margin)
    tr = locate_in_tiles(V, tiles, params)
    lams = np.array([r.lam for r in tr.items], dtype=complex)
    mult = np.array([r.multiplicity for r in tr.items], dtype=int)
    keep = (lams.imag < 0) & (lams.imag > -M * np.log1p(np.abs(lams))) if lams.size else \
        np.zeros(0, bool)
    right, left, axis = _split_halves(lams)
    counts, rc, lc, ac = [], [], [], []
    for r in radii:
        inr = keep & (np.abs(lams) <= r)
        nr, nl, na = (int(mult[inr & m].sum()) for m in (right, left, axis))
        if symmetric:
            nl = nr
        rc.append(nr)
        lc.append(nl)
        ac.append(na)
        counts.append(nr + nl + na)
    ratio = [c / p if p > 0 else 0.0 for c, p in zip(counts, predicted)]
    meta = {"strip_M": M, "symmetric_doubling": symmetric, "right": rc, "left": lc, "axis": ac,
            "complete": tr.complete, "verified": all(r.verified_winding for r in tr.items),
            "notes": tr.notes, "tiles": len(tiles), "evaluations": tr.evaluations,
            "onset_R": onset_radius(radii, ratio, 0.05), "engine": params.meta(),
            "lambdas": [[z.real, z.imag] for z in lams[keep]]}
    return CountingReport(pid, strip.to_dict(), radii, counts, predicted, ratio, meta)


def log_strip_census(V: PotentialSpec, M: float, radii: Sequence[float],
                     params: CountParams = DEFAULT_COUNT, M_inner: float = 0.0,
                     use_symmetry: bool = True, r_min: float = 0.0) -> CountingReport:
    """Resonances in ``{-M log(1+|lam|) < Im lam < -M_inner log(1+|lam|)}`` per half.

    ``counts`` holds the right-half census for each radius, to be compared
    with ``(1/pi) |ch sing supp V| r``; the left half, the imaginary axis and
    (when a string prediction exists above depth ``M``) the predicted string
    count are kept in ``meta``.
    """
    radii = [float(r) for r in radii]
    sw = sing_width(V)
    predicted = [sw / math.pi * r for r in radii]
    pid = potential_id(V)
    strip = LogStrip(M_inner, M, r_min, max(radii), "right")
    if V.ch_supp is None:
        return CountingReport(pid, strip.to_dict(), radii, [0] * len(radii), predicted,
                              [0.0] * len(radii), {"onset_R": None, "left": [0] * len(radii)})
    if params.engine.m_cap is not None and M > params.engine.m_cap:
        raise ConditioningError(f"census depth {M} exceeds the cap {params.engine.m_cap}")
    symmetric = use_symmetry and V.is_real()
    search = LogStrip(M_inner, M, r_min, max(radii), "right" if symmetric else "both")
    tiles = tile_region(search, _tile_width(V, params), params.top_margin)
    tr = locate_in_tiles(V, tiles, params)
    lams = np.array([r.lam for r in tr.items], dtype=complex)
    mult = np.array([r.multiplicity for r in tr.items], dtype=int)
    g = np.log1p(np.abs(lams))
    keep = (lams.imag > -M * g) & (lams.imag < -M_inner * g) & (np.abs(lams) > r_min)
    if M_inner == 0:
        keep &= lams.imag < 0
    right, left, axis = _split_halves(lams)
    rc, lc, ac = [], [], []
    for r in radii:
        inr = keep & (np.abs(lams) <= r)
        rc.append(int(mult[inr & right].sum()))
        lc.append(rc[-1] if symmetric else int(mult[inr & left].sum()))
        ac.append(int(mult[inr & axis].sum()))
    ratio = [c / p if p > 0 else 0.0 for c, p in zip(rc, predicted)]
    meta = {"M": M, "M_inner": M_inner, "r_min": r_min, "symmetric_doubling": symmetric,
            "left": lc, "axis": ac, "complete": tr.complete,
            "verified": all(r.verified_winding for r in tr.items), "notes": tr.notes,
            "tiles": len(tiles), "evaluations": tr.evaluations, "engine": params.meta(),
            "onset_R": onset_radius(radii, ratio, 0.07),
            "lambdas": [[z.real, z.imag] for z in lams[keep]]}
    string = _string_counts(V, M, M_inner, radii)
    if string is not None:
        meta["string_counts"] = string
    return CountingReport(pid, search.to_dict(), radii, rc, predicted, ratio, meta)


def _string_counts(V: PotentialSpec, M: float, M_inner: float, radii: list):
    """Right-half counts of a single predicted string lying inside the strip."""
    from .asymptotics import predict_for
    try:
        seq = predict_for(V)
    except (ValueError, KeyError):
        return None
    if not (M_inner < seq.log_coeff < M):
        return None
    n_max = int(max(radii) / seq.spacing) + 5
    pts = seq.points(range(max(seq.n_min, 1), n_max))
    g = np.log1p(np.abs(pts))
    ok = (pts.imag > -M * g) & (pts.imag < -M_inner * g)
    return [int(np.sum(ok & (np.abs(pts) <= r))) for r in radii]


# -- resonance-free strips ----------------------------------------------------------

@dataclass
class FreeProbeResult:
    M: float
    r_range: tuple
    windings: list
    zero_found: bool
    zeros: list
    rows: list
    status: str

    @property
    def min_detS_dev(self) -> float:
        vals = [r["min_detS_dev"] for r in self.rows]
        return float(min(vals)) if vals else float("nan")

    @property
    def max_detS_dev(self) -> float:
        vals = [r["max_detS_dev"] for r in self.rows]
        return float(max(vals)) if vals else float("nan")


def resonance_free_probe(V: PotentialSpec, M: float, r_range: tuple,
                         params: CountParams = DEFAULT_COUNT, n_radii: int = 9,
                         n_depth: int = 5) -> FreeProbeResult:
    """Check that ``{Im lam > -M log(1+|lam|), R < |lam| < r_max}`` holds no resonance.

    Requires ``M < 1 / |ch sing supp V|``. The check is the winding of the
    Wronskian over both halves' boundaries; each row also records the
    extreme values of ``|det S(-lam) - 1|`` and ``|W / 2i lam|`` sampled across
    the strip at one radius.
    """
    R, r_max = float(r_range[0]), float(r_range[1])
    sw = sing_width(V)
    if sw > 0 and M >= 1.0 / sw:
        raise ValueError(f"probe needs M < 1/|ch sing supp V| = {1.0 / sw:.6g}, got {M}")
    if V.ch_supp is None:
        return FreeProbeResult(M, (R, r_max), [0, 0], False, [], [], "trivial")
    strip = LogStrip(0.0, M, R, r_max, "both")
    _check_region_cap(strip, params.engine.m_cap)
    f = WronskianEvaluator(V, params.engine)
    h = min(0.5, 0.75 / f.phase_rate)
    res = winding_numbers(f, strip.boundaries(), h)
    windings = [r.winding for r in res]
    status = "ok" if all(r.status == "ok" for r in res) else \
        next(r.status for r in res if r.status != "ok")
    zero_found = status != "ok" or any(w != 0 for w in windings)
    zeros: list = []
    if zero_found:
        rs = resonances_in(V, strip, params)
        zeros = [[r.lam.real, r.lam.imag, r.multiplicity] for r in rs.items]
    rows = []
    for r in np.linspace(R, r_max, n_radii):
        depth = -M * math.log1p(r)
        ys = np.linspace(0.0, depth, n_depth + 2)[1:-1]
        pts = np.sqrt(r * r - ys * ys) + 1j * ys
        pts = np.concatenate([pts, -np.conj(pts)])
        dev = np.abs(det_s_minus(V, pts, params.engine) - 1.0)
        A = np.abs(f(pts) / (2j * pts))
        rows.append({"r": float(r), "min_detS_dev": float(dev.min()),
                     "max_detS_dev": float(dev.max()), "min_abs_A": float(A.min())})
    return FreeProbeResult(M, (R, r_max), windings, zero_found, zeros, rows, status)


# -- det S growth -------------------------------------------------------------------

@dataclass
class SasympRow:
    theta: float
    r: float
    lam: complex
    log_abs_detS: float
    ratio: float
    skipped: bool
    reason: str = ""


def sasymp_probe(V: PotentialSpec, thetas: Sequence[float], radii: Sequence[float],
                 known_zeros: Sequence[complex] = (), min_box: float = 1e-4,
                 eng: EngineParams = DEFAULT_ENGINE) -> list:
    """``log|det S(-lam)| / (2 |ch supp V| |Im lam|)`` along rays ``lam = r e^{i theta}``.

    Rays lie in the lower half-plane. Samples within ``5 min_box`` of a
    known zero are skipped, since the exceptional set where the growth law
    fails is not known explicitly. The conditioning cap is lifted here.
    """
    eng = eng.with_cap(None)
    known = np.asarray(list(known_zeros), dtype=complex)
    width = V.width
    rows = []
    for th in thetas:
        if not (-math.pi < th < 0):
            raise ValueError(f"ray angle {th} outside (-pi, 0)")
        lams = np.array([r * np.exp(1j * th) for r in radii])
        if V.ch_supp is None:
            rows += [SasympRow(th, float(r), complex(z), 0.0, float("nan"), True, "degenerate")
                     for r, z in zip(radii, lams)]
            continue
        near = np.array([known.size > 0 and bool(np.min(np.abs(known - z)) < 5 * min_box)
                         for z in lams])
        vals = np.full(lams.shape, np.nan + 0j)
        if (~near).any():
            vals[~near] = det_s_minus(V, lams[~near], eng)
        for r, z, v, sk in zip(radii, lams, vals, near):
            if sk:
                rows.append(SasympRow(th, float(r), complex(z), float("nan"), float("nan"), True,
                                      "near known zero"))
                continue
            la = float(np.log(abs(v)))
            rows.append(SasympRow(th, float(r), complex(z), la,
                                  la / (2 * width * abs(z.imag)), False))
    return rows
