"""Zeros of holomorphic functions by winding numbers, subdivision and Newton.

Evaluators are vectorized callables ``f(z: ndarray) -> ndarray``. Winding
numbers come from the accumulated phase of ``f`` along a closed contour,
sampled adaptively until every phase step is below ``pi/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

ArrayFn = Callable[[np.ndarray], np.ndarray]


class ZeroOnContour(RuntimeError):
    """A zero of ``f`` lies on (or numerically at) the contour."""


class WindingBudgetError(RuntimeError):
    """Adaptive sampling exceeded its point budget."""


class NewtonDivergence(RuntimeError):
    """Newton iterates left the allowed bracket."""


class JensenNodeError(RuntimeError):
    """A quadrature node of the Jensen estimator sits on a zero."""


# -- contours ---------------------------------------------------------------

@dataclass
class Contour:
    """Closed curve made of parametrized arcs ``u in [0, 1] -> z``.

    The curve parameter ``t`` runs over ``[0, len(arcs))``; arc ``i`` covers
    ``[i, i + 1)``. ``lengths`` are approximate arc lengths used to seed the
    initial sampling.
    """

    arcs: list
    lengths: list

    def __call__(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.minimum(np.floor(t).astype(int), len(self.arcs) - 1)
        out = np.empty(t.shape, dtype=complex)
        for i, arc in enumerate(self.arcs):
            m = idx == i
            if m.any():
                out[m] = arc(t[m] - i)
        return out

    @property
    def period(self) -> int:
        return len(self.arcs)

    def initial_t(self, h: float, n_min: int = 4) -> np.ndarray:
        ts = []
        for i, L in enumerate(self.lengths):
            n = max(n_min, int(math.ceil(L / h)))
            ts.append(i + np.arange(n) / n)
        return np.concatenate(ts)


def _segment(z0: complex, z1: complex):
    return lambda u: z0 + (z1 - z0) * u


def polygon(vertices: Sequence[complex]) -> Contour:
    v = [complex(x) for x in vertices]
    arcs = [_segment(v[i], v[(i + 1) % len(v)]) for i in range(len(v))]
    lengths = [abs(v[(i + 1) % len(v)] - v[i]) for i in range(len(v))]
    return Contour(arcs, lengths)


def circle(center: complex, radius: float) -> Contour:
    c = complex(center)
    arcs = [(lambda u, q=q: c + radius * np.exp(2j * np.pi * (q + u) / 4)) for q in range(4)]
    return Contour(arcs, [0.5 * np.pi * radius] * 4)


# -- regions ----------------------------------------------------------------

@dataclass(frozen=True)
class Rectangle:
    re0: float
    re1: float
    im0: float
    im1: float
    kind = "rectangle"

    def __post_init__(self):
        if not (self.re0 < self.re1 and self.im0 < self.im1):
            raise ValueError(f"degenerate rectangle {self}")

    @property
    def width(self) -> float:
        return self.re1 - self.re0

    @property
    def height(self) -> float:
        return self.im1 - self.im0

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.re0 + self.re1), 0.5 * (self.im0 + self.im1))

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        return (z.real > self.re0) & (z.real < self.re1) & (z.imag > self.im0) & (z.imag < self.im1)

    def boundary(self) -> Contour:
        return polygon([complex(self.re0, self.im0), complex(self.re1, self.im0),
                        complex(self.re1, self.im1), complex(self.re0, self.im1)])

    def boundaries(self) -> list:
        return [self.boundary()]

    def split(self, cx: float, cy: float) -> list:
        return [Rectangle(self.re0, cx, self.im0, cy), Rectangle(cx, self.re1, self.im0, cy),
                Rectangle(self.re0, cx, cy, self.im1), Rectangle(cx, self.re1, cy, self.im1)]

    def expanded(self, d: float) -> "Rectangle":
        return Rectangle(self.re0 - d, self.re1 + d, self.im0 - d, self.im1 + d)

    def to_dict(self) -> dict:
        return {"rectangle": {"re0": self.re0, "re1": self.re1, "im0": self.im0, "im1": self.im1}}


@dataclass(frozen=True)
class LogStrip:
    """``{-M2 log(1+|z|) < Im z < -M1 log(1+|z|), r0 < |z| < r1}`` in one or both halves."""

    M1: float
    M2: float
    r0: float
    r1: float
    half: str = "right"
    kind = "log_strip"

    def __post_init__(self):
        if not (0 <= self.M1 < self.M2 and 0 <= self.r0 < self.r1):
            raise ValueError(f"degenerate log strip {self}")
        if self.half not in ("left", "right", "both"):
            raise ValueError("half must be 'left', 'right' or 'both'")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        r = np.abs(z)
        g = np.log1p(r)
        ok = (r > self.r0) & (r < self.r1) & (z.imag > -self.M2 * g) & (z.imag < -self.M1 * g)
        if self.half == "right":
            ok &= z.real > 0
        elif self.half == "left":
            ok &= z.real < 0
        return ok

    def halves(self) -> list:
        if self.half == "both":
            return [LogStrip(self.M1, self.M2, self.r0, self.r1, "right"),
                    LogStrip(self.M1, self.M2, self.r0, self.r1, "left")]
        return [self]

    def boundary(self) -> Contour:
        """Counterclockwise boundary of a one-sided strip."""
        if self.half == "both":
            raise ValueError("a two-sided log strip has two boundary curves; use boundaries()")
        if self.r0 <= 0 or self.M2 * math.log1p(self.r0) >= self.r0:
            raise ValueError("log strip boundary needs M2 log(1+r0) < r0")
        right = self.half == "right"
        r0, r1, M1, M2 = self.r0, self.r1, self.M1, self.M2

        def pt(M, rho):
            y = -M * np.log1p(rho)
            z = np.sqrt(np.maximum(rho ** 2 - y ** 2, 0.0)) + 1j * y
            return z if right else -np.conj(z)

        def ang(M, r):
            y = -M * math.log1p(r)
            t = math.atan2(y, math.sqrt(r * r - y * y))
            return t if right else -math.pi - t

        a_in = (ang(M1, r0), ang(M2, r0))
        a_out = (ang(M2, r1), ang(M1, r1))
        arcs = [lambda u: pt(M1, r1 + (r0 - r1) * u),
                lambda u: r0 * np.exp(1j * (a_in[0] + (a_in[1] - a_in[0]) * u)),
                lambda u: pt(M2, r0 + (r1 - r0) * u),
                lambda u: r1 * np.exp(1j * (a_out[0] + (a_out[1] - a_out[0]) * u))]
        lengths = [r1 - r0, (M2 - M1) * math.log1p(r0), r1 - r0, (M2 - M1) * math.log1p(r1)]
        c = Contour(arcs, lengths)
        return c if right else _reverse(c)

    def boundaries(self) -> list:
        return [h.boundary() for h in self.halves()]

    def to_dict(self) -> dict:
        return {"log_strip": {"M1": self.M1, "M2": self.M2, "r0": self.r0, "r1": self.r1,
                              "half": self.half}}


def _reverse(c: Contour) -> Contour:
    arcs = [(lambda u, a=a: a(1.0 - u)) for a in reversed(c.arcs)]
    return Contour(arcs, list(reversed(c.lengths)))


@dataclass(frozen=True)
class Sector:
    """Annular sector ``{theta < arg z < phi, r0 < |z| < r1}``."""

    theta: float
    phi: float
    r0: float
    r1: float
    kind = "sector"

    def __post_init__(self):
        if not (self.theta < self.phi and 0 <= self.r0 < self.r1):
            raise ValueError(f"degenerate sector {self}")

    def contains(self, z) -> np.ndarray:
        z = np.asarray(z)
        r, a = np.abs(z), np.angle(z)
        return (r > self.r0) & (r < self.r1) & (a > self.theta) & (a < self.phi)

    def boundary(self) -> Contour:
        t0, t1, r0, r1 = self.theta, self.phi, self.r0, self.r1
        arcs = [lambda u: (r0 + (r1 - r0) * u) * np.exp(1j * t0),
                lambda u: r1 * np.exp(1j * (t0 + (t1 - t0) * u)),
                lambda u: (r1 + (r0 - r1) * u) * np.exp(1j * t1),
                lambda u: r0 * np.exp(1j * (t1 + (t0 - t1) * u))]
        return Contour(arcs, [r1 - r0, r1 * (t1 - t0), r1 - r0, r0 * (t1 - t0)])

    def boundaries(self) -> list:
        return [self.boundary()]

    def to_dict(self) -> dict:
        return {"sector": {"theta": self.theta, "phi": self.phi, "r0": self.r0, "r1": self.r1}}


@dataclass(frozen=True)
class Ellipse:
    """Interior of ``center + a cosh(gamma + i theta)``."""

    center: complex
    a: float
    gamma: float
    kind = "ellipse"

    def __post_init__(self):
        if not (self.a > 0 and self.gamma > 0):
            raise ValueError(f"degenerate ellipse {self}")

    def contains(self, z) -> np.ndarray:
        w = (np.asarray(z) - self.center) / self.a
        return (w.real / math.cosh(self.gamma)) ** 2 + (w.imag / math.sinh(self.gamma)) ** 2 < 1

    def boundary(self) -> Contour:
        c, a, g = complex(self.center), self.a, self.gamma
        arcs = [(lambda u, q=q: c + a * np.cosh(g + 2j * np.pi * (q + u) / 4)) for q in range(4)]
        return Contour(arcs, [0.5 * np.pi * a * math.cosh(g)] * 4)

    def boundaries(self) -> list:
        return [self.boundary()]

    def to_dict(self) -> dict:
        c = complex(self.center)
        return {"ellipse": {"center": [c.real, c.imag], "a": self.a, "gamma": self.gamma}}


def region_from_dict(d: dict):
    (kind, body), = d.items()
    if kind == "rectangle":
        return Rectangle(body["re0"], body["re1"], body["im0"], body["im1"])
    if kind == "log_strip":
        return LogStrip(body.get("M1", 0.0), body["M2"], body["r0"], body["r1"],
                        body.get("half", "right"))
    if kind == "sector":
        return Sector(body["theta"], body["phi"], body["r0"], body["r1"])
    if kind == "ellipse":
        c = body["center"]
        c = complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c)
        return Ellipse(c, body["a"], body["gamma"])
    raise ValueError(f"unknown region kind {kind!r}")


# -- results -----------------------------------------------------------------

@dataclass
class Resonance:
    lam: complex
    multiplicity: int = 1
    residual: float = 0.0
    verified_winding: bool = False


@dataclass
class ResonanceSet:
    potential_id: str
    region: object
    items: list
    meta: dict = field(default_factory=dict)
    complete: bool = True
    boundary_winding: int | None = None

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.items], dtype=complex)

    @property
    def total_multiplicity(self) -> int:
        return int(sum(r.multiplicity for r in self.items))


def sort_resonances(items: list) -> list:
    return sorted(items, key=lambda r: (r.lam.real, r.lam.imag))


# -- evaluation cache -----------------------------------------------------------

class EvalCache:
    """Memoizing wrapper; keys are coordinates rounded to ``2^-40`` relative."""

    def __init__(self, f: ArrayFn):
        self.f = f
        self.phase_rate = float(getattr(f, "phase_rate", 0.0))
        self.store: dict = {}
        self.evaluations = 0

    @staticmethod
    def _keys(z: np.ndarray):
        s = 1.0 + np.abs(z)
        q = 2.0 ** 40
        kr = np.round(z.real / s * q).astype(np.int64)
        ki = np.round(z.imag / s * q).astype(np.int64)
        return list(zip(kr.tolist(), ki.tolist()))

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        keys = self._keys(flat)
        out = np.empty(flat.shape, dtype=complex)
        need = {}
        for i, k in enumerate(keys):
            v = self.store.get(k)
            if v is None:
                need.setdefault(k, []).append(i)
            else:
                out[i] = v
        if need:
            idx = [v[0] for v in need.values()]
            vals = np.asarray(self.f(flat[idx]), dtype=complex)
            self.evaluations += len(idx)
            for (k, pos), v in zip(need.items(), vals):
                self.store[k] = v
                out[pos] = v
        return out.reshape(z.shape)

    def uncached(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        self.evaluations += z.size
        return np.asarray(self.f(z), dtype=complex)


# -- winding numbers ----------------------------------------------------------

@dataclass
class WindingResult:
    winding: int | None
    status: str                  # "ok", "zero_on_contour", "budget"
    points: int
    median_abs: float


def _local_max(t: np.ndarray, a: np.ndarray, width: float) -> np.ndarray:
    # max of a over the bin of t and its two neighbours
    b = np.floor(t / width).astype(int)
    nb = int(b.max()) + 3
    m = np.zeros(nb)
    np.maximum.at(m, b + 1, a)
    ref = np.maximum(np.maximum(m[:-2], m[1:-1]), m[2:])
    return ref[b]


def winding_numbers(f: ArrayFn, contours: Sequence[Contour], h_init: float = 0.5,
                    max_points: int = 200_000, rel_floor: float = 1e-13,
                    max_log_step: float = 2.0, local_window: float = 0.05) -> list:
    """Winding numbers of ``f`` along many closed contours, evaluated in batches.

    Sampling is refined until every phase step is below ``pi/2`` and every
    ``|log|f||`` step is below ``max_log_step``. A contour is reported as
    ``zero_on_contour`` when ``|f|`` drops below ``rel_floor`` times its
    local maximum (over parameter windows of width ``local_window``) or when
    refinement would need parameter steps below ``1e-12``. The local
    reference keeps tall contours, along which ``|f|`` grows by many orders
    of magnitude, from being flagged.
    """
    n = len(contours)
    ts = [c.initial_t(h_init) for c in contours]
    pts = [c(t) for c, t in zip(contours, ts)]
    allv = f(np.concatenate(pts)) if n else np.zeros(0)
    vals = []
    pos = 0
    for p in pts:
        vals.append(np.asarray(allv[pos:pos + p.size]))
        pos += p.size
    results: list = [None] * n
    active = list(range(n))
    while active:
        new_t = {}
        for i in list(active):
            t, v = ts[i], vals[i]
            absv = np.abs(v)
            med = float(np.median(absv)) if absv.size else 0.0
            if (not np.all(np.isfinite(v)) or med == 0
                    or np.any(absv <= rel_floor * _local_max(t, absv, local_window))):
                results[i] = WindingResult(None, "zero_on_contour", t.size, med)
                active.remove(i)
                continue
            v_next = np.roll(v, -1)
            t_next = np.append(t[1:], contours[i].period)
            ratio = v_next / v
            dphi = np.angle(ratio)
            dlog = np.abs(np.log(np.abs(ratio)))
            bad = (np.abs(dphi) >= 0.5 * np.pi) | (dlog > max_log_step)
            if not bad.any():
                w = dphi.sum() / (2 * np.pi)
                results[i] = WindingResult(int(round(w)), "ok", t.size, med)
                active.remove(i)
                continue
            gaps = t_next[bad] - t[bad]
            if gaps.min() < 1e-12:
                results[i] = WindingResult(None, "zero_on_contour", t.size, med)
                active.remove(i)
                continue
            if t.size + bad.sum() > max_points:
                results[i] = WindingResult(None, "budget", t.size, med)
                active.remove(i)
                continue
            new_t[i] = 0.5 * (t[bad] + t_next[bad])
        if not new_t:
            break
        keys = list(new_t)
        zs = [contours[i](new_t[i]) for i in keys]
        nv = f(np.concatenate(zs))
        pos = 0
        for i, z in zip(keys, zs):
            tt = np.concatenate([ts[i], new_t[i]])
            vv = np.concatenate([vals[i], nv[pos:pos + z.size]])
            pos += z.size
            order = np.argsort(tt, kind="stable")
            ts[i], vals[i] = tt[order], vv[order]
    return results


def winding_count(f: ArrayFn, contour: Contour, h_init: float = 0.5,
                  max_points: int = 200_000, rel_floor: float = 1e-13) -> int:
    """Winding number of ``f`` along one closed contour."""
    res = winding_numbers(f, [contour], h_init, max_points, rel_floor)[0]
    if res.status == "zero_on_contour":
        raise ZeroOnContour("a zero of f lies on or next to the contour")
    if res.status == "budget":
        raise WindingBudgetError(f"phase sampling exceeded {max_points} points")
    return res.winding


# -- Newton -------------------------------------------------------------------

def _newton_batch(f: ArrayFn, z0: np.ndarray, mult: np.ndarray, max_iter: int = 50,
                  leash=np.inf):
    """Batched (multiplicity-aware) Newton with central-difference derivatives.

    Returns final points, residuals and a convergence mask. An iterate has
    converged when its step drops below ``1e-13 (1 + |z|)``, or when the
    step stops shrinking while already below ``1e-9 (1 + |z|)`` (the noise
    floor of the evaluator has been reached). Iterates that move farther
    than ``leash`` from their start are abandoned (residual nan) and never
    evaluated there.
    """
    z = np.array(z0, dtype=complex)
    start = z.copy()
    leash = np.broadcast_to(np.asarray(leash, dtype=float), z.shape)
    lost = np.zeros(z.shape, dtype=bool)
    m = np.asarray(mult, dtype=float)
    conv = np.zeros(z.shape, dtype=bool)
    res = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    prev = np.full(z.shape, np.inf)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        za = z[idx]
        h = 1e-6 * (1.0 + np.abs(za))
        vals = f(np.concatenate([za, za + h, za - h]))
        k = idx.size
        f0, fp, fm = vals[:k], vals[k:2 * k], vals[2 * k:]
        res[idx] = np.abs(f0)
        d = (fp - fm) / (2 * h)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = m[idx] * f0 / d
        ok = np.isfinite(step)
        size = np.abs(step)
        scale = 1.0 + np.abs(za)
        small = ok & (size <= 1e-13 * scale)
        stalled = ok & (size <= 1e-9 * scale) & (size >= 0.5 * prev[idx])
        prev[idx] = size
        done = small | stalled | (f0 == 0)
        conv[idx[done]] = True
        active[idx[done]] = False
        active[idx[~ok]] = False
        # the last step is applied too; it is at or below the noise floor
        z[idx[ok]] = za[ok] - step[ok]
        gone = idx[ok][np.abs(z[idx[ok]] - start[idx[ok]]) > leash[idx[ok]]]
        lost[gone] = True
        conv[gone] = False
        active[gone] = False
    # residual at the final point
    res = np.full(z.shape, np.nan)
    if (~lost).any():
        res[~lost] = np.abs(f(z[~lost]))
    return z, res, conv


def newton_refine(f: ArrayFn, seed: complex, tol: float = 1e-12, max_iter: int = 50,
                  bracket: float = 1.0) -> complex:
    """Newton iteration from ``seed`` with central-difference derivatives.

    Stops when ``|f| < tol``, when the step drops below ``1e-13 (1 + |z|)``
    or when it stops shrinking below ``1e-9 (1 + |z|)`` (evaluation noise
    floor); raises :class:`NewtonDivergence` if an iterate leaves the disk of
    radius ``2 * bracket`` around the seed or the budget runs out.
    """
    z = complex(seed)
    prev = math.inf
    for _ in range(max_iter):
        h = 1e-6 * (1.0 + abs(z))
        v = np.asarray(f(np.array([z, z + h, z - h])), dtype=complex)
        if not np.all(np.isfinite(v)):
            raise NewtonDivergence(f"non-finite values near z={z}")
        if abs(v[0]) < tol:
            return z
        d = (v[1] - v[2]) / (2 * h)
        if d == 0:
            raise NewtonDivergence(f"vanishing derivative at z={z}")
        step = v[0] / d
        z = z - step
        if abs(z - seed) > 2.0 * bracket:
            raise NewtonDivergence(f"iterate {z} left the bracket around {seed}")
        size, scale = abs(step), 1.0 + abs(z)
        if size <= 1e-13 * scale or (size <= 1e-9 * scale and size >= 0.5 * prev):
            return z
        prev = size
    raise NewtonDivergence(f"no convergence from seed {seed} in {max_iter} iterations")


# -- subdivision ------------------------------------------------------------------

@dataclass
class FindResult:
    items: list
    complete: bool
    boundary_windings: list
    boxes: int
    evaluations: int
    notes: list = field(default_factory=list)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.items], dtype=complex)

    @property
    def total_winding(self) -> int:
        return int(sum(w for w in self.boundary_windings if w is not None))


def _windings_with_jitter(f, rects: list, rng, h_init, max_points, retries=5,
                          expand=True):
    """Windings of rectangles; on a zero-on-contour signal the rectangle is jittered."""
    cur = list(rects)
    out: list = [None] * len(rects)
    pending = list(range(len(rects)))
    for attempt in range(retries + 1):
        res = winding_numbers(f, [cur[i].boundary() for i in pending], h_init, max_points)
        nxt = []
        for i, r in zip(pending, res):
            if r.status == "ok":
                out[i] = (cur[i], r)
            elif r.status == "zero_on_contour" and attempt < retries:
                rc = cur[i]
                size = max(rc.width, rc.height)
                d = 1e-3 * size * rng.uniform(0.5, 1.0)
                cur[i] = rc.expanded(d)
                nxt.append(i)
            else:
                out[i] = (cur[i], r)
        pending = nxt
        if not pending:
            break
    return out


def find_zeros(f: ArrayFn, rects: Sequence[Rectangle], min_box: float = 1e-4,
               tol: float = 1e-10, max_boxes: int = 50_000, seed: int = 0,
               h_init: float | None = None, max_points: int = 200_000) -> FindResult:
    """Locate all zeros of ``f`` inside a list of rectangles.

    Boxes with nonzero winding are quad-split until Newton from the box
    center converges inside a winding-1 box, or a box of size ``min_box``
    still winds ``m > 1`` times (reported as a cluster of multiplicity
    ``m``). Each zero is then re-verified on a circle of radius
    ``2 * min_box``.
    """
    rng = np.random.default_rng(seed)
    ev = f if isinstance(f, EvalCache) else EvalCache(f)
    notes: list = []
    complete = True

    rate = float(getattr(f, "phase_rate", 0.0))

    def hfor(r: Rectangle) -> float:
        if h_init is not None:
            return h_init
        h = max(r.width, r.height) / 8.0
        return min(h, 0.75 / rate) if rate > 0 else h

    roots = []
    boundary_windings = []
    h0 = min((hfor(r) for r in rects), default=0.5)
    initial = _windings_with_jitter(ev, list(rects), rng, h0, max_points)
    for rect, (r, wr) in zip(rects, initial):
        if wr.status != "ok":
            complete = False
            notes.append(f"boundary winding failed on {rect}: {wr.status}")
            boundary_windings.append(None)
            continue
        boundary_windings.append(wr.winding)
        if wr.winding < 0:
            complete = False
            notes.append(f"negative winding {wr.winding} on {rect} (pole or noise)")
            continue
        if wr.winding > 0:
            roots.append((r, wr.winding, wr.median_abs))

    found: list = []
    queue = roots
    boxes = len(rects)
    while queue:
        # Newton on every winding-1 box
        ones = [q for q in queue if q[1] == 1]
        rest = [q for q in queue if q[1] != 1]
        if ones:
            centers = np.array([q[0].center for q in ones])
            reach = np.array([2.0 * max(q[0].width, q[0].height) for q in ones])
            z, res, conv = _newton_batch(ev.uncached, centers, np.ones(len(ones)), leash=reach)
            for (box, w, med), zz, rr, cc in zip(ones, z, res, conv):
                if cc and bool(box.contains(zz)) and rr <= tol * med:
                    found.append(Resonance(complex(zz), 1, float(rr)))
                else:
                    rest.append((box, w, med))
        to_split = [q for q in rest if max(q[0].width, q[0].height) > min_box]
        tiny = [q for q in rest if max(q[0].width, q[0].height) <= min_box]
        if tiny:
            centers = np.array([q[0].center for q in tiny])
            reach = np.array([2.0 * max(q[0].width, q[0].height) for q in tiny])
            zc, rc, cc = _newton_batch(ev.uncached, centers, np.array([q[1] for q in tiny]),
                                       leash=reach)
            for (box, w, med), zz, rr, c in zip(tiny, zc, rc, cc):
                inside = c and bool(box.expanded(min_box).contains(zz))
                lam = complex(zz) if inside else box.center
                found.append(Resonance(lam, int(w), float(rr) if inside else float("nan")))
        if boxes + 4 * len(to_split) > max_boxes:
            complete = False
            notes.append("box budget exhausted")
            for box, w, med in to_split:
                found.append(Resonance(box.center, int(w), float("nan")))
            break
        queue = []
        parents = to_split
        for attempt in range(6):
            if not parents:
                break
            children = []
            for box, w, med in parents:
                jx = jy = 0.0
                if attempt:
                    jx = 1e-3 * box.width * rng.uniform(-1, 1) * attempt
                    jy = 1e-3 * box.height * rng.uniform(-1, 1) * attempt
                cx = 0.5 * (box.re0 + box.re1) + jx
                cy = 0.5 * (box.im0 + box.im1) + jy
                children.append(box.split(cx, cy))
            flat = [c for cs in children for c in cs]
            hs = [hfor(c) for c in flat]
            res = winding_numbers(ev, [c.boundary() for c in flat], min(hs), max_points)
            boxes += len(flat)
            retry = []
            for pi, (parent, cs) in enumerate(zip(parents, children)):
                rs = res[4 * pi: 4 * pi + 4]
                box, w, med = parent
                if any(r.status != "ok" for r in rs) or sum(r.winding for r in rs) != w:
                    retry.append(parent)
                    continue
                for c, r in zip(cs, rs):
                    if r.winding > 0:
                        queue.append((c, r.winding, r.median_abs))
                    elif r.winding < 0:
                        complete = False
                        notes.append(f"negative winding on {c}")
            parents = retry
        for box, w, med in parents:
            complete = False
            notes.append(f"could not split {box} cleanly")
            found.append(Resonance(box.center, int(w), float("nan")))

    # verification circles
    if found:
        circles = [circle(r.lam, 2.0 * min_box) for r in found]
        vr = winding_numbers(ev.uncached, circles, h_init=min_box, max_points=max_points)
        for r, v in zip(found, vr):
            r.verified_winding = v.status == "ok" and v.winding == r.multiplicity
    items = sort_resonances(found)
    return FindResult(items, complete, boundary_windings, boxes, ev.evaluations, notes)


def subdivide_find(f: ArrayFn, rect: Rectangle, min_box: float = 1e-4, tol: float = 1e-10,
                   max_boxes: int = 50_000, seed: int = 0) -> list:
    """Zeros of ``f`` in one rectangle as a sorted list of :class:`Resonance`.

    Budget exhaustion does not raise; the returned list then carries the
    partial results with ``nan`` residuals for unresolved boxes.
    """
    return find_zeros(f, [rect], min_box, tol, max_boxes, seed).items


# -- Jensen ellipse estimator -----------------------------------------------------

def jensen_ellipse_bound(f: ArrayFn, a: float, center: complex, gamma: float, eta: float,
                         n_quad: int = 256) -> float:
    """Upper bound for the number of zeros inside the ``eta``-ellipse.

    Mean of ``log|f|`` over the ``gamma``-ellipse ``center + a cosh(gamma + i theta)``
    (trapezoid rule) minus the Chebyshev-weighted mean over the focal segment
    ``[center - a, center + a]`` (Chebyshev-Gauss nodes), divided by
    ``gamma - eta``.
    """
    if not 0 <= eta < gamma:
        raise ValueError("need 0 <= eta < gamma")
    th = 2 * np.pi * np.arange(n_quad) / n_quad
    outer = np.abs(f(center + a * np.cosh(gamma + 1j * th)))
    k = np.arange(1, n_quad + 1)
    seg = np.abs(f(center + a * np.cos((2 * k - 1) * np.pi / (2 * n_quad))))
    if outer.min() < 1e-300 or seg.min() < 1e-300:
        raise JensenNodeError("a zero of f sits at a quadrature node")
    return float((np.log(outer).mean() - np.log(seg).mean()) / (gamma - eta))
