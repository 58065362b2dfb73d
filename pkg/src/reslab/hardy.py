"""Seeds and verified zeros of exponential-polynomial model functions.

Two model families are handled:

* ``f(z) = 1 - C (iz)^(-M) e^{iLz}``, whose zeros follow a single
  logarithmic string;
* ``f(z) = 1 - C1 (iz)^(-M) e^{iLz} - C2 (iz)^(-N) e^{iKz}`` with
  ``M/L = N/K``, whose zeros split into one string per root of
  ``C2 w^N + C1 w^M - 1``.

Seeds come from closed-form asymptotics; each one is checked by a winding
count on a small disk around it and then refined by Newton's method.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .rootfind import Contour, circle, winding_numbers, _newton_batch


class PolyRootError(RuntimeError):
    """Simultaneous iteration did not converge."""


def cpow(z, M: float):
    """Principal power ``z**M`` with the cut on the negative real axis."""
    z = np.asarray(z, dtype=complex)
    return np.exp(M * np.log(z))


@dataclass(frozen=True)
class Hm1Model:
    """Model ``1 - C (iz)^(-M) e^{iLz}``; ``f`` overrides the exact model."""

    C: complex
    M: float
    L: float
    D1: float = 0.0
    D2: float = math.inf
    f: Callable | None = None

    def __post_init__(self):
        if self.C == 0:
            raise ValueError("C must be nonzero")
        if self.M <= 0 or self.L <= 0:
            raise ValueError("M and L must be positive")
        if not self.D1 < self.M / self.L < self.D2:
            raise ValueError("M/L must lie strictly inside (D1, D2)")

    def exact(self, z):
        z = np.asarray(z, dtype=complex)
        return 1.0 - self.C * cpow(1j * z, -self.M) * np.exp(1j * self.L * z)

    def evaluator(self):
        return self.f if self.f is not None else self.exact


@dataclass(frozen=True)
class Hm2Model:
    """Model ``1 - C1 (iz)^(-M) e^{iLz} - C2 (iz)^(-N) e^{iKz}`` with ``M/L = N/K``."""

    C1: complex
    C2: complex
    M: int
    N: int
    L: float
    K: float
    D1: float = 0.0
    D2: float = math.inf
    f: Callable | None = None

    def __post_init__(self):
        if self.C1 == 0 or self.C2 == 0:
            raise ValueError("C1 and C2 must be nonzero")
        if int(self.M) != self.M or int(self.N) != self.N or not 0 < self.M < self.N:
            raise ValueError("need integers 0 < M < N")
        if self.L <= 0 or self.K <= 0:
            raise ValueError("L and K must be positive")
        r1, r2 = self.M / self.L, self.N / self.K
        if abs(r1 - r2) > 1e-12 * max(r1, r2):
            raise ValueError("need M/L == N/K")
        if not self.D1 < r1 < self.D2:
            raise ValueError("M/L must lie strictly inside (D1, D2)")

    def exact(self, z):
        z = np.asarray(z, dtype=complex)
        iz = 1j * z
        return (1.0 - self.C1 * cpow(iz, -self.M) * np.exp(1j * self.L * z)
                - self.C2 * cpow(iz, -self.N) * np.exp(1j * self.K * z))

    def evaluator(self):
        return self.f if self.f is not None else self.exact

    def polynomial(self) -> np.ndarray:
        """Ascending coefficients of ``C2 w^N + C1 w^M - 1``."""
        c = np.zeros(int(self.N) + 1, dtype=complex)
        c[0] = -1.0
        c[int(self.M)] += self.C1
        c[int(self.N)] += self.C2
        return c


@dataclass
class HardyZero:
    """A seeded and (possibly) refined zero of a model function."""

    n: int
    half: str
    seed: complex
    lam: complex
    multiplicity: int
    residual: float
    winding: int | None
    verified: bool
    root: complex | None = None


# -- polynomial roots -----------------------------------------------------------

def _deriv_scale(c: np.ndarray, z: complex) -> float:
    return float(np.sum(np.abs(c) * abs(z) ** np.arange(len(c)))) + 1e-300


def poly_roots(coeffs: Sequence[complex], max_iter: int = 500,
               cluster_tol: float = 1e-8) -> list:
    """All roots of a polynomial with their multiplicities.

    ``coeffs`` are ascending (``coeffs[i]`` multiplies ``z**i``). Aberth
    iteration starts on a circle of radius ``1 + max|c_i / c_n|``; the result
    is polished by Newton's method. Candidates closer than about ``1e-5``
    are tested for a genuine multiple root through the derivatives and, if
    confirmed, merged. Roots closer than ``cluster_tol`` always merge.

    Returns a list of ``(root, multiplicity, residual)`` sorted by
    ``(real, imag)``.
    """
    c = np.asarray(coeffs, dtype=complex)
    if c.size < 2:
        raise ValueError("polynomial degree must be at least 1")
    if c[-1] == 0:
        raise ValueError("leading coefficient must be nonzero")
    n = c.size - 1
    # zero roots factor out exactly
    nz = int(np.flatnonzero(c)[0])
    out: list = []
    if nz:
        out.append((0j, nz, 0.0))
        c = c[nz:]
        n -= nz
    if n == 0:
        return out
    dc = npoly.polyder(c)
    R = 1.0 + float(np.max(np.abs(c[:-1] / c[-1])))
    z = R * np.exp(2j * np.pi * (np.arange(n) + 0.25) / n)
    for _ in range(max_iter):
        p = npoly.polyval(z, c)
        dp = npoly.polyval(z, dc)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            off = np.sum(1.0 / diff, axis=1)
            w = ratio / (1.0 - ratio * off)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 1e-15 * (1.0 + np.abs(z))):
            break
    else:
        p = npoly.polyval(z, c)
        scale = np.array([_deriv_scale(c, zz) for zz in z])
        if np.any(np.abs(p) > 1e-6 * scale):
            raise PolyRootError(f"Aberth iteration did not converge in {max_iter} steps")

    # group near-coincident candidates
    order = np.lexsort((z.imag, z.real))
    z = z[order]
    groups: list = []
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        if used[i]:
            continue
        g = [i]
        used[i] = True
        for k in range(i + 1, n):
            if not used[k] and abs(z[k] - z[i]) <= 1e-5 * (1.0 + abs(z[i])):
                g.append(k)
                used[k] = True
        groups.append(g)

    def newton(poly, dpoly, z0):
        zz = complex(z0)
        for _ in range(60):
            d = npoly.polyval(zz, dpoly)
            if d == 0:
                break
            step = npoly.polyval(zz, poly) / d
            zz -= step
            if abs(step) <= 1e-16 * (1.0 + abs(zz)):
                break
        return zz

    for g in groups:
        d = len(g)
        mean = complex(np.mean(z[g]))
        merged = False
        if d > 1:
            # a d-fold root is a simple root of the (d-1)-th derivative
            derivs = [c]
            for _ in range(d):
                derivs.append(npoly.polyder(derivs[-1]))
            zz = newton(derivs[d - 1], derivs[d], mean)
            merged = all(abs(npoly.polyval(zz, derivs[m])) <= 1e-7 * _deriv_scale(derivs[m], zz)
                         for m in range(d - 1))
            spread = max(abs(z[k] - mean) for k in g)
            if merged or spread <= cluster_tol:
                out.append((zz, d, float(abs(npoly.polyval(zz, c)))))
                continue
        for k in g:
            zz = newton(c, dc, z[k])
            out.append((zz, 1, float(abs(npoly.polyval(zz, c)))))
    out.sort(key=lambda r: (round(r[0].real, 12), round(r[0].imag, 12)))
    return out


# -- seeds ------------------------------------------------------------------------

def _check_half(half: str):
    if half not in ("left", "right"):
        raise ValueError("half must be 'left' or 'right'")


def hm1_seeds(model: Hm1Model, n_range: Sequence[int], half: str = "right") -> np.ndarray:
    """Asymptotic zeros ``z_n = s(2 pi n/L + M pi/(2L)) + (i/L) log C - i (M/L) log(2 pi n/L)``."""
    _check_half(half)
    n = np.asarray(list(n_range), dtype=float)
    if n.size == 0:
        return np.zeros(0, dtype=complex)
    if np.any(n < 1):
        raise ValueError("n must be at least 1")
    s = 1.0 if half == "right" else -1.0
    L, M = model.L, model.M
    return (s * (2 * np.pi * n / L + M * np.pi / (2 * L)) + 1j * np.log(complex(model.C)) / L
            - 1j * (M / L) * np.log(2 * np.pi * n / L))


def hm2_seeds(model: Hm2Model, n_range: Sequence[int], half: str = "right") -> list:
    """One seed sequence per root ``a`` of ``C2 w^N + C1 w^M - 1``.

    A root of multiplicity ``d`` yields ``d`` coincident sequences. Returns
    a list of ``(a, points)`` pairs.
    """
    _check_half(half)
    n = np.asarray(list(n_range), dtype=float)
    s = 1.0 if half == "right" else -1.0
    N, K = model.N, model.K
    out = []
    for a, d, _ in poly_roots(model.polynomial()):
        if n.size == 0:
            pts = np.zeros(0, dtype=complex)
        else:
            base = 2 * np.pi * N * n / K
            pts = (s * (base + N * np.pi / (2 * K)) - 1j * (N / K) * np.log(a)
                   - 1j * (N / K) * np.log(base))
        out.extend([(a, pts)] * d)
    return out


# -- located zeros --------------------------------------------------------------------

def hm1_locate(model: Hm1Model, n_range: Sequence[int], C0: float | None = None,
               half: str = "right") -> list:
    """Seed, verify (winding 1 on ``|z - seed| = C0``) and refine zeros."""
    if C0 is None:
        C0 = min(math.pi / (2 * model.L), 1.0)
    if not 0 < C0 < math.pi / model.L:
        raise ValueError("need 0 < C0 < pi/L")
    ns = list(n_range)
    seeds = hm1_seeds(model, ns, half)
    f = model.evaluator()
    if not ns:
        return []
    wr = winding_numbers(f, [circle(z, C0) for z in seeds], h_init=C0 / 4)
    z, res, conv = _newton_batch(f, seeds, np.ones(len(ns)))
    out = []
    for n, s0, w, zz, rr, cc in zip(ns, seeds, wr, z, res, conv):
        wind = w.winding if w.status == "ok" else None
        inside = abs(zz - s0) < C0
        lam = complex(zz) if (cc and inside) else complex(s0)
        out.append(HardyZero(n, half, complex(s0), lam, 1, float(rr if cc else abs(f(np.array([s0]))[0])),
                             wind, wind == 1 and bool(cc) and inside))
    return out


def _image_contour(base: np.ndarray, a: complex, N: int, K: float, eta: float) -> Contour:
    """Image of ``|xi| = eta`` under ``xi -> base - i (N/K) log(a + xi)``."""
    la = np.log(complex(a))

    def make(q):
        def arc(u):
            xi = eta * np.exp(2j * np.pi * (q + u) / 4)
            return base - 1j * (N / K) * (la + np.log1p(xi / a))
        return arc

    length = 0.5 * math.pi * eta / abs(a) * N / K
    return Contour([make(q) for q in range(4)], [length] * 4)


def hm2_locate(model: Hm2Model, n_range: Sequence[int], eta: float,
               half: str = "right") -> list:
    """Locate the zeros of each seed sequence, checking a winding of order ``d``.

    ``d`` is the multiplicity of the polynomial root generating the
    sequence; simple zeros are refined by Newton, higher-order clusters by
    the multiplicity-weighted Newton step.
    """
    _check_half(half)
    roots = poly_roots(model.polynomial())
    for i, (a, d, _) in enumerate(roots):
        if eta >= abs(a):
            raise ValueError(f"eta={eta} is not smaller than |a|={abs(a):.3g}")
        for k, (b, _, _) in enumerate(roots):
            if k != i and abs(a - b) <= 2 * eta:
                raise ValueError(f"eta={eta} is not below half the root separation {abs(a - b):.3g}")
    ns = list(n_range)
    f = model.evaluator()
    s = 1.0 if half == "right" else -1.0
    N, K = model.N, model.K
    out = []
    if not ns:
        return out
    n = np.asarray(ns, dtype=float)
    bases_all, contours, meta = [], [], []
    for a, d, _ in roots:
        base = s * (2 * np.pi * N * n / K + N * np.pi / (2 * K)) - 1j * (N / K) * np.log(2 * np.pi * N * n / K)
        for nn, b in zip(ns, base):
            contours.append(_image_contour(b, a, N, K, eta))
            bases_all.append(b - 1j * (N / K) * np.log(a))
            meta.append((nn, a, d))
    seeds = np.array(bases_all)
    wr = winding_numbers(f, contours, h_init=eta * N / K / max(abs(r[0]) for r in roots) / 4)
    mult = np.array([m[2] for m in meta], dtype=float)
    z, res, conv = _newton_batch(f, seeds, mult)
    for (nn, a, d), s0, w, zz, rr, cc in zip(meta, seeds, wr, z, res, conv):
        wind = w.winding if w.status == "ok" else None
        # Newton stalls at roundoff level on a multiple zero, so clusters are
        # certified by the winding count alone
        settled = bool(cc) or (d > 1 and bool(np.isfinite(zz)))
        lam = complex(zz) if settled else complex(s0)
        out.append(HardyZero(nn, half, complex(s0), lam, int(d), float(rr), wind,
                             wind == d and settled, complex(a)))
    return out
