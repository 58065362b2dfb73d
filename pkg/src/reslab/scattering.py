"""Jost solutions, Wronskian and scattering data at complex frequencies.

The right Jost solution is written as
``u(x) = alpha(x) e^{i lam x'} + beta(x) e^{-i lam x'}`` in the shifted
coordinate ``x' = x - b`` (``b`` the right end of the support), with
``alpha = 1, beta = 0`` at ``x' = 0``. Variation of parameters gives

    alpha' =  V / (2 i lam) * (alpha + beta e^{-2 i lam x'})
    beta'  = -V / (2 i lam) * (alpha e^{2 i lam x'} + beta)

which is free of the plane-wave oscillation and exponential growth. The
system is integrated right to left with an embedded Runge-Kutta pair,
vectorized over many frequencies at once. The left Jost solution is the
right Jost solution of the reflected potential.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import chebyshev as cheb
from scipy.integrate import solve_ivp

from .potential import MERGE_TOL, PotentialSpec, reflect, edge_asymptotic, fourier_hat


class ScatteringError(RuntimeError):
    """Numerical failure inside the Jost solver."""


class ConditioningError(ScatteringError):
    """Frequency lies outside the conditioning cap."""


@dataclass(frozen=True)
class EngineParams:
    """Integrator settings.

    ``m_cap`` bounds ``|Im lam| <= m_cap * log(1 + |lam|)``; ``None`` disables
    the check. Steps are capped at ``min(h_max, c_osc / (1 + |lam|))``.
    """

    rtol: float = 1e-12
    atol: float = 1e-12
    h_max: float = 0.25
    c_osc: float = 4.0
    m_cap: float | None = 10.0
    method: str = "DOP853"
    picard_iters: int = 8
    picard_max_iters: int = 80
    picard_nodes: int = 32
    layer_frac: float = 0.05

    def with_cap(self, m_cap):
        return EngineParams(**{**self.__dict__, "m_cap": m_cap})


DEFAULT_ENGINE = EngineParams()


def check_cap(lam: np.ndarray, m_cap: float | None) -> None:
    if m_cap is None:
        return
    lam = np.asarray(lam)
    bad = np.abs(lam.imag) > m_cap * np.log1p(np.abs(lam)) + 1e-12
    if np.any(bad):
        z = lam[bad].ravel()[0]
        raise ConditioningError(
            f"lambda={z:.6g} exceeds the conditioning cap |Im| <= {m_cap} log(1+|lambda|)")


# -- coefficient evaluation -------------------------------------------------

@dataclass
class _Segment:
    lo: float
    hi: float
    pieces: list
    lo_power: float = 0.0   # most negative power of active pieces at lo (0 if none)
    hi_power: float = 0.0

    def value(self, x: float) -> complex:
        v = 0.0
        for p in self.pieces:
            t = x - p.x0
            pv = 0.0
            for c in reversed(p.poly):
                pv = pv * t + c
            v += t ** p.mu * (p.x1 - x) ** p.nu * pv
        return v

    def regular(self, x: np.ndarray, end: str) -> np.ndarray:
        """``V(x) |x - e|^(-power)`` near endpoint ``e`` of this segment."""
        e, power = (self.lo, self.lo_power) if end == "lo" else (self.hi, self.hi_power)
        d = np.abs(x - e)
        out = np.zeros(x.shape, dtype=complex)
        for p in self.pieces:
            t = x - p.x0
            pv = np.polynomial.polynomial.polyval(t, np.asarray(p.poly))
            if end == "lo" and _same_point(p.x0, e):
                out += d ** (p.mu - power) * (p.x1 - x) ** p.nu * pv
            elif end == "hi" and _same_point(p.x1, e):
                out += t ** p.mu * d ** (p.nu - power) * pv
            else:
                out += t ** p.mu * (p.x1 - x) ** p.nu * pv * d ** (-power)
        return out

    def constant(self) -> complex | None:
        """The value of V if it is constant on this segment, else None."""
        v = 0.0
        for p in self.pieces:
            if p.mu != 0 or p.nu != 0 or any(c != 0 for c in p.poly[1:]):
                return None
            v += p.poly[0]
        return v


def _same_point(a: float, b: float) -> bool:
    return abs(a - b) <= MERGE_TOL * max(1.0, abs(a))


def _segments(V: PotentialSpec, stop: float) -> list:
    """Segments of the support from ``stop`` up to the right edge, ordered right to left."""
    pts = [x for x in V.breakpoints if x > stop]
    pts = sorted(set(pts + [stop]))
    segs = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        # breakpoints closer than MERGE_TOL are merged, so classify by the midpoint
        mid = 0.5 * (lo + hi)
        act = [p for p in V.pieces if p.x0 < mid < p.x1]
        seg = _Segment(lo, hi, act)
        for p in act:
            if _same_point(p.x0, lo) and p.mu < 0:
                seg.lo_power = min(seg.lo_power, p.mu)
            if _same_point(p.x1, hi) and p.nu < 0:
                seg.hi_power = min(seg.hi_power, p.nu)
        segs.append(seg)
    return segs[::-1]


@functools.lru_cache(maxsize=16)
def _cheb_integration(n: int):
    """Chebyshev-Lobatto nodes on [-1, 1] and the cumulative integration matrix."""
    xi = -np.cos(np.pi * np.arange(n) / (n - 1))
    T = cheb.chebvander(xi, n - 1)
    Tinv = np.linalg.inv(T)
    Q = np.empty((n, n))
    for i in range(n):
        Q[:, i] = cheb.chebval(xi, cheb.chebint(Tinv[:, i], lbnd=-1.0))
    return xi, Q


def _coupling(lam: np.ndarray, xs: np.ndarray):
    """Entries of the 2x2 amplitude system matrix divided by V, per (node, lam)."""
    E = np.exp(2j * np.outer(xs, lam))
    k = 1.0 / (2j * lam)
    return k, E


def _picard_layer(seg: _Segment, end: str, lam: np.ndarray, y: np.ndarray,
                  shift: float, delta: float, inward: bool, eng: EngineParams):
    """Carry amplitudes across a layer of width ``delta`` at a singular endpoint.

    In the variable ``s = |x - e|^(p+1) / (p+1)`` the coefficient
    ``V dx/ds`` is bounded, so the Volterra form converges under Picard
    iteration on Chebyshev nodes. ``inward`` means the known value sits at
    the endpoint itself and we move into the segment; otherwise the known
    value sits at distance ``delta`` and we move to the endpoint.
    """
    e, power = (seg.lo, seg.lo_power) if end == "lo" else (seg.hi, seg.hi_power)
    sign = 1.0 if end == "lo" else -1.0
    q = power + 1.0
    n = eng.picard_nodes
    S = delta ** q / q
    xi, Q = _cheb_integration(n)
    s = 0.5 * S * (xi + 1.0)
    Qs = 0.5 * S * Q
    d = (q * s) ** (1.0 / q)
    x = e + sign * d
    g = seg.regular(x, end) * sign          # V dx/ds along the layer
    k, E = _coupling(lam, x - shift)        # shape (n, N)
    G = g[:, None] * k[None, :]
    N = lam.size
    a0, b0 = y[:N], y[N:]
    A = np.broadcast_to(a0, (n, N)).astype(complex)
    B = np.broadcast_to(b0, (n, N)).astype(complex)
    for it in range(eng.picard_max_iters):
        fa = G * (A + B / E)
        fb = -G * (A * E + B)
        Ia = Qs @ fa
        Ib = Qs @ fb
        if inward:
            An, Bn = a0 + Ia, b0 + Ib
        else:
            An, Bn = a0 - (Ia[-1] - Ia), b0 - (Ib[-1] - Ib)
        change = max(np.abs(An - A).max(), np.abs(Bn - B).max())
        scale = max(np.abs(An).max(), np.abs(Bn).max(), 1.0)
        A, B = An, Bn
        if it + 1 >= eng.picard_iters and change <= 1e-15 * scale:
            break
    else:
        raise ScatteringError("boundary-layer iteration did not converge")
    idx = -1 if inward else 0
    return np.concatenate([A[idx], B[idx]])


def _rebased_layer(seg, end, lam, y, shift, delta, inward, eng):
    """``_picard_layer`` with beta referenced at the segment's left end."""
    N = lam.size
    g = np.exp(2j * lam * (seg.lo - shift))
    y = np.concatenate([y[:N], y[N:] / g])
    y = _picard_layer(seg, end, lam, y, seg.lo, delta, inward, eng)
    return np.concatenate([y[:N], y[N:] * g])


def _constant_transfer(v: complex, lo: float, hi: float, lam: np.ndarray, y: np.ndarray,
                       shift: float) -> np.ndarray:
    """Exact amplitude transfer from ``hi`` to ``lo`` across a constant potential ``v``.

    The solution is split into ``exp(+-i kap x)`` waves with ``kap`` on the
    branch closest to ``lam``, so no growing and decaying parts cancel.
    """
    N = lam.size
    a, b = y[:N], y[N:]
    kap = np.sqrt(lam * lam - v)
    kap = np.where((kap * np.conj(lam)).real < 0, -kap, kap)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        # 1 - lam/kap and 1 - kap/lam without cancellation
        d_r = -v / (kap * (kap + lam))
        d_s = v / (lam * (lam + kap))
        P = np.exp(1j * lam * (hi - shift))
        aP, bP = a * P, b / P
        cp = (aP * (2 - d_r) + bP * d_r) / 2
        cm = (aP * d_r + bP * (2 - d_r)) / 2
        E = np.exp(1j * kap * (hi - lo))
        up, um = cp / E, cm * E
        Q = np.exp(1j * lam * (lo - shift))
        a_lo = (up * (2 - d_s) + um * d_s) / (2 * Q)
        b_lo = (up * d_s + um * (2 - d_s)) * Q / 2
    near = np.abs(kap) * (hi - lo) < 1.0
    if np.any(near):
        # near kap = 0 the wave split is singular; cos/sin is well conditioned there
        L, k, ln = hi - lo, kap[near], lam[near]
        u, du = aP[near] + bP[near], 1j * ln * (aP[near] - bP[near])
        C = np.cos(k * L)
        S_k = L * np.sinc(k * L / np.pi)   # sin(kL)/k
        u_lo = u * C - du * S_k
        w = (u * k * k * S_k + du * C) / (1j * ln)
        a_lo[near] = (u_lo + w) / (2 * Q[near])
        b_lo[near] = (u_lo - w) * Q[near] / 2
    return np.concatenate([a_lo, b_lo])


_CHUNK = 1024


def _amplitudes(V: PotentialSpec, lam: np.ndarray, stop: float, eng: EngineParams):
    """Right-Jost amplitudes (alpha, beta) at ``x = stop`` in the shifted gauge.

    The shift is the right edge of the support. Large batches are split into
    fixed-size chunks, which bounds memory and keeps results independent of
    how many other points share a call beyond the chunk.
    """
    lam = np.asarray(lam, dtype=complex).ravel()
    if lam.size > _CHUNK:
        parts = [_amplitudes_batch(V, lam[i:i + _CHUNK], stop, eng)
                 for i in range(0, lam.size, _CHUNK)]
        return (np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))
    return _amplitudes_batch(V, lam, stop, eng)


def _amplitudes_batch(V: PotentialSpec, lam: np.ndarray, stop: float, eng: EngineParams):
    N = lam.size
    supp = V.ch_supp
    y = np.concatenate([np.ones(N, complex), np.zeros(N, complex)])
    if supp is None or N == 0 or stop >= supp[1]:
        return y[:N], y[N:]
    shift = supp[1]
    lmax = float(np.abs(lam).max())
    hmax = min(eng.h_max, eng.c_osc / (1.0 + lmax))
    with np.errstate(divide="ignore", invalid="ignore"):
        k = 1.0 / (2j * lam)

    for seg in _segments(V, stop):
        if not seg.pieces:
            continue
        v0 = seg.constant()
        if v0 is not None:
            y = _constant_transfer(v0, seg.lo, seg.hi, lam, y, shift)
            continue
        hi, lo = seg.hi, seg.lo
        length = hi - lo
        delta = min(eng.layer_frac * length, 1.0 / (1.0 + lmax))
        if seg.hi_power < 0:
            y = _rebased_layer(seg, "hi", lam, y, shift, delta, True, eng)
            hi = hi - delta
        lo_layer = seg.lo_power < 0
        lo_rk = lo + delta if lo_layer else lo

        def rhs(x, yy, seg=seg, ref=lo_rk):
            v = seg.value(x)
            if v == 0:
                return np.zeros_like(yy)
            a = yy[:N]
            b = yy[N:]
            E = np.exp(2j * lam * (x - ref))
            c = v * k
            return np.concatenate([c * (a + b / E), -c * (a * E + b)])

        if hi > lo_rk:
            # re-reference beta at the segment's left end so that atol acts on
            # the scale that feeds back into alpha
            g = np.exp(2j * lam * (lo_rk - shift))
            y = np.concatenate([y[:N], y[N:] / g])
            sol = solve_ivp(rhs, (hi, lo_rk), y, method=eng.method, t_eval=[lo_rk],
                            rtol=eng.rtol, atol=eng.atol, max_step=hmax)
            if sol.status != 0:
                raise ScatteringError(f"integration failed on [{lo}, {hi}]: {sol.message}")
            y = sol.y[:, -1]
            y = np.concatenate([y[:N], y[N:] * g])
        if lo_layer:
            y = _rebased_layer(seg, "lo", lam, y, shift, delta, False, eng)
    return y[:N], y[N:]


def _prep(lam, eng: EngineParams, allow_zero: bool = False):
    arr = np.asarray(lam, dtype=complex)
    if not allow_zero and np.any(arr == 0):
        raise ValueError("lambda = 0 is excluded")
    check_cap(arr, eng.m_cap)
    return arr


def right_amplitudes(V: PotentialSpec, lam, eng: EngineParams = DEFAULT_ENGINE,
                     stop: float | None = None):
    """Amplitudes ``(A, B)`` of the right Jost solution ``A e^{i lam x} + B e^{-i lam x}``.

    Evaluated left of the support (or at ``stop`` for an interior point, in
    which case ``B`` is the local amplitude in the same unshifted gauge).
    """
    arr = _prep(lam, eng)
    supp = V.ch_supp
    if supp is None:
        return np.ones(arr.shape, complex), np.zeros(arr.shape, complex)
    x_stop = supp[0] if stop is None else stop
    a, b = _amplitudes(V, arr.ravel(), x_stop, eng)
    B = b * np.exp(2j * arr.ravel() * supp[1])
    return a.reshape(arr.shape), B.reshape(arr.shape)


def jost_solve(V: PotentialSpec, lam, side: str = "right",
               eng: EngineParams = DEFAULT_ENGINE):
    """Jost solution and derivative at the opposite edge of the support.

    ``side="right"`` gives the solution equal to ``e^{i lam x}`` right of the
    support, evaluated at its left end; ``side="left"`` gives the solution
    equal to ``e^{-i lam x}`` left of the support, evaluated at its right end.
    """
    arr = _prep(lam, eng)
    supp = V.ch_supp or (0.0, 0.0)
    if side == "right":
        A, B = right_amplitudes(V, arr, eng)
        x = supp[0]
        u = A * np.exp(1j * arr * x) + B * np.exp(-1j * arr * x)
        du = 1j * arr * (A * np.exp(1j * arr * x) - B * np.exp(-1j * arr * x))
    elif side == "left":
        A, B = right_amplitudes(reflect(V), arr, eng)
        y = -supp[1]
        u = A * np.exp(1j * arr * y) + B * np.exp(-1j * arr * y)
        du = -1j * arr * (A * np.exp(1j * arr * y) - B * np.exp(-1j * arr * y))
    else:
        raise ValueError("side must be 'left' or 'right'")
    if np.ndim(lam) == 0:
        return complex(u), complex(du)
    return u, du


def wronskian(V: PotentialSpec, lam, eng: EngineParams = DEFAULT_ENGINE):
    """Wronskian ``u_L u_R' - u_L' u_R`` of the two Jost solutions.

    Equals ``2 i lam`` for the zero potential.
    """
    arr = _prep(lam, eng)
    A, _ = right_amplitudes(V, arr, eng)
    W = 2j * arr * A
    return complex(W) if np.ndim(lam) == 0 else W


def wronskian_at(V: PotentialSpec, lam, x_match: float,
                 eng: EngineParams = DEFAULT_ENGINE):
    """Wronskian assembled at an interior matching point ``x_match``."""
    arr = _prep(lam, eng).ravel()
    supp = V.ch_supp
    if supp is None:
        return 2j * arr
    a, b = supp
    if not a <= x_match <= b:
        raise ValueError("matching point must lie in the convex hull of the support")
    aR, bR = _amplitudes(V, arr, x_match, eng)
    aL, bL = _amplitudes(reflect(V), arr, -x_match, eng)
    W = 2j * arr * (aL * aR - bL * bR * np.exp(2j * arr * (b - a)))
    return complex(W[0]) if np.ndim(lam) == 0 else W.reshape(np.shape(lam))


class WronskianEvaluator:
    """Picklable vectorized evaluator ``lam -> W(lam)`` for the root finder.

    The conditioning cap is not enforced here; callers keep their regions
    inside it. ``calls`` and ``points`` count the work done.
    """

    def __init__(self, V: PotentialSpec, eng: EngineParams = DEFAULT_ENGINE):
        self.V = V
        self.eng = eng
        self._refl = None
        self.calls = 0
        self.points = 0
        # phase of W turns at most about 2 |ch supp V| per unit length in lam
        self.phase_rate = 2.0 * V.width

    def __call__(self, lam):
        arr = np.asarray(lam, dtype=complex)
        flat = arr.ravel()
        self.calls += 1
        self.points += flat.size
        out = np.full(flat.shape, np.nan + 0j)
        ok = flat != 0
        if ok.any():
            supp = self.V.ch_supp
            if supp is None:
                out[ok] = 2j * flat[ok]
            else:
                a, _ = _amplitudes(self.V, flat[ok], supp[0], self.eng)
                out[ok] = 2j * flat[ok] * a
        return out.reshape(arr.shape)


# -- scattering data ----------------------------------------------------------

@dataclass
class ScatteringData:
    """Scattering quantities at one frequency ``lam``.

    ``t``, ``rL``, ``rR`` and ``W`` are at ``lam``; ``rho_minus``,
    ``rho_plus``, ``T`` and ``detS`` are the quantities at ``-lam`` that
    enter the determinant of the scattering matrix at ``-lam``.
    """

    lam: complex
    W: complex
    t: complex
    rL: complex
    rR: complex
    rho_minus: complex
    rho_plus: complex
    T: complex
    detS: complex
    cond: float
    near_resonance: bool = False
    reciprocity: float = 0.0
    flags: list = field(default_factory=list)


def _both_sides(V: PotentialSpec, lam: np.ndarray, eng: EngineParams):
    A, B = right_amplitudes(V, lam, eng)
    Ab, Bb = right_amplitudes(reflect(V), lam, eng)
    return A, B, Ab, Bb


def scattering_data(V: PotentialSpec, lam: complex,
                    eng: EngineParams = DEFAULT_ENGINE) -> ScatteringData:
    """Transmission/reflection data at ``lam`` and the determinant data at ``-lam``.

    ``u_R = A e^{i lam x} + B e^{-i lam x}`` left of the support and
    ``u_L = Ab e^{-i lam x} + Bb e^{i lam x}`` right of it; ``t = 1/A``,
    ``rL = B/A``, ``rR = Bb/Ab``. At ``mu = -lam``:
    ``rho_minus = 2 i mu rR(mu)``, ``rho_plus = 2 i mu rL(mu)`` and
    ``detS = det(I + [[T, rho_minus], [rho_plus, T]] / (2 i mu))`` with
    ``T = 2 i mu (t(mu) - 1)``.
    """
    lam = complex(lam)
    if lam == 0:
        raise ValueError("lambda = 0 is excluded")
    pair = np.array([lam, -lam])
    A, B, Ab, Bb = _both_sides(V, pair, eng)
    W = 2j * lam * A[0]
    if W == 0:
        raise ScatteringError("Wronskian vanishes: lambda is a resonance")
    recip = float(np.max(np.abs(A - Ab) / np.maximum(1.0, np.abs(A))))
    flags = []
    if recip > 1e-9:
        flags.append("reciprocity")
    width = V.width
    cond = float(np.exp(2.0 * width * abs(lam.imag)))
    near = abs(W) < 1e-8 * (1.0 + abs(lam)) * cond
    if near:
        flags.append("near_resonance")
    t = 1.0 / A
    rL = B / A
    rR = Bb / Ab
    mu = -lam
    rho_minus = 2j * mu * rR[1]
    rho_plus = 2j * mu * rL[1]
    T = 2j * mu * (t[1] - 1.0)
    M = np.eye(2) + np.array([[T, rho_minus], [rho_plus, T]]) / (2j * mu)
    detS = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    return ScatteringData(lam, W, t[0], rL[0], rR[0], rho_minus, rho_plus, T, detS,
                          cond, near, recip, flags)


def det_s_minus(V: PotentialSpec, lam, eng: EngineParams = DEFAULT_ENGINE):
    """Vectorized ``det S(-lam) = A(lam) / A(-lam)``."""
    arr = np.asarray(lam, dtype=complex)
    flat = arr.ravel()
    A, _ = right_amplitudes(V, np.concatenate([flat, -flat]), eng)
    n = flat.size
    out = A[:n] / A[n:]
    return complex(out[0]) if np.ndim(lam) == 0 else out.reshape(arr.shape)


def sme_residual(V: PotentialSpec, lam, eng: EngineParams = DEFAULT_ENGINE,
                 floor: float = 1.0) -> float:
    """``|det S(-lam) - 1 - rho_minus rho_plus / (4 lam^2)|`` for ``Im lam <= 0``."""
    lam = complex(lam)
    if lam.imag > 0:
        raise ValueError("sme_residual needs Im lambda <= 0")
    if abs(lam) < floor:
        raise ValueError(f"|lambda| must be at least {floor}")
    if V.ch_supp is None:
        return 0.0
    sd = scattering_data(V, lam, eng)
    return float(abs(sd.detS - 1.0 - sd.rho_minus * sd.rho_plus / (4.0 * lam ** 2)))


@dataclass
class VhatReport:
    lam: np.ndarray
    rem_minus: np.ndarray   # relative remainder at z = -2 lam
    rem_plus: np.ndarray    # relative remainder at z = +2 lam


def vhat_asymptotic_check(V: PotentialSpec, lambdas) -> VhatReport:
    """Compare the Fourier transform at ``-2 lam`` and ``2 lam`` with the edge terms.

    The remainder is ``|Vhat - sum of edge terms| / sum |edge terms|``.
    """
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    if not any(e.singular for e in V.edges):
        raise ValueError("potential carries no singular edge data")
    rems = []
    for z in (-2 * lam, 2 * lam):
        exact = fourier_hat(V, z, z_max=np.inf)
        terms = edge_asymptotic(V, z)
        approx = terms.sum(axis=0)
        rems.append(np.abs(exact - approx) / np.abs(terms).sum(axis=0))
    return VhatReport(lam, rems[0], rems[1])


def diagnostic_rows(V: PotentialSpec, lambdas, eng: EngineParams = DEFAULT_ENGINE):
    """Rows ``(re lam, im lam, re W, im W, |detS|, cond)`` for a frequency grid."""
    lam = np.atleast_1d(np.asarray(lambdas, dtype=complex))
    W = wronskian(V, lam, eng)
    dS = det_s_minus(V, lam, eng)
    cond = np.exp(2.0 * V.width * np.abs(lam.imag))
    return [(l.real, l.imag, w.real, w.imag, abs(d), c) for l, w, d, c in zip(lam, W, dS, cond)]
