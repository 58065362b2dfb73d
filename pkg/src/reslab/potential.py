"""Compactly supported potentials built from power-law pieces.

A piece has the form ``(x - x0)**mu * (x1 - x)**nu * p(x)`` on ``[x0, x1]``
with ``p`` a polynomial in ``x - x0``. A potential is a sum of pieces plus
edge metadata (orders and leading coefficients at each singular edge), which
is what the asymptotic formulas consume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import roots_jacobi, roots_legendre

MERGE_TOL = 1e-12
M_SMOOTH = 12
Z_MAX = 200.0


class PotentialError(ValueError):
    """Invalid potential construction."""


class QuadratureError(RuntimeError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, tol: float, nodes: int, estimate: float):
        super().__init__(
            f"quadrature did not reach relative tolerance {tol:g} "
            f"with {nodes} nodes (last change {estimate:.3g})")
        self.tol = tol
        self.nodes = nodes
        self.estimate = estimate


def _is_int(v: float) -> bool:
    return float(v) == int(round(float(v)))


@dataclass(frozen=True)
class PowerLawPiece:
    """One term ``(x-x0)^mu (x1-x)^nu p(x)`` supported on ``[x0, x1]``.

    ``poly`` holds the coefficients of ``p`` in ascending powers of ``x - x0``.
    ``smooth`` marks pieces that vanish to high order at both ends and are
    therefore excluded from the singular support.
    """

    x0: float
    x1: float
    mu: float = 0.0
    nu: float = 0.0
    poly: tuple = (1.0,)
    smooth: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.x0) and np.isfinite(self.x1)) or self.x0 >= self.x1:
            raise PotentialError(f"piece needs x0 < x1, got [{self.x0}, {self.x1}]")
        if self.mu <= -1 or self.nu <= -1:
            raise PotentialError("piece powers must exceed -1 for integrability")
        if len(self.poly) == 0:
            raise PotentialError("piece polynomial is empty")
        object.__setattr__(self, "poly", tuple(complex(c) for c in self.poly))

    @property
    def length(self) -> float:
        return self.x1 - self.x0

    @property
    def integer_powers(self) -> bool:
        return self.mu >= 0 and self.nu >= 0 and _is_int(self.mu) and _is_int(self.nu)

    def p(self, x):
        return npoly.polyval(np.asarray(x) - self.x0, np.asarray(self.poly))

    def regular_part(self, x, end: str):
        """Piece value with the power factor of one endpoint removed."""
        x = np.asarray(x, dtype=float)
        if end == "left":
            return (self.x1 - x) ** self.nu * self.p(x)
        return (x - self.x0) ** self.mu * self.p(x)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        inside = (x > self.x0) & (x < self.x1)
        xi = x[inside]
        out[inside] = (xi - self.x0) ** self.mu * (self.x1 - xi) ** self.nu * self.p(xi)
        for pt, power, other in ((self.x0, self.mu, self.x1), (self.x1, self.nu, self.x0)):
            at = x == pt
            if not at.any():
                continue
            if power < 0:
                out[at] = complex(np.inf, 0.0)
            elif power == 0:
                other_pow = self.nu if pt == self.x0 else self.mu
                out[at] = abs(other - pt) ** other_pow * self.p(pt)
        return out

    def expanded(self) -> np.ndarray:
        """Coefficients of the whole piece in powers of ``x - x0``.

        Only defined for non-negative integer powers.
        """
        if not self.integer_powers:
            raise PotentialError("expansion needs non-negative integer powers")
        left = np.zeros(int(self.mu) + 1, dtype=complex)
        left[-1] = 1.0
        right = npoly.polypow(np.array([self.length, -1.0], dtype=complex), int(self.nu))
        return npoly.polymul(npoly.polymul(left, right), np.asarray(self.poly))

    def translate(self, shift: float) -> "PowerLawPiece":
        return replace(self, x0=self.x0 + shift, x1=self.x1 + shift)

    def reflect(self) -> "PowerLawPiece":
        # p(x) in powers of (x - x0) becomes q(y) in powers of (y + x1) with y = -x,
        # and (y + x1) = x1 - x = L - (x - x0).
        L = self.length
        t_of_s = np.array([L, -1.0], dtype=complex)
        q = np.zeros(1, dtype=complex)
        for m, c in enumerate(self.poly):
            q = npoly.polyadd(q, c * npoly.polypow(t_of_s, m))
        return PowerLawPiece(-self.x1, -self.x0, self.nu, self.mu, tuple(q), self.smooth)

    def conj(self) -> "PowerLawPiece":
        return replace(self, poly=tuple(np.conj(self.poly)))

    def scaled(self, factor: complex) -> "PowerLawPiece":
        return replace(self, poly=tuple(factor * np.asarray(self.poly)))

    def is_real(self) -> bool:
        return all(c.imag == 0 for c in self.poly)

    def leading(self, end: str) -> tuple[float, complex]:
        """Order and leading coefficient of the piece at one endpoint."""
        coeffs = np.asarray(self.poly)
        if end == "left":
            nz = np.flatnonzero(coeffs != 0)
            if nz.size == 0:
                return self.mu, 0.0
            m = int(nz[0])
            return self.mu + m, complex(coeffs[m] * self.length ** self.nu)
        # expand p around x1 in powers of (x1 - x): (x - x0) = L - s
        L = self.length
        q = np.zeros(1, dtype=complex)
        for m, c in enumerate(coeffs):
            q = npoly.polyadd(q, c * npoly.polypow(np.array([L, -1.0], dtype=complex), m))
        nz = np.flatnonzero(np.abs(q) > 1e-15 * max(1.0, np.abs(q).max()))
        if nz.size == 0:
            return self.nu, 0.0
        m = int(nz[0])
        return self.nu + m, complex(q[m] * L ** self.mu)


@dataclass(frozen=True)
class EdgeData:
    """Order and leading coefficient of a potential at one edge."""

    point: float
    side: str
    order: float
    coeff: complex
    singular: bool = True

    def __post_init__(self):
        if self.side not in ("left", "right"):
            raise PotentialError(f"edge side must be 'left' or 'right', got {self.side!r}")
        if self.singular and self.coeff == 0:
            raise PotentialError("a singular edge needs a nonzero coefficient")


def _merge_points(points: Sequence[float]) -> tuple:
    pts = sorted(points)
    out: list[float] = []
    for p in pts:
        if out and abs(p - out[-1]) <= MERGE_TOL * max(1.0, abs(p)):
            continue
        out.append(p)
    return tuple(out)


@dataclass(frozen=True)
class PotentialSpec:
    """A sum of power-law pieces with its edge metadata.

    ``extras`` carries constructor-specific constants (for instance the
    two-hump constants or the raw end values of a fractional-power piece).
    """

    pieces: tuple = ()
    edges: tuple = ()
    label: str = ""
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def breakpoints(self) -> tuple:
        pts = [p.x0 for p in self.pieces] + [p.x1 for p in self.pieces]
        return _merge_points(pts)

    @property
    def ch_supp(self) -> tuple | None:
        if not self.pieces:
            return None
        return (min(p.x0 for p in self.pieces), max(p.x1 for p in self.pieces))

    @property
    def width(self) -> float:
        s = self.ch_supp
        return 0.0 if s is None else s[1] - s[0]

    @property
    def kind(self) -> str:
        return self.extras.get("kind", "pieces")

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: "PotentialSpec") -> "PotentialSpec":
        return combine(self, other)

    def is_real(self) -> bool:
        return all(p.is_real() for p in self.pieces)

    def has_fractional(self) -> bool:
        return any(not p.integer_powers for p in self.pieces)


def _edges_from_pieces(pieces: Sequence[PowerLawPiece]) -> tuple:
    edges = []
    for p in pieces:
        for end, pt in (("left", p.x0), ("right", p.x1)):
            order, coeff = p.leading(end)
            if coeff == 0:
                continue
            edges.append(EdgeData(pt, end, order, coeff, singular=not p.smooth))
    return tuple(edges)


def from_pieces(pieces: Sequence[PowerLawPiece], label: str = "") -> PotentialSpec:
    """Build a potential from raw pieces, deriving edge data from each piece."""
    pieces = tuple(pieces)
    return PotentialSpec(pieces, _edges_from_pieces(pieces), label, {"kind": "pieces"})


def zero_potential() -> PotentialSpec:
    return PotentialSpec((), (), "zero", {"kind": "zero"})


def make_vjk(a: float, b: float, j: int, k: int, C1: complex, C2: complex,
             s: int = 0) -> PotentialSpec:
    """Polynomial potential with prescribed edge behaviour on ``[a, b]``.

    Returns ``C1 (x-a)^j ((b-x)/(b-a))^(k+1+s) + C2 (b-x)^k ((x-a)/(b-a))^(j+1+s)``,
    which behaves like ``C1 (x-a)^j`` at ``a`` and ``C2 (b-x)^k`` at ``b``.
    """
    if not a < b:
        raise PotentialError(f"need a < b, got a={a}, b={b}")
    for name, v in (("j", j), ("k", k), ("s", s)):
        if int(v) != v or v < 0:
            raise PotentialError(f"{name} must be a non-negative integer, got {v}")
    if C1 == 0 or C2 == 0:
        raise PotentialError("edge coefficients must be nonzero")
    j, k, s = int(j), int(k), int(s)
    L = b - a
    # q(t) in t = x - a: C1 (L-t)^(1+s) / L^(k+1+s) + C2 t^(1+s) / L^(j+1+s)
    q = complex(C1) / L ** (k + 1 + s) * npoly.polypow(np.array([L, -1.0]), 1 + s)
    tail = np.zeros(2 + s, dtype=complex)
    tail[-1] = complex(C2) / L ** (j + 1 + s)
    q = npoly.polyadd(q, tail)
    piece = PowerLawPiece(a, b, j, k, tuple(q))
    edges = (EdgeData(a, "left", j, complex(C1)), EdgeData(b, "right", k, complex(C2)))
    extras = {"kind": "vjk", "a": a, "b": b, "j": j, "k": k,
              "C1": complex(C1), "C2": complex(C2), "s": s}
    return PotentialSpec((piece,), edges, f"vjk[{a},{b}]j{j}k{k}", extras)


def make_stepin(a: float, b: float, mu: float, nu: float,
                v0: Sequence[complex]) -> PotentialSpec:
    """Fractional-power potential ``(x-a)^mu (b-x)^nu v0(x)`` on ``[a, b]``.

    ``v0`` is given by its coefficients in ascending powers of ``x - a``.
    """
    if not a < b:
        raise PotentialError(f"need a < b, got a={a}, b={b}")
    if not (-1 < mu < 0 and -1 < nu < 0):
        raise PotentialError(f"powers must lie in (-1, 0), got mu={mu}, nu={nu}")
    coeffs = np.atleast_1d(np.asarray(v0, dtype=complex))
    V0a = complex(coeffs[0])
    V0b = complex(npoly.polyval(b - a, coeffs))
    if V0a == 0 or V0b == 0:
        raise PotentialError("v0 must be nonzero at both endpoints")
    L = b - a
    piece = PowerLawPiece(a, b, mu, nu, tuple(coeffs))
    edges = (EdgeData(a, "left", mu, V0a * L ** nu), EdgeData(b, "right", nu, V0b * L ** mu))
    extras = {"kind": "stepin", "a": a, "b": b, "mu": mu, "nu": nu, "V0a": V0a, "V0b": V0b}
    return PotentialSpec((piece,), edges, f"stepin[{a},{b}]", extras)


def two_hump_constants(a, b, c, j, k, l, C1, C2, C3, C4) -> dict:
    """Constants A, B, alpha, beta, C_A, C_B of a two-hump potential."""
    alpha = j + k + 4
    beta = j + l + 4
    C_A = math.factorial(j) * math.factorial(k) * C1 * (C2 + (-1) ** (k + 1) * C3) / 2 ** alpha
    C_B = math.factorial(j) * math.factorial(l) * C1 * C4 / 2 ** beta
    return {"A": b - a, "B": c - a, "alpha": alpha, "beta": beta,
            "C_A": complex(C_A), "C_B": complex(C_B)}


def make_two_hump(a, b, c, j, k, l, C1, C2, C3, C4, s: int = 0) -> PotentialSpec:
    """Two adjacent polynomial humps on ``[a, b]`` and ``[b, c]``.

    The humps meet at ``b`` with a genuine singularity (``C2 != (-1)^k C3``).
    """
    if not (a < b < c):
        raise PotentialError(f"need a < b < c, got {a}, {b}, {c}")
    if not (0 <= j <= k <= l) or any(int(v) != v for v in (j, k, l)):
        raise PotentialError(f"need integers 0 <= j <= k <= l, got {j}, {k}, {l}")
    if any(C == 0 for C in (C1, C2, C3, C4)):
        raise PotentialError("all edge coefficients must be nonzero")
    jump = complex(C2) - (-1) ** int(k) * complex(C3)
    if abs(jump) <= 1e-14 * max(abs(C2), abs(C3)):
        raise PotentialError("C2 == (-1)^k C3: the humps join smoothly at b")
    j, k, l = int(j), int(k), int(l)
    V1 = make_vjk(a, b, j, k, C1, C2, s)
    V2 = make_vjk(b, c, k, l, C3, C4, s)
    extras = {"kind": "two_hump", "a": a, "b": b, "c": c, "j": j, "k": k, "l": l,
              "C1": complex(C1), "C2": complex(C2), "C3": complex(C3), "C4": complex(C4),
              "s": s}
    extras.update(two_hump_constants(a, b, c, j, k, l, complex(C1), complex(C2),
                                     complex(C3), complex(C4)))
    edges = V1.edges + tuple(replace(e) for e in V2.edges)
    return PotentialSpec(V1.pieces + V2.pieces, edges, f"two_hump[{a},{b},{c}]", extras)


def make_bump(x0: float, x1: float, height: float = 1.0, order: int = M_SMOOTH) -> PotentialSpec:
    """Numerically smooth bump ``height * (4 (x-x0)(x1-x) / L^2)^order``.

    The piece is flagged smooth, so it does not enter the singular support.
    """
    if not x0 < x1:
        raise PotentialError(f"need x0 < x1, got {x0}, {x1}")
    L = x1 - x0
    piece = PowerLawPiece(x0, x1, order, order, (height * (4.0 / L ** 2) ** order,), smooth=True)
    return PotentialSpec((piece,), _edges_from_pieces([piece]), f"bump[{x0},{x1}]",
                         {"kind": "bump", "x0": x0, "x1": x1, "height": height, "order": order})


def make_step(x0: float, x1: float, height: complex = 1.0) -> PotentialSpec:
    """Constant piece ``height`` on ``[x0, x1]``."""
    return from_pieces([PowerLawPiece(x0, x1, 0, 0, (height,))], f"step[{x0},{x1}]")


def combine(*parts: PotentialSpec) -> PotentialSpec:
    """Sum of potentials; edge data and extras of the first part are kept first."""
    pieces: list = []
    edges: list = []
    for p in parts:
        pieces.extend(p.pieces)
        edges.extend(p.edges)
    extras = dict(parts[0].extras) if parts else {}
    extras["components"] = [p.extras.get("kind", "pieces") for p in parts]
    if len(parts) > 1:
        extras["base"] = parts[0]
        extras["perturbations"] = tuple(parts[1:])
    label = "+".join(p.label for p in parts if p.label)
    return PotentialSpec(tuple(pieces), tuple(edges), label, extras)


def evaluate(V: PotentialSpec, x):
    """Pointwise value of ``V``; zero outside the support.

    At an endpoint where a piece has a negative power the result is ``inf``.
    """
    xa = np.asarray(x, dtype=float)
    out = np.zeros(xa.shape, dtype=complex)
    for p in V.pieces:
        out = out + p(xa)
    return out if np.ndim(x) else complex(out)


def translate(V: PotentialSpec, shift: float) -> PotentialSpec:
    """The potential ``x -> V(x - shift)``."""
    edges = tuple(replace(e, point=e.point + shift) for e in V.edges)
    extras = dict(V.extras)
    for key in ("a", "b", "c", "x0", "x1"):
        if key in extras:
            extras[key] = extras[key] + shift
    return PotentialSpec(tuple(p.translate(shift) for p in V.pieces), edges, V.label, extras)


def reflect(V: PotentialSpec) -> PotentialSpec:
    """The potential ``x -> V(-x)``."""
    flip = {"left": "right", "right": "left"}
    edges = tuple(replace(e, point=-e.point, side=flip[e.side]) for e in V.edges)
    return PotentialSpec(tuple(p.reflect() for p in V.pieces), edges, V.label,
                         {"kind": "reflected"})


def conjugate(V: PotentialSpec) -> PotentialSpec:
    """The complex-conjugate potential."""
    edges = tuple(replace(e, coeff=np.conj(e.coeff)) for e in V.edges)
    extras = {k: (np.conj(v) if isinstance(v, complex) else v) for k, v in V.extras.items()}
    return PotentialSpec(tuple(p.conj() for p in V.pieces), edges, V.label, extras)


def scale(V: PotentialSpec, s: float) -> PotentialSpec:
    """The potential ``x -> V(x / s)`` for ``s > 0`` (support stretched by ``s``)."""
    if s <= 0:
        raise PotentialError("scale factor must be positive")
    pieces = []
    for p in V.pieces:
        # (x/s - x0)^mu (x1 - x/s)^nu p(x/s) in powers of (x - s x0)
        poly = tuple(c / s ** m for m, c in enumerate(p.poly))
        pref = s ** -(p.mu + p.nu)
        pieces.append(PowerLawPiece(s * p.x0, s * p.x1, p.mu, p.nu,
                                    tuple(pref * np.asarray(poly)), p.smooth))
    return from_pieces(pieces, V.label)


# -- Fourier transform ------------------------------------------------------

def _ibp_transform(P: np.ndarray, L: float, z: np.ndarray) -> np.ndarray:
    """``int_0^L P(t) e^{-izt} dt`` by repeated integration by parts."""
    total = np.zeros(z.shape, dtype=complex)
    ez = np.exp(-1j * z * L)
    deriv = np.asarray(P, dtype=complex)
    iz = 1j * z
    denom = iz
    for _ in range(len(P)):
        total += (deriv[0] - npoly.polyval(L, deriv) * ez) / denom
        deriv = npoly.polyder(deriv) if len(deriv) > 1 else np.zeros(1, dtype=complex)
        denom = denom * iz
        if not deriv.any():
            break
    return total


def _piece_hat_poly(piece: PowerLawPiece, z: np.ndarray) -> np.ndarray:
    P = piece.expanded()
    L = piece.length
    deg = len(P) - 1
    out = np.empty(z.shape, dtype=complex)
    big = np.abs(z) * L >= 2.0 * (deg + 1)
    if big.any():
        out[big] = _ibp_transform(P, L, z[big])
    small = ~big
    if small.any():
        zs = z[small]
        n = deg // 2 + 20 + int(np.ceil(np.abs(zs).max() * L))
        t, w = roots_legendre(n)
        t = 0.5 * L * (t + 1.0)
        vals = npoly.polyval(t, P)
        out[small] = 0.5 * L * np.exp(-1j * np.outer(zs, t)) @ (w * vals)
    return out * np.exp(-1j * z * piece.x0)


def _piece_hat_jacobi(piece: PowerLawPiece, z: np.ndarray, tol: float,
                      n_max: int = 4096) -> np.ndarray:
    L = piece.length
    n = 32 + int(np.ceil(np.abs(z).max() * L)) if z.size else 32
    prev = None
    while True:
        xi, w = roots_jacobi(n, piece.nu, piece.mu)
        x = piece.x0 + 0.5 * L * (1.0 + xi)
        vals = (0.5 * L) ** (piece.mu + piece.nu + 1) * w * piece.p(x)
        cur = np.exp(-1j * np.outer(z, x)) @ vals
        if prev is not None:
            scale_ = np.maximum(np.abs(cur), 1e-300)
            change = float(np.max(np.abs(cur - prev) / scale_))
            if change <= tol:
                return cur
            if n >= n_max:
                raise QuadratureError(tol, n, change)
        prev = cur
        n = min(2 * n, n_max)


def fourier_hat(V: PotentialSpec, z, tol: float = 1e-10, z_max: float = Z_MAX):
    """Fourier transform ``int e^{-izx} V(x) dx``.

    Integer-power pieces use an exact integration-by-parts sum (or
    Gauss-Legendre for small ``|z| L``); fractional-power pieces use
    Gauss-Jacobi nodes matched to the endpoint powers, doubled until the
    relative change is below ``tol``.
    """
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    if za.size and np.abs(za.imag).max() > z_max:
        raise ValueError(f"|Im z| exceeds the configured bound {z_max}")
    out = np.zeros(za.shape, dtype=complex)
    for p in V.pieces:
        if p.integer_powers:
            out += _piece_hat_poly(p, za)
        else:
            out += _piece_hat_jacobi(p, za, tol)
    return out if np.ndim(z) else complex(out[0])


def support_data(V: PotentialSpec):
    """Convex hull of the support, the edge list and the hull of singular edges."""
    sing = [e.point for e in V.edges if e.singular]
    ch_sing = (min(sing), max(sing)) if sing else None
    return V.ch_supp, V.edges, ch_sing


def sing_width(V: PotentialSpec) -> float:
    s = support_data(V)[2]
    return 0.0 if s is None else s[1] - s[0]


def edge_asymptotic(V: PotentialSpec, z):
    """Leading edge contributions to the Fourier transform at large ``|z|``.

    A left edge ``C (x-p)^m`` contributes ``Gamma(m+1) C e^{-izp} / (iz)^(m+1)``
    and a right edge ``C (p-x)^m`` contributes
    ``Gamma(m+1) C e^{-izp} / (-iz)^(m+1)``.
    Returns the per-edge terms stacked along the first axis.
    """
    za = np.atleast_1d(np.asarray(z, dtype=complex))
    terms = []
    for e in V.edges:
        if not e.singular:
            continue
        g = math.gamma(e.order + 1)
        w = 1j * za if e.side == "left" else -1j * za
        terms.append(g * e.coeff * np.exp(-1j * za * e.point) / w ** (e.order + 1))
    if not terms:
        return np.zeros((0,) + za.shape, dtype=complex)
    return np.array(terms)


# -- JSON ---------------------------------------------------------------------

def _cx(v) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise PotentialError(f"complex numbers are [re, im] pairs, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _cx_json(c: complex):
    c = complex(c)
    return [c.real, c.imag]


def from_json(obj: dict[str, Any]) -> PotentialSpec:
    """Build a potential from its JSON form.

    Accepted shapes are ``{"pieces": [...]}``, the constructor shorthands
    ``{"vjk": {...}}``, ``{"stepin": {...}}``, ``{"two_hump": {...}}``,
    ``{"bump": {...}}``, ``{"step": {...}}``, ``{"zero": {}}`` and sums
    ``{"sum": [...]}``.
    """
    if not isinstance(obj, dict) or len(obj) != 1:
        raise PotentialError("a potential must be an object with exactly one key")
    (kind, body), = obj.items()
    if kind == "pieces":
        pieces = [PowerLawPiece(float(p["x0"]), float(p["x1"]), float(p.get("mu", 0.0)),
                                float(p.get("nu", 0.0)),
                                tuple(_cx(c) for c in p.get("poly", [1.0])),
                                bool(p.get("smooth", False)))
                  for p in body]
        return from_pieces(pieces)
    if kind == "vjk":
        return make_vjk(body["a"], body["b"], body["j"], body["k"], _cx(body["C1"]),
                        _cx(body["C2"]), body.get("s", 0))
    if kind == "stepin":
        return make_stepin(body["a"], body["b"], body["mu"], body["nu"],
                           [_cx(c) for c in body.get("v0", [1.0])])
    if kind == "two_hump":
        return make_two_hump(body["a"], body["b"], body["c"], body["j"], body["k"], body["l"],
                             *(_cx(body[n]) for n in ("C1", "C2", "C3", "C4")),
                             s=body.get("s", 0))
    if kind == "bump":
        return make_bump(body["x0"], body["x1"], body.get("height", 1.0),
                         body.get("order", M_SMOOTH))
    if kind == "step":
        return make_step(body["x0"], body["x1"], _cx(body.get("height", 1.0)))
    if kind == "zero":
        return zero_potential()
    if kind == "sum":
        return combine(*(from_json(o) for o in body))
    raise PotentialError(f"unknown potential kind {kind!r}")


def to_json(V: PotentialSpec) -> dict:
    """Raw-piece JSON form of ``V`` (constructor shorthand is not preserved)."""
    return {"pieces": [{"x0": p.x0, "x1": p.x1, "mu": p.mu, "nu": p.nu,
                        "poly": [_cx_json(c) for c in p.poly], "smooth": p.smooth}
                       for p in V.pieces]}
