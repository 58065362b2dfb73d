"""Closed-form resonance strings and their comparison with computed zeros.

Every predictor here describes zeros of ``1 - C (i lam)^(-M) e^{i Lh lam}``
type asymptotic models, which lie on logarithmic curves

    lam_n = s n Delta + phase + i (im_const - kappa log(n Delta)),

with ``s = +1`` on the right half-axis and ``s = -1`` on the left. The left
half is always generated as the mirror ``lam -> -conj(lam)`` of the right
half built from conjugated data.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .hardy import poly_roots
from .potential import PotentialSpec, support_data


class RegimeError(ValueError):
    """Predictor called for the wrong two-hump case."""


@dataclass(frozen=True)
class LogCurveSequence:
    """Closed-form string ``lam_n = s n spacing + phase + i (im_const - log_coeff log(n spacing))``.

    ``log_const`` is the principal logarithm of the constant the string was
    built from; ``multiplicity`` counts coincident strings (clouds).
    """

    spacing: float
    phase: float
    im_const: float
    log_coeff: float
    log_const: complex
    half: str = "right"
    n_min: int = 1
    label: str = ""
    multiplicity: int = 1

    @property
    def sign(self) -> float:
        return 1.0 if self.half == "right" else -1.0

    @property
    def density(self) -> float:
        """Points per unit length of the real axis (one half-axis)."""
        return 1.0 / self.spacing

    def points(self, n_range: Iterable[int]) -> np.ndarray:
        n = np.asarray(list(n_range), dtype=float)
        if n.size == 0:
            return np.zeros(0, dtype=complex)
        x = n * self.spacing
        return self.sign * x + self.phase + 1j * (self.im_const - self.log_coeff * np.log(x))

    def curve(self, re) -> np.ndarray:
        """Asymptotic curve ``Im = im_const - log_coeff log|Re|``."""
        re = np.asarray(re, dtype=float)
        return self.im_const - self.log_coeff * np.log(np.abs(re))

    def index_near(self, lam: complex) -> float:
        """Continuous index ``n`` whose predicted real part is ``Re lam``."""
        return (self.sign * (lam.real - self.phase)) / self.spacing

    def mirrored(self) -> "LogCurveSequence":
        return LogCurveSequence(self.spacing, -self.phase, self.im_const, self.log_coeff,
                                self.log_const.conjugate(),
                                "left" if self.half == "right" else "right",
                                self.n_min, self.label, self.multiplicity)


def _halves(half: str) -> list:
    if half == "both":
        return ["right", "left"]
    if half not in ("right", "left"):
        raise ValueError("half must be 'right', 'left' or 'both'")
    return [half]


def hardy_string(C: complex, M: float, Lh: float, half: str = "right", label: str = "",
                 multiplicity: int = 1) -> LogCurveSequence:
    """String of zeros of ``1 - C (i lam)^(-M) e^{i Lh lam}``.

    Right half: ``2 pi n/Lh + M pi/(2 Lh) + (i/Lh) log C - i (M/Lh) log(2 pi n/Lh)``.
    """
    C = complex(C)
    if half == "left":
        return hardy_string(C.conjugate(), M, Lh, "right", label, multiplicity).mirrored()
    logC = cmath.log(C)
    return LogCurveSequence(2 * math.pi / Lh, M * math.pi / (2 * Lh) - logC.imag / Lh,
                            logC.real / Lh, M / Lh, logC, half, 1, label, multiplicity)


def root_string(a: complex, N: float, K: float, half: str = "right", label: str = "",
                multiplicity: int = 1) -> LogCurveSequence:
    """String attached to a root ``a`` of ``C2 w^N + C1 w^M - 1``.

    Right half: ``2 pi N n/K + N pi/(2K) - i (N/K) log a - i (N/K) log(2 pi N n/K)``.
    """
    a = complex(a)
    if half == "left":
        return root_string(a.conjugate(), N, K, "right", label, multiplicity).mirrored()
    la = cmath.log(a)
    r = N / K
    return LogCurveSequence(2 * math.pi * r, r * math.pi / 2 + r * la.imag, -r * la.real, r,
                            la, half, 1, label, multiplicity)


# -- single-interval predictors ---------------------------------------------------

def vjk_constant(j: int, k: int, C1: complex, C2: complex) -> complex:
    return math.factorial(j) * math.factorial(k) * complex(C1) * complex(C2) / 2 ** (j + k + 4)


def predict_vjk(a: float, b: float, j: int, k: int, C1: complex, C2: complex,
                half: str = "right") -> LogCurveSequence:
    """String of a potential with edges ``C1 (x-a)^j`` and ``C2 (b-x)^k``.

    ``C = j! k! C1 C2 / 2^(j+k+4)``; spacing ``pi/(b-a)``, curve coefficient
    ``(j+k+4)/(2(b-a))``, density ``(b-a)/pi`` per half-axis.
    """
    if not a < b:
        raise ValueError("need a < b")
    C = vjk_constant(j, k, C1, C2)
    if C == 0:
        raise ValueError("edge constant vanishes")
    return hardy_string(C, j + k + 4, 2 * (b - a), half, "vjk")


def stepin_constant(a, b, mu, nu, V0a, V0b) -> complex:
    return ((b - a) ** (mu + nu) * complex(V0a) * complex(V0b) * math.gamma(mu + 1)
            * math.gamma(nu + 1) / 2 ** (mu + nu + 4))


def predict_stepin(a: float, b: float, mu: float, nu: float, V0a: complex, V0b: complex,
                   half: str = "right") -> LogCurveSequence:
    """String of ``(x-a)^mu (b-x)^nu V0(x)`` with ``mu, nu in (-1, 0)``.

    ``C = (b-a)^(mu+nu) V0(a) V0(b) Gamma(mu+1) Gamma(nu+1) / 2^(mu+nu+4)``
    and exponent ``mu + nu + 4``.
    """
    if not (-1 < mu < 0 and -1 < nu < 0):
        raise ValueError("need mu, nu in (-1, 0)")
    if V0a == 0 or V0b == 0:
        raise ValueError("V0 must be nonzero at both ends")
    C = stepin_constant(a, b, mu, nu, V0a, V0b)
    return hardy_string(C, mu + nu + 4, 2 * (b - a), half, "stepin")


def predict_for(V: PotentialSpec, half: str = "right") -> LogCurveSequence:
    """Single-string prediction read off a vjk or fractional-power potential."""
    e = V.extras
    base = e.get("base")
    if base is not None:
        e = base.extras
    kind = e.get("kind")
    if kind == "vjk":
        return predict_vjk(e["a"], e["b"], e["j"], e["k"], e["C1"], e["C2"], half)
    if kind == "stepin":
        return predict_stepin(e["a"], e["b"], e["mu"], e["nu"], e["V0a"], e["V0b"], half)
    raise ValueError(f"no single-string predictor for potential kind {kind!r}")


# -- two humps ----------------------------------------------------------------------

@dataclass(frozen=True)
class RegimeReport:
    T1: float
    T2: float
    T3: float
    case_id: int
    A: float
    B: float
    alpha: int
    beta: int
    C_A: complex
    C_B: complex
    a: float = 0.0
    b: float = 0.0
    c: float = 0.0


def regime_from_constants(a, b, c, alpha, beta, C_A, C_B, tie_tol: float = 1e-12) -> RegimeReport:
    A, B = b - a, c - a
    T1 = alpha / (2 * A)
    T2 = beta / (2 * B)
    T3 = (beta - alpha) / (2 * (B - A))
    if abs(T1 - T2) < tie_tol * max(abs(T1), abs(T2)):
        case = 3
    elif T1 > T2:
        case = 1
    else:
        case = 2
    return RegimeReport(T1, T2, T3, case, A, B, alpha, beta, complex(C_A), complex(C_B), a, b, c)


def classify_regime(V: PotentialSpec) -> RegimeReport:
    """Two-hump constants ``T1 = alpha/(2A)``, ``T2 = beta/(2B)``, ``T3`` and the case id."""
    e = V.extras
    if e.get("kind") != "two_hump":
        raise ValueError("classify_regime needs a two-hump potential")
    return regime_from_constants(e["a"], e["b"], e["c"], e["alpha"], e["beta"],
                                 e["C_A"], e["C_B"])


def predict_case1(report: RegimeReport, half: str = "right") -> LogCurveSequence:
    """Single string spanning the whole support: spacing ``pi/(c-a)``, coefficient ``T2``."""
    if report.case_id != 1:
        raise RegimeError(f"case 1 predictor called for case {report.case_id}")
    return hardy_string(report.C_B, report.beta, 2 * report.B, half, "case1")


def predict_case2(report: RegimeReport, half: str = "right") -> list:
    """Two strings: one from ``[a, b]`` (coefficient ``T1``), one from ``[b, c]`` (``T3``).

    The second constant is the principal ``log(-C_B / C_A)``.
    """
    if report.case_id != 2:
        raise RegimeError(f"case 2 predictor called for case {report.case_id}")
    s1 = hardy_string(report.C_A, report.alpha, 2 * report.A, half, "case2_a")
    s2 = hardy_string(-report.C_B / report.C_A, report.beta - report.alpha,
                      2 * (report.B - report.A), half, "case2_b")
    return [s1, s2]


def predict_case3(report: RegimeReport, half: str = "right", cluster_tol: float = 1e-8) -> list:
    """One string per root of ``C_B z^beta + C_A z^alpha - 1``; multiple roots give clouds."""
    if report.case_id != 3:
        raise RegimeError(f"case 3 predictor called for case {report.case_id}")
    coeffs = np.zeros(report.beta + 1, dtype=complex)
    coeffs[0] = -1.0
    coeffs[report.alpha] += report.C_A
    coeffs[report.beta] += report.C_B
    out = []
    for i, (z, d, _) in enumerate(poly_roots(coeffs, cluster_tol=cluster_tol)):
        out.append(root_string(z, report.beta, 2 * report.B, half, f"case3_{i}", d))
    return out


def predict_two_hump(report: RegimeReport, half: str = "right") -> list:
    if report.case_id == 1:
        return [predict_case1(report, half)]
    if report.case_id == 2:
        return predict_case2(report, half)
    return predict_case3(report, half)


def predict_all(V: PotentialSpec, half: str = "right") -> list:
    """Every string predicted for ``V``: one for vjk and fractional-power potentials,
    one to several for two humps. Perturbations added with ``combine`` are ignored."""
    e = V.extras.get("base", V).extras
    if e.get("kind") == "two_hump":
        rep = regime_from_constants(e["a"], e["b"], e["c"], e["alpha"], e["beta"],
                                    e["C_A"], e["C_B"])
        return predict_two_hump(rep, half)
    return [predict_for(V, half)]


def two_hump_model(report: RegimeReport, lam):
    """The two-term asymptotic model ``1 - C_A (i lam)^(-alpha) e^{2iA lam} - C_B (i lam)^(-beta) e^{2iB lam}``."""
    lam = np.asarray(lam, dtype=complex)
    il = 1j * lam
    return (1.0 - report.C_A * il ** (-report.alpha) * np.exp(2j * report.A * lam)
            - report.C_B * il ** (-report.beta) * np.exp(2j * report.B * lam))


# -- interior perturbations -------------------------------------------------------------

@dataclass(frozen=True)
class LriBounds:
    M0: float
    M1: float
    window: tuple
    window_ok: bool


def lri_bounds(V: PotentialSpec, W: PotentialSpec) -> LriBounds:
    """Thresholds for a vjk potential on ``[a, b]`` perturbed inside ``[a1, b1]``.

    ``M0`` bounds from above the depth beyond which only finitely many
    resonances remain; ``M1`` bounds the strip kept resonance-poor. When
    ``[a1, b1]`` lies inside the window
    ``(a + (j+1)L/(j+k+4), b - (k+1)L/(j+k+4))`` the unperturbed string
    prediction applies unchanged.
    """
    e = V.extras
    if e.get("kind") != "vjk":
        raise ValueError("lri_bounds needs a vjk potential")
    a, b, j, k = e["a"], e["b"], e["j"], e["k"]
    supp = W.ch_supp
    if supp is None:
        raise ValueError("perturbation has empty support")
    a1, b1 = supp
    if not (a < a1 and b1 < b):
        raise ValueError("perturbation support must lie strictly inside (a, b)")
    L = b - a
    M0 = max((j + k + 2) / (2 * (L - (b1 - a1))), (j + 1) / (2 * (a1 - a)),
             (k + 1) / (2 * (b - b1)), (j + k + 4) / (2 * L))
    M1 = min(1.0 / (b1 - a1), (j + 3) / (2 * (b1 - a)), (k + 3) / (2 * (b - a1)))
    window = (a + (j + 1) * L / (j + k + 4), b - (k + 1) * L / (j + k + 4))
    return LriBounds(M0, M1, window, window[0] < a1 and b1 < window[1])


# -- matching ----------------------------------------------------------------------------

@dataclass
class MatchRow:
    label: str
    n: int
    half: str
    pred: complex
    comp: complex | None
    abs_err: float
    multiplicity: int


@dataclass
class MatchTable:
    rows: list
    unmatched_predicted: list
    unmatched_computed: list
    ambiguous: list
    summary: dict = field(default_factory=dict)

    @property
    def matched(self) -> list:
        return [r for r in self.rows if r.comp is not None]

    def errors(self, label: str | None = None, half: str | None = None) -> dict:
        """``n -> |eps_n|`` for matched rows of one string."""
        return {r.n: r.abs_err for r in self.matched
                if (label is None or r.label == label) and (half is None or r.half == half)}


def _computed_points(computed) -> tuple:
    items = getattr(computed, "items", computed)
    pts, mult = [], []
    for it in items:
        if hasattr(it, "lam"):
            pts.append(complex(it.lam))
            mult.append(int(getattr(it, "multiplicity", 1)))
        else:
            pts.append(complex(it))
            mult.append(1)
    return pts, mult


def quartile_maxima(errs: dict) -> list:
    """Maximum ``|eps_n|`` over each quarter of the sorted index range."""
    if not errs:
        return []
    ns = sorted(errs)
    chunks = np.array_split(np.array(ns), 4)
    return [max(errs[n] for n in c) for c in chunks if len(c)]


def match_resonances(computed, predicted: Sequence[LogCurveSequence] | LogCurveSequence,
                     n_range: Iterable[int], radius_frac: float = 0.45) -> MatchTable:
    """One-to-one assignment of predicted string points to computed zeros.

    A prediction may claim a computed zero within ``radius_frac * spacing``.
    A zero of multiplicity ``m`` can serve ``m`` predictions. Computed zeros
    in reach of several predictions are listed as ambiguous.
    """
    if isinstance(predicted, LogCurveSequence):
        predicted = [predicted]
    ns = list(n_range)
    P = []
    for seq in predicted:
        pts = seq.points(ns)
        for copy in range(seq.multiplicity):
            for n, z in zip(ns, pts):
                P.append((seq, n, complex(z)))
    pts, mult = _computed_points(computed)
    Cx, owner = [], []
    for i, (z, m) in enumerate(zip(pts, mult)):
        for _ in range(m):
            Cx.append(z)
            owner.append(i)
    rows: list = [None] * len(P)
    ambiguous = []
    assigned = set()
    if P and Cx:
        pz = np.array([p[2] for p in P])
        cz = np.array(Cx)
        radius = np.array([radius_frac * p[0].spacing for p in P])
        D = np.abs(pz[:, None] - cz[None, :])
        within = D <= radius[:, None]
        big = 1e6 * (1.0 + D.max())
        cost = np.where(within, D, big)
        ri, ci = linear_sum_assignment(cost)
        for r, c in zip(ri, ci):
            if within[r, c]:
                seq, n, z = P[r]
                rows[r] = MatchRow(seq.label, n, seq.half, z, cz[c], float(D[r, c]),
                                   mult[owner[c]])
                assigned.add(c)
        claims = within.sum(axis=0)
        seen = set()
        for c in np.flatnonzero(claims > mult_arr(mult, owner)):
            if owner[c] not in seen:
                seen.add(owner[c])
                ambiguous.append(complex(cz[c]))
    unmatched_pred = []
    for i, (seq, n, z) in enumerate(P):
        if rows[i] is None:
            rows[i] = MatchRow(seq.label, n, seq.half, z, None, float("nan"), 0)
            unmatched_pred.append((seq.label, n, seq.half, z))
    unmatched_comp = sorted({owner[c] for c in range(len(Cx))} - {owner[c] for c in assigned})
    unmatched_comp = [pts[i] for i in unmatched_comp]
    table = MatchTable(rows, unmatched_pred, unmatched_comp, ambiguous)
    summary = {}
    for seq in predicted:
        errs = table.errors(seq.label, seq.half)
        key = f"{seq.label}:{seq.half}"
        q = quartile_maxima(errs)
        summary[key] = {"matched": len(errs), "predicted": len(ns) * seq.multiplicity,
                        "quartile_max": q, "top_quartile_max": q[-1] if q else float("nan")}
    table.summary = summary
    return table


def mult_arr(mult, owner) -> np.ndarray:
    return np.array([mult[o] for o in owner])


def density_identity(V: PotentialSpec, sequences: Sequence[LogCurveSequence]) -> float:
    """Ratio of the summed string densities to ``|ch sing supp V| / pi``."""
    ch = support_data(V)[2]
    width = ch[1] - ch[0]
    total = sum(s.density * s.multiplicity for s in sequences)
    return total / (width / math.pi)
