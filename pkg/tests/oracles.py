"""Reference solutions that share no code with the package.

The square-well resonance condition is solved in extended precision and the
Wronskian of any piecewise-constant potential comes from the exact product
of constant-piece propagators.
"""

import mpmath as mp
import numpy as np


def square_well_condition(lam, V0=1.0, L=1.0):
    """``cos(qL) - i (lam^2 + q^2) sin(qL) / (2 lam q)`` with ``q^2 = lam^2 - V0``."""
    lam = mp.mpc(lam)
    q = mp.sqrt(lam * lam - V0)
    return mp.cos(q * L) - 1j * (lam * lam + q * q) * mp.sin(q * L) / (2 * lam * q)


def _seed(n, V0, L):
    # the condition is exp(2iqL) = ((lam+q)/(lam-q))^2; take the n-th log branch
    q = mp.mpc(mp.pi * n / L)
    for _ in range(60):
        lam = mp.sqrt(q * q + V0)
        q = (mp.pi * n - 1j * mp.log((lam + q) / (lam - q))) / L
    lam = mp.sqrt(q * q + V0)
    return lam if lam.real > 0 else -lam


def square_well_roots(n_max, V0=1.0, L=1.0, dps=30):
    """Right-half lower-half-plane resonances ``n = 1..n_max`` of the square well."""
    out = []
    with mp.workdps(dps):
        for n in range(1, n_max + 1):
            z = mp.findroot(lambda z: square_well_condition(z, V0, L), _seed(n, V0, L))
            out.append(complex(z))
    return np.array(out)


def square_well_axis_roots(V0=1.0, L=1.0, y_max=20.0, dps=30):
    """Resonances ``-iy`` on the negative imaginary axis, by bracketing sign changes."""
    with mp.workdps(dps):
        g = lambda y: mp.re(square_well_condition(-1j * mp.mpf(y), V0, L))
        ys = np.linspace(1e-3, y_max, 4001)
        vals = [g(y) for y in ys]
        out = []
        for y0, y1, g0, g1 in zip(ys[:-1], ys[1:], vals[:-1], vals[1:]):
            if g0 * g1 < 0:
                y = mp.findroot(g, (y0, y1), solver="illinois")
                out.append(-1j * float(y))
    return np.array(out)


def square_well_first(count, V0=1.0, L=1.0):
    """The ``count`` lower-half-plane resonances with ``Re >= 0`` of smallest modulus."""
    branch = square_well_roots(count + 2, V0, L)
    axis = square_well_axis_roots(V0, L)
    pts = list(axis)
    for z in branch:
        if all(abs(z - w) > 1e-8 for w in pts):
            pts.append(z)
    pts = sorted(pts, key=abs)
    return np.array(pts[:count])


def step_wronskian(steps, lam):
    """Wronskian ``u_L u_R' - u_L' u_R`` for ``V = sum h * 1[x0, x1]``.

    ``steps`` is a list of ``(x0, x1, h)``; overlapping steps add up. The
    right solution ``e^{i lam x}`` is carried leftwards with exact
    propagators of ``-u'' + V u = lam^2 u`` on each constant interval.
    """
    lam = complex(lam)
    pts = sorted({p for s in steps for p in s[:2]})
    a, b = pts[0], pts[-1]
    u = np.exp(1j * lam * b)
    du = 1j * lam * u
    for x0, x1 in zip(reversed(pts[:-1]), reversed(pts[1:])):
        mid = 0.5 * (x0 + x1)
        h = sum(s[2] for s in steps if s[0] <= mid <= s[1])
        k = np.sqrt(complex(lam * lam - h))
        d = x1 - x0
        c, s = np.cos(k * d), np.sin(k * d)
        sk = s / k if k != 0 else d
        u, du = c * u - sk * du, k * s * u + c * du
    return (1j * lam * u + du) * np.exp(-1j * lam * a)


def step_wronskian_mp(steps, lam, dps=50):
    """``step_wronskian`` in extended precision, for frequencies deep below the axis."""
    import mpmath as mp
    with mp.workdps(dps):
        lam = mp.mpc(lam)
        pts = sorted({mp.mpf(p) for s in steps for p in s[:2]})
        a, b = pts[0], pts[-1]
        u = mp.exp(1j * lam * b)
        du = 1j * lam * u
        for x0, x1 in zip(reversed(pts[:-1]), reversed(pts[1:])):
            mid = (x0 + x1) / 2
            h = sum(s[2] for s in steps if s[0] <= mid <= s[1])
            k = mp.sqrt(lam * lam - h)
            c, s = mp.cos(k * (x1 - x0)), mp.sin(k * (x1 - x0))
            u, du = c * u - s / k * du, k * s * u + c * du
        return complex((1j * lam * u + du) * mp.exp(-1j * lam * a))


def random_polynomial(rng, degree):
    roots = rng.uniform(-2, 2, degree) + 1j * rng.uniform(-2, 2, degree)
    return roots, (lambda z: np.prod([np.asarray(z) - r for r in roots], axis=0))
