import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import square_well_first, step_wronskian, step_wronskian_mp
from reslab.potential import (combine, conjugate, make_step, make_stepin, make_two_hump, make_vjk,
                              translate, zero_potential)
from reslab.rootfind import Rectangle, newton_refine, subdivide_find
from reslab.scattering import (DEFAULT_ENGINE, ConditioningError, EngineParams, det_s_minus,
                               diagnostic_rows, jost_solve, scattering_data, sme_residual,
                               WronskianEvaluator, vhat_asymptotic_check, wronskian,
                               wronskian_at)

WELL = make_vjk(0, 1, 0, 0, 1, 1)


def test_free_wronskian():
    V = zero_potential()
    assert wronskian(V, 1.0) == 2j
    assert abs(wronskian(V, -3j) - 6) < 1e-15
    assert abs(wronskian(make_step(0, 1, 0.0), 2 - 1j) - 2j * (2 - 1j)) < 1e-12


def test_free_jost():
    V = make_step(-1.0, 2.0, 0.0)
    lam = 3 - 0.5j
    u, du = jost_solve(V, lam, "right")
    assert abs(u - np.exp(-1j * lam)) < 1e-12 and abs(du - 1j * lam * np.exp(-1j * lam)) < 1e-11


def test_square_well_jost_closed_form():
    for lam in (0.7, 5.0, 23.0):
        q = np.sqrt(lam ** 2 - 1 + 0j)
        e = np.exp(1j * lam)
        u_ref = np.cos(q) * e - np.sin(q) / q * 1j * lam * e
        du_ref = q * np.sin(q) * e + np.cos(q) * 1j * lam * e
        u, du = jost_solve(WELL, lam, "right")
        assert abs(u - u_ref) < 1e-9 and abs(du - du_ref) < 1e-9 * lam


def test_bound_state_side_is_real():
    V = make_vjk(0, 1, 0, 0, -10.0, -10.0)
    u, du = jost_solve(V, 1.5j, "right")
    assert abs(u.imag) < 1e-9 * abs(u) and abs(du.imag) < 1e-9 * abs(du)


def test_conditioning_cap():
    with pytest.raises(ConditioningError):
        wronskian(WELL, 10 - 40j)
    assert np.isfinite(wronskian(WELL, 10 - 40j, DEFAULT_ENGINE.with_cap(None)))
    with pytest.raises(ValueError):
        wronskian(WELL, 0.0)


def test_square_well_zeros_oracle():
    for z in square_well_first(8):
        refined = newton_refine(lambda l: wronskian(WELL, l), z)
        assert abs(refined - z) < 1e-8


def test_deep_strip_accuracy():
    # two adjacent steps; far below the axis the left-going amplitude is tiny
    # in absolute terms, which must not fall under the absolute tolerance
    steps = [(0.0, 2.0, 1.0), (2.0, 3.0, 2.0)]
    V = combine(*[make_step(*s) for s in steps])
    for lam in (45 - 7j, 45 - 10j, 45 - 12j, 20 - 9j, 336 - 27j):
        ref = step_wronskian_mp(steps, lam)
        assert abs(wronskian(V, lam) - ref) < 1e-12 * abs(ref)


def test_constant_segments_near_threshold():
    # lam^2 close to the step height, where the local wave number vanishes
    steps = [(0.0, 2.0, 1.0), (2.0, 3.0, 2.0)]
    V = combine(*[make_step(*s) for s in steps])
    lams = np.array([1 + 1e-9, 1 + 1e-6j, np.sqrt(2) + 1e-7, 1.3 - 0.02j, 0.3 - 0.1j])
    ref = np.array([complex(step_wronskian_mp(steps, z)) for z in lams])
    assert np.all(np.abs(wronskian(V, lams) - ref) < 1e-12 * np.abs(ref))
    assert np.all(np.isfinite(wronskian(V, np.array([1.0, np.sqrt(2)]))))


def test_nearly_coincident_breakpoints():
    # a piece starting within the merge tolerance of another must stay active
    steps = [(0.0, 1.0, 0.0), (1e-12, 1.0 + 1e-12, 1.0)]
    V = combine(*[make_step(*s) for s in steps])
    ref = step_wronskian(steps, 1.0)
    assert abs(wronskian(V, 1.0, EngineParams(m_cap=None)) - ref) < 1e-10 * abs(ref)


def test_free_scattering_data():
    sd = scattering_data(make_step(0, 1, 0.0), 4 - 1j)
    assert abs(sd.t - 1) < 1e-12 and abs(sd.rL) < 1e-12 and abs(sd.rR) < 1e-12
    assert abs(sd.rho_minus) < 1e-10 and abs(sd.rho_plus) < 1e-10 and abs(sd.detS - 1) < 1e-12


def test_transmission_convention():
    lam = 6 - 0.3j
    sd = scattering_data(WELL, lam)
    assert abs(sd.t - 2j * lam / sd.W) < 1e-12 * abs(sd.t)


def test_rho_minus_edge_phase():
    lam = 30 - 2j
    sd = scattering_data(WELL, lam)
    assert abs(sd.rho_minus * np.exp(-2j * lam) * 2j * lam - 1) < 0.1


def test_det_s_minus_vectorized():
    lam = np.array([5 - 1j, 12 - 0.5j])
    ref = [scattering_data(WELL, l).detS for l in lam]
    assert np.allclose(det_s_minus(WELL, lam), ref, rtol=1e-10)


def test_sme_residual():
    assert sme_residual(zero_potential(), 20 - 1j) == 0.0
    with pytest.raises(ValueError):
        sme_residual(WELL, 20 + 1j)
    for V in (WELL, make_two_hump(0, 1, 3, 0, 0, 0, 1, 1, 2, 1)):
        scaled = [sme_residual(V, r - 1j) * r for r in (20, 40, 80, 160)]
        assert max(scaled) < 2 * min(scaled)


def test_vhat_square_well_exact():
    rep = vhat_asymptotic_check(WELL, [10 - 1j, 40 - 2j])
    assert np.all(rep.rem_minus < 1e-12) and np.all(rep.rem_plus < 1e-12)


def test_vhat_remainder_decays():
    V = make_vjk(0, 1, 1, 2, 2, -3)
    rep = vhat_asymptotic_check(V, [20 - 1j, 40 - 1j, 80 - 1j, 160 - 1j])
    assert np.all(np.diff(rep.rem_minus) < 0) and np.all(np.diff(rep.rem_plus) < 0)
    real = vhat_asymptotic_check(V, [20.0, 40.0, 80.0, 160.0])
    assert np.max(real.rem_minus * real.lam.real) < 10


def test_diagnostic_rows():
    rows = diagnostic_rows(WELL, [5 - 1j])
    assert len(rows) == 1 and len(rows[0]) == 6


# -- property suites ----------------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(st.floats(1.0, 60.0), st.floats(-4.0, 0.0), st.floats(0.05, 0.95))
def test_property_matching_point_independence(re, im, x):
    V = make_vjk(0, 1, 1, 2, 2, -3)
    lam = complex(re, im)
    w0 = wronskian(V, lam)
    assert abs(wronskian_at(V, lam, x) - w0) <= 1e-9 * abs(w0)


def test_property_matching_point_fractional():
    V = make_stepin(0, 1, -0.5, -0.5, [1.0])
    lam = 15 - 2j
    w0 = wronskian(V, lam)
    assert abs(wronskian_at(V, lam, 0.5) - w0) <= 1e-9 * abs(w0)


def _zeros(V, rect):
    return [r.lam for r in subdivide_find(WronskianEvaluator(V), rect)]


def test_property_translation_invariance():
    V = combine(WELL, make_step(0.2, 0.5, 1.5))
    T = translate(V, 0.7)
    rect = Rectangle(2.0, 30.0, -9.0, 0.2)
    z0, z1 = _zeros(V, rect), _zeros(T, rect)
    assert len(z0) == len(z1) >= 4
    assert np.max(np.abs(np.array(z0) - np.array(z1))) < 1e-9
    lam = 25 - 2j
    a, b = scattering_data(V, lam), scattering_data(T, lam)
    p0, p1 = a.rho_minus * a.rho_plus, b.rho_minus * b.rho_plus
    assert abs(p1 - p0) < 1e-9 * abs(p0)


def test_property_conjugation_symmetry():
    V = make_vjk(0, 1, 0, 0, 1 + 1j, 2.0)
    Vb = conjugate(V)
    zs = _zeros(V, Rectangle(2.0, 30.0, -9.0, 0.2))
    assert len(zs) >= 4
    for z in zs:
        zc = -np.conj(z)
        scale = abs(wronskian(Vb, zc + 0.1))
        assert abs(wronskian(Vb, zc)) < 1e-9 * scale


@settings(max_examples=25, deadline=None)
@given(st.floats(0.3, 80.0))
def test_property_unitarity(lam):
    V = combine(make_vjk(0, 1, 1, 2, 2, -3), make_step(0.2, 0.5, 1.5))
    sd = scattering_data(V, lam)
    assert abs(abs(sd.t) ** 2 + abs(sd.rL) ** 2 - 1) < 1e-9
    assert abs(abs(sd.rL) - abs(sd.rR)) < 1e-9


step_lists = st.lists(st.tuples(st.floats(-1, 1), st.floats(0.05, 1.0), st.floats(-3, 3)),
                      min_size=1, max_size=4)


@settings(max_examples=30, deadline=None)
@given(step_lists, st.floats(0.5, 40.0), st.floats(-2.0, 0.5))
def test_property_oracle_piecewise_constant(steps, re, im):
    steps = [(x0, x0 + w, h) for x0, w, h in steps]
    V = combine(*[make_step(x0, x1, h) for x0, x1, h in steps])
    lam = complex(re, im)
    ref = step_wronskian(steps, lam)
    got = wronskian(V, lam, EngineParams(m_cap=None))
    assert abs(got - ref) <= 1e-10 * max(abs(ref), abs(lam))
