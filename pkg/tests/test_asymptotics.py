import math

import numpy as np
import pytest

from reslab.asymptotics import (RegimeError, classify_regime, density_identity, lri_bounds,
                                match_resonances, predict_all, predict_case1, predict_case2,
                                predict_case3, predict_stepin, predict_vjk, regime_from_constants,
                                two_hump_model)
from reslab.potential import PotentialError, make_step, make_two_hump, make_vjk
from reslab.rootfind import Resonance, ResonanceSet


def test_vjk_string_substitution():
    s = predict_vjk(0, 1, 0, 0, 1, 1)
    lam = s.points([10])[0]
    ref = 10 * math.pi + math.pi + 0.5j * math.log(1 / 16) - 2j * math.log(10 * math.pi)
    assert abs(lam - ref) < 1e-12
    assert abs(lam - (34.5575 - 8.2810j)) < 1e-4
    assert abs(s.density - 1 / math.pi) < 1e-15


def test_vjk_left_half_mirror():
    right = predict_vjk(0, 1, 0, 0, 1, 1).points(range(5, 9))
    left = predict_vjk(0, 1, 0, 0, 1, 1, "left").points(range(5, 9))
    assert np.allclose(left, -np.conj(right), atol=1e-13)


def test_vjk_doubling():
    s = predict_vjk(0, 1, 1, 2, 2, -3)
    p = s.points([7, 14])
    ref = 7 * math.pi - 1j * s.log_coeff * math.log(2)
    assert abs((p[1] - p[0]) - ref) < 1e-12


def test_stepin_string():
    s = predict_stepin(0, 1, -0.5, -0.5, 1, 1)
    assert abs(s.log_const - math.log(math.pi / 8)) < 1e-12
    lam = s.points([10])[0]
    ref = 10 * math.pi + 0.75 * math.pi + 0.5j * math.log(math.pi / 8) - 1.5j * math.log(10 * math.pi)
    assert abs(lam - ref) < 1e-12
    d = predict_stepin(0, 1, -0.5, -0.5, 2, 1)
    assert abs(np.exp(d.log_const) - 2 * np.exp(s.log_const)) < 1e-12
    with pytest.raises((ValueError, PotentialError)):
        predict_stepin(0, 1, 0.0, 0.0, 1, 1)


@pytest.mark.parametrize("abc,jkl,T,case", [((0, 1, 3), (0, 0, 0), (2, 2 / 3, 0), 1),
                                            ((0, 2, 3), (0, 0, 6), (1, 5 / 3, 3), 2),
                                            ((0, 1, 2), (0, 0, 4), (2, 2, 2), 3)])
def test_classify_regime(abc, jkl, T, case):
    rep = classify_regime(make_two_hump(*abc, *jkl, 1, 1, 2, 1))
    assert rep.case_id == case
    assert np.allclose([rep.T1, rep.T2, rep.T3], T, atol=1e-14)
    # scaling x -> 2x divides every T by 2
    rs = classify_regime(make_two_hump(*[2 * x for x in abc], *jkl, 1, 1, 2, 1))
    assert rs.case_id == case
    assert np.allclose([rs.T1, rs.T2, rs.T3], np.array(T) / 2, atol=1e-14)


def test_case1_prediction():
    rep = classify_regime(make_two_hump(0, 1, 3, 0, 0, 0, 1, 1, 2, 1))
    s = predict_case1(rep)
    n = np.array([10, 11, 12])
    ref = n * math.pi / 3 + (4 / 6) * math.pi / 2 + 1j * math.log(1 / 16) / 6 \
        - 1j * (4 / 6) * np.log(n * math.pi / 3)
    assert np.allclose(s.points(n), ref, atol=1e-12)
    assert s.points([]).size == 0
    assert abs(s.density - 3 / math.pi) < 1e-14
    with pytest.raises(RegimeError):
        predict_case2(rep)


def test_case2_prediction():
    rep = classify_regime(make_two_hump(0, 2, 3, 0, 0, 6, 1, 1, 2, 1))
    s1, s2 = predict_case2(rep)
    assert abs(s1.spacing - math.pi / 2) < 1e-14 and abs(s2.spacing - math.pi) < 1e-14
    assert abs(s1.log_coeff - rep.T1) < 1e-14 and abs(s2.log_coeff - rep.T3) < 1e-14
    assert abs(s1.density + s2.density - 3 / math.pi) < 1e-14
    with pytest.raises(RegimeError):
        predict_case1(rep)


def test_case3_prediction():
    V = make_two_hump(0, 1, 2, 0, 0, 4, 1, 1, 2, 1)
    rep = classify_regime(V)
    seqs = predict_case3(rep)
    assert len(seqs) == 8
    assert abs(sum(s.density for s in seqs) - 2 / math.pi) < 1e-13
    assert abs(density_identity(V, seqs) - 1) < 1e-13
    # every string solves the leading model asymptotically
    for s in seqs:
        vals = [abs(two_hump_model(rep, s.points([n])[0])) for n in (20, 40, 80)]
        assert vals[0] > vals[1] > vals[2]


def test_case3_planted_double_root():
    # C_B w^2 + C_A w - 1 = -(w - 1)^2 with w = z^4
    rep = regime_from_constants(0, 1, 2, 4, 8, 2.0, -1.0)
    seqs = predict_case3(rep)
    assert len(seqs) == 4 and all(s.multiplicity == 2 for s in seqs)


def test_case2_density_identity():
    V = make_two_hump(0, 2, 3, 0, 0, 6, 1, 1, 2, 1)
    assert abs(density_identity(V, predict_all(V)) - 1) < 1e-14


def test_points_on_curve():
    for s in [predict_vjk(0, 1, 1, 2, 2, -3)] + predict_all(
            make_two_hump(0, 2, 3, 0, 0, 6, 1, 1, 2, 1)):
        p = s.points(range(5, 30))
        assert np.allclose(p.imag, s.im_const - s.log_coeff * np.log(np.arange(5, 30) * s.spacing),
                           atol=1e-12)


def test_lri_bounds():
    V = make_vjk(0, 1, 0, 0, 1, 1)
    b = lri_bounds(V, make_step(0.3, 0.6))
    assert b.window == (0.25, 0.75) and b.window_ok
    assert not lri_bounds(V, make_step(0.1, 0.9)).window_ok
    with pytest.raises(ValueError):
        lri_bounds(V, make_step(-0.1, 0.5))


def test_match_trivial_cases():
    s = predict_vjk(0, 1, 0, 0, 1, 1)
    ns = range(10, 16)
    empty = ResonanceSet("x", None, [])
    t = match_resonances(empty, s, ns)
    assert len(t.unmatched_predicted) == 6
    exact = ResonanceSet("x", None, [Resonance(z) for z in s.points(ns)])
    t = match_resonances(exact, s, ns)
    assert not t.unmatched_predicted and max(r.abs_err for r in t.rows) == 0
