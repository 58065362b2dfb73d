import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from reslab.potential import (PotentialError, PowerLawPiece, combine, evaluate, fourier_hat,
                              from_json, from_pieces, make_bump, make_step, make_stepin,
                              make_two_hump, make_vjk, sing_width, support_data, to_json,
                              translate, two_hump_constants, zero_potential)


def vjk_formula(x, a, b, j, k, C1, C2, s=0):
    t = (x - a) / (b - a)
    u = (b - x) / (b - a)
    return C1 * (x - a) ** j * u ** (k + 1 + s) + C2 * (b - x) ** k * t ** (j + 1 + s)


def test_square_well_blend_is_constant():
    V = make_vjk(0, 1, 0, 0, 1, 1)
    x = np.linspace(0.01, 0.99, 50)
    assert np.allclose(evaluate(V, x), 1.0, atol=1e-14)
    edges = [(e.point, e.order, e.coeff) for e in V.edges]
    assert edges == [(0.0, 0, 1), (1.0, 0, 1)]


def test_vjk_edge_limits_sampled():
    V = make_vjk(0, 1, 1, 2, 2, -3)
    for m in range(3, 7):
        h = 10.0 ** -m
        assert abs(evaluate(V, h) / h - 2) < 10 * h
        assert abs(evaluate(V, 1 - h) / h ** 2 + 3) < 10 * h


def test_vjk_edge_limits_richardson():
    V = make_vjk(0, 1, 1, 2, 2, -3)
    hs = 2.0 ** -np.arange(10, 31)
    left = np.array([evaluate(V, h) / (2 * h) for h in hs]).real
    right = np.array([evaluate(V, 1 - h) / (-3 * h ** 2) for h in hs]).real
    for seq in (left, right):
        # ratios are 1 + O(h); one Richardson step removes the linear term
        rich = 2 * seq[1:] - seq[:-1]
        assert abs(rich[-1] - 1) < 1e-6


def test_vjk_rejects_bad_input():
    with pytest.raises(PotentialError):
        make_vjk(1, 0, 0, 0, 1, 1)
    with pytest.raises(PotentialError):
        make_vjk(0, 1, 0, 0, 0, 1)


def test_vjk_value_closed_form():
    V = make_vjk(0, 1, 1, 2, 2, -3)
    assert abs(evaluate(V, 0.5) - vjk_formula(0.5, 0, 1, 1, 2, 2, -3)) < 1e-14


@pytest.mark.parametrize("args", [(0, 1, 1, 2, 2, -3, 0), (-0.5, 2.0, 3, 1, 1 + 1j, 0.5, 2),
                                  (0, 1, 0, 0, 1, 1, 0)])
def test_vjk_matches_formula_random_points(args):
    rng = np.random.default_rng(1)
    a, b = args[:2]
    V = make_vjk(*args)
    x = rng.uniform(a, b, 1000)
    ref = vjk_formula(x, *args)
    assert np.max(np.abs(evaluate(V, x) - ref) / np.maximum(1, np.abs(ref))) < 1e-13


def test_stepin_beta_integral():
    V = make_stepin(0, 1, -0.5, -0.5, [1.0])
    assert abs(fourier_hat(V, 0.0) - math.pi) < 1e-9
    V2 = make_stepin(0, 1, -0.5, -0.5, [1.0, 1.0])
    coeffs = {e.side: e.coeff for e in V2.edges}
    assert coeffs == {"left": 1.0, "right": 2.0}
    with pytest.raises(PotentialError):
        make_stepin(0, 1, -1.0, -0.5, [1.0])
    with pytest.raises(PotentialError):
        make_stepin(0, 1, -0.5, -0.5, [1.0, -1.0])


def test_stepin_matches_formula():
    V = make_stepin(0, 2, -0.3, -0.7, [1.0, 0.5])
    x = np.linspace(0.1, 1.9, 11)
    ref = x ** -0.3 * (2 - x) ** -0.7 * (1 + 0.5 * x)
    assert np.allclose(evaluate(V, x), ref, rtol=1e-13)


def test_two_hump_constants():
    c = two_hump_constants(0, 1, 3, 0, 0, 0, 1, 1, 2, 1)
    assert abs(c["C_A"] + 1 / 16) < 1e-15
    # the direct substitution C_B = 0! 0! C1 C4 / 2^(j+l+4) = 1/16
    assert abs(c["C_B"] - 1 / 16) < 1e-15
    with pytest.raises(PotentialError):
        make_two_hump(0, 1, 3, 0, 0, 0, 1, 1, 1, 1)
    with pytest.raises(PotentialError):
        make_two_hump(1, 0, 3, 0, 0, 0, 1, 1, 2, 1)


def test_two_hump_support():
    V = make_two_hump(0, 1, 3, 0, 0, 0, 1, 1, 2, 1)
    ch, edges, sing = support_data(V)
    assert ch == (0.0, 3.0) and sing == (0.0, 3.0)
    assert sorted((e.point, e.side) for e in edges) == [(0.0, "left"), (1.0, "left"),
                                                        (1.0, "right"), (3.0, "right")]


def test_evaluate_outside_support():
    V = make_vjk(0, 1, 1, 2, 2, -3)
    assert evaluate(V, -0.1) == 0 and evaluate(V, 1.5) == 0
    assert evaluate(make_vjk(0, 1, 0, 0, 1, 1), 0.5) == 1


def test_square_well_fourier():
    V = make_vjk(0, 1, 0, 0, 1, 1)
    z = np.array([0.3, 5 - 2j, 40 + 0.5j])
    assert np.allclose(fourier_hat(V, z), (1 - np.exp(-1j * z)) / (1j * z), rtol=1e-13)
    assert abs(fourier_hat(V, 0.0) - 1) < 1e-15


def test_smooth_piece_excluded_from_sing_supp():
    V = combine(make_vjk(0, 1, 0, 0, 1, 1), make_bump(-1, 2, 1.0, 12))
    ch, _, sing = support_data(V)
    assert ch == (-1.0, 2.0) and sing == (0.0, 1.0)
    assert sing_width(V) == 1.0
    assert sing_width(zero_potential()) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(-2, 2))
def test_fourier_linearity_and_translation(zr, zi, x0):
    z = complex(zr, zi)
    V = make_vjk(0, 1, 1, 2, 2, -3)
    W = make_stepin(0.2, 0.9, -0.5, -0.25, [1.0, 2.0])
    s = fourier_hat(V, z) + fourier_hat(W, z)
    assert abs(fourier_hat(combine(V, W), z) - s) <= 1e-12 * max(1, abs(s))
    lhs = fourier_hat(translate(V, x0), z)
    rhs = np.exp(-1j * z * x0) * fourier_hat(V, z)
    assert abs(lhs - rhs) <= 1e-12 * max(1, abs(rhs))


def test_merge_tolerance():
    V = from_pieces([PowerLawPiece(0, 1), PowerLawPiece(1 + 1e-13, 2)])
    assert len(V.breakpoints) == 3


def test_json_round_trip():
    V = combine(make_vjk(0, 1, 1, 2, 2 + 1j, -3), make_step(0.2, 0.4, 0.5))
    V2 = from_json(to_json(V))
    x = np.linspace(-0.5, 1.5, 41)
    assert np.array_equal(evaluate(V, x), evaluate(V2, x))
    assert from_json({"vjk": {"a": 0, "b": 1, "j": 0, "k": 0, "C1": 1, "C2": 1}}).ch_supp == (0, 1)
