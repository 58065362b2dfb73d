import math

import numpy as np
import pytest

from oracles import square_well_first, square_well_roots
from reslab.asymptotics import match_resonances, predict_vjk
from reslab.counting import (CountParams, counting_report, log_strip_census, onset_radius,
                             resonance_free_probe, resonances_in, sasymp_probe, tile_strip)
from reslab.potential import make_vjk, zero_potential
from reslab.rootfind import LogStrip, Rectangle, winding_count
from reslab.scattering import WronskianEvaluator

WELL = make_vjk(0, 1, 0, 0, 1, 1)


def test_zero_potential_has_no_resonances():
    rs = resonances_in(zero_potential(), Rectangle(1, 30, -5, 0))
    assert rs.items == [] and rs.complete
    rep = counting_report(zero_potential(), [10, 20])
    assert rep.counts == [0, 0] and rep.ratio == [0.0, 0.0]
    assert log_strip_census(zero_potential(), 3.0, [20]).counts == [0]


def test_square_well_shallow_strip_matches_oracle():
    # the oracle puts every resonance below Im = -5 there
    rs = resonances_in(WELL, Rectangle(1, 60, -5, 0))
    ref = [z for z in square_well_roots(25) if 1 < z.real < 60 and z.imag > -5]
    assert rs.complete and len(rs.items) == len(ref) == 0


def test_square_well_rectangle_matches_oracle():
    rs = resonances_in(WELL, Rectangle(1, 60, -12, 0))
    ref = np.array([z for z in square_well_roots(25) if 1 < z.real < 60 and z.imag > -12])
    got = np.array(sorted((r.lam for r in rs.items), key=lambda z: z.real))
    ref = np.array(sorted(ref, key=lambda z: z.real))
    assert rs.complete and got.size == ref.size == 18
    assert np.max(np.abs(got - ref)) < 1e-8
    # completeness certificate: boundary winding equals located multiplicity
    assert rs.boundary_winding == sum(r.multiplicity for r in rs.items)


def test_boundary_through_zero_is_flagged():
    z = square_well_first(6)[-1]
    rs = resonances_in(WELL, Rectangle(z.real, z.real + 6, z.imag - 2, 0))
    assert not rs.complete


def test_counting_report_small():
    rep = counting_report(WELL, [20, 40])
    assert rep.predicted[1] == pytest.approx(2 * rep.predicted[0], rel=1e-15)
    assert rep.predicted[0] == pytest.approx(40 / math.pi)
    assert rep.counts == sorted(rep.counts)
    ref = square_well_first(40)
    assert rep.counts[0] == 2 * sum(1 for z in ref if abs(z) <= 20 and z.real > 1e-6) + sum(
        1 for z in ref if abs(z.real) <= 1e-6 and abs(z) <= 20)


def test_census_halves_and_shells():
    params = CountParams()
    full = log_strip_census(WELL, 3.0, [30, 60], params, use_symmetry=False)
    assert full.counts == full.meta["left"]
    inner = log_strip_census(WELL, 3.0, [30], params)
    shell = log_strip_census(WELL, 3.0, [60], params, r_min=30)
    assert inner.counts[0] + shell.counts[0] == full.counts[1]


def test_census_below_curve_is_empty():
    rep = log_strip_census(WELL, 1.0, [40, 80])
    assert rep.counts == [0, 0]


def test_census_matches_match_table():
    rep = log_strip_census(WELL, 3.0, [60])
    rs = resonances_in(WELL, LogStrip(0, 3.0, 0, 60, "right"))
    pts = [r for r in rs.items if r.lam.real > 1e-6]
    s = predict_vjk(0, 1, 0, 0, 1, 1)
    ns = [n for n in range(1, 40) if abs(s.points([n])[0]) < 59]
    table = match_resonances(pts, s, ns)
    matched = sum(1 for row in table.rows if row.comp is not None)
    assert rep.counts[0] == len(pts)
    # beyond the first few indices every prediction has its zero
    assert matched >= len(pts) - 2


def test_free_probe():
    V = make_vjk(0, 1, 5, 5, 1, 1)
    res = resonance_free_probe(V, 0.9, (20, 60))
    assert not res.zero_found and all(w == 0 for w in res.windings if w is not None)
    with pytest.raises(ValueError):
        resonance_free_probe(V, 8.0, (20, 60))
    assert not resonance_free_probe(zero_potential(), 0.5, (20, 40)).zero_found


def test_sasymp_probe():
    rows = sasymp_probe(WELL, [-math.pi / 4], [20, 40])
    assert len(rows) == 2 and rows[1].ratio > rows[0].ratio
    rows = sasymp_probe(zero_potential(), [-math.pi / 4], [20])
    assert rows[0].skipped


def test_tile_strip_covers_strip():
    strip = LogStrip(0, 3, 0, 40, "right")
    tiles = tile_strip(strip, math.pi)
    f = lambda z: np.ones_like(z)
    assert all(winding_count(f, t.boundary()) == 0 for t in tiles[:2])
    rng = np.random.default_rng(0)
    z = rng.uniform(0, 40, 400) - 1j * rng.uniform(0, 3 * math.log(41), 400)
    inside = z[strip.contains(z)]
    assert all(any(t.contains(w) for t in tiles) for w in inside)


def test_onset_radius():
    assert onset_radius([10, 20, 40], [0.5, 0.97, 1.01], 0.05) == 20
    assert onset_radius([10, 20], [0.5, 0.6], 0.05) is None


def test_evaluator_is_picklable():
    import pickle
    ev = pickle.loads(pickle.dumps(WronskianEvaluator(WELL)))
    assert abs(ev(np.array([1.0]))[0] - WronskianEvaluator(WELL)(np.array([1.0]))[0]) == 0
