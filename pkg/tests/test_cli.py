import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import square_well_first
from reslab.asymptotics import predict_all
from reslab.cli import (RECIPES, ConfigError, emit_plot_data, fmt, main, read_csv, validate_config,
                        write_csv)
from reslab.potential import make_two_hump

WELL_FIND = {"experiment": "find",
             "potential": {"vjk": {"a": 0, "b": 1, "j": 0, "k": 0, "C1": 1.0, "C2": 1.0}},
             "region": {"rectangle": {"re0": 1.0, "re1": 20.0, "im0": -8.0, "im1": 0.3}}}


def _write(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


def _run(tmp_path, cfg, name="out", *extra):
    cfg_path = _write(tmp_path / f"{name}.json", cfg)
    out = tmp_path / name
    return main(["run", "--config", cfg_path, "--out", str(out), "--workers", "1", *extra]), out


def test_find_square_well_matches_oracle(tmp_path):
    rc, out = _run(tmp_path, WELL_FIND)
    assert rc == 0
    _, rows = read_csv(out / "resonances.csv")
    got = np.sort_complex(np.array([complex(float(r[0]), float(r[1])) for r in rows]))
    ref = np.sort_complex(np.array(
        [z for z in square_well_first(20) if 1 < z.real < 20 and z.imag > -8]))
    assert got.size == ref.size > 0 and np.max(np.abs(got - ref)) < 1e-8
    summary = json.loads((out / "summary.json").read_text())
    assert summary["complete"] and summary["count"] == got.size


def test_rerun_is_byte_identical(tmp_path):
    _, a = _run(tmp_path, WELL_FIND, "a")
    _, b = _run(tmp_path, WELL_FIND, "b")
    files = sorted(p.name for p in a.iterdir())
    assert files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_malformed_json_exits_2_without_artifacts(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    out = tmp_path / "out"
    assert main(["run", "--config", str(bad), "--out", str(out)]) == 2
    assert not out.exists()


@pytest.mark.parametrize("mutate", [
    lambda c: c.update(unknown_key=1),
    lambda c: c.update(experiment="nope"),
    lambda c: c.pop("potential"),
    lambda c: c["region"]["rectangle"].update(re0=30.0),
])
def test_schema_errors_exit_2(tmp_path, mutate):
    cfg = json.loads(json.dumps(WELL_FIND))
    mutate(cfg)
    rc, out = _run(tmp_path, cfg)
    assert rc == 2 and not out.exists()
    assert main(["validate", "--config", str(tmp_path / "out.json")]) == 2


def test_numerical_failure_exits_3_with_summary(tmp_path):
    cfg = json.loads(json.dumps(WELL_FIND))
    cfg["region"]["rectangle"]["im0"] = -40.0
    cfg["engine"] = {"m_cap": 2.0}
    rc, out = _run(tmp_path, cfg)
    assert rc == 3
    assert "error" in json.loads((out / "summary.json").read_text())


@pytest.mark.parametrize("name,case", [("regime_case1", 1), ("regime_case2", 2),
                                       ("regime_case3", 3)])
def test_regime_case_ids(tmp_path, name, case):
    rc, out = _run(tmp_path, RECIPES[name])
    assert rc == 0
    assert json.loads((out / "summary.json").read_text())["case_id"] == case


def test_case2_curve_files_satisfy_curve(tmp_path):
    rc, out = _run(tmp_path, RECIPES["regime_case2"])
    assert rc == 0
    curves = sorted(out.glob("curve_*.dat"))
    assert [p.name for p in curves] == ["curve_case2_a_right.dat", "curve_case2_b_right.dat"]
    seqs = {s.label: s for s in predict_all(make_two_hump(0, 2, 3, 0, 0, 6, 1, 1, 2, 1))}
    for p in curves:
        data = np.loadtxt(p)
        s = seqs[p.name[len("curve_"):-len("_right.dat")]]
        assert np.array_equal(data[:, 1], s.curve(data[:, 0]))


def test_case2_match_emits_two_curves_and_one_scatter(tmp_path):
    cfg = dict(RECIPES["c07_two_hump_case2"], n_range=[4, 5])
    rc, out = _run(tmp_path, cfg)
    assert rc in (0, 3)
    assert len(list(out.glob("curve_*.dat"))) == 2
    assert [p.name for p in out.glob("scatter_*.dat")] == ["scatter_resonances.dat"]


def test_empty_scatter_is_header_only(tmp_path):
    (path,) = emit_plot_data(tmp_path, {"none": np.array([], dtype=complex)})
    assert path.read_text() == "# re im\n"


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=8))
def test_csv_round_trip_is_exact(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    write_csv(path, ["v", "n"], [(v, i) for i, v in enumerate(values)])
    _, rows = read_csv(path)
    assert [float(r[0]) for r in rows] == values
    assert [int(r[1]) for r in rows] == list(range(len(values)))


def test_fmt_canonical():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(True) == "1" and fmt(None) == "" and fmt(3) == "3"
    assert float(fmt(math.pi)) == math.pi


def test_recipes_written_and_valid(tmp_path):
    assert main(["recipes", "--out", str(tmp_path)]) == 0
    for name in RECIPES:
        cfg = json.loads((tmp_path / f"{name}.json").read_text())
        validate_config(cfg)
        assert main(["validate", "--config", str(tmp_path / f"{name}.json")]) == 0
    cmds = (tmp_path / "commands.txt").read_text().splitlines()
    assert len(cmds) == len(RECIPES) + 2


def test_validate_rejects_bad_config():
    with pytest.raises(ConfigError):
        validate_config({"experiment": "find"})
