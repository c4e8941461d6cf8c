"""Configuration parsing, the subcommands, and the comparison harness."""
import csv
import io
import json
import math
import os
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path

import numpy as np
import pytest

from torusvortex import scenarios
from torusvortex.cli import main
from torusvortex.compare import compare
from torusvortex.config import RunConfig
from torusvortex.errors import ConfigError
from torusvortex.rdl import IntegratorParams, integrate

GOLDEN = Path(__file__).parent / "data"


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        rc = main(list(argv))
    return rc, out.getvalue(), err.getvalue()


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


DIPOLE_TOML = """
scenario = "rdl-run"
vortices = [[0.5, 0.4, 1], [0.5, 0.6, -1]]
Q0 = "auto"
dt = 1e-4
t_end = 0.01
record_every = 10

[geometry]
l = 1.0
w = 1.0

[nlse]
eps = 0.1
grid = 64
t_end = 0.002
snapshot_every = 25
"""


# -- configuration --------------------------------------------------------------

def test_config_round_trip(tmp_path):
    cfg = RunConfig.load(write(tmp_path, "run.toml", DIPOLE_TOML))
    a = cfg.configuration()
    assert a.N == 1 and cfg.get("dt") == 1e-4
    assert np.allclose(cfg.Q0(a), [-0.4 * math.pi, 0.0])
    assert cfg.section("nlse")["grid"] == 64


@pytest.mark.parametrize("data, match", [
    ({"vortex": []}, "unknown key"),
    ({"nlse": {"epsilon": 0.1}}, "unknown key nlse.epsilon"),
    ({"dt": "fast"}, "wrong type"),
    ({"dt": -1.0}, "positive"),
    ({"scenario": "plot"}, "scenario"),
    ({"figure": "fig9"}, "unknown scenario"),
    ({"vortices": [[0.1, 0.1, 1]]}, "invalid vortices"),
    ({"vortices": [[0.1, 0.1]]}, "invalid vortices"),
    ({"vortices": [[0.1, 0.1, 1], [0.2, 0.2, -1]], "figure": "fig3_left"}, "either"),
    ({"Q0": "zero"}, "Q0"),
    ({"Q0": [1.0]}, "pair"),
    ({"compare": {"reference": "exact"}}, "reference"),
    ({"nlse": {"profile": "gauss"}}, "profile"),
    ({"geometry": {"l": -1.0}}, "positive"),
])
def test_config_rejections(data, match):
    with pytest.raises(ConfigError, match=match):
        cfg = RunConfig.from_dict(data)
        cfg.geometry


def test_config_explicit_Q0_and_figure():
    cfg = RunConfig.from_dict({"figure": "fig4_right", "Q0": [0, 1]})
    assert cfg.Q0(cfg.configuration()) == [0.0, 1.0]
    assert cfg.configuration().N == 2


def test_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.load(write(tmp_path, "bad.toml", "dt = = 1"))


# -- subcommands ------------------------------------------------------------------

def test_green_table(tmp_path):
    out = tmp_path / "g.csv"
    rc, _, _ = run_cli("green-table", "--geometry", "2,1", "--grid", "8", "--out", str(out))
    rows = read_csv(out)
    assert rc == 0 and rows[0] == ["x", "y", "F", "dF_dx", "dF_dy"] and len(rows) == 64
    assert out.read_text().endswith("\n") and float(rows[1][1]) == 0.125


def test_gamma_json(tmp_path):
    rc, text, _ = run_cli("gamma", "--ladder", "0.1,0.05,0.025", "--nodes", "512")
    d = json.loads(text)
    assert rc == 0 and set(d) == {"gamma", "ladder", "I_values", "residuals"}
    assert d["gamma"] == pytest.approx(1.19656, abs=1e-4)


def test_rdl_run_csv(tmp_path):
    cfg = write(tmp_path, "run.toml", DIPOLE_TOML)
    out = tmp_path / "traj.csv"
    rc, _, _ = run_cli("rdl-run", "--config", cfg, "--out", str(out))
    rows = read_csv(out)
    assert rc == 0
    assert rows[0] == ["t", "x1", "y1", "x2", "y2", "qx", "qy", "WT", "xi", "min_dist"]
    assert len(rows) == 1 + 11 and float(rows[-1][0]) == pytest.approx(0.01)


def test_errors_are_json(tmp_path):
    rc, _, err = run_cli("rdl-run", "--config", write(tmp_path, "x.toml", "colour = 'red'\n"))
    assert rc == 2 and json.loads(err)["error"] == "ConfigError"
    rc, _, err = run_cli("rdl-run")
    assert rc == 2 and "vortices" in json.loads(err)["message"]
    rc, _, err = run_cli("field-stats", "--in", str(tmp_path / "missing.vxf"))
    assert rc == 2 and json.loads(err)["error"] == "FileNotFoundError"


def test_field_build_stats_nlse_track(tmp_path):
    cfg = write(tmp_path, "run.toml", DIPOLE_TOML)
    vxf = tmp_path / "u0.vxf"
    rc, text, _ = run_cli("field-build", "--config", cfg, "--out", str(vxf))
    built = json.loads(text)
    assert rc == 0 and built["grid"] == [64, 64] and "W_T" in built["configuration"]
    rc, text, _ = run_cli("field-stats", "--in", str(vxf))
    stats = json.loads(text)
    assert rc == 0 and stats["mass"] == pytest.approx(built["mass"], rel=1e-14)
    assert sorted(v["d"] for v in stats["vortices"]) == [-1, 1]

    run_dir = tmp_path / "run"
    rc, _, _ = run_cli("nlse-run", "--config", cfg, "--out", str(run_dir), "--threads", "2")
    assert rc == 0
    snaps = sorted(p.name for p in run_dir.glob("snap_*.vxf"))
    rows = read_csv(run_dir / "observables.csv")
    report = json.loads((run_dir / "report.json").read_text())
    assert rows[0] == ["t", "mass", "Qx", "Qy", "E"] and len(rows) - 1 == len(snaps) == report["snapshots"]
    assert report["mass_drift"] <= 1e-12

    paths = tmp_path / "paths.csv"
    rc, _, _ = run_cli("track", "--in", str(run_dir), "--config", cfg, "--out", str(paths))
    rows = read_csv(paths)
    assert rc == 0 and rows[0] == ["t", "x1", "y1", "d1", "x2", "y2", "d2", "status"]
    assert all(r[-1] == "tracked" for r in rows[1:]) and len(rows) - 1 == len(snaps)
    # with no configuration the first snapshot seeds the tracker
    rc, _, _ = run_cli("track", "--in", str(run_dir), "--out", str(paths))
    assert rc == 0 and len(read_csv(paths)) == len(rows)


def test_compare_subcommand(tmp_path):
    cfg = write(tmp_path, "cmp.toml", """
figure = "fig3_left"
[compare]
eps_ladder = [0.1, 0.05]
grids = [64, 128]
t_end = 0.002
snapshots = 4
reference = "analytic"
""")
    rc, text, _ = run_cli("compare", "--config", cfg)
    d = json.loads(text)
    assert rc in (0, 3) and (rc == 0) == d["decreasing"]
    assert len(d["entries"]) == 2 and d["p"] is not None


def _figures(tmp_path, name):
    out = tmp_path / name
    rc, _, _ = run_cli("figures", "--out", str(out))
    assert rc == 0
    return out


def test_figures_manifest_and_determinism(tmp_path):
    a = _figures(tmp_path, "f1")
    b = _figures(tmp_path, "f2")
    man = json.loads((a / "manifest.json").read_text())
    names = [f["name"] for f in man["figures"]]
    assert names == list(scenarios.SCENARIOS)
    for f in man["figures"]:
        assert (a / f["file"]).read_bytes() == (b / f["file"]).read_bytes()
        assert set(f["markers"]) == {"+", "x"} and f["status"] == "completed"
    assert (a / "manifest.json").read_bytes() == (b / "manifest.json").read_bytes()

    # dipole scenarios trace straight lines
    for name in ("fig3_left", "fig3_middle", "fig3_right"):
        rows = np.array(read_csv(a / f"{name}.csv")[1:], dtype=float)
        t, xy = rows[:, 0], rows[:, 1:5]
        v = (xy[-1] - xy[0]) / t[-1]
        assert np.max(np.abs(xy - (xy[0] + np.outer(t, v)))) <= 1e-8

    # derived golden: full Figure 4 left path
    got = np.array(read_csv(a / "fig4_left.csv")[1:], dtype=float)
    ref = np.loadtxt(GOLDEN / "fig4_left_golden.csv", delimiter=",", skiprows=1)
    assert got.shape == ref.shape and np.max(np.abs(got - ref)) <= 1e-10


def test_fig4_left_first_step_keeps_alpha():
    # alpha starts at rest, so the first step moves it only at second order
    a = scenarios.get("fig4_left").configuration()
    moves = []
    for dt in (1e-4, 5e-5):
        tr = integrate(a, params=IntegratorParams(dt=dt, t_end=dt))
        moves.append(tr.positions[1, 0] - a.positions[0])
    (da1, db1), (da2, db2) = moves
    assert abs(da1) <= 1e-2 * abs(db1)
    assert 3.5 <= da1 / da2 <= 4.5 and 1.9 <= db1 / db2 <= 2.1


def test_selftest_passes():
    rc, text, _ = run_cli("selftest")
    d = json.loads(text)
    assert rc == 0 and d["passed"] and len(d["checks"]) >= 10


def test_global_flags_anywhere(tmp_path):
    out = tmp_path / "g.csv"
    rc, _, _ = run_cli("--verbose", "green-table", "--grid", "4", "--out", str(out), "--threads", "1")
    assert rc == 0 and len(read_csv(out)) == 16


# -- comparison harness -------------------------------------------------------------

def test_compare_report_shapes_agree_between_references():
    a = scenarios.get("fig3_left").configuration()
    kw = dict(eps_ladder=[0.1], grids=[64], t_end=0.002, snapshots=4)
    r1 = compare(a, reference="integrate", **kw)
    r2 = compare(a, reference="analytic", **kw)
    d1, d2 = r1.as_dict(), r2.as_dict()
    assert set(d1) == set(d2) and len(d1["entries"]) == len(d2["entries"])
    assert r1.errors[0] == pytest.approx(r2.errors[0], abs=1e-8)


def test_compare_vanishing_momentum_scenario():
    a = scenarios.get("fig4_left").configuration()
    rep = compare(a, [0.1], [64], t_end=0.002, snapshots=4)
    e = rep.entries[0]
    assert e.status == "tracked" and e.err < 0.05 and rep.p is None
    with pytest.raises(ValueError):
        compare(a, [0.1], [64], reference="analytic")
    with pytest.raises(ValueError):
        compare(a, [0.1, 0.05], [64])
