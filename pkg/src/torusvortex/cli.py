"""Command-line entry point: ``torusvortex <subcommand> [options]``.

Every subcommand exits 0 on success; failures print a JSON object with
``error`` and ``message`` keys to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import csv
import glob
import json
import logging
import os
import sys

import numpy as np

from .config import RunConfig
from .errors import ConfigError, VortexLabError

log = logging.getLogger("torusvortex")


def _fmt(v) -> str:
    return repr(float(v))


def _write_csv(path, header, rows):
    fh = sys.stdout if path in (None, "-") else open(path, "w", newline="")
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    finally:
        if fh is not sys.stdout:
            fh.close()


def _emit_json(obj, path=None):
    text = json.dumps(obj, indent=2, default=_json_default) + "\n"
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def _config(args) -> RunConfig:
    if getattr(args, "config", None):
        return RunConfig.load(args.config)
    return RunConfig.from_dict({})


def _pair(text: str):
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'l,w', got {text!r}") from None
    return a, b


def _floats(text: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


# -- subcommands -------------------------------------------------------------------

def cmd_green_table(args):
    from .green import GreenEvaluator, TorusGeometry, green_table

    cfg = _config(args)
    geom = TorusGeometry(*args.geometry) if args.geometry else cfg.geometry
    m = args.grid or cfg.section("green").get("grid", 64)
    rows = green_table(GreenEvaluator(geom), int(m))
    _write_csv(args.out, ["x", "y", "F", "dF_dx", "dF_dy"], rows)


def cmd_gamma(args):
    from .core import estimate_gamma

    cfg = _config(args)
    core = cfg.section("core")
    ladder = args.ladder or core.get("ladder", [0.1, 0.05, 0.025])
    nodes = args.nodes or core.get("nodes", 1024)
    c, details = estimate_gamma(ladder, int(nodes))
    _emit_json({k: details[k] for k in ("gamma", "ladder", "I_values", "residuals")}, args.out)


def _trajectory_rows(traj):
    n = traj.positions.shape[1]
    header = ["t"] + [f"{c}{j + 1}" for j in range(n) for c in ("x", "y")] + ["qx", "qy", "WT", "xi", "min_dist"]
    rows = []
    for i, t in enumerate(traj.times):
        rows.append([t, *traj.positions[i].ravel(), *traj.q[i], traj.WT[i], traj.xi[i], traj.min_dist[i]])
    return header, rows


def _integrator_params(cfg, t_end_default=0.1):
    from .rdl import IntegratorParams

    return IntegratorParams(dt=float(cfg.get("dt", 1e-4)), t_end=float(cfg.get("t_end", t_end_default)),
                            stop_dist=float(cfg.get("stop_dist", 1e-3)),
                            record_every=int(cfg.get("record_every", 1)))


def cmd_rdl_run(args):
    from .rdl import collision_time, integrate
    from . import scenarios

    cfg = _config(args)
    a = cfg.configuration()
    t_default = scenarios.get(cfg.get("figure")).t_end if cfg.get("figure") else 0.1
    traj = integrate(a, cfg.Q0(a), _integrator_params(cfg, t_default))
    header, rows = _trajectory_rows(traj)
    _write_csv(args.out, header, rows)
    log.info("status=%s collision_time=%s drift=%s", traj.status, collision_time(traj), traj.integral_drift())


def _initial_field(cfg):
    from .compare import reference_profile
    from .core import tanh_profile
    from .field import build_initial_data

    a = cfg.configuration()
    nl = cfg.section("nlse")
    eps = float(nl.get("eps", 0.05))
    grid = nl.get("grid", 256)
    prof = tanh_profile if nl.get("profile", "optimal") == "tanh" else reference_profile()
    return a, build_initial_data(a, eps, grid if isinstance(grid, int) else tuple(grid), prof)


def cmd_field_build(args):
    from .field import field_summary, write_vxf
    from .renorm import summary

    cfg = _config(args)
    a, u0 = _initial_field(cfg)
    if args.out:
        write_vxf(args.out, u0)
    out = field_summary(u0)
    out["configuration"] = summary(a)
    _emit_json(out)


def cmd_field_stats(args):
    from .field import field_summary, read_vxf
    from .vortex import detect

    u = read_vxf(args.input)
    out = field_summary(u)
    out["vortices"] = [{"x": o.position[0], "y": o.position[1], "d": o.degree, "quality": o.quality}
                       for o in detect(u)]
    _emit_json(out, args.out)


def cmd_nlse_run(args):
    from .field import write_vxf
    from .nlse import BufferedSink, NlseParams, run

    cfg = _config(args)
    nl = cfg.section("nlse")
    a, u0 = _initial_field(cfg)
    eps = u0.eps
    dt = float(nl.get("dt", nl.get("dt_factor", 0.02) * eps * eps))
    params = NlseParams(eps, dt, float(nl.get("t_end", 0.01)), int(nl.get("snapshot_every", 50)), args.threads)
    out = args.out or "nlse-out"
    os.makedirs(out, exist_ok=True)
    rows = []
    counter = [0]

    def consume(fld, obs):
        write_vxf(os.path.join(out, f"snap_{counter[0]:06d}.vxf"), fld)
        counter[0] += 1
        rows.append([fld.time, obs[0], obs[1][0], obs[1][1], obs[2]])

    with BufferedSink(consume) as sink:
        report = run(u0, params, sink)
    _write_csv(os.path.join(out, "observables.csv"), ["t", "mass", "Qx", "Qy", "E"], rows)
    _emit_json(dict(report.as_dict(), snapshots=counter[0]), os.path.join(out, "report.json"))


def _paths_rows(paths):
    n = paths.positions.shape[1]
    header = ["t"] + [f"{c}{j + 1}" for j in range(n) for c in ("x", "y", "d")] + ["status"]
    rows = []
    for i, t in enumerate(paths.times):
        row = [t]
        for j in range(n):
            row += [paths.positions[i, j, 0], paths.positions[i, j, 1], int(paths.degrees[j])]
        row.append("tracked")
        rows.append(row)
    if paths.status == "lost":
        rows.append([paths.lost_time] + ["nan", "nan", ""] * n + ["lost"])
    return header, rows


def cmd_track(args):
    from .field import read_vxf
    from .renorm import VortexConfiguration
    from .vortex import default_max_jump, detect, track

    files = sorted(glob.glob(os.path.join(args.input, "*.vxf")))
    if not files:
        raise ConfigError(f"no .vxf files in {args.input}")
    fields = [read_vxf(f) for f in files]
    dets = [detect(u) for u in fields]
    cfg = _config(args)
    if args.config and (cfg.get("vortices") or cfg.get("figure")):
        a0 = cfg.configuration()
    else:
        a0 = VortexConfiguration.from_points([(o.position[0], o.position[1], o.degree) for o in dets[0]],
                                             fields[0].geometry)
    u = fields[0]
    dt_snap = fields[1].time - fields[0].time if len(fields) > 1 else 0.0
    jump = args.max_jump or cfg.section("track").get("max_jump") or default_max_jump(max(u.spacing), dt_snap)
    paths = track(dets, a0, float(jump), raise_on_loss=False)
    header, rows = _paths_rows(paths)
    _write_csv(args.out, header, rows)


def cmd_compare(args):
    from .compare import compare

    cfg = _config(args)
    a = cfg.configuration()
    c = cfg.section("compare")
    report = compare(a, c.get("eps_ladder", [0.1, 0.05, 0.025]), c.get("grids", [128, 256, 512]),
                     t_end=float(c.get("t_end", 0.01)), dt_factor=float(c.get("dt_factor", 0.02)),
                     snapshots=int(c.get("snapshots", 40)), reference=c.get("reference", "integrate"),
                     profile=cfg.section("nlse").get("profile", "optimal"), max_jump=c.get("max_jump"),
                     Q0=cfg.Q0(a), workers=args.threads)
    _emit_json(report.as_dict(), args.out)
    return 0 if report.decreasing else 3


def cmd_figures(args):
    from .rdl import IntegratorParams, collision_time, integrate
    from .renorm import Q0_of
    from .scenarios import SCENARIOS

    cfg = _config(args)
    out = args.out or "figures"
    os.makedirs(out, exist_ok=True)
    manifest = {"figures": []}
    for name, sc in SCENARIOS.items():
        a = sc.configuration()
        params = IntegratorParams(dt=float(cfg.get("dt", 1e-4)), t_end=sc.t_end,
                                  stop_dist=float(cfg.get("stop_dist", 1e-3)),
                                  record_every=int(cfg.get("record_every", 10)))
        traj = integrate(a, Q0_of(a), params)
        header, rows = _trajectory_rows(traj)
        fname = f"{name}.csv"
        _write_csv(os.path.join(out, fname), header, rows)
        manifest["figures"].append({
            "file": fname,
            "name": name,
            "figure": sc.figure,
            "label": sc.label,
            "Q0": Q0_of(a).tolist(),
            "markers": ["+" if d > 0 else "x" for d in a.degrees],
            "status": traj.status,
            "collision_time": collision_time(traj),
        })
    _emit_json(manifest, os.path.join(out, "manifest.json"))


def cmd_selftest(args):
    from .selftest import run_selftest

    results = run_selftest()
    _emit_json({"passed": all(r["passed"] for r in results.values()), "checks": results}, args.out)
    return 0 if all(r["passed"] for r in results.values()) else 1


COMMANDS = {
    "green-table": cmd_green_table,
    "gamma": cmd_gamma,
    "rdl-run": cmd_rdl_run,
    "field-build": cmd_field_build,
    "field-stats": cmd_field_stats,
    "nlse-run": cmd_nlse_run,
    "track": cmd_track,
    "compare": cmd_compare,
    "figures": cmd_figures,
    "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="TOML run configuration")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    common.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="FFT worker threads")
    common.add_argument("--verbose", "-v", action="count", default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="torusvortex", parents=[common],
                                description="Vortex dynamics of the NLSE on flat tori.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("green-table", parents=[common], help="tabulate F and grad F")
    s.add_argument("--geometry", type=_pair)
    s.add_argument("--grid", type=int)
    s = sub.add_parser("gamma", parents=[common], help="core constant by extrapolation")
    s.add_argument("--ladder", type=_floats)
    s.add_argument("--nodes", type=int)
    sub.add_parser("rdl-run", parents=[common], help="integrate the reduced law")
    sub.add_parser("field-build", parents=[common], help="build well-prepared initial data")
    s = sub.add_parser("field-stats", parents=[common], help="observables of a VXF1 dump")
    s.add_argument("--in", dest="input", required=True)
    sub.add_parser("nlse-run", parents=[common], help="time-splitting NLSE run")
    s = sub.add_parser("track", parents=[common], help="detect and track vortices in dumps")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--max-jump", type=float)
    sub.add_parser("compare", parents=[common], help="PDE paths against the reduced law")
    sub.add_parser("figures", parents=[common], help="trajectory data for the six captioned scenarios")
    sub.add_parser("selftest", parents=[common], help="fast consistency checks")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    for key, default in (("config", None), ("out", None), ("threads", 1), ("verbose", 0)):
        if not hasattr(args, key):
            setattr(args, key, default)
    logging.basicConfig(level=logging.DEBUG if args.verbose > 1 else logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        rc = COMMANDS[args.command](args)
    except (VortexLabError, ValueError, KeyError, OSError) as exc:
        sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")
        return 2
    return int(rc or 0)


if __name__ == "__main__":
    sys.exit(main())
