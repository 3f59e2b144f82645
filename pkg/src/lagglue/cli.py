"""Command line: ``lagglue <subcommand> [--config file.json] [--set key=value ...]``.

Every subcommand writes ``summary.json`` plus CSV tables to the output
directory and exits 0 when all of its tolerance gates pass, 1 when a gate
fails or a computation raises, and 2 when the configuration is invalid.
The output directory is ``output_dir`` from the config, else
``$LAGGLUE_OUTPUT_ROOT/<subcommand>`` (default root ``lagglue-runs``).
"""
import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import RunConfig
from .errors import ConfigError, LagGlueError
from .report import atomic_write, csv_text, svg_loglog, write_csv, write_json

OUTPUT_ROOT_ENV = "LAGGLUE_OUTPUT_ROOT"
COMMANDS = ("lawlor-solve", "lawlor-profile", "grim-intersect", "glue-build", "error-scan", "sigma-scan",
            "perturb", "quad-check", "export-mesh")


class Outcome:
    """Collected results of one subcommand."""

    def __init__(self):
        self.payload = {}
        self.tables = {}
        self.files = {}
        self.gates = {}

    def gate(self, name, passed, **detail):
        self.gates[name] = dict(passed=bool(passed), **detail)


def _configuration(cfg):
    from .grim import load_configuration
    return load_configuration({"m": cfg["m"], "motions": cfg["motions"]})


def _surface(cfg, t=None):
    from .glue import build_glued_surface
    gl, lw = cfg["gluing"], cfg["lawlor"]
    return build_glued_surface(_configuration(cfg), gl["t"] if t is None else t, tau=gl["tau"], eps=gl["eps"],
                               R_hat=gl["R_hat"], a_min=lw["a_min"],
                               profile_kwargs=dict(y_max=lw["y_max"], n=lw["n"]))


def _weights(cfg):
    from .weighted import WeightSpec
    w = cfg["weights"]
    return WeightSpec(w["k"], w["p"], w["beta"], w["gamma"])


def _reduced(cfg, surface):
    from .reduced import ReducedResolution, build_reduced_mesh
    ms = cfg["mesh"]
    res = ReducedResolution(ms["n_theta"], ms["per_unit"]).refined(ms["refine"])
    tr = cfg["truncation"]
    return build_reduced_mesh(surface, res, tr["R_prime"], tr["R_out"])


def _lawlor_params(cfg):
    from .lawlor import AngleData, LawlorParams, params_for_angles, params_from_angles
    lw = cfg["lawlor"]
    if lw["params"] is not None:
        return LawlorParams(tuple(lw["params"]))
    phi = lw["angles"] if lw["angles"] is not None else cfg["motions"][0]["phi"]
    if lw["A"] is not None:
        return params_from_angles(AngleData(tuple(phi), lw["A"]), tol=lw["tol"])
    return params_for_angles(tuple(phi), a_min=lw["a_min"], tol=lw["tol"])


def cmd_lawlor_solve(cfg, out):
    from .lawlor import angles_from_params
    lw = cfg["lawlor"]
    params = _lawlor_params(cfg)
    ad = angles_from_params(params, tol=min(lw["tol"], 1e-12))
    phi_t = lw["angles"] if lw["angles"] is not None else cfg["motions"][0]["phi"]
    err = float(np.max(np.abs(np.array(ad.phi) - np.array(phi_t)) / np.array(phi_t)))
    out.payload.update(a=list(params.a), phi=list(ad.phi), A=ad.A, sum_defect=ad.sum_defect, angle_rel_error=err)
    if lw["A"] is not None:
        out.payload["A_rel_error"] = abs(ad.A - lw["A"]) / lw["A"]
        out.gate("A_roundtrip", out.payload["A_rel_error"] < 1e-6, value=out.payload["A_rel_error"])
    out.gate("angle_roundtrip", err < 1e-6 or lw["params"] is not None, value=err)
    out.tables["params"] = [dict(j=j + 1, a=a, phi=p) for j, (a, p) in enumerate(zip(params.a, ad.phi))]


def cmd_lawlor_profile(cfg, out, outdir):
    from .lawlor import psi_profile
    lw = cfg["lawlor"]
    prof = psi_profile(_lawlor_params(cfg), y_max=lw["y_max"], n=lw["n"], tol=min(lw["tol"], 1e-12))
    path = Path(outdir) / "profile.npz"
    tmp = Path(outdir) / ".profile.tmp.npz"
    prof.save(tmp)
    os.replace(tmp, path)
    out.files["profile"] = str(path.name)
    m = prof.m
    ad = prof.angle_data
    out.payload.update(a=list(prof.params.a), phi=list(ad.phi), A=ad.A, y_max=float(prof.y_grid[-1]), n=prof.y_grid.size)
    out.gate("angle_sum", abs(sum(ad.phi) - math.pi) < 1e-9, value=abs(sum(ad.phi) - math.pi))
    rows = []
    for i in range(prof.y_grid.size):
        row = dict(y=float(prof.y_grid[i]))
        row.update({f"psi_{j + 1}": float(prof.values[i, j]) for j in range(m)})
        row["Psi_0"] = float(prof.values[i, m])
        rows.append(row)
    out.tables["profile"] = rows


def cmd_grim_intersect(cfg, out):
    from .grim import RigidMotionSpec, intersect
    rows = []
    recs = []
    for mo in cfg["motions"]:
        spec = RigidMotionSpec(tuple(mo["phi"]), float(mo.get("lambda", 0.0)))
        rec = intersect(spec)
        d = rec.to_dict()
        recs.append(d)
        dev = float(np.max(np.abs(np.sort(rec.cone_angles) - np.sort(spec.phi))))
        rows.append(dict(lam=spec.lam, s0=rec.s0, s1=rec.s1, angle_deviation=dev))
    out.payload["intersections"] = recs
    if len(recs) == 1:
        out.payload["s0"] = recs[0]["s0"]
    worst = max(r["angle_deviation"] for r in rows)
    out.gate("cone_angles_match_motion", worst < 1e-9, value=worst)
    out.tables["intersections"] = rows


def cmd_glue_build(cfg, out):
    from .scan import pointwise_profile
    S = _surface(cfg)
    prof = pointwise_profile(S)
    out.payload.update(t=S.t, boundaries=S.boundaries, neck_params=list(S.neck.params.a), vertex_re=S.vertex.real,
                       vertex_im=S.vertex.imag, wing_max=prof.wing_max, annulus_sup=prof.annulus_sup,
                       annulus_variation=prof.annulus_variation, neck_sup_over_t=prof.neck_sup_over_t)
    out.gate("wing_exact", prof.wing_max < 1e-10, value=prof.wing_max)
    out.gate("annulus_variation", prof.annulus_variation < 10, value=prof.annulus_variation)
    out.tables["annulus"] = [dict(r_lo=float(a), r_hi=float(b), sup_theta_over_r=float(s))
                             for a, b, s in zip(prof.annulus_bins[:-1], prof.annulus_bins[1:], prof.annulus_sup)]


def _resolution(cfg):
    from .mesh import Resolution
    ms = cfg["mesh"]
    res = Resolution(ms["n_polar"], 0, ms["panels_per_unit"], ms["order"])
    return res.refined(ms["refine"]) if ms["refine"] > 1 else res


def cmd_error_scan(cfg, out, outdir):
    from .scan import error_scan
    S = _surface(cfg)
    rep = error_scan(S, cfg["gluing"]["ts"], _weights(cfg), _resolution(cfg))
    out.payload.update(rep.summary())
    out.gate("slope_within_20pct", abs(rep.deviation) <= 0.2, value=rep.slope, predicted=rep.predicted)
    out.gate("wing_zero", rep.summary()["wing_norm_max"] < 1e-10, value=rep.summary()["wing_norm_max"])
    out.tables["scan"] = rep.rows()
    svg = svg_loglog({"norm": (rep.ts, rep.norms),
                      f"t^{rep.predicted:.2f}": (rep.ts, rep.norms[0] * (rep.ts / rep.ts[0]) ** rep.predicted)},
                     title=f"residual norm, slope {rep.slope:.3f}", ylabel="norm")
    atomic_write(Path(outdir) / "scan.svg", svg)
    out.files["plot"] = "scan.svg"


def cmd_sigma_scan(cfg, out, outdir):
    from .operator import sigma_min_scan
    S = _surface(cfg)
    meshes = [_reduced(cfg, S.with_t(t)) for t in cfg["gluing"]["sigma_ts"]]
    sc = sigma_min_scan(meshes, _weights(cfg))
    out.payload.update(sigma=sc.sigma, ts=sc.ts, ratio=sc.ratio)
    out.gate("sigma_positive", bool(np.all(sc.sigma > 0)), value=float(sc.sigma.min()))
    out.gate("ratio_below_10", sc.ratio < 10, value=sc.ratio)
    out.tables["sigma"] = sc.rows()
    atomic_write(Path(outdir) / "sigma.svg", svg_loglog({"sigma_min": (sc.ts, sc.sigma)}, title="sigma_min",
                                                        ylabel="sigma"))
    out.files["plot"] = "sigma.svg"


def cmd_perturb(cfg, out):
    from .solver import ball_exponent, calibrate_defect, picard_iterate
    sv = cfg["solver"]
    S = _surface(cfg)
    mesh = _reduced(cfg, S)
    hist = picard_iterate(mesh, _weights(cfg), sv["max_iter"], sv["tol"], linear=sv["linear"],
                          relinearize=sv["relinearize"], chart_factor=sv["chart_factor"])
    c = calibrate_defect(mesh)
    bound = [c * g**2 for g in hist.max_grad]
    alpha = ball_exponent(S.m, S.tau, cfg["weights"]["gamma"])
    out.payload.update(history=hist.rows(), reduction=hist.reduction, reason=hist.reason, defect_constant=c,
                       ball_alpha=alpha, ball_radius=S.t**alpha, unknowns=int(mesh.unknowns.size))
    out.gate("reduction_100", hist.reduction >= 100 or hist.reason == "floor", value=hist.reduction)
    out.gate("defect_bound", all(d <= b or d < 1e-12 for d, b in zip(hist.defect, bound)))
    out.tables["history"] = [dict(r, defect_bound=b) for r, b in zip(hist.rows(), bound)]


def cmd_quad_check(cfg, out):
    from .solver import quadratic_scaling_check
    S = _surface(cfg)
    meshes = [_reduced(cfg, S.with_t(t)) for t in cfg["gluing"]["quad_ts"]]
    rep = quadratic_scaling_check(meshes, cfg["solver"]["trials"], _weights(cfg), seed=cfg["seed"])
    out.payload.update(rep.to_dict())
    out.gate("max_over_median_below_50", bool(np.all(rep.max_over_median < 50)), value=float(rep.max_over_median.max()))
    out.gate("within_envelope", rep.within_envelope)
    out.gate("homogeneity_slope", bool(np.all(np.abs(rep.homogeneity_slopes - 2) <= 0.05)),
             value=rep.homogeneity_slopes)
    out.tables["ratios"] = [dict(t=float(t), trial=n, ratio=float(r), envelope=float(e))
                            for t, row, e in zip(rep.ts, rep.ratios, rep.envelope) for n, r in enumerate(row)]


def cmd_export_mesh(cfg, out, outdir):
    from .mesh import Resolution, mesh_csv, mesh_obj, sample_mesh
    ex = cfg["export"]
    S = _surface(cfg)
    ms = sample_mesh(S, Resolution(ex["n_polar"], 0, ex["panels_per_unit"]), with_gradient=False)
    m = S.m
    proj = np.zeros((3, 2 * m))
    for row, col in enumerate(ex["projection"]):
        proj[row, col] = 1.0
    obj = mesh_obj(ms.point, proj)
    atomic_write(Path(outdir) / "mesh.obj", obj)
    atomic_write(Path(outdir) / "mesh.csv", mesh_csv(ms))
    vertices = sum(1 for line in obj.splitlines() if line.startswith("v "))
    out.files.update(obj="mesh.obj", csv="mesh.csv")
    out.payload.update(nodes=ms.size, vertices=vertices, t=S.t)
    out.gate("vertex_count", vertices == ms.size, value=vertices)


HANDLERS = {
    "lawlor-solve": (cmd_lawlor_solve, False),
    "lawlor-profile": (cmd_lawlor_profile, True),
    "grim-intersect": (cmd_grim_intersect, False),
    "glue-build": (cmd_glue_build, False),
    "error-scan": (cmd_error_scan, True),
    "sigma-scan": (cmd_sigma_scan, True),
    "perturb": (cmd_perturb, False),
    "quad-check": (cmd_quad_check, False),
    "export-mesh": (cmd_export_mesh, True),
}


def build_parser():
    p = argparse.ArgumentParser(prog="lagglue", description="Desingularization of translating soliton configurations.")
    p.add_argument("--version", action="version", version=f"lagglue {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config key (dotted path, JSON value)")
    p.add_argument("--out", help="output directory (overrides output_dir)")
    p.add_argument("--seed", type=int, help="seed for randomized checks")
    p.add_argument("-t", type=float, help="gluing scale t")
    return p


def _output_dir(cfg, command, flag):
    if flag:
        return Path(flag)
    if cfg["output_dir"]:
        return Path(cfg["output_dir"])
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "lagglue-runs")) / command


def run_command(argv=None):
    """Run one subcommand; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if args.t is not None:
        overrides.append(f"gluing.t={args.t}")
    try:
        cfg = RunConfig.load(args.config, overrides).data
    except ConfigError as exc:
        print(json.dumps({"error": exc.to_dict()}), file=sys.stderr)
        return 2
    outdir = _output_dir(cfg, args.command, args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    handler, wants_dir = HANDLERS[args.command]
    out = Outcome()
    np.random.seed(cfg["seed"])
    start = time.perf_counter()
    status = 0
    try:
        handler(cfg, out, outdir) if wants_dir else handler(cfg, out)
    except LagGlueError as exc:
        out.payload["error"] = exc.to_dict()
        status = 1
    except ValueError as exc:
        out.payload["error"] = {"type": "ValueError", "message": str(exc)}
        status = 1
    if status == 0 and not all(g["passed"] for g in out.gates.values()):
        status = 1
    for name, rows in out.tables.items():
        if rows:
            write_csv(outdir / f"{name}.csv", rows)
            out.files[name] = f"{name}.csv"
    summary = dict(command=args.command, status=status, gates=out.gates, files=out.files, config=cfg,
                   result=out.payload)
    write_json(outdir / "summary.json", summary, cfg)
    line = dict(command=args.command, status=status, output=str(outdir),
                elapsed_s=round(time.perf_counter() - start, 3),
                gates={k: v["passed"] for k, v in out.gates.items()})
    print(json.dumps(line))
    if "error" in out.payload:
        print(json.dumps({"error": out.payload["error"]}), file=sys.stderr)
    return status


def main(argv=None):
    sys.exit(run_command(argv))
