"""coniso: config-driven experiments over the weighted quotient toolkit.

Commands
--------
check-weight   concavity gate for the configured weight (always exits 0)
measure        weighted perimeter, volume and quotient of one domain
optimize       multi-start shape search against the cap ball
scan-angle     dichotomy scan over sector opening angles
verify-abp     discrete certificate for the proof chain on one domain
repro-all      fixed reproducibility suite, one report file per step

Exit codes: 0 success, 1 usage or config error, 2 an inequality or
certificate violation was detected.  A violation under a weight that
fails the concavity gate is the expected finding and is labeled
``violation_expected`` in the report; under a gate-passing weight it
signals a bug.  Reports are byte-deterministic for a fixed config and
seed.  When a JSON report path is configured, figures render next to it
unless ``[output] figures = false``.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import abp, config, figures, measure, optimize, report, weight
from .config import ConfigError
from .cone import cap_quadrature

_STAR_KINDS = ("ball", "modes", "profile-file")


def _weight_echo(w):
    """Echo the weight in config vocabulary."""
    if w.kind == weight.MONOMIAL:
        return {"kind": "monomial", "A": list(w.exponents)}
    if w.kind == weight.RADIAL_POWER:
        return {"kind": "radial", "alpha": w.power}
    return {"kind": "constant"}


def _gate(w, cn, n_pairs=20_000):
    """Concavity gate reused for expected-violation labeling."""
    return weight.check_concavity(w, cn, n_pairs=n_pairs, seed=0)


def _outputs(cfg, data, figure_jobs=()):
    """Write JSON (file or stdout) and render figures beside it."""
    json_path = cfg.output.get("json")
    if json_path:
        report.write_json(json_path, data)
        if cfg.output.get("figures", True):
            stem, _ = os.path.splitext(json_path)
            for suffix, render in figure_jobs:
                render(f"{stem}_{suffix}.png")
    else:
        sys.stdout.write(report.to_json(data))


def _cmd_check_weight(cfg, args):
    cn = cfg.build_cone()
    w = cfg.build_weight()
    rep = weight.check_concavity(w, cn, n_pairs=100_000, seed=0)
    data = {
        "weight": _weight_echo(w),
        "degree": rep.degree,
        "compatible": weight.compatible(cn, w),
        "concavity": "pass" if rep.passed else "fail",
        "n_pairs": rep.n_pairs,
        "min_gap": rep.min_gap,
        "witness": None
        if rep.witness is None
        else {"x": list(rep.witness[0]), "p": list(rep.witness[1])},
    }
    _outputs(cfg, data)
    return 0


def _cmd_measure(cfg, args):
    cn = cfg.build_cone()
    w = cfg.build_weight()
    if cfg.domain.get("kind") not in _STAR_KINDS:
        raise ConfigError("[domain] measure needs a star kind (ball, modes, profile-file)")
    dom = cfg.build_domain(cap_quadrature(cn, cfg.resolution))
    rep = measure.quotient(dom, w)
    tol = cfg.tol("ball_tol", 1e-6)
    violation = rep.deficit < -tol
    data = {
        "P": rep.P,
        "m": rep.m,
        "D": rep.D,
        "Q": rep.Q,
        "Q_ball": rep.Q_ball,
        "deficit": rep.deficit,
        "N": rep.resolution,
        "violation": violation,
        "violation_expected": bool(violation and not _gate(w, cn).passed),
    }
    csv_path = getattr(args, "csv", None) or cfg.output.get("csv")
    if csv_path:
        report.write_csv(
            csv_path,
            ["N", "P", "m", "Q", "deficit"],
            [(rep.resolution, rep.P, rep.m, rep.Q, rep.deficit)],
            append=True,
        )
    _outputs(cfg, data, [("domain", lambda p: figures.domain_figure(dom, w, p))])
    return 2 if violation else 0


def _cmd_optimize(cfg, args):
    cn = cfg.build_cone()
    w = cfg.build_weight()
    opt = cfg.optimize
    method = opt.get("method", optimize.NELDER_MEAD)
    if method not in (optimize.NELDER_MEAD, optimize.FD_GRADIENT):
        raise ConfigError(f"[optimize] unknown method {method!r}")
    res = optimize.minimize_quotient(
        cn,
        w,
        n=cfg.resolution,
        modes=opt.get("modes", 8),
        starts=opt.get("starts", 20),
        seed=opt.get("seed", 0),
        method=method,
        max_iter=opt.get("max_iter", 3000),
        ftol_rel=cfg.tol("ftol_rel", 1e-12),
        init_amplitude=opt.get("init_amplitude", 0.25),
        tie_rel=cfg.tol("tie_rel", 1e-9),
    )
    tol = cfg.tol("ball_tol", 1e-6)
    violation = res.deficit < -tol
    data = {
        "Q": res.best_Q,
        "Q_ball": res.Q_ball,
        "deficit": res.deficit,
        "coeffs": list(res.coeffs),
        "n_eval": res.n_eval,
        "starts": res.starts,
        "seed": res.seed,
        "method": res.method,
        "remeasured": {
            "P": res.report.P,
            "m": res.report.m,
            "Q": res.report.Q,
            "deficit": res.report.deficit,
            "N": res.report.resolution,
        },
        "violation": violation,
        "violation_expected": bool(violation and not _gate(w, cn).passed),
    }
    dump = cfg.output.get("dump_field")
    if dump:
        # one radius per line, grid order: re-readable as kind=profile-file
        with open(dump, "w", encoding="utf-8", newline="\n") as fh:
            for r in res.domain.radii:
                fh.write(report.fmt_float(r) + "\n")
    _outputs(
        cfg,
        data,
        [
            ("domain", lambda p: figures.domain_figure(res.domain, w, p)),
            ("history", lambda p: figures.history_figure(res.history, res.Q_ball, p)),
        ],
    )
    return 2 if violation else 0


def _cmd_scan_angle(cfg, args):
    if args.alpha > 0:
        w = weight.radial_power(args.alpha, dim=2)
    else:
        w = weight.constant(2)
    betas = np.linspace(args.beta_min, args.beta_max, args.steps)
    opt = cfg.optimize
    scan = optimize.scan_critical_angle(
        w,
        betas=betas,
        n=cfg.grid.get("N", 96),
        modes=opt.get("modes", 6),
        starts=opt.get("starts", 10),
        seed=opt.get("seed", 0),
        max_iter=opt.get("max_iter", 1500),
        ball_tol=cfg.tol("ball_tol", 1e-6),
        margin=cfg.tol("margin", 1e-4),
        bracket_target=cfg.tol("bracket_target", 1e-2),
    )
    classes = [
        o if o == c else f"{o}|{c}" for o, c in zip(scan.opt_class, scan.c2_class)
    ]
    beaten = optimize.BALL_BEATEN in scan.opt_class
    data = {
        "alpha": args.alpha,
        "degree": scan.degree,
        "betas": list(scan.betas),
        "deficits": list(scan.deficits),
        "c2_min": list(scan.c2_min),
        "opt_class": scan.opt_class,
        "c2_class": scan.c2_class,
        "class": classes,
        "bracket": None if scan.bracket is None else list(scan.bracket),
        "bracket_width": scan.bracket_width,
        "agreement_ok": scan.agreement_ok,
        "disagreements": scan.disagreements,
        "competitor": None
        if scan.competitor_beta is None
        else {
            "beta": scan.competitor_beta,
            "deficit": scan.competitor_deficit,
            "deficit_remeasured": scan.competitor_remeasured,
            "coeffs": list(scan.competitor_coeffs),
        },
        "violation": beaten,
        "violation_expected": bool(beaten and w.degree > 0),
    }
    csv_path = cfg.output.get("csv")
    if csv_path:
        report.write_csv(
            csv_path,
            ["beta", "deficit_opt", "c2_min", "class"],
            list(zip(scan.betas, scan.deficits, scan.c2_min, classes)),
        )
    _outputs(cfg, data, [("scan", lambda p: figures.scan_figure(scan, p))])
    return 2 if beaten else 0


def _cmd_verify_abp(cfg, args):
    cn = cfg.build_cone()
    w = cfg.build_weight()
    kind = cfg.domain.get("kind")
    n = cfg.resolution
    if kind in _STAR_KINDS:
        dom = cfg.build_domain(cap_quadrature(cn, n))
        ambient = None
    else:
        dom = cfg.build_domain(None)
        ambient = cn
    cert, sol = abp.certify(
        dom,
        w,
        cone=ambient,
        n_theta=n,
        c_chain=cfg.tol("c_chain", abp.CHAIN_C),
        c_contact=cfg.tol("c_contact", abp.CONTACT_C),
        eta=cfg.tol("eta", abp.ETA),
        kappa=cfg.tol("kappa", abp.KAPPA),
        b_tol=cfg.tol("b_tol", 0.01),
    )
    data = {
        "b": cert.b_const,
        "b_consistency": cert.b_consistency,
        "contact_fraction": cert.contact_fraction,
        "coverage_defect": cert.coverage_defect,
        "pointwise_margin": cert.pointwise_margin_min,
        "integral_slack": cert.integral_slack,
        "pass": cert.passed,
        "broken": cert.broken,
        "links": cert.links,
        "quotient_gap": cert.quotient_gap,
        "tau_chain": cert.tau_chain,
        "h": cert.h,
        "N": n,
        "violation_expected": bool(not cert.passed and not _gate(w, cn).passed),
    }
    dump = getattr(args, "dump_field", None) or cfg.output.get("dump_field")
    if dump:
        rows = [
            (p[0], p[1], u, g[0], g[1])
            for p, u, g in zip(sol.points, sol.u, sol.grad)
        ]
        report.write_csv(dump, ["x", "y", "u", "ux", "uy"], rows)
    _outputs(cfg, data, [("field", lambda p: figures.field_figure(sol, p))])
    return 0 if cert.passed else 2


_REPRO_JOBS = (
    (
        "check_weight_radial",
        "check-weight",
        """
[cone]
kind = "sector"
beta = 2.5
[weight]
kind = "radial"
alpha = 1.0
""",
    ),
    (
        "measure_quadrant_xy",
        "measure",
        """
[cone]
kind = "orthant"
n = 2
[weight]
kind = "monomial"
A = [1.0, 1.0]
[domain]
kind = "ball"
[grid]
N = 96
""",
    ),
    (
        "optimize_sector_constant",
        "optimize",
        """
[cone]
kind = "sector"
beta = 2.0
[weight]
kind = "constant"
[domain]
kind = "ball"
[grid]
N = 64
[optimize]
modes = 4
starts = 4
seed = 0
max_iter = 800
""",
    ),
    (
        "verify_abp_offcenter_disk",
        "verify-abp",
        """
[cone]
kind = "orthant"
n = 2
[weight]
kind = "monomial"
A = [1.0, 1.0]
[domain]
kind = "disk"
center = [0.9, 1.1]
rho = 0.45
[grid]
N = 64
""",
    ),
    (
        "verify_abp_radial_violation",
        "verify-abp",
        """
[cone]
kind = "sector"
beta = 2.9
[weight]
kind = "radial"
alpha = 1.0
[domain]
kind = "disk"
center = [0.06627652315205164, 0.5459921450706737]
rho = 0.5
[grid]
N = 96
""",
    ),
)


def _cmd_repro_all(args):
    outdir = args.out
    os.makedirs(outdir, exist_ok=True)
    summary = []
    scan_cfg = config.ExperimentConfig(
        grid={"N": 48},
        optimize={"modes": 4, "starts": 4, "max_iter": 600},
        tolerances={"bracket_target": 0.02},
        output={
            "json": os.path.join(outdir, "scan_angle_radial.json"),
            "csv": os.path.join(outdir, "scan_angle_radial.csv"),
            "figures": False,
        },
    )
    jobs = []
    for name, command, text in _REPRO_JOBS:
        cfg = config.loads(text)
        out = dict(cfg.output)
        out["json"] = os.path.join(outdir, f"{name}.json")
        out["figures"] = False
        cfg = config.ExperimentConfig(
            cone=cfg.cone,
            weight=cfg.weight,
            domain=cfg.domain,
            grid=cfg.grid,
            optimize=cfg.optimize,
            tolerances=cfg.tolerances,
            output=out,
        )
        jobs.append((name, command, cfg))

    for name, command, cfg in jobs:
        code = _DISPATCH[command](cfg, argparse.Namespace(csv=None, dump_field=None))
        expected = False
        if code == 2:
            with open(cfg.output["json"], "r", encoding="utf-8") as fh:
                expected = '"violation_expected": true' in fh.read()
        summary.append(
            {"job": name, "command": command, "exit": code, "expected": expected}
        )

    scan_args = argparse.Namespace(alpha=1.0, beta_min=2.0, beta_max=2.6, steps=4)
    code = _cmd_scan_angle(scan_cfg, scan_args)
    summary.append(
        {"job": "scan_angle_radial", "command": "scan-angle", "exit": code, "expected": True}
    )

    ok = all(s["exit"] == 0 or s["expected"] for s in summary)
    report.write_json(
        os.path.join(outdir, "summary.json"), {"jobs": summary, "all_ok": ok}
    )
    return 0 if ok else 2


_DISPATCH = {
    "check-weight": _cmd_check_weight,
    "measure": _cmd_measure,
    "optimize": _cmd_optimize,
    "verify-abp": _cmd_verify_abp,
}


class _Parser(argparse.ArgumentParser):
    # usage errors share exit code 1 with config errors; 2 means violation
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _parser():
    p = _Parser(
        prog="coniso",
        description="weighted isoperimetric quotients in convex cones",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("check-weight", True),
        ("measure", True),
        ("optimize", True),
        ("verify-abp", True),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=needs_config)
        if name == "measure":
            sp.add_argument("--csv", help="append a CSV row to this path")
        if name == "verify-abp":
            sp.add_argument("--dump-field", dest="dump_field", help="nodal CSV path")
    sp = sub.add_parser("scan-angle")
    sp.add_argument("--config", help="optional grid/optimizer/output settings")
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta-min", dest="beta_min", type=float, required=True)
    sp.add_argument("--beta-max", dest="beta_max", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp = sub.add_parser("repro-all")
    sp.add_argument("--out", default="repro", help="directory for report files")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "repro-all":
            return _cmd_repro_all(args)
        if args.command == "scan-angle":
            cfg = config.load(args.config) if args.config else config.ExperimentConfig()
            return _cmd_scan_angle(cfg, args)
        cfg = config.load(args.config)
        return _DISPATCH[args.command](cfg, args)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"coniso: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
