"""Command-line interface.

Subcommands: solve (single eps), sweep, verify (re-run checks on
persisted fields), sobolev (constant estimation), plot, demo-annulus
(bundled coarse reproduction of the annulus experiment).

Exit codes: 0 success, 2 config error, 3 solver nonconvergence,
4 verifier failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .concentration import harmonic_mean_radius
from .config import KNOWN_CHECKS, RunConfig, config_from_json, load_config
from .domain import Annulus
from .errors import ConfigError, FracgroundError
from .runner import run_experiment
from .solver import SolverConfig

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3
EXIT_CHECK_FAILED = 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fracground",
                                 description="nearly-critical fractional ground states")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="run-config JSON path")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument("--threads", type=int, help="worker threads for verifier batches")
        sp.add_argument("--seed", type=int, help="solver RNG seed override")

    sp = sub.add_parser("solve", help="solve a single eps from the config")
    common(sp)
    sp.add_argument("--eps", type=float, help="eps to solve (default: first in config)")

    sp = sub.add_parser("sweep", help="run the full eps sweep with checks")
    common(sp)

    sp = sub.add_parser("verify", help="re-run named checks on a persisted run")
    common(sp)
    sp.add_argument("run_dir", help="directory containing manifest.json")
    sp.add_argument("--checks", nargs="*", choices=KNOWN_CHECKS,
                    help="checks to run (default: config's list)")

    sp = sub.add_parser("sobolev", help="estimate the critical Sobolev constant")
    sp.add_argument("--p", type=float, default=2.0)
    sp.add_argument("--s", type=float, required=True)
    sp.add_argument("--dim", type=int, required=True, choices=(1, 2))
    sp.add_argument("--schedule", type=float, nargs="+", required=True,
                    help="decreasing list of spacings")
    sp.add_argument("--radii", type=float, nargs="+", default=[4.0, 8.0])
    sp.add_argument("--out", help="write the JSON report here")
    sp.add_argument("--threads", type=int, default=1)

    sp = sub.add_parser("plot", help="emit SVG figures for a persisted run")
    sp.add_argument("run_dir", help="directory containing manifest.json")

    sp = sub.add_parser("demo-annulus", help="bundled coarse annulus reproduction")
    sp.add_argument("--out", default="demo_annulus_out")
    sp.add_argument("--threads", type=int)
    sp.add_argument("--seed", type=int)
    return ap


def _apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "threads", None):
        cfg.threads = args.threads
    if getattr(args, "seed", None) is not None:
        cfg.solver = dataclasses.replace(cfg.solver, rng_seed=args.seed)
    return cfg


def demo_annulus_config(out_dir: str) -> RunConfig:
    """Coarse, minutes-scale version of the annulus experiment.

    The initial bump sits at the harmonic-mean radius: at desk spacings
    the positional energy landscape is flat to a fraction of a percent
    across mid-annulus radii, so the concentration site is inherited
    from the warm-start chain; the moving-plane and location verifiers
    are the discriminating checks.
    """
    r1, r2 = 1.0, 3.0
    return config_from_json({
        "domain": {"type": "annulus", "center": [0.0, 0.0], "r1": r1, "r2": r2},
        "p": 2.0,
        "s": 0.5,
        "h": 0.15,
        "eps_list": [0.4, 0.2, 0.1],
        "solver": {
            "max_iters": 40000,
            "grad_tol": 1e-8,
            "init": ["bump", [harmonic_mean_radius(r1, r2), 0.0], 0.4],
        },
        "checks": ["concentration", "annulus_location", "moving_plane",
                   "boundary_distance", "cc_inequality"],
        "output_dir": out_dir,
    })


def _finish_run(manifest) -> int:
    for name, res in manifest.checks.items():
        print(f"check {name}: {'pass' if res['passed'] else 'FAIL'}")
    if not manifest.converged:
        print("solver did not converge on every entry", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    if any(not res["passed"] for res in manifest.checks.values()):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_solve_or_sweep(args, single_eps: bool) -> int:
    if not args.config:
        print("a --config file is required", file=sys.stderr)
        return EXIT_CONFIG
    cfg = load_config(args.config)
    cfg = _apply_overrides(cfg, args)
    if single_eps:
        eps = args.eps if args.eps is not None else cfg.eps_list[0]
        cfg = config_from_json({**cfg.to_json(), "eps_list": [eps],
                                "output_dir": cfg.output_dir})
        cfg = _apply_overrides(cfg, args)
    manifest = run_experiment(cfg)
    print(f"run {manifest.config_hash[:12]} -> {cfg.output_dir}")
    return _finish_run(manifest)


def cmd_verify(args) -> int:
    run_dir = args.run_dir
    cfg_path = os.path.join(run_dir, "config.json")
    if not os.path.exists(cfg_path):
        print(f"no config.json under {run_dir}", file=sys.stderr)
        return EXIT_CONFIG
    cfg = load_config(cfg_path)
    if args.threads:
        cfg.threads = args.threads
    checks = args.checks if args.checks else cfg.checks
    if not checks:
        print("no checks requested", file=sys.stderr)
        return EXIT_CONFIG

    from . import concentration as ccmod
    from .fieldio import load_field
    from .functionals import j_functional
    from .grid import build_grid
    from .kernel import build_pair_weights
    from .runner import run_checks
    from .solver import GroundState, SweepEntry, SweepResult, rayleigh_minimize

    with open(os.path.join(run_dir, "manifest.json"), "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    grid = build_grid(cfg.domain, cfg.h)
    weights = build_pair_weights(grid, cfg.p, cfg.s)
    p_star = weights.p_star

    states = []
    for key in sorted(manifest["field_paths"], key=float, reverse=True):
        fld, meta = load_field(os.path.join(run_dir, manifest["field_paths"][key]))
        fld = type(fld)(grid, fld.values)  # rebind to the freshly built grid
        q = p_star - float(key)
        rep = j_functional(fld, weights, q)
        states.append(GroundState(u=fld, eps=float(key), q=q, report=rep,
                                  iterations=0, converged=bool(meta.get("converged", True)),
                                  residual=0.0))
    if not states:
        print("manifest lists no fields", file=sys.stderr)
        return EXIT_CONFIG

    res_star = rayleigh_minimize(grid, weights, p_star,
                                 init=("warm_start", states[-1].u), tol=1e-9,
                                 max_iters=60000)
    S_h = min([res_star.rayleigh] +
              [st.report.seminorm_p / st.report.lq[p_star] ** cfg.p for st in states])
    N, s = grid.dim, cfg.s
    vol = grid.domain_volume()
    target = (s / N) * S_h ** (N / (cfg.p * s))
    entries = []
    for st in states:
        q = st.q
        eps = st.eps
        lower = (1 / cfg.p - 1 / q) * S_h ** (q / (q - cfg.p)) * vol ** (
            -eps * cfg.p / ((q - cfg.p) * p_star))
        entries.append(SweepEntry(eps=eps, state=st, lower_bound=lower, target=target,
                                  rel_gap=abs(st.report.I_eps - target) / target))
    sweep = SweepResult(entries=entries, S_h=S_h, p=cfg.p, s=cfg.s)
    ms = [ccmod.measures(st.u, weights) for st in sweep.states]
    ctx = {"config": cfg, "grid": grid, "weights": weights, "sweep": sweep, "measures": ms}
    results = run_checks(ctx, checks, threads=cfg.threads)
    failed = False
    for name, res in results.items():
        print(f"check {name}: {'pass' if res.get('passed', True) else 'FAIL'}")
        failed |= not res.get("passed", True)
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_sobolev(args) -> int:
    from .functionals import sobolev_constant_estimate

    est = sobolev_constant_estimate(args.p, args.s, args.dim, args.schedule,
                                    radii=tuple(args.radii), threads=args.threads)
    doc = est.to_json()
    print(json.dumps(doc, indent=2, sort_keys=True))
    if args.out:
        os.makedirs(os.path.dirname(os.path.abspath(args.out)) or ".", exist_ok=True)
        from .runner import atomic_write_text
        atomic_write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plots import emit_plots

    paths = emit_plots(args.run_dir)
    for p in paths:
        print(p)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "solve":
            return cmd_solve_or_sweep(args, single_eps=True)
        if args.command == "sweep":
            return cmd_solve_or_sweep(args, single_eps=False)
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "sobolev":
            return cmd_sobolev(args)
        if args.command == "plot":
            return cmd_plot(args)
        if args.command == "demo-annulus":
            cfg = demo_annulus_config(args.out)
            cfg = _apply_overrides(cfg, args)
            manifest = run_experiment(cfg)
            print(f"demo run {manifest.config_hash[:12]} -> {cfg.output_dir}")
            return _finish_run(manifest)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except FracgroundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
