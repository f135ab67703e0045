"""Command-line interface.

Exit codes: 0 success (all checks pass), 1 failed check or runtime error,
2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import warnings

from . import checks
from .config import config_data, load_config
from .discretization import assemble_generator
from .errors import AdmissibilityError, ParseError, SizePopError
from .evolution import PositivityWarning, simulate
from .outputs import write_outputs
from .spectral import aeg_diagnostic, spectral_bound

logger = logging.getLogger("sizepop")


def _simulate(cfg):
    r = cfg.run
    return simulate(cfg.model, cfg.grid, cfg.initial_state(), r.dt, r.T, r.scheme, r.snapshot_stride)


def cmd_simulate(args, cfg):
    traj = _simulate(cfg)
    write_outputs(args.out, cfg.grid, traj=traj, config=config_data(cfg), seed=cfg.run.seed)
    print(f"mass {traj.masses[0]:.10g} -> {traj.masses[-1]:.10g} at t = {traj.times[-1]:g}")
    return 0


def cmd_spectrum(args, cfg):
    spec = spectral_bound(assemble_generator(cfg.model, cfg.grid), tol=args.tol, max_iter=args.max_iter)
    write_outputs(args.out, cfg.grid, spec=spec, config=config_data(cfg), seed=cfg.run.seed)
    print(f"malthus {spec.malthus:.12g} (residual {spec.residual:.3g}, irreducible {spec.irreducible})")
    return 0


def cmd_aeg(args, cfg):
    traj = _simulate(cfg)
    spec = spectral_bound(assemble_generator(cfg.model, cfg.grid), tol=args.tol, max_iter=args.max_iter)
    dist = aeg_diagnostic(traj, spec)
    write_outputs(args.out, cfg.grid, traj=traj, spec=spec, config=config_data(cfg),
                  seed=cfg.run.seed, aeg=dist)
    print(f"malthus {spec.malthus:.12g}; distance {dist[0][1]:.3g} -> {dist[-1][1]:.3g} at t = {dist[-1][0]:g}")
    return 0


def cmd_check(args, cfg):
    results, rep = checks.run_checks(cfg, samples=args.samples, omega=args.omega)
    for res in results:
        print(res.line())
    ok = all(r.passed for r in results)
    if args.out:
        by = {r.name: r.value for r in results}
        write_outputs(
            args.out, cfg.grid, report=rep, config=config_data(cfg), seed=cfg.run.seed,
            extra={
                "conservation_drift": by["conservation"],
                "positivity_min": by["positivity"],
                "checks": {r.name: r.passed for r in results},
            },
        )
    print("ALL PASS" if ok else "SOME CHECKS FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sizepop",
        description="Size-structured population model with dynamic boundary conditions.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate the model and write the trajectory")
    p.add_argument("config")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("spectrum", cmd_spectrum, "Malthusian parameter and stable size profile"),
        ("aeg", cmd_aeg, "simulate and measure convergence to the stable size profile"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config")
        p.add_argument("--out", default="out")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--max-iter", type=int, default=10000)
        p.set_defaults(func=func)

    p = sub.add_parser("check", help="conservation, positivity and dissipativity checks")
    p.add_argument("config")
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--omega", type=float, default=None, help="resolvent shift (default: omega_min)")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc.strerror or exc}", file=sys.stderr)
        return 2
    except (ParseError, AdmissibilityError) as exc:
        print(f"error: {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", PositivityWarning)
            warnings.showwarning = _show_warning
            return args.func(args, cfg)
    except SizePopError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
