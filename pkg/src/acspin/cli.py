"""Command-line entry point for the experiment drivers.

Subcommands map one-to-one onto the functions in experiments: generate,
powerlaw, multipole-trace, noise-grid, control-error-grid.  Every run is
deterministic for a given --seed and writes self-describing outputs.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import experiments as ex


def _parse_spin(text: str) -> Fraction:
    return Fraction(text)


def _add_generate(sub):
    p = sub.add_parser("generate", help="produce protocol parameters for a t-AC state")
    p.add_argument("--j", type=_parse_spin, required=True,
                   help="spin, e.g. 2, 5/2, 3.5")
    p.add_argument("--t", type=int, required=True, help="anticoherence order")
    p.add_argument("--nc", type=int, default=None, help="cycle count (optimizer)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--analytic", action="store_true",
                   help="use closed-form parameters instead of the optimizer")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--maxfev", type=int, default=4000)
    p.add_argument("--out", default=None, help="parameter JSON path")
    p.set_defaults(func=_cmd_generate)


def _cmd_generate(args) -> int:
    report = ex.run_generate(
        args.j, args.t, n_cycles=args.nc, analytic=args.analytic,
        seed=args.seed, restarts=args.restarts, maxfev=args.maxfev,
    )
    if args.out:
        ex.write_params(args.out, report)
    print(f"j={report['j']} t={report['t']} method={report['method']} "
          f"n_cycles={report['n_cycles']}")
    for th, et in report["cycles"]:
        print(f"  theta={th:+.12f}  eta={et:+.12f}")
    for k in sorted(report["deviations"], key=int):
        print(f"  1-A_{k} = {report['deviations'][k]:.3e}")
    cost = report["cost"]
    print(f"  cost: rotation {cost['total_rotation']:.6f} "
          f"squeezing {cost['total_squeezing']:.6f}")
    if not report["converged"]:
        print("  NOT CONVERGED: best deviation recorded above")
        return 1
    return 0


def _add_powerlaw(sub):
    p = sub.add_parser("powerlaw", help="refined squeezing parameters over large j")
    p.add_argument("--j-min", type=int, default=20)
    p.add_argument("--j-max", type=int, default=200)
    p.add_argument("--count", type=int, default=12)
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_powerlaw)


def _cmd_powerlaw(args) -> int:
    rows, slopes = ex.run_powerlaw(args.j_min, args.j_max, args.count)
    config = {
        "command": "powerlaw",
        "j_min": args.j_min,
        "j_max": args.j_max,
        "count": args.count,
        "slopes": slopes,
    }
    ex.write_csv(args.out, ("j", "eta2", "eta3", "deviation"), rows, config)
    print(f"slope eta2 = {slopes['eta2']:+.4f} (expect -0.5)")
    print(f"slope eta3 = {slopes['eta3']:+.4f} (expect -1.0)")
    return 0


def _add_trace(sub):
    p = sub.add_parser("multipole-trace", help="per-step |rho_LM|^2 of a protocol")
    p.add_argument("--params", required=True, help="parameter JSON from generate")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_trace)


def _cmd_trace(args) -> int:
    report = ex.read_params(args.params)
    rows = ex.run_multipole_trace(report)
    config = {
        "command": "multipole-trace",
        "two_j": report["two_j"],
        "t": report["t"],
        "method": report["method"],
        "cycles": report["cycles"],
    }
    ex.write_csv(args.out, ("step", "label", "L", "M", "power"), rows, config)
    print(f"{len(rows)} rows over {rows[-1]['step'] + 1} steps")
    return 0


def _add_noise_grid(sub):
    p = sub.add_parser("noise-grid", help="strategy comparison over a noise grid")
    p.add_argument("--n", type=int, required=True, help="spin-1/2 count")
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--grid-min", type=float, default=1e-3)
    p.add_argument("--grid-max", type=float, default=1e-1)
    p.add_argument("--grid-points", type=int, default=8)
    p.add_argument("--instances", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--rotation-sequence", default="tedd",
                   help="packaged name or JSON path")
    p.add_argument("--squeezing-sequence", default="teddy")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_noise_grid)


def _cmd_noise_grid(args) -> int:
    points = ex.product_grid(args.grid_min, args.grid_max, args.grid_points)
    rows, config = ex.run_noise_grid(
        args.n, args.t, points, instances=args.instances, seed=args.seed,
        chi=args.chi, rotation_sequence=args.rotation_sequence,
        squeezing_sequence=args.squeezing_sequence,
    )
    config["grid"] = [args.grid_min, args.grid_max, args.grid_points]
    ex.write_csv(args.out, ex.NOISE_GRID_COLUMNS, rows, config)
    print(f"{len(rows)} rows ({args.grid_points}x{args.grid_points} grid, "
          f"{args.instances} instances)")
    return 0


def _add_control_grid(sub):
    p = sub.add_parser("control-error-grid",
                       help="flip-angle error sweep against noise norm")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--error-type", choices=("dd", "bp_type1", "bp_type2"),
                   required=True)
    p.add_argument("--regime", choices=("disorder", "interaction"),
                   default="disorder")
    p.add_argument("--ratio", type=float, default=0.1)
    p.add_argument("--h-min", type=float, default=1e-4)
    p.add_argument("--h-max", type=float, default=1e-1)
    p.add_argument("--h-points", type=int, default=8)
    p.add_argument("--eps-min", type=float, default=1e-4)
    p.add_argument("--eps-max", type=float, default=1e-1)
    p.add_argument("--eps-points", type=int, default=8)
    p.add_argument("--instances", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chi", type=float, default=1.0)
    p.add_argument("--rotation-sequence", default="tedd")
    p.add_argument("--squeezing-sequence", default="teddy")
    p.add_argument("--out", required=True, help="CSV path")
    p.set_defaults(func=_cmd_control_grid)


def _cmd_control_grid(args) -> int:
    import numpy as np

    hs = np.logspace(np.log10(args.h_min), np.log10(args.h_max), args.h_points)
    eps = np.logspace(np.log10(args.eps_min), np.log10(args.eps_max),
                      args.eps_points)
    rows, config = ex.run_control_error_grid(
        args.n, args.error_type, list(hs), list(eps), t=args.t,
        regime=args.regime, ratio=args.ratio, instances=args.instances,
        seed=args.seed, chi=args.chi,
        rotation_sequence=args.rotation_sequence,
        squeezing_sequence=args.squeezing_sequence,
    )
    ex.write_csv(args.out, ex.CONTROL_GRID_COLUMNS, rows, config)
    print(f"{len(rows)} rows ({args.h_points}x{args.eps_points} grid, "
          f"{args.instances} instances)")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="acspin",
        description="Anticoherent spin-state protocols and protected schedules",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_generate(sub)
    _add_powerlaw(sub)
    _add_trace(sub)
    _add_noise_grid(sub)
    _add_control_grid(sub)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
