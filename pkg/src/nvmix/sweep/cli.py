"""Command-line entry point ``nvmix``.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace

import numpy as np

from ..oracle import InvariantError, NonConvergenceError, StiffnessError
from ..resonance import GeometryConfig
from ..spin_core import TWO_PI, PhysicalConstants, field_direction, level_energies
from .config import ConfigError, load_config, validate
from .grid import oracle_check, overlay_resonances, resonance_lines, run_map
from .io import EmitError, emit

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
NUMERIC_ERRORS = (StiffnessError, NonConvergenceError, InvariantError, FloatingPointError, ArithmeticError)


def _parser():
    p = argparse.ArgumentParser(prog="nvmix", description="Frequency-mixing polarization maps for the NV triplet.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("map", help="compute a polarization map")
    m.add_argument("--config", required=True)
    m.add_argument("--out-csv")
    m.add_argument("--out-png")
    m.add_argument("--oracle", action="store_true", help="check sampled cells by Lindblad integration")
    m.add_argument("--l-max", type=int)
    m.add_argument("--threads", type=int)

    r = sub.add_parser("resonances", help="list resonance lines for a config")
    r.add_argument("--config", required=True)

    lv = sub.add_parser("levels", help="eigen-energies versus field")
    lv.add_argument("--bmin", type=float, required=True, help="tesla")
    lv.add_argument("--bmax", type=float, required=True, help="tesla")
    lv.add_argument("--points", type=int, required=True)
    lv.add_argument("--alpha-deg", type=float, default=1.0, help="field angle from the NV axis")
    return p


def _cmd_map(args) -> int:
    cfg = load_config(args.config)
    if args.l_max is not None:
        cfg = replace(cfg, l_max=args.l_max)
        validate(cfg)
    csv_path = args.out_csv or cfg.csv_path
    png_path = args.out_png or cfg.png_path
    if csv_path is None and png_path is None:
        raise ConfigError("no output path: pass --out-csv/--out-png or set [output]")
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    grid = run_map(cfg, threads=args.threads)
    grid = overlay_resonances(grid, resonance_lines(cfg), cfg.geometry.field_to_current)
    n_flag = int(np.count_nonzero(grid.flags))
    print(f"map {grid.shape[1]}x{grid.shape[0]}  max P {grid.P.max():.4f}  flagged cells {n_flag}")
    if args.oracle:
        report = oracle_check(cfg, grid)
        for s in report.samples:
            print(f"oracle cell ({s.ix},{s.iy})  P_rwa {s.P_rwa:.5f}  P_emp {s.P_emp:.5f}")
        print(
            f"oracle {len(report.samples)} cells  max abs deviation {report.max_abs_deviation:.4g}"
            f"  max rel deviation {report.max_rel_deviation:.4g}"
        )
    emit(grid, csv_path, png_path, title=str(args.config))
    return EXIT_OK


def _cmd_resonances(args) -> int:
    cfg = load_config(args.config)
    f2c = cfg.geometry.field_to_current
    print("kind,l,B_T,I_A,residual_rad_s")
    for line in resonance_lines(cfg):
        print(f"{line.kind.value},{line.l},{line.B:.12f},{line.B / f2c:.9f},{line.residual:.3g}")
    return EXIT_OK


def _cmd_levels(args) -> int:
    if args.points < 2 or not (math.isfinite(args.bmin) and math.isfinite(args.bmax)):
        raise ConfigError("levels needs finite --bmin/--bmax and --points >= 2")
    geom = GeometryConfig(misalignment_alpha=math.radians(args.alpha_deg), constants=PhysicalConstants())
    b = np.linspace(args.bmin, args.bmax, args.points)
    e = level_energies(b, field_direction(geom.misalignment_alpha), geom.constants) / TWO_PI / 1e9
    print("B_T,E1_GHz,E2_GHz,E3_GHz")
    for bi, row in zip(b, e):
        print(f"{bi:.9g},{row[0]:.9f},{row[1]:.9f},{row[2]:.9f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    handler = {"map": _cmd_map, "resonances": _cmd_resonances, "levels": _cmd_levels}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (EmitError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
