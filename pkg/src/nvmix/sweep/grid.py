"""Evaluation of polarization maps over a 2-D parameter grid."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .. import kernels
from ..frame import frame_arrays
from ..oracle import steady_state_polarization
from ..resonance import (
    LineKind,
    ResonanceLine,
    second_larmor_fields,
    superharmonic_fields,
    two_tone_matching,
)
from ..rwa import DriveDecomposition, pair_factors, pair_splitting_arrays
from .antenna import power_to_amplitude
from .config import SweepAxis, SweepConfig

CHUNK = 4096


@dataclass(frozen=True)
class Overlay:
    kind: str
    l: int
    axis: str  # "x" or "y"
    coordinate: float


@dataclass(frozen=True)
class SweepGrid:
    """Polarization map; arrays have shape ``(y.points, x.points)``, row-major in y."""

    x_axis: SweepAxis
    y_axis: SweepAxis
    P: np.ndarray
    ratio: np.ndarray
    l_star: np.ndarray
    flags: np.ndarray
    pair_star: np.ndarray | None = None
    overlays: tuple = ()

    @property
    def shape(self):
        return (self.y_axis.points, self.x_axis.points)

    @property
    def x(self):
        return self.x_axis.values()

    @property
    def y(self):
        return self.y_axis.values()


@dataclass
class CellInputs:
    """Flat per-cell physical inputs, all in SI / rad/s."""

    B: np.ndarray
    omega_T1: np.ndarray
    omega_L1: np.ndarray


def cell_inputs(cfg: SweepConfig, iy=None, ix=None) -> CellInputs:
    """Physical inputs for cells ``(iy, ix)``; the full grid when both are None."""
    xs, ys = cfg.x_axis.values(), cfg.y_axis.values()
    if iy is None:
        iy, ix = np.divmod(np.arange(cfg.y_axis.points * cfg.x_axis.points), cfg.x_axis.points)
    iy = np.asarray(iy)
    ix = np.asarray(ix)
    vals = {cfg.x_axis.parameter: xs[ix], cfg.y_axis.parameter: ys[iy]}
    n = iy.shape[0]

    if "B" in vals:
        b = vals["B"]
    elif "I_mag" in vals:
        b = cfg.geometry.field_to_current * vals["I_mag"]
    else:
        b = np.full(n, cfg.static_field)

    omega_t1 = _amplitude(cfg.transverse, vals, ("P_T", "A_T"), n)
    if cfg.mode == "two":
        omega_l1 = _amplitude(cfg.longitudinal, vals, ("P_L", "A_L", "V_RF"), n)
    else:
        omega_l1 = np.zeros(n)
    return CellInputs(b, omega_t1, omega_l1)


def _amplitude(tone, vals, names, n):
    p_name, a_name = names[0], names[1]
    if p_name in vals:
        return power_to_amplitude(vals[p_name], tone.antenna)
    if a_name in vals:
        return np.asarray(vals[a_name], dtype=float)
    if "V_RF" in names and "V_RF" in vals:
        return tone.voltage_calibration * vals["V_RF"]
    if tone.power is not None:
        return np.full(n, float(power_to_amplitude(tone.power, tone.antenna)))
    if tone.amplitude is not None:
        return np.full(n, tone.amplitude)
    if tone.voltage is not None:
        return np.full(n, tone.voltage_calibration * tone.voltage)
    return np.zeros(n)


def decompositions(cfg: SweepConfig, cells: CellInputs, pair):
    """Arrays ``(Omega_0, Omega_L1, Omega_L, Omega_T1, Omega_T)`` for one level pair."""
    geom = cfg.geometry
    wx, wz = geom.static_components(cells.B)
    fa = frame_arrays(wx, wz, geom.constants.omega_D)
    t_mod, t_coup, l_mod = pair_factors(pair, fa["cos"], fa["sin"], fa["cos_half"], fa["sin_half"])
    omega0 = pair_splitting_arrays(pair, fa["omega_R0"], fa["omega_dch"])
    n = cells.B.shape[0]
    eff = cfg.transverse.effective_coupling
    if cfg.mode == "single":
        w = cfg.transverse.frequency
        omega_l1 = cells.omega_T1 * t_mod
        omega_l = np.full(n, w)
        coupling = cells.omega_T1 * t_coup
        omega_t = np.full(n, w)
    else:
        omega_l1 = cells.omega_L1 * l_mod
        omega_l = np.full(n, cfg.longitudinal.frequency)
        coupling = cells.omega_T1 * t_coup if eff is None else np.full(n, eff)
        omega_t = np.full(n, cfg.transverse.frequency)
    return omega0, omega_l1, omega_l, coupling, omega_t


def _fixed_order(args, gamma1, gamma2, l_max, order):
    """P of sideband ``order`` and its ratio to the strongest other order."""
    omega0, omega_l1, omega_l, omega_t1, omega_t = args
    n = omega0.shape[0]
    p_out = np.empty(n)
    ratio = np.empty(n)
    ls = np.arange(-l_max, l_max + 1)
    sign = np.where((ls < 0) & (ls % 2 == 1), -1.0, 1.0)
    others = ls != order
    for i in range(n):
        jn = kernels.bessel_jn(omega_l1[i] / omega_l[i], l_max)
        om1 = 2.0 * omega_t1[i] * sign * jn[np.abs(ls)]
        omd = omega0[i] - omega_t[i] - ls * omega_l[i]
        s = om1 * om1 / (gamma1 * gamma2)
        r = omd / gamma2
        p = s / (1.0 + r * r + s)
        best = p[~others][0]
        second = p[others].max() if others.any() else -1.0
        p_out[i] = best
        if second < 0.0:
            ratio[i] = math.inf
        elif best <= 0.0:
            ratio[i] = 1.0
        elif second <= 0.0:
            ratio[i] = math.inf
        else:
            ratio[i] = best / second
    return p_out, ratio, np.full(n, order, dtype=np.int64)


def _evaluate_pair(cfg, args, threads):
    g1, g2 = cfg.rates.gamma1, cfg.rates.gamma2
    n = args[0].shape[0]
    chunks = [slice(i, min(i + CHUNK, n)) for i in range(0, n, CHUNK)]

    def work(sl):
        part = tuple(np.ascontiguousarray(a[sl]) for a in args)
        if cfg.sideband == "dominant":
            return kernels.dominant_sideband_grid(*part, g1, g2, cfg.l_max)
        return _fixed_order(part, g1, g2, cfg.l_max, cfg.sideband)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, chunks))
    else:
        results = [work(sl) for sl in chunks]
    p = np.concatenate([r[0] for r in results]) if results else np.empty(0)
    ratio = np.concatenate([r[1] for r in results]) if results else np.empty(0)
    ls = np.concatenate([r[2] for r in results]) if results else np.empty(0, dtype=np.int64)
    return p, ratio, ls


def evaluate_cells(cfg: SweepConfig, iy, ix, threads: int = 1):
    """``(P, ratio, l_star, pair_index, flags)`` for the listed cells."""
    cells = cell_inputs(cfg, iy, ix)
    n = cells.B.shape[0]
    flags = np.zeros(n, dtype=bool)
    ps, ratios, orders = [], [], []
    for pair in cfg.pairs:
        args = decompositions(cfg, cells, pair)
        bad = ~np.all([np.isfinite(a) for a in args], axis=0)
        flags |= bad
        clean = tuple(np.where(bad, 1.0, a) for a in args)
        p, ratio, ls = _evaluate_pair(cfg, clean, threads)
        ps.append(p)
        ratios.append(ratio)
        orders.append(ls)
    ps = np.array(ps)
    k = np.argmax(ps, axis=0)  # first pair wins ties
    cols = np.arange(n)
    best_p = ps[k, cols]
    ratio = np.array(ratios)[k, cols]
    best_l = np.array(orders)[k, cols]
    if len(cfg.pairs) > 1:
        # runner-up: the winning pair's second order or any other pair's best
        with np.errstate(divide="ignore", invalid="ignore"):
            own_second = np.where(np.isinf(ratio), 0.0, best_p / ratio)
        others = ps.copy()
        others[k, cols] = -1.0
        runner = np.maximum(own_second, others.max(axis=0))
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(best_p <= 0.0, 1.0, np.where(runner <= 0.0, math.inf, best_p / runner))
    best_p = np.where(flags, 0.0, best_p)
    ratio = np.where(flags, 1.0, ratio)
    best_l = np.where(flags, 0, best_l)
    return best_p, ratio, best_l, k.astype(np.int64), flags


def run_map(cfg: SweepConfig, threads: int | None = None) -> SweepGrid:
    """Evaluate the configured map. Cells are independent and the result
    does not depend on ``threads``."""
    threads = threads or min(8, os.cpu_count() or 1)
    ny, nx = cfg.y_axis.points, cfg.x_axis.points
    iy, ix = np.divmod(np.arange(ny * nx), nx)
    p, ratio, ls, pair_idx, flags = evaluate_cells(cfg, iy, ix, threads)
    return SweepGrid(
        x_axis=cfg.x_axis,
        y_axis=cfg.y_axis,
        P=p.reshape(ny, nx),
        ratio=ratio.reshape(ny, nx),
        l_star=ls.reshape(ny, nx),
        flags=flags.reshape(ny, nx),
        pair_star=pair_idx.reshape(ny, nx),
    )


def resonance_lines(cfg: SweepConfig):
    """Resonance lines requested in the config, over the swept field window."""
    req = cfg.resonances
    geom = cfg.geometry
    fax = cfg.axis_for(("B", "I_mag"))
    window = None
    if fax is not None:
        lo, hi = sorted((fax.start, fax.stop))
        scale = 1.0 if fax.parameter == "B" else geom.field_to_current
        window = (lo * scale, hi * scale)
    lines = []
    if req.superharmonic is not None:
        lo, hi = req.superharmonic
        lines += superharmonic_fields(cfg.transverse.frequency, range(lo, hi + 1), geom, window)
    if req.second_larmor:
        lines += second_larmor_fields(cfg.transverse.frequency, geom, window)
    if req.two_tone is not None:
        if cfg.longitudinal is None:
            raise ValueError("two-tone lines need a longitudinal tone")
        lo, hi = req.two_tone
        for pair in cfg.pairs:
            lines += two_tone_matching(
                cfg.transverse.frequency, cfg.longitudinal.frequency, range(lo, hi + 1), geom, pair, window
            )
    return lines


def overlay_resonances(grid: SweepGrid, lines, field_to_current: float | None = None) -> SweepGrid:
    """Attach resonance lines in axis coordinates.

    Lines are fields in tesla; they map onto a ``B`` axis directly or onto an
    ``I_mag`` axis through ``field_to_current``. Lines outside the axis range
    are dropped.
    """
    lines = list(lines)
    if not lines:
        return grid
    for name, ax in (("x", grid.x_axis), ("y", grid.y_axis)):
        if ax.parameter == "B":
            scale = 1.0
            break
        if ax.parameter == "I_mag":
            if field_to_current is None:
                raise ValueError("I_mag axis needs field_to_current to place field lines")
            scale = 1.0 / field_to_current
            break
    else:
        raise ValueError(
            f"resonance lines are in tesla but the axes are {grid.x_axis.unit} and {grid.y_axis.unit}"
        )
    lo, hi = sorted((ax.start, ax.stop))
    out = []
    for line in lines:
        if not isinstance(line, ResonanceLine):
            raise TypeError(f"expected ResonanceLine, got {type(line).__name__}")
        c = line.B * scale
        if lo <= c <= hi:
            kind = line.kind.value if isinstance(line.kind, LineKind) else str(line.kind)
            out.append(Overlay(kind, line.l, name, c))
    return replace(grid, overlays=tuple(grid.overlays) + tuple(out))


@dataclass(frozen=True)
class OracleSample:
    iy: int
    ix: int
    P_rwa: float
    P_emp: float


@dataclass(frozen=True)
class OracleReport:
    samples: tuple = field(default_factory=tuple)

    @property
    def max_abs_deviation(self) -> float:
        return max((abs(s.P_rwa - s.P_emp) for s in self.samples), default=0.0)

    @property
    def max_rel_deviation(self) -> float:
        devs = [abs(s.P_rwa - s.P_emp) / max(abs(s.P_emp), 1e-12) for s in self.samples]
        return max(devs, default=0.0)


def sample_indices(ny: int, nx: int, count: int):
    """Evenly spread flat cell indices, deterministic."""
    total = ny * nx
    count = min(count, total)
    flat = np.unique(np.linspace(0, total - 1, count).round().astype(int))
    return np.divmod(flat, nx)


def oracle_check(cfg: SweepConfig, grid: SweepGrid, samples: int | None = None) -> OracleReport:
    """Re-evaluate a few cells by Lindblad integration of the winning pair."""
    count = cfg.oracle_samples if samples is None else samples
    iy, ix = sample_indices(cfg.y_axis.points, cfg.x_axis.points, count)
    cells = cell_inputs(cfg, iy, ix)
    per_pair = [decompositions(cfg, cells, pair) for pair in cfg.pairs]
    out = []
    for k in range(len(iy)):
        if grid.flags[iy[k], ix[k]]:
            continue
        j = int(grid.pair_star[iy[k], ix[k]]) if grid.pair_star is not None else 0
        a = [float(v[k]) for v in per_pair[j]]
        d = DriveDecomposition(a[0], a[1], a[2], a[3], a[4], cfg.pairs[j])
        res = steady_state_polarization(d, cfg.rates, gamma2_convention=cfg.gamma2_convention)
        out.append(OracleSample(int(iy[k]), int(ix[k]), float(grid.P[iy[k], ix[k]]), res.P_emp))
    return OracleReport(tuple(out))
