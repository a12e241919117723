"""Resonance-matching conditions versus static field magnitude.

Superharmonic lines solve ``omega_R0(B) = l omega_T`` on the hyperbola
``omega_R0 = sqrt(omega_zd^2 + omega_H^2)``; second-Larmor lines solve
``2 omega_R0(B) = omega_T``; two-tone lines match an exact eigenvalue splitting
to ``Omega_T + l Omega_L``. All roots are bracketed on a uniform grid and
refined by bisection.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .spin_core import SQRT2, PhysicalConstants, field_direction, level_energies

BISECTION_TOL = 1e-12  # tesla
RESIDUAL_RTOL = 1e-6


class LineKind(str, enum.Enum):
    SUPERHARMONIC = "superharmonic"
    SECOND_LARMOR = "second_larmor"
    TWO_TONE = "two_tone"


@dataclass(frozen=True)
class GeometryConfig:
    """Static-field geometry: misalignment from the NV axis and coil calibration."""

    misalignment_alpha: float = math.radians(1.0)
    field_to_current: float = 0.01  # tesla per ampere
    constants: PhysicalConstants = field(default_factory=PhysicalConstants)

    def __post_init__(self):
        if not abs(self.misalignment_alpha) < math.pi / 2:
            raise ValueError("misalignment must satisfy |alpha| < pi/2")
        if not self.field_to_current > 0:
            raise ValueError("field_to_current must be positive")

    @property
    def direction(self) -> np.ndarray:
        return field_direction(self.misalignment_alpha)

    def field_from_current(self, current):
        return self.field_to_current * np.asarray(current, dtype=float)

    def static_components(self, b):
        """``(omega_x, omega_z)`` of the static field for field magnitude ``b``."""
        w = self.constants.gamma_e * np.asarray(b, dtype=float)
        return w * math.sin(self.misalignment_alpha), w * math.cos(self.misalignment_alpha)

    def default_window(self) -> tuple:
        b_cross = self.constants.omega_D / (self.constants.gamma_e * math.cos(self.misalignment_alpha))
        return (0.0, 2.0 * b_cross)


@dataclass(frozen=True)
class ResonanceLine:
    kind: LineKind
    l: int
    B: float
    residual: float


def transition_frequency(b, geom: GeometryConfig):
    """``omega_R0`` of the crossing pair as a function of field magnitude."""
    wx, wz = geom.static_components(b)
    wzd = wz - geom.constants.omega_D
    wh = SQRT2 * wx
    return np.sqrt(wzd * wzd + wh * wh)


def hyperbola_vertex(geom: GeometryConfig) -> tuple:
    """Field and value of the minimum of ``omega_R0(B)``."""
    a = geom.misalignment_alpha
    g, wd = geom.constants.gamma_e, geom.constants.omega_D
    k = math.cos(a) ** 2 + 2.0 * math.sin(a) ** 2
    b_min = wd * math.cos(a) / (g * k)
    return b_min, float(transition_frequency(b_min, geom))


def _bisect(f, lo, hi, f_lo):
    while hi - lo > BISECTION_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid < 0.0) == (f_lo < 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _roots(f_vec, f_scalar, window, grid_points):
    lo, hi = window
    if not (math.isfinite(lo) and math.isfinite(hi) and hi > lo):
        raise ValueError(f"invalid scan window {window}")
    b = np.linspace(lo, hi, int(grid_points))
    g = f_vec(b)
    roots = []
    for i in range(len(b) - 1):
        if g[i] == 0.0:
            roots.append(float(b[i]))
        elif g[i] * g[i + 1] < 0.0:
            roots.append(_bisect(f_scalar, float(b[i]), float(b[i + 1]), float(g[i])))
    if g[-1] == 0.0:
        roots.append(float(b[-1]))
    return roots


def _check_l_range(l_range, positive=True):
    ls = [int(l) for l in l_range]
    if positive and any(l <= 0 for l in ls):
        raise ValueError("superharmonic orders must be positive integers")
    return ls


def superharmonic_fields(
    omega_T: float, l_range, geom: GeometryConfig, window=None, grid_points: int = 2000,
    kind: LineKind = LineKind.SUPERHARMONIC,
):
    """Fields where ``omega_R0(B) = l * omega_T`` for each ``l`` in ``l_range``.

    Orders below the hyperbola vertex give no lines.
    """
    if not omega_T > 0:
        raise ValueError("omega_T must be positive")
    window = geom.default_window() if window is None else window
    lines = []
    for l in _check_l_range(l_range):
        target = l * omega_T

        def f_vec(b, target=target):
            return transition_frequency(b, geom) - target

        def f_scalar(b, target=target):
            return float(transition_frequency(b, geom)) - target

        for root in _roots(f_vec, f_scalar, window, grid_points):
            lines.append(ResonanceLine(kind, l, root, f_scalar(root)))
    return sorted(lines, key=lambda r: (r.l, r.B))


def second_larmor_fields(omega_T: float, geom: GeometryConfig, window=None, grid_points: int = 2000):
    """Fields where ``2 omega_R0(B) = omega_T``."""
    return superharmonic_fields(
        0.5 * omega_T, [1], geom, window, grid_points, kind=LineKind.SECOND_LARMOR
    )


def pair_splitting(b, geom: GeometryConfig, pair):
    """Exact splitting ``E_n2 - E_n1`` of the sorted eigen-energies."""
    e = level_energies(b, geom.direction, geom.constants)
    n1, n2 = pair
    return e[:, n2 - 1] - e[:, n1 - 1]


def two_tone_matching(
    Omega_T: float, Omega_L: float, l_range, geom: GeometryConfig, pair=(1, 3),
    window=None, grid_points: int = 2000,
):
    """Fields where the exact splitting of ``pair`` equals ``Omega_T + l Omega_L``."""
    if not (Omega_T > 0 and Omega_L >= 0):
        raise ValueError("frequencies must be positive")
    n1, n2 = pair
    if not 1 <= n1 < n2 <= 3:
        raise ValueError(f"invalid level pair {pair}")
    window = geom.default_window() if window is None else window
    lines = []
    for l in _check_l_range(l_range, positive=False):
        target = Omega_T + l * Omega_L

        def f_vec(b, target=target):
            return pair_splitting(b, geom, pair) - target

        def f_scalar(b, target=target):
            return float(pair_splitting(b, geom, pair)[0]) - target

        for root in _roots(f_vec, f_scalar, window, grid_points):
            lines.append(ResonanceLine(LineKind.TWO_TONE, l, root, f_scalar(root)))
    return sorted(lines, key=lambda r: (r.l, r.B))
