"""Rotating-frame sideband analysis and the steady-state polarization coefficient.

After the static rotation, a level pair sees a splitting
``Omega_0 - Omega_L1 cos(Omega_L t)`` and a coupling ``Omega_T1 exp(i Omega_T t)``.
Moving to the hollow (interaction) frame and expanding with Jacobi-Anger gives
sidebands of amplitude ``2 Omega_T1 J_l(Omega_L1 / Omega_L)`` detuned by
``Omega_0 - Omega_T - l Omega_L``.
"""

from __future__ import annotations

import math
import cmath
from dataclasses import dataclass

import numpy as np

from . import kernels
from .frame import StaticFrame
from .spin_core import SQRT2, TWO_PI

UNDERFLOW = 1e-300


@dataclass(frozen=True)
class RelaxationRates:
    """Longitudinal and transverse relaxation rates in rad/s."""

    gamma1: float
    gamma2: float

    def __post_init__(self):
        if not (self.gamma1 > 0 and self.gamma2 > 0):
            raise ValueError(f"relaxation rates must be positive, got {self}")
        if not (math.isfinite(self.gamma1) and math.isfinite(self.gamma2)):
            raise ValueError("relaxation rates must be finite")

    @classmethod
    def from_hz(cls, gamma1_hz: float, gamma2_hz: float) -> RelaxationRates:
        """Rates quoted as ordinary frequencies, converted with a factor 2 pi."""
        return cls(TWO_PI * gamma1_hz, TWO_PI * gamma2_hz)

    def scaled(self, factor: float) -> RelaxationRates:
        return RelaxationRates(self.gamma1 * factor, self.gamma2 * factor)


@dataclass(frozen=True)
class DriveDecomposition:
    Omega_0: float
    Omega_L1: float
    Omega_L: float
    Omega_T1: float
    Omega_T: float
    level_pair: tuple = (1, 2)

    def __post_init__(self):
        vals = (self.Omega_0, self.Omega_L1, self.Omega_L, self.Omega_T1, self.Omega_T)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite drive parameter in {self}")
        if self.Omega_L <= 0 or self.Omega_T <= 0:
            raise ValueError("drive frequencies must be positive")
        if self.Omega_L1 < 0 or self.Omega_T1 < 0:
            raise ValueError("drive amplitudes must be non-negative")
        n1, n2 = self.level_pair
        if not (1 <= n1 < n2 <= 3):
            raise ValueError(f"level pair must satisfy 1 <= n1 < n2 <= 3, got {self.level_pair}")

    @property
    def modulation_index(self) -> float:
        return self.Omega_L1 / self.Omega_L

    def splitting(self, t):
        """Instantaneous level splitting ``Omega_0 - Omega_L1 cos(Omega_L t)``."""
        return self.Omega_0 - self.Omega_L1 * math.cos(self.Omega_L * t)

    def accumulated_phase(self, t: float) -> float:
        """Closed-form integral of :meth:`splitting` from 0 to ``t``."""
        return self.Omega_0 * t - self.modulation_index * math.sin(self.Omega_L * t)

    def coupling(self, t: float) -> complex:
        return self.Omega_T1 * cmath.exp(1j * self.Omega_T * t)


@dataclass(frozen=True)
class MixingTerm:
    l: int
    Omega_1l: float
    Omega_dl: float
    level_pair: tuple = (1, 2)


class SidebandList(list):
    """List of :class:`MixingTerm` with a ``truncated`` flag.

    ``truncated`` is set when the requested order range was cut back because
    the Bessel weights underflowed.
    """

    truncated = False
    requested_l_max = 0


def hollow_frame_element(omega_prime_offdiag: complex, accumulated_phase: float) -> complex:
    """Off-diagonal element in the hollow frame.

    ``accumulated_phase`` is the time integral of the diagonal difference
    between the column and row levels. Diagonal elements of the hollow frame
    vanish by construction, so only off-diagonal elements pass through here.
    """
    return complex(omega_prime_offdiag) * cmath.exp(-1j * accumulated_phase)


def hollow_element(d: DriveDecomposition, t: float) -> complex:
    return hollow_frame_element(d.coupling(t), d.accumulated_phase(t))


def sideband_series(terms, t: float) -> complex:
    """Sum of ``(Omega_1l / 2) exp(-i Omega_dl t)`` over the given terms."""
    return sum(0.5 * m.Omega_1l * cmath.exp(-1j * m.Omega_dl * t) for m in terms)


def _usable_l_max(x: float, l_max: int, jn) -> int:
    # only cut in the monotonically decaying tail beyond |x|; J_l(0) = 0 is exact
    if x == 0.0:
        return l_max
    start = int(math.floor(abs(x))) + 1
    for l in range(max(start, 1), l_max + 1):
        if abs(jn[l]) < UNDERFLOW:
            return l - 1
    return l_max


def jacobi_anger_sidebands(d: DriveDecomposition, l_max: int) -> SidebandList:
    """Sidebands ``l = -l_max .. l_max`` of the hollow-frame coupling."""
    if l_max < 0:
        raise ValueError("l_max must be >= 0")
    x = d.modulation_index
    jn = kernels.bessel_jn(x, l_max)
    usable = _usable_l_max(x, l_max, jn)
    out = SidebandList()
    out.requested_l_max = l_max
    out.truncated = usable < l_max
    for l in range(-usable, usable + 1):
        j = jn[abs(l)]
        if l < 0 and l % 2:
            j = -j
        out.append(
            MixingTerm(
                l=l,
                Omega_1l=2.0 * d.Omega_T1 * j,
                Omega_dl=d.Omega_0 - d.Omega_T - l * d.Omega_L,
                level_pair=d.level_pair,
            )
        )
    return out


def polarization_coefficient(Omega_1: float, Omega_d: float, rates: RelaxationRates) -> float:
    """Driving-induced polarization coefficient of a single RWA term, in ``[0, 1)``."""
    s = Omega_1 * Omega_1 / (rates.gamma1 * rates.gamma2)
    r = Omega_d / rates.gamma2
    return s / (1.0 + r * r + s)


def dominant_term(terms, rates: RelaxationRates):
    """The term with the largest polarization coefficient, and its dominance ratio.

    The ratio is best P over second-best P; ``inf`` for a single term or when
    every competitor gives zero, and 1.0 when nothing is driven at all. Ties
    go to the smallest ``|l|``, positive orders first.
    """
    terms = list(terms)
    if not terms:
        raise ValueError("terms must be non-empty")
    ranked = sorted(
        terms,
        key=lambda m: (
            -polarization_coefficient(m.Omega_1l, m.Omega_dl, rates),
            abs(m.l),
            m.l < 0,
        ),
    )
    best = ranked[0]
    if len(ranked) == 1:
        return best, math.inf
    p1 = polarization_coefficient(best.Omega_1l, best.Omega_dl, rates)
    p2 = polarization_coefficient(ranked[1].Omega_1l, ranked[1].Omega_dl, rates)
    if p1 <= 0.0:
        return best, 1.0
    if p2 <= 0.0:
        return best, math.inf
    return best, float(p1) / float(p2)  # overflow to inf is the intended limit


def pair_factors(pair, cos_theta, sin_theta, cos_half, sin_half):
    """Per-unit drive factors of a level pair; works elementwise on arrays.

    Returns ``(transverse_modulation, transverse_coupling, longitudinal_modulation)``:

    * a linear transverse tone ``omega_T1 cos(w t)`` along x enters the rotated
      diagonal as ``(-omega_TL, omega_TL, 0)`` with
      ``omega_TL = omega_T1 sin(theta) cos(w t) / sqrt 2``;
    * the coupling is the positive-frequency part of the rotated off-diagonal
      element, half its envelope;
    * a longitudinal tone enters the diagonal as ``(-cos/2, cos/2, 3/2)``.
    """
    n1, n2 = pair
    tl = np.abs(sin_theta) / SQRT2
    c = np.asarray(cos_theta)
    if (n1, n2) == (1, 2):
        t_mod = 2.0 * tl
        env = np.abs(c) / SQRT2
        l_mod = np.abs(c)
    elif (n1, n2) == (1, 3):
        t_mod = tl
        env = np.abs(sin_half) / SQRT2
        l_mod = 0.5 * (3.0 + c)
    elif (n1, n2) == (2, 3):
        t_mod = tl
        env = np.abs(cos_half) / SQRT2
        l_mod = 0.5 * (3.0 - c)
    else:
        raise ValueError(f"invalid level pair {pair}")
    return t_mod, 0.5 * env, l_mod


def pair_splitting_arrays(pair, omega_R0, omega_dch):
    """Splitting of a level pair from the rotated diagonal ``(-w_R0/2, w_R0/2, w_dch)``."""
    n1, n2 = pair
    if (n1, n2) == (1, 2):
        return np.asarray(omega_R0) * 1.0
    if (n1, n2) == (1, 3):
        return omega_dch + 0.5 * omega_R0
    if (n1, n2) == (2, 3):
        return omega_dch - 0.5 * omega_R0
    raise ValueError(f"invalid level pair {pair}")


def pair_splitting(frame: StaticFrame, pair) -> float:
    """Static splitting of a level pair in the rotated frame."""
    return float(pair_splitting_arrays(pair, frame.omega_R0, frame.omega_dch))


def _factors(frame: StaticFrame, pair):
    return tuple(
        float(v)
        for v in pair_factors(pair, frame.cos_theta, frame.sin_theta, frame.cos_half, frame.sin_half)
    )


def transverse_modulation(frame: StaticFrame, pair) -> float:
    """Splitting modulation per unit linear transverse amplitude."""
    return _factors(frame, pair)[0]


def transverse_coupling(frame: StaticFrame, pair) -> float:
    """Positive-frequency coupling amplitude per unit linear transverse amplitude."""
    return _factors(frame, pair)[1]


def longitudinal_modulation(frame: StaticFrame, pair) -> float:
    """Splitting modulation per unit longitudinal amplitude."""
    return _factors(frame, pair)[2]


def single_antenna_decomposition(
    omega_T1: float, omega_T: float, frame: StaticFrame, pair=(1, 2)
) -> DriveDecomposition:
    """One linear transverse tone ``omega_T1 cos(omega_T t)``.

    The same tone modulates the splitting (through ``omega_TL``) and couples
    the pair (through ``omega_TT`` or the level-3 entries), so
    ``Omega_L = Omega_T = omega_T``.
    """
    return DriveDecomposition(
        Omega_0=pair_splitting(frame, pair),
        Omega_L1=omega_T1 * transverse_modulation(frame, pair),
        Omega_L=omega_T,
        Omega_T1=omega_T1 * transverse_coupling(frame, pair),
        Omega_T=omega_T,
        level_pair=tuple(pair),
    )


def two_antenna_decomposition(
    omega_acz_amp: float,
    Omega_L: float,
    omega_T1: float,
    Omega_T: float,
    frame: StaticFrame,
    pair=(1, 2),
    Omega_T1_effective: float | None = None,
) -> DriveDecomposition:
    """Longitudinal tone ``omega_acz_amp cos(Omega_L t)`` plus a transverse tone.

    ``Omega_T1_effective`` sets the pair coupling directly, bypassing the
    antenna-to-pair projection.
    """
    if Omega_T1_effective is None:
        coupling = omega_T1 * transverse_coupling(frame, pair)
    else:
        coupling = float(Omega_T1_effective)
    return DriveDecomposition(
        Omega_0=pair_splitting(frame, pair),
        Omega_L1=omega_acz_amp * longitudinal_modulation(frame, pair),
        Omega_L=Omega_L,
        Omega_T1=coupling,
        Omega_T=Omega_T,
        level_pair=tuple(pair),
    )


def evaluate(d: DriveDecomposition, rates: RelaxationRates, l_max: int):
    """Dominant-sideband P, dominance ratio and order via the compiled kernel."""
    return kernels.dominant_sideband(
        d.Omega_0, d.Omega_L1, d.Omega_L, d.Omega_T1, d.Omega_T, rates.gamma1, rates.gamma2, l_max
    )
