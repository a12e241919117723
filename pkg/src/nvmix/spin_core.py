"""Spin-1 triplet ground-state Hamiltonian and its eigen-level curves.

All frequencies are angular frequencies in rad/s; fields enter as
``omega = gamma_e * B``. Matrices use the m_S = (+1, 0, -1) basis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
SQRT2 = math.sqrt(2.0)

OMEGA_D = TWO_PI * 2.87e9
GAMMA_E = TWO_PI * 28.03e9


class BasisTag(enum.Enum):
    MS = "m_S"
    GSLAC = "near-GSLAC permuted"
    ROTATED = "rotated frame"


@dataclass(frozen=True)
class PhysicalConstants:
    """Zero-field splitting, gyromagnetic ratio and strain splitting.

    ``omega_D`` and ``omega_E`` in rad/s, ``gamma_e`` in rad/s per tesla.
    """

    omega_D: float = OMEGA_D
    gamma_e: float = GAMMA_E
    omega_E: float = 0.0

    def __post_init__(self):
        for name in ("omega_D", "gamma_e", "omega_E"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.omega_D <= 0:
            raise ValueError("omega_D must be positive")
        if self.gamma_e <= 0:
            raise ValueError("gamma_e must be positive")
        if self.omega_E < 0:
            raise ValueError("omega_E must be non-negative")
        if self.omega_E >= self.omega_D / 10:
            raise ValueError("omega_E must be below omega_D / 10")


@dataclass(frozen=True)
class FieldVector:
    """Magnetic field in angular-frequency units, ``omega = gamma_e * B``."""

    omega_x: float
    omega_y: float
    omega_z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.omega_x, self.omega_y, self.omega_z)):
            raise ValueError(f"field components must be finite, got {self}")

    @classmethod
    def from_tesla(cls, b, direction, constants: PhysicalConstants):
        d = np.asarray(direction, dtype=float)
        w = constants.gamma_e * float(b) * d
        return cls(float(w[0]), float(w[1]), float(w[2]))

    def __add__(self, other: FieldVector) -> FieldVector:
        return FieldVector(
            self.omega_x + other.omega_x,
            self.omega_y + other.omega_y,
            self.omega_z + other.omega_z,
        )

    def as_array(self):
        return np.array([self.omega_x, self.omega_y, self.omega_z])

    def omega_zd(self, constants: PhysicalConstants) -> float:
        """Axial detuning from the anti-crossing, ``omega_z - omega_D``."""
        return self.omega_z - constants.omega_D

    @property
    def omega_delta(self) -> complex:
        return -SQRT2 * complex(self.omega_x, -self.omega_y)


def omega_h(field: FieldVector, constants: PhysicalConstants) -> float:
    """Third diagonal entry of the shifted representation, ``(omega_D + 3 omega_z) / 2``."""
    return 0.5 * (constants.omega_D + 3.0 * field.omega_z)


@dataclass(frozen=True)
class TripletMatrix:
    entries: np.ndarray
    basis_tag: BasisTag = BasisTag.MS

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        if m.shape != (3, 3):
            raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    def is_hermitian(self, rtol=1e-12) -> bool:
        m = self.entries
        scale = max(np.abs(m).max(), 1e-300)
        return bool(np.abs(m - m.conj().T).max() <= rtol * scale)

    def conjugate_by(self, u: np.ndarray, basis_tag: BasisTag = BasisTag.ROTATED) -> TripletMatrix:
        """Return ``u^-1 M u``."""
        return TripletMatrix(np.linalg.inv(u) @ self.entries @ u, basis_tag)

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def __sub__(self, other: TripletMatrix) -> np.ndarray:
        return self.entries - other.entries


def spin1_operators():
    """S_x, S_y, S_z (in units of hbar) for S = 1 in the (+1, 0, -1) basis."""
    r = 1.0 / SQRT2
    sx = r * np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=complex)
    sy = r * np.array([[0, -1j, 0], [1j, 0, -1j], [0, 1j, 0]], dtype=complex)
    sz = np.diag([1.0, 0.0, -1.0]).astype(complex)
    return TripletMatrix(sx), TripletMatrix(sy), TripletMatrix(sz)


_SX, _SY, _SZ = (m.entries for m in spin1_operators())
_SP = _SX + 1j * _SY
_SM = _SX - 1j * _SY


def build_hamiltonian(field: FieldVector, constants: PhysicalConstants) -> TripletMatrix:
    """Triplet ground-state Hamiltonian divided by hbar, in the m_S basis."""
    h = (
        constants.omega_D * (_SZ @ _SZ)
        + 0.5 * constants.omega_E * (_SP @ _SP + _SM @ _SM)
        - (field.omega_x * _SX + field.omega_y * _SY + field.omega_z * _SZ)
    )
    return TripletMatrix(h, BasisTag.MS)


# slots (1, 2, 3) <- m_S (+1, 0, -1): the crossing pair already leads
GSLAC_ORDER = (0, 1, 2)


def permute_to_gslac(m: TripletMatrix) -> TripletMatrix:
    idx = np.array(GSLAC_ORDER)
    return TripletMatrix(m.entries[np.ix_(idx, idx)], BasisTag.GSLAC)


def gslac_representation(field: FieldVector, constants: PhysicalConstants) -> TripletMatrix:
    """Hamiltonian written around the anti-crossing, with ``omega_zd / 2`` added to the diagonal."""
    wzd = field.omega_zd(constants)
    wd = field.omega_delta
    we = constants.omega_E
    m = np.array(
        [
            [-0.5 * wzd, 0.5 * wd, we],
            [0.5 * wd.conjugate(), 0.5 * wzd, 0.5 * wd],
            [we, 0.5 * wd.conjugate(), omega_h(field, constants)],
        ],
        dtype=complex,
    )
    return TripletMatrix(m, BasisTag.GSLAC)


def eigen_levels(b_values, direction, constants: PhysicalConstants):
    """Sorted eigen-energies (rad/s) of the Hamiltonian along a field direction.

    Returns a list of ``(B, energies)`` pairs with ``energies`` ascending.
    """
    d = np.asarray(direction, dtype=float)
    if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > 1e-12:
        raise ValueError(f"direction must be a unit 3-vector, got {direction!r}")
    b = np.asarray(b_values, dtype=float)
    if not np.all(np.isfinite(b)):
        raise ValueError("b_values must be finite")
    energies = level_energies(b, d, constants)
    return [(float(bi), e) for bi, e in zip(b, energies)]


def level_energies(b, direction, constants: PhysicalConstants) -> np.ndarray:
    """Vectorised eigen-energies, shape ``(len(b), 3)``, ascending per row."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    w = constants.gamma_e * b[:, None] * np.asarray(direction, dtype=float)[None, :]
    base = constants.omega_D * (_SZ @ _SZ) + 0.5 * constants.omega_E * (_SP @ _SP + _SM @ _SM)
    h = (
        base[None]
        - w[:, 0, None, None] * _SX[None]
        - w[:, 1, None, None] * _SY[None]
        - w[:, 2, None, None] * _SZ[None]
    )
    # eigvalsh returns ascending values; ties keep LAPACK's index order
    return np.linalg.eigvalsh(h)


def field_direction(alpha: float) -> np.ndarray:
    """Unit vector in the xz plane at angle ``alpha`` from the NV (z) axis."""
    return np.array([math.sin(alpha), 0.0, math.cos(alpha)])
