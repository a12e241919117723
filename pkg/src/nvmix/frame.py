"""Approximate diagonalisation of the static Hamiltonian near the anti-crossing.

The static part is rotated by ``U``, a rotation through ``theta / 2`` in the
plane of the two crossing levels. The same rotation is applied to the AC
drive, splitting it into effective longitudinal and transverse components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spin_core import (
    SQRT2,
    BasisTag,
    FieldVector,
    PhysicalConstants,
    TripletMatrix,
    gslac_representation,
    spin1_operators,
)


def frame_arrays(omega_x, omega_z, omega_D):
    """Frame quantities for static fields in the xz plane; works on arrays.

    Uses only sqrt and division, so an element gives the same bits whether
    it is evaluated alone or inside a larger array. Returns a dict of arrays:
    ``omega_zd, omega_H, omega_R0, cos, sin, cos_half, sin_half, omega_dch``.
    """
    wx = np.asarray(omega_x, dtype=float)
    wz = np.asarray(omega_z, dtype=float)
    wzd = wz - omega_D
    w_h = SQRT2 * wx
    w_r0 = np.sqrt(wzd * wzd + w_h * w_h)
    with np.errstate(invalid="ignore", divide="ignore"):
        c = wzd / w_r0
        s = w_h / w_r0
        # half angles of theta = atan2(omega_H, omega_zd); pick the
        # well-conditioned root and derive the other from sin(theta)
        c_big = np.sqrt(0.5 * (1.0 + c))
        s_from_c = s / (2.0 * c_big)
        s_big = np.sqrt(0.5 * (1.0 - c))
        s_big = np.where(s < 0.0, -s_big, s_big)
        c_from_s = s / (2.0 * s_big)
    upper = c >= 0.0
    cos_half = np.where(upper, c_big, c_from_s)
    sin_half = np.where(upper, s_from_c, s_big)
    return {
        "omega_zd": wzd,
        "omega_H": w_h,
        "omega_R0": w_r0,
        "cos": c,
        "sin": s,
        "cos_half": cos_half,
        "sin_half": sin_half,
        "omega_dch": 0.5 * (omega_D + 3.0 * wz),
    }


def rotation(cos_half: float, sin_half: float) -> np.ndarray:
    return np.array(
        [[cos_half, -sin_half, 0.0], [sin_half, cos_half, 0.0], [0.0, 0.0, 1.0]],
        dtype=complex,
    )


def rotation_from_angle(theta: float) -> np.ndarray:
    """``U`` for a given ``theta`` (rotation through ``theta / 2``)."""
    return rotation(math.cos(0.5 * theta), math.sin(0.5 * theta))


@dataclass(frozen=True)
class StaticFrame:
    theta: float
    eta: float
    omega_R0: float
    omega_H: float
    omega_dch: float
    U: TripletMatrix
    omega_zd: float = 0.0
    cos_theta: float = 1.0
    sin_theta: float = 0.0
    cos_half: float = 1.0
    sin_half: float = 0.0
    omega_E: float = 0.0

    def diagonal(self) -> np.ndarray:
        """Diagonal of the rotated static Hamiltonian: ``(-w_R0/2, w_R0/2, w_dch)``."""
        return np.array([-0.5 * self.omega_R0, 0.5 * self.omega_R0, self.omega_dch])

    def rotated_static(self) -> TripletMatrix:
        """``U^-1 H_dc U`` with the level-3 couplings left in place."""
        return static_hamiltonian(self).conjugate_by(self.U.entries)

    def level3_residual(self) -> float:
        """Largest coupling to the third level left over by the rotation (rad/s)."""
        m = self.rotated_static().entries
        return float(max(abs(m[0, 2]), abs(m[1, 2])))


def static_hamiltonian(frame: StaticFrame) -> TripletMatrix:
    """The static Hamiltonian rebuilt from the frame quantities."""
    w_r0 = frame.omega_R0
    m = np.array(
        [
            [-frame.cos_theta * w_r0 / 2, -frame.sin_theta * w_r0 / 2, frame.omega_E],
            [-frame.sin_theta * w_r0 / 2, frame.cos_theta * w_r0 / 2, -frame.omega_H / 2],
            [frame.omega_E, -frame.omega_H / 2, frame.omega_dch],
        ],
        dtype=complex,
    )
    return TripletMatrix(m, BasisTag.GSLAC)


def static_frame(omega_dc: FieldVector, constants: PhysicalConstants) -> StaticFrame:
    if omega_dc.omega_y != 0.0:
        raise ValueError("static field must lie in the xz plane (omega_dc.y == 0)")
    f = frame_arrays(omega_dc.omega_x, omega_dc.omega_z, constants.omega_D)
    w_h = float(f["omega_H"])
    wzd = float(f["omega_zd"])
    if w_h == 0.0 and wzd == 0.0:
        raise ValueError("rotation angle undefined: exact crossing with no transverse field")
    if w_h == 0.0:
        eta = math.copysign(math.inf, wzd)
    else:
        eta = wzd / w_h
    ch, sh = float(f["cos_half"]), float(f["sin_half"])
    return StaticFrame(
        theta=math.atan2(w_h, wzd),
        eta=eta,
        omega_R0=float(f["omega_R0"]),
        omega_H=w_h,
        omega_dch=float(f["omega_dch"]),
        U=TripletMatrix(rotation(ch, sh), BasisTag.GSLAC),
        omega_zd=wzd,
        cos_theta=float(f["cos"]),
        sin_theta=float(f["sin"]),
        cos_half=ch,
        sin_half=sh,
        omega_E=constants.omega_E,
    )


def frame_from_angle(theta: float) -> StaticFrame:
    """A frame carrying only the rotation, for drive transforms at a chosen angle."""
    return StaticFrame(
        theta=theta,
        eta=math.cos(theta) / math.sin(theta) if math.sin(theta) != 0 else math.inf,
        omega_R0=0.0,
        omega_H=0.0,
        omega_dch=0.0,
        U=TripletMatrix(rotation_from_angle(theta), BasisTag.GSLAC),
        cos_theta=math.cos(theta),
        sin_theta=math.sin(theta),
        cos_half=math.cos(0.5 * theta),
        sin_half=math.sin(0.5 * theta),
    )


@dataclass(frozen=True)
class TransformedDrive:
    omega_TL: float
    omega_TT: complex
    omega_T: complex
    third_level_couplings: tuple

    def matrix(self) -> TripletMatrix:
        """The rotated transverse drive as a 3x3 matrix."""
        c13, c23 = self.third_level_couplings
        m = np.array(
            [
                [-self.omega_TL, self.omega_TT, c13],
                [np.conj(self.omega_TT), self.omega_TL, c23],
                [np.conj(c13), np.conj(c23), 0.0],
            ],
            dtype=complex,
        )
        return TripletMatrix(m, BasisTag.ROTATED)


def transform_transverse_drive(omega_T: complex, frame: StaticFrame) -> TransformedDrive:
    w = complex(omega_T)
    wc = w.conjugate()
    s2, c2 = frame.sin_half, frame.cos_half
    omega_tl = 2.0**-1.5 * (w + wc).real * frame.sin_theta
    omega_tt = 2.0**-0.5 * (w * s2 * s2 - wc * c2 * c2)
    return TransformedDrive(
        omega_TL=omega_tl,
        omega_TT=omega_tt,
        omega_T=w,
        third_level_couplings=(-wc * s2 / SQRT2, -wc * c2 / SQRT2),
    )


def transform_longitudinal_drive(omega_acz: float, frame: StaticFrame) -> TripletMatrix:
    c, s = frame.cos_theta, frame.sin_theta
    m = 0.5 * omega_acz * np.array([[-c, s, 0.0], [s, c, 0.0], [0.0, 0.0, 3.0]], dtype=complex)
    return TripletMatrix(m, BasisTag.ROTATED)


_SX, _SY, _SZ = (m.entries for m in spin1_operators())


def ac_hamiltonian(omega_ac: FieldVector) -> TripletMatrix:
    """AC part of the Hamiltonian in the shifted representation.

    ``-omega_ac . S`` plus ``omega_ac,z / 2`` on the diagonal, the AC share of
    the ``omega_zd / 2`` shift used by :func:`gslac_representation`.
    """
    m = (
        -(omega_ac.omega_x * _SX + omega_ac.omega_y * _SY + omega_ac.omega_z * _SZ)
        + 0.5 * omega_ac.omega_z * np.eye(3)
    )
    return TripletMatrix(m, BasisTag.GSLAC)


def rotated_hamiltonian(field: FieldVector, constants: PhysicalConstants, frame: StaticFrame):
    """``U^-1 H U`` for the full (static + AC) field in the shifted representation."""
    return gslac_representation(field, constants).conjugate_by(frame.U.entries)


def conjugation_identities(theta: float):
    """The conjugation relations used to derive the rotated drive terms.

    Returns ``(name, lhs, rhs)`` triples; each states ``U^-1 lhs U == rhs``.
    The last one uses the fixed transverse amplitudes ``x = 0.7, y = -0.4``.
    """
    c, s = math.cos(theta), math.sin(theta)
    c2, s2 = math.cos(0.5 * theta), math.sin(0.5 * theta)
    x, y = 0.7, -0.4
    z, zc = complex(x, y), complex(x, -y)
    return [
        (
            "static_block",
            np.array([[-c, -s, 0], [-s, c, 0], [0, 0, 1]]),
            np.diag([-1.0, 1.0, 1.0]),
        ),
        (
            "longitudinal",
            np.diag([-1.0, 1.0, 0.0]),
            np.array([[-c, s, 0], [s, c, 0], [0, 0, 0]]),
        ),
        (
            "pair_exchange",
            np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]),
            np.array([[s, c, 0], [c, -s, 0], [0, 0, 0]]),
        ),
        (
            "outer_coupling",
            np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]]),
            np.array([[0, 0, c2], [0, 0, -s2], [c2, -s2, 0]]),
        ),
        (
            "inner_coupling",
            np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]]),
            np.array([[0, 0, s2], [0, 0, c2], [s2, c2, 0]]),
        ),
        (
            "transverse",
            np.array([[0, z, 0], [zc, 0, z], [0, zc, 0]]),
            np.array(
                [
                    [x * s, x * c + 1j * y, z * s2],
                    [x * c - 1j * y, -x * s, z * c2],
                    [zc * s2, zc * c2, 0],
                ]
            ),
        ),
    ]


@dataclass(frozen=True)
class IdentityReport:
    theta: float
    errors: dict

    @property
    def max_error(self) -> float:
        return max(self.errors.values())


def verify_conjugation_identities(theta: float) -> IdentityReport:
    """Conjugate each left-hand matrix by ``U(theta / 2)`` and compare with its right-hand side."""
    u = rotation_from_angle(theta)
    u_inv = np.linalg.inv(u)
    errors = {}
    for name, lhs, rhs in conjugation_identities(theta):
        errors[name] = float(np.abs(u_inv @ lhs @ u - rhs).max())
    return IdentityReport(theta, errors)
