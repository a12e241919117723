"""Antenna impedance mismatch and power-to-amplitude calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AntennaModel:
    """Inductive antenna on a ``Z0`` line.

    ``calibration`` is the drive amplitude in rad/s per square-root watt delivered.
    """

    inductance: float
    calibration: float
    Z0: float = 50.0

    def __post_init__(self):
        if not (self.inductance > 0 and math.isfinite(self.inductance)):
            raise ValueError("inductance must be positive and finite")
        if not (self.calibration > 0 and math.isfinite(self.calibration)):
            raise ValueError("calibration must be positive and finite")
        if not self.Z0 > 0:
            raise ValueError("Z0 must be positive")

    def mismatch(self, omega: float) -> float:
        """Impedance mismatch coefficient ``zeta = omega L / Z0``."""
        return omega * self.inductance / self.Z0

    @classmethod
    def from_mismatch(cls, zeta: float, omega: float, calibration: float, Z0: float = 50.0):
        """Antenna whose mismatch coefficient at ``omega`` equals ``zeta``."""
        return cls(inductance=zeta * Z0 / omega, calibration=calibration, Z0=Z0)


def power_watts(power_dbm):
    return 10.0 ** ((np.asarray(power_dbm, dtype=float) - 30.0) / 10.0)


def power_to_amplitude(power_dbm, antenna: AntennaModel):
    """Drive amplitude (rad/s) for a delivered power in dBm."""
    return antenna.calibration * np.sqrt(power_watts(power_dbm))
