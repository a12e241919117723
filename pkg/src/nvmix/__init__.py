"""Frequency-mixing spectroscopy of the NV triplet near the level anti-crossing.

Submodules:

* ``spin_core``: spin-1 Hamiltonian, field vectors and eigen-levels.
* ``frame``: rotation that diagonalises the static crossing block.
* ``rwa``: sideband decomposition, polarization coefficient and dominant term.
* ``resonance``: resonance fields for superharmonic, second-Larmor and two-tone lines.
* ``oracle``: time-domain Lindblad integration used to check the RWA.
* ``sweep``: config-driven maps, CSV/PNG output and the ``nvmix`` CLI.
"""

from .frame import StaticFrame, static_frame, transform_longitudinal_drive, transform_transverse_drive
from .kernels import BACKEND
from .oracle import DensityMatrix, evolve, steady_state_polarization
from .resonance import (
    GeometryConfig,
    LineKind,
    ResonanceLine,
    second_larmor_fields,
    superharmonic_fields,
    two_tone_matching,
)
from .rwa import (
    DriveDecomposition,
    MixingTerm,
    RelaxationRates,
    dominant_term,
    jacobi_anger_sidebands,
    polarization_coefficient,
)
from .spin_core import FieldVector, PhysicalConstants, TripletMatrix, build_hamiltonian, level_energies

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DensityMatrix",
    "DriveDecomposition",
    "FieldVector",
    "GeometryConfig",
    "LineKind",
    "MixingTerm",
    "PhysicalConstants",
    "RelaxationRates",
    "ResonanceLine",
    "StaticFrame",
    "TripletMatrix",
    "build_hamiltonian",
    "dominant_term",
    "evolve",
    "jacobi_anger_sidebands",
    "level_energies",
    "polarization_coefficient",
    "second_larmor_fields",
    "static_frame",
    "steady_state_polarization",
    "superharmonic_fields",
    "transform_longitudinal_drive",
    "transform_transverse_drive",
    "two_tone_matching",
]
