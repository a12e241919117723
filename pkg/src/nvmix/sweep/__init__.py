"""Config-driven polarization maps, resonance overlays and output."""

from .antenna import AntennaModel, power_to_amplitude
from .config import PARAMETERS, ConfigError, SweepAxis, SweepConfig, load_config
from .grid import SweepGrid, oracle_check, overlay_resonances, resonance_lines, run_map
from .io import emit, read_csv

__all__ = [
    "AntennaModel",
    "ConfigError",
    "PARAMETERS",
    "SweepAxis",
    "SweepConfig",
    "SweepGrid",
    "emit",
    "load_config",
    "oracle_check",
    "overlay_resonances",
    "power_to_amplitude",
    "read_csv",
    "resonance_lines",
    "run_map",
]
