"""TOML sweep configuration.

Schema (every physical value is a string with units)::

    mode = "single"            # or "two"
    pairs = [[1, 2]]           # level pairs, 1-based, combined by largest P
    l_max = 40
    sideband = "dominant"      # or an integer order l

    [axes.x]                   # and [axes.y]
    parameter = "B"            # one of PARAMETERS
    start = "0.07 T"
    stop = "0.135 T"
    points = 400

    [static]                   # only when no axis sets the field
    field = "0.1 T"            # or current = "1 A"

    [rates]
    gamma1 = "0.5 MHz"
    gamma2 = "2 MHz"
    gamma2_convention = "total" # or "pure"

    [geometry]
    misalignment = "1 deg"
    field_to_current = "0.01 T/A"

    [constants]                # optional overrides
    omega_D = "2.87 GHz"
    gamma_e = "28.03 GHz/T"
    omega_E = "0 Hz"

    [transverse]
    frequency = "145 MHz"
    power = "10 dBm"           # or amplitude = "5 MHz"
    calibration = "1 GHz/sqrtW"
    mismatch = 6.0             # or inductance = "15.9 nH"
    effective_coupling = "5.6 MHz"  # optional, sets the pair coupling directly

    [longitudinal]             # two-antenna mode only
    frequency = "10.5 MHz"
    voltage_calibration = "10.5 MHz/V"  # for a V_RF axis or voltage = "..."

    [resonances]
    superharmonic = [1, 12]    # inclusive order range
    second_larmor = true
    two_tone = [-3, 3]

    [oracle]
    samples = 25

    [output]
    csv = "map.csv"
    png = "map.png"
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..resonance import GeometryConfig
from ..rwa import RelaxationRates
from ..spin_core import PhysicalConstants
from .antenna import AntennaModel
from .units import UnitError, parse_value

# axis parameter -> canonical unit
PARAMETERS = {
    "B": "T",  # static field magnitude
    "I_mag": "A",  # static-field coil current
    "P_T": "dBm",  # transverse antenna power
    "P_L": "dBm",  # longitudinal antenna power
    "V_RF": "V",  # longitudinal antenna voltage amplitude
    "A_T": "rad/s",  # transverse amplitude, set directly
    "A_L": "rad/s",  # longitudinal amplitude, set directly
}
FIELD_PARAMETERS = ("B", "I_mag")
TRANSVERSE_PARAMETERS = ("P_T", "A_T")
LONGITUDINAL_PARAMETERS = ("P_L", "V_RF", "A_L")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    start: float
    stop: float
    points: int

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ConfigError(f"unknown axis parameter {self.parameter!r}; choose from {sorted(PARAMETERS)}")
        if self.points < 2:
            raise ConfigError(f"axis {self.parameter} needs at least 2 points")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError(f"axis {self.parameter} range must be finite")

    @property
    def unit(self) -> str:
        return PARAMETERS[self.parameter]

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.points)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.points - 1)


@dataclass(frozen=True)
class ToneConfig:
    frequency: float
    power: float | None = None  # dBm
    amplitude: float | None = None  # rad/s
    voltage: float | None = None  # V
    antenna: AntennaModel | None = None
    voltage_calibration: float | None = None  # rad/s per volt
    effective_coupling: float | None = None  # rad/s


@dataclass(frozen=True)
class ResonanceRequest:
    superharmonic: tuple | None = None
    second_larmor: bool = False
    two_tone: tuple | None = None


@dataclass(frozen=True)
class SweepConfig:
    x_axis: SweepAxis
    y_axis: SweepAxis
    rates: RelaxationRates
    transverse: ToneConfig
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    mode: str = "single"
    pairs: tuple = ((1, 2),)
    l_max: int = 40
    sideband: str | int = "dominant"
    longitudinal: ToneConfig | None = None
    static_field: float | None = None
    gamma2_convention: str = "total"
    resonances: ResonanceRequest = field(default_factory=ResonanceRequest)
    oracle_samples: int = 25
    csv_path: str | None = None
    png_path: str | None = None

    def __post_init__(self):
        validate(self)

    @property
    def axes(self):
        return (self.x_axis, self.y_axis)

    def axis_for(self, names):
        for ax in self.axes:
            if ax.parameter in names:
                return ax
        return None


def validate(cfg: SweepConfig) -> None:
    if cfg.x_axis.parameter == cfg.y_axis.parameter:
        raise ConfigError("x and y axes must sweep different parameters")
    if cfg.mode not in ("single", "two"):
        raise ConfigError(f"mode must be 'single' or 'two', got {cfg.mode!r}")
    if cfg.l_max < 0:
        raise ConfigError("l_max must be >= 0")
    if not (cfg.sideband == "dominant" or isinstance(cfg.sideband, int)):
        raise ConfigError("sideband must be 'dominant' or an integer order")
    if isinstance(cfg.sideband, int) and abs(cfg.sideband) > cfg.l_max:
        raise ConfigError("fixed sideband order exceeds l_max")
    for pair in cfg.pairs:
        if len(pair) != 2 or not 1 <= pair[0] < pair[1] <= 3:
            raise ConfigError(f"invalid level pair {pair}")
    if not cfg.pairs:
        raise ConfigError("at least one level pair is required")
    if cfg.oracle_samples < 1:
        raise ConfigError("oracle samples must be >= 1")
    if cfg.gamma2_convention not in ("total", "pure"):
        raise ConfigError("gamma2_convention must be 'total' or 'pure'")

    field_axes = [a for a in cfg.axes if a.parameter in FIELD_PARAMETERS]
    if len(field_axes) > 1:
        raise ConfigError("only one axis may set the static field")
    if field_axes and cfg.static_field is not None:
        raise ConfigError("static field given both as an axis and in [static]")
    if not field_axes and cfg.static_field is None:
        raise ConfigError("static field missing: sweep B or I_mag, or set [static]")

    t_axis = cfg.axis_for(TRANSVERSE_PARAMETERS)
    l_axis = cfg.axis_for(LONGITUDINAL_PARAMETERS)
    if len([a for a in cfg.axes if a.parameter in TRANSVERSE_PARAMETERS]) > 1:
        raise ConfigError("only one axis may set the transverse amplitude")
    if len([a for a in cfg.axes if a.parameter in LONGITUDINAL_PARAMETERS]) > 1:
        raise ConfigError("only one axis may set the longitudinal amplitude")
    _check_tone(cfg.transverse, "transverse", t_axis)
    if cfg.mode == "single":
        if l_axis is not None:
            raise ConfigError(f"axis {l_axis.parameter} needs mode = 'two'")
    else:
        if cfg.longitudinal is None:
            raise ConfigError("mode 'two' needs a [longitudinal] section")
        _check_tone(cfg.longitudinal, "longitudinal", l_axis)
        if cfg.longitudinal.effective_coupling is not None:
            raise ConfigError("effective_coupling applies to the transverse tone only")


def _check_tone(tone: ToneConfig, name: str, axis: SweepAxis | None):
    if not tone.frequency > 0:
        raise ConfigError(f"{name} frequency must be positive")
    fixed = [v is not None for v in (tone.power, tone.amplitude, tone.voltage)]
    if sum(fixed) > 1:
        raise ConfigError(f"{name}: give at most one of power, amplitude, voltage")
    if axis is not None and any(fixed):
        raise ConfigError(f"{name} amplitude set both by axis {axis.parameter} and a fixed value")
    has_coupling = name == "transverse" and tone.effective_coupling is not None
    if axis is None and not any(fixed) and not has_coupling:
        raise ConfigError(f"{name} amplitude missing")
    needs_antenna = tone.power is not None or (axis is not None and axis.parameter in ("P_T", "P_L"))
    if needs_antenna and tone.antenna is None:
        raise ConfigError(f"{name} power needs calibration and mismatch or inductance")
    needs_volts = tone.voltage is not None or (axis is not None and axis.parameter == "V_RF")
    if needs_volts and tone.voltage_calibration is None:
        raise ConfigError(f"{name} voltage needs voltage_calibration")
    if tone.amplitude is not None and tone.amplitude < 0:
        raise ConfigError(f"{name} amplitude must be non-negative")


def _q(section: dict, key: str, unit: str, where: str, default=None):
    if key not in section:
        return default
    try:
        return parse_value(section[key], unit)
    except UnitError as exc:
        raise ConfigError(f"[{where}] {key}: {exc}") from None


def _axis(raw: dict, name: str) -> SweepAxis:
    if not isinstance(raw, dict):
        raise ConfigError(f"missing [axes.{name}] table")
    param = raw.get("parameter")
    if param not in PARAMETERS:
        raise ConfigError(f"[axes.{name}] parameter must be one of {sorted(PARAMETERS)}, got {param!r}")
    unit = PARAMETERS[param]
    where = f"axes.{name}"
    if "start" not in raw or "stop" not in raw:
        raise ConfigError(f"[{where}] needs start and stop")
    points = raw.get("points")
    if not isinstance(points, int) or isinstance(points, bool):
        raise ConfigError(f"[{where}] points must be an integer")
    return SweepAxis(param, _q(raw, "start", unit, where), _q(raw, "stop", unit, where), points)


def _antenna(raw: dict, where: str, frequency: float):
    cal = _q(raw, "calibration", "rad/s/sqrtW", where)
    if cal is None:
        return None
    z0 = _q(raw, "Z0", "ohm", where, 50.0)
    ind = _q(raw, "inductance", "H", where)
    try:
        if ind is not None:
            return AntennaModel(ind, cal, z0)
        if "mismatch" in raw:
            return AntennaModel.from_mismatch(float(raw["mismatch"]), frequency, cal, z0)
    except ValueError as exc:
        raise ConfigError(f"[{where}] {exc}") from None
    raise ConfigError(f"[{where}] calibration needs inductance or mismatch")


def _tone(raw: dict, where: str) -> ToneConfig:
    freq = _q(raw, "frequency", "rad/s", where)
    if freq is None:
        raise ConfigError(f"[{where}] frequency is required")
    return ToneConfig(
        frequency=freq,
        power=_q(raw, "power", "dBm", where),
        amplitude=_q(raw, "amplitude", "rad/s", where),
        voltage=_q(raw, "voltage", "V", where),
        antenna=_antenna(raw, where, freq),
        voltage_calibration=_q(raw, "voltage_calibration", "rad/s/V", where),
        effective_coupling=_q(raw, "effective_coupling", "rad/s", where),
    )


def _order_range(raw, key):
    if raw is None:
        return None
    if not (isinstance(raw, list) and len(raw) == 2 and all(isinstance(v, int) for v in raw)):
        raise ConfigError(f"[resonances] {key} must be [first, last] integers")
    if raw[0] > raw[1]:
        raise ConfigError(f"[resonances] {key} range is reversed")
    return (raw[0], raw[1])


def config_from_dict(raw: dict, base_dir: Path | None = None) -> SweepConfig:
    try:
        axes = raw.get("axes", {})
        rates_raw = raw.get("rates", {})
        g1 = _q(rates_raw, "gamma1", "rad/s", "rates")
        g2 = _q(rates_raw, "gamma2", "rad/s", "rates")
        if g1 is None or g2 is None:
            raise ConfigError("[rates] gamma1 and gamma2 are required")
        rates = RelaxationRates(g1, g2)

        c_raw = raw.get("constants", {})
        defaults = PhysicalConstants()
        constants = PhysicalConstants(
            omega_D=_q(c_raw, "omega_D", "rad/s", "constants", defaults.omega_D),
            gamma_e=_q(c_raw, "gamma_e", "rad/s/T", "constants", defaults.gamma_e),
            omega_E=_q(c_raw, "omega_E", "rad/s", "constants", defaults.omega_E),
        )
        g_raw = raw.get("geometry", {})
        geom_defaults = GeometryConfig()
        geometry = GeometryConfig(
            misalignment_alpha=_q(g_raw, "misalignment", "rad", "geometry", geom_defaults.misalignment_alpha),
            field_to_current=_q(g_raw, "field_to_current", "T/A", "geometry", geom_defaults.field_to_current),
            constants=constants,
        )
        s_raw = raw.get("static", {})
        static_field = _q(s_raw, "field", "T", "static")
        current = _q(s_raw, "current", "A", "static")
        if current is not None:
            if static_field is not None:
                raise ConfigError("[static] give field or current, not both")
            static_field = geometry.field_to_current * current

        if "transverse" not in raw:
            raise ConfigError("[transverse] section is required")
        transverse = _tone(raw["transverse"], "transverse")
        longitudinal = _tone(raw["longitudinal"], "longitudinal") if "longitudinal" in raw else None

        res_raw = raw.get("resonances", {})
        resonances = ResonanceRequest(
            superharmonic=_order_range(res_raw.get("superharmonic"), "superharmonic"),
            second_larmor=bool(res_raw.get("second_larmor", False)),
            two_tone=_order_range(res_raw.get("two_tone"), "two_tone"),
        )
        out = raw.get("output", {})

        def _path(key):
            if key not in out:
                return None
            p = Path(out[key])
            return str(p if base_dir is None or p.is_absolute() else base_dir / p)

        sideband = raw.get("sideband", "dominant")
        pairs = tuple(tuple(int(v) for v in p) for p in raw.get("pairs", [[1, 2]]))
        return SweepConfig(
            x_axis=_axis(axes.get("x"), "x"),
            y_axis=_axis(axes.get("y"), "y"),
            rates=rates,
            transverse=transverse,
            geometry=geometry,
            mode=raw.get("mode", "single"),
            pairs=pairs,
            l_max=int(raw.get("l_max", 40)),
            sideband=sideband,
            longitudinal=longitudinal,
            static_field=static_field,
            gamma2_convention=rates_raw.get("gamma2_convention", "total"),
            resonances=resonances,
            oracle_samples=int(raw.get("oracle", {}).get("samples", 25)),
            csv_path=_path("csv"),
            png_path=_path("png"),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError, AttributeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> SweepConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, base_dir=path.parent)
