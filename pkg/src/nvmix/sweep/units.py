"""Quantity strings with explicit units.

Every physical entry in a sweep config is a string such as ``"145 MHz"`` or
``"-30 dBm"``. Ordinary frequencies (Hz family) are converted to angular
frequency with a factor 2 pi; ``rad/s`` values are taken as given.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# unit -> (dimension, multiplier to the canonical unit)
_UNITS = {
    "Hz": ("rad/s", TWO_PI),
    "kHz": ("rad/s", TWO_PI * 1e3),
    "MHz": ("rad/s", TWO_PI * 1e6),
    "GHz": ("rad/s", TWO_PI * 1e9),
    "rad/s": ("rad/s", 1.0),
    "krad/s": ("rad/s", 1e3),
    "Mrad/s": ("rad/s", 1e6),
    "Grad/s": ("rad/s", 1e9),
    "T": ("T", 1.0),
    "mT": ("T", 1e-3),
    "G": ("T", 1e-4),
    "A": ("A", 1.0),
    "mA": ("A", 1e-3),
    "V": ("V", 1.0),
    "mV": ("V", 1e-3),
    "deg": ("rad", math.pi / 180.0),
    "rad": ("rad", 1.0),
    "dBm": ("dBm", 1.0),
    "H": ("H", 1.0),
    "uH": ("H", 1e-6),
    "nH": ("H", 1e-9),
    "ohm": ("ohm", 1.0),
    "T/A": ("T/A", 1.0),
    "mT/A": ("T/A", 1e-3),
    "GHz/T": ("rad/s/T", TWO_PI * 1e9),
    "MHz/T": ("rad/s/T", TWO_PI * 1e6),
    "rad/s/T": ("rad/s/T", 1.0),
    "MHz/V": ("rad/s/V", TWO_PI * 1e6),
    "rad/s/V": ("rad/s/V", 1.0),
    "MHz/sqrtW": ("rad/s/sqrtW", TWO_PI * 1e6),
    "GHz/sqrtW": ("rad/s/sqrtW", TWO_PI * 1e9),
    "rad/s/sqrtW": ("rad/s/sqrtW", 1.0),
}

_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/]+)\s*$")


class UnitError(ValueError):
    pass


@dataclass(frozen=True)
class Quantity:
    value: float
    dimension: str


def parse_quantity(text, expect: str | None = None) -> Quantity:
    """Parse ``"<number> <unit>"`` into canonical units.

    >>> parse_quantity("1 GHz").value == 2e9 * math.pi
    True
    """
    if not isinstance(text, str):
        raise UnitError(f"expected a quantity string with units, got {text!r}")
    m = _PATTERN.match(text)
    if m is None:
        raise UnitError(f"cannot parse quantity {text!r}")
    number, unit = m.groups()
    if unit not in _UNITS:
        raise UnitError(f"unknown unit {unit!r} in {text!r}")
    dim, scale = _UNITS[unit]
    if expect is not None and dim != expect:
        raise UnitError(f"{text!r} has dimension {dim}, expected {expect}")
    value = float(number) * scale
    if not math.isfinite(value):
        raise UnitError(f"non-finite quantity {text!r}")
    return Quantity(value, dim)


def parse_value(text, expect: str) -> float:
    return parse_quantity(text, expect).value
