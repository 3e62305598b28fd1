"""Scenario configuration and the flat key-value config file format.

A config file holds one ``key = value`` pair per line, keys named after the
usual symbols (``P``, ``N``, ``delta``, ``h1``, ``delta_h``, ``f``, ``B``,
``Pt``, ``TN``, ``K``, ``d_e``, ``theta``, ``dt``, ...). Angles are given in
degrees. ``#`` starts a comment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

SPEED_OF_LIGHT = 299_792_458.0  # m/s
EARTH_RADIUS_KM = 6371.0
MU_EARTH = 3.986004418e14  # m^3/s^2
BOLTZMANN = 1.380649e-23  # J/K

MODES = ("isotropic", "dipole", "butler", "steering")


class ConfigError(ValueError):
    """Raised for an inconsistent or unparsable scenario."""


@dataclass(frozen=True)
class ConstellationConfig:
    """Full scenario description: orbits plus RF/antenna parameters.

    Defaults reproduce the reference parameter set (7 planes, 140 satellites,
    20 GHz, 200 MHz, 10 W, Butler matrix with K=4, 30 s matching period).
    ``raan`` and ``phase0`` may be left ``None`` to get the Walker-star node
    spread and a zero phase offset in every plane.
    """

    n_planes: int = 7
    n_sats: int = 140
    inclination: float = math.radians(98.6)
    h1: float = 600.0  # km
    delta_h: float = 4.0  # km
    raan: tuple[float, ...] | None = None
    phase0: tuple[float, ...] | None = None
    frequency: float = 20e9
    bandwidth: float = 200e6
    tx_power: float = 10.0
    noise_temp: float = 324.81
    ports: int = 4
    element_spacing: float | None = None  # m, None -> lambda/2
    theta_fixed: float = math.radians(100.0)
    dt: float = 30.0
    cross_seam: bool = False
    sinr_margin: float = 1.0
    mode: str = "butler"
    raan_spread: str = "star"  # "star" (pi) or "delta" (2 pi)
    all_plane_pairs: bool = False
    update_weights: bool = False
    restore_on_guard_fail: bool = False

    def __post_init__(self) -> None:
        if self.n_planes < 2:
            raise ConfigError(f"need at least 2 orbital planes, got P={self.n_planes}")
        if self.n_sats % self.n_planes:
            raise ConfigError(f"N={self.n_sats} is not divisible by P={self.n_planes}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown antenna mode {self.mode!r}; expected one of {MODES}")
        if self.ports < 1 or self.ports & (self.ports - 1):
            raise ConfigError(f"K must be a power of two, got {self.ports}")
        if self.sinr_margin < 1.0:
            raise ConfigError("sinr_margin must be >= 1")
        if self.raan_spread not in ("star", "delta"):
            raise ConfigError(f"raan_spread must be 'star' or 'delta', got {self.raan_spread!r}")
        if self.h1 < 0 or self.delta_h < 0:
            raise ConfigError("altitudes must be non-negative")
        for name in ("raan", "phase0"):
            value = getattr(self, name)
            if value is not None:
                if len(value) != self.n_planes:
                    raise ConfigError(f"{name} needs {self.n_planes} entries, got {len(value)}")
                object.__setattr__(self, name, tuple(float(x) for x in value))

    @property
    def sats_per_plane(self) -> int:
        return self.n_sats // self.n_planes

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def spacing(self) -> float:
        """Element spacing in metres (half a wavelength unless set)."""
        if self.element_spacing is None:
            return self.wavelength / 2.0
        return self.element_spacing

    @property
    def altitudes(self) -> tuple[float, ...]:
        return tuple(self.h1 + p * self.delta_h for p in range(self.n_planes))

    @property
    def plane_raan(self) -> tuple[float, ...]:
        if self.raan is not None:
            return self.raan
        span = math.pi if self.raan_spread == "star" else 2.0 * math.pi
        return tuple(p * span / self.n_planes for p in range(self.n_planes))

    @property
    def plane_phase(self) -> tuple[float, ...]:
        if self.phase0 is not None:
            return self.phase0
        return (0.0,) * self.n_planes

    @property
    def effective_ports(self) -> int:
        """Number of beams per face actually used by the antenna mode."""
        return self.ports if self.mode in ("butler", "steering") else 1

    def with_(self, **changes) -> "ConstellationConfig":
        return replace(self, **changes)


# symbol -> (field name, converter)
_DEG = math.radians


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _angles(text: str) -> tuple[float, ...]:
    return tuple(math.radians(float(x)) for x in text.replace(",", " ").split())


def _spacing(text: str) -> float | None:
    if text.strip().lower() in ("auto", "c/2f", "lambda/2"):
        return None
    return float(text)


_KEYS = {
    "P": ("n_planes", int),
    "N": ("n_sats", int),
    "delta": ("inclination", lambda s: _DEG(float(s))),
    "h1": ("h1", float),
    "delta_h": ("delta_h", float),
    "epsilon": ("raan", _angles),
    "phase0": ("phase0", _angles),
    "f": ("frequency", float),
    "B": ("bandwidth", float),
    "Pt": ("tx_power", float),
    "TN": ("noise_temp", float),
    "K": ("ports", int),
    "d_e": ("element_spacing", _spacing),
    "theta": ("theta_fixed", lambda s: _DEG(float(s))),
    "dt": ("dt", float),
    "cross_seam": ("cross_seam", _bool),
    "sinr_margin": ("sinr_margin", float),
    "mode": ("mode", str.strip),
    "raan_spread": ("raan_spread", str.strip),
    "all_plane_pairs": ("all_plane_pairs", _bool),
    "update_weights": ("update_weights", _bool),
    "restore_on_guard_fail": ("restore_on_guard_fail", _bool),
}


def parse_config(text: str, base: ConstellationConfig | None = None) -> ConstellationConfig:
    """Parse ``key = value`` lines on top of ``base`` (default: reference set)."""
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        elif ":" in line:
            key, value = line.split(":", 1)
        else:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        name, convert = _KEYS[key]
        try:
            changes[name] = convert(value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    return replace(base or ConstellationConfig(), **changes)


def load_config(path: str | Path, base: ConstellationConfig | None = None) -> ConstellationConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base)


def dump_config(cfg: ConstellationConfig) -> str:
    """Render ``cfg`` in the key-value format (round-trips through parse_config)."""
    by_field = {name: key for key, (name, _) in _KEYS.items()}
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        key = by_field[f.name]
        if value is None:
            if f.name == "element_spacing":
                lines.append(f"{key} = auto")
            continue
        if f.name in ("inclination", "theta_fixed"):
            value = repr(math.degrees(value))
        elif f.name in ("raan", "phase0"):
            value = " ".join(repr(math.degrees(x)) for x in value)
        elif isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


TABLE_I = ConstellationConfig()
