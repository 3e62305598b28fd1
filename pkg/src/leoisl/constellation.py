"""Walker-star constellation geometry on ideal circular orbits.

Positions are in km in an Earth-centred inertial frame. Every satellite
carries a body frame: zenith points radially out, roll along the velocity
and pitch = roll x zenith, which puts neighbours in adjacent planes close
to the +/- pitch axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import EARTH_RADIUS_KM, MU_EARTH, SPEED_OF_LIGHT, ConfigError, ConstellationConfig

MU_KM = MU_EARTH * 1e-9  # km^3/s^2


@dataclass(frozen=True)
class OrbitalElements:
    sat_id: int
    plane: int  # 0-based
    altitude: float  # km
    inclination: float
    raan: float
    mean_anomaly0: float


@dataclass(frozen=True)
class SatelliteState:
    """Position, velocity and body frame of one satellite at one instant."""

    sat_id: int
    plane: int
    r: np.ndarray  # km
    v: np.ndarray  # km/s
    e_pitch: np.ndarray
    e_roll: np.ndarray
    e_zenith: np.ndarray


@dataclass(frozen=True)
class RelativeGeometry:
    """Where satellite v sits as seen from satellite u's body frame."""

    distance: float  # km
    phi: float  # azimuth from the pitch axis, (-pi, pi]
    Theta: float  # polar angle from zenith, [0, pi]
    x: float
    y: float
    z: float


@dataclass
class Constellation:
    config: ConstellationConfig
    elements: list[OrbitalElements]

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def planes(self) -> np.ndarray:
        return np.array([e.plane for e in self.elements], dtype=np.int64)


def orbital_period(h: float) -> float:
    """Period in seconds of a circular orbit at altitude ``h`` km."""
    if h < 0:
        raise ValueError("altitude must be non-negative")
    a = (EARTH_RADIUS_KM + h) * 1e3
    return 2.0 * math.pi * math.sqrt(a**3 / MU_EARTH)


def orbital_speed(h: float) -> float:
    """Circular speed in km/s."""
    return math.sqrt(MU_KM / (EARTH_RADIUS_KM + h))


def build_constellation(config: ConstellationConfig, seed: int | None = None) -> Constellation:
    """Lay out the constellation at t=0.

    With ``seed`` given, per-plane phase offsets are drawn uniformly from
    [0, 2 pi) and override ``config.phase0``; otherwise ``config.phase0`` is
    used as is.
    """
    if config.n_planes < 2:
        raise ConfigError("need at least 2 planes")
    if config.n_sats % config.n_planes:
        raise ConfigError("N must be divisible by P")
    if seed is None:
        phases = config.plane_phase
    else:
        phases = tuple(draw_phases(config.n_planes, seed))
    per_plane = config.sats_per_plane
    elements = []
    for p, (h, raan, phase) in enumerate(zip(config.altitudes, config.plane_raan, phases)):
        for n in range(per_plane):
            elements.append(
                OrbitalElements(
                    sat_id=p * per_plane + n,
                    plane=p,
                    altitude=h,
                    inclination=config.inclination,
                    raan=raan,
                    mean_anomaly0=phase + 2.0 * math.pi * n / per_plane,
                )
            )
    return Constellation(config, elements)


def draw_phases(n_planes: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * math.pi, size=n_planes)


def _rotation(raan: np.ndarray, inc: np.ndarray) -> np.ndarray:
    """Rz(raan) @ Rx(inc), stacked."""
    cO, sO = np.cos(raan), np.sin(raan)
    ci, si = np.cos(inc), np.sin(inc)
    R = np.empty(raan.shape + (3, 3))
    R[..., 0, 0] = cO
    R[..., 0, 1] = -sO * ci
    R[..., 0, 2] = sO * si
    R[..., 1, 0] = sO
    R[..., 1, 1] = cO * ci
    R[..., 1, 2] = -cO * si
    R[..., 2, 0] = 0.0
    R[..., 2, 1] = si
    R[..., 2, 2] = ci
    return R


def propagate_arrays(constellation: Constellation, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Positions and velocities (N, 3) at time ``t``."""
    el = constellation.elements
    a = EARTH_RADIUS_KM + np.array([e.altitude for e in el])
    n = np.sqrt(MU_KM / a**3)
    u = np.array([e.mean_anomaly0 for e in el]) + n * t
    R = _rotation(np.array([e.raan for e in el]), np.array([e.inclination for e in el]))
    cu, su = np.cos(u), np.sin(u)
    zero = np.zeros_like(u)
    r_orb = a[:, None] * np.stack([cu, su, zero], axis=1)
    v_orb = (a * n)[:, None] * np.stack([-su, cu, zero], axis=1)
    r = np.einsum("nij,nj->ni", R, r_orb)
    v = np.einsum("nij,nj->ni", R, v_orb)
    return r, v


def body_frames(r: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(N, 3, 3) array whose rows are the pitch, roll and zenith axes."""
    zen = r / np.linalg.norm(r, axis=1, keepdims=True)
    roll = v / np.linalg.norm(v, axis=1, keepdims=True)
    pitch = np.cross(roll, zen)
    return np.stack([pitch, roll, zen], axis=1)


def propagate(constellation: Constellation, t: float) -> list[SatelliteState]:
    if t < 0:
        raise ValueError("t must be >= 0")
    r, v = propagate_arrays(constellation, t)
    frames = body_frames(r, v)
    return [
        SatelliteState(e.sat_id, e.plane, r[i], v[i], frames[i, 0], frames[i, 1], frames[i, 2])
        for i, e in enumerate(constellation.elements)
    ]


def relative_geometry(u: SatelliteState, v: SatelliteState) -> RelativeGeometry:
    """Position of ``v`` in ``u``'s body frame.

    For a peer exactly on the zenith axis phi is atan2(0, 0) = 0.
    """
    if u.sat_id == v.sat_id:
        raise ValueError("relative geometry of a satellite with itself")
    d = v.r - u.r
    x = float(d @ u.e_pitch)
    y = float(d @ u.e_roll)
    z = float(d @ u.e_zenith)
    dist = math.sqrt(x * x + y * y + z * z)
    if dist == 0.0:
        raise ValueError(f"satellites {u.sat_id} and {v.sat_id} coincide")
    Theta = math.acos(max(-1.0, min(1.0, z / dist)))
    return RelativeGeometry(dist, math.atan2(y, x), Theta, x, y, z)


def slant_range_limit(h_p: float, h_q: float) -> float:
    """Longest unobstructed distance between altitudes ``h_p`` and ``h_q`` km."""
    return math.sqrt(h_p * h_p + 2.0 * EARTH_RADIUS_KM * h_p) + math.sqrt(
        h_q * h_q + 2.0 * EARTH_RADIUS_KM * h_q
    )


def _altitude(s: SatelliteState) -> float:
    return float(np.linalg.norm(s.r)) - EARTH_RADIUS_KM


def line_of_sight(u: SatelliteState, v: SatelliteState) -> bool:
    dist = float(np.linalg.norm(v.r - u.r))
    return dist <= slant_range_limit(_altitude(u), _altitude(v))


def fspl(distance: float, f: float) -> float:
    """Free-space path loss (linear) for ``distance`` km at ``f`` Hz.

    Pass ``math.inf`` for a blocked path.
    """
    return (4.0 * math.pi * distance * 1e3 * f / SPEED_OF_LIGHT) ** 2


@dataclass
class PairwiseGeometry:
    """All-pairs relative geometry for one snapshot; index [i, w] = w seen from i."""

    r: np.ndarray
    v: np.ndarray
    frames: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    distance: np.ndarray
    phi: np.ndarray
    Theta: np.ndarray
    los: np.ndarray  # bool, False on the diagonal


def pairwise_geometry(constellation: Constellation, t: float) -> PairwiseGeometry:
    r, v = propagate_arrays(constellation, t)
    frames = body_frames(r, v)
    d = r[None, :, :] - r[:, None, :]
    x = np.einsum("ik,iwk->iw", frames[:, 0], d)
    y = np.einsum("ik,iwk->iw", frames[:, 1], d)
    z = np.einsum("ik,iwk->iw", frames[:, 2], d)
    dist = np.sqrt(x * x + y * y + z * z)
    n = len(r)
    with np.errstate(invalid="ignore", divide="ignore"):
        Theta = np.arccos(np.clip(z / dist, -1.0, 1.0))
    Theta[np.diag_indices(n)] = 0.0
    phi = np.arctan2(y, x)
    h = np.array([e.altitude for e in constellation.elements])
    horizon = np.sqrt(h * h + 2.0 * EARTH_RADIUS_KM * h)
    los = dist <= horizon[:, None] + horizon[None, :]
    los[np.diag_indices(n)] = False
    return PairwiseGeometry(r, v, frames, x, y, z, dist, phi, Theta, los)
