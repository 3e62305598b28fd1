"""Array responses, Butler-matrix and steered beams, benchmark antennas.

Each satellite carries two K x K planar arrays, one per side of the pitch
axis (face ``d_a`` = +1 / -1). A port is identified by the signed integer
``k_a = d_a * k`` with ``k`` in 1..K. Arrays radiate nothing towards the
opposite face.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import SPEED_OF_LIGHT, ConstellationConfig
from .constellation import PairwiseGeometry, RelativeGeometry

DIPOLE_PEAK = 1.64
# |cos phi| at or below this counts as the shield plane; peers in the same
# orbital plane sit exactly there and must not leak through on rounding noise
FACE_TOL = 1e-9


@dataclass(frozen=True)
class ArrayConfig:
    K: int
    d_e: float  # m
    lam: float  # m
    theta_fixed: float
    mode: str = "butler"

    def __post_init__(self) -> None:
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.mode in ("butler", "steering") and self.K & (self.K - 1):
            raise ValueError(f"K must be a power of two for {self.mode}, got {self.K}")

    @classmethod
    def from_config(cls, cfg: ConstellationConfig) -> "ArrayConfig":
        K = cfg.ports if cfg.mode in ("butler", "steering") else 1
        return cls(K, cfg.spacing, cfg.wavelength, cfg.theta_fixed, cfg.mode)

    @classmethod
    def half_wave(cls, K: int, f: float = 20e9, theta_fixed: float = math.radians(100.0),
                  mode: str = "butler") -> "ArrayConfig":
        lam = SPEED_OF_LIGHT / f
        return cls(K, lam / 2.0, lam, theta_fixed, mode)

    @property
    def phase_step(self) -> float:
        """2 pi d_e / lambda."""
        return 2.0 * math.pi * self.d_e / self.lam

    @property
    def n_ports(self) -> int:
        """Ports per face: K for Butler, a single beam otherwise."""
        return self.K if self.mode == "butler" else 1


@dataclass(frozen=True)
class BeamWeights:
    w: np.ndarray
    label: int | None = None


def _ula(phase: float, K: int) -> np.ndarray:
    return np.exp(-1j * phase * np.arange(K))


def array_response(phi: float, Theta: float, cfg: ArrayConfig) -> np.ndarray:
    """Steering vector a = a_pol (x) a_az of length K^2."""
    c = cfg.phase_step
    a_az = _ula(c * math.sin(phi), cfg.K)
    a_pol = _ula(c * math.cos(Theta), cfg.K)
    return np.kron(a_pol, a_az)


def butler_azimuth(k: int, K: int) -> np.ndarray:
    if not 1 <= k <= K:
        raise ValueError(f"Butler port k={k} out of range 1..{K}")
    return _ula(math.pi * (2 * k - 1) / K, K) / math.sqrt(K)


def butler_beam(k: int, cfg: ArrayConfig) -> BeamWeights:
    b_pol = _ula(cfg.phase_step * math.cos(cfg.theta_fixed), cfg.K) / math.sqrt(cfg.K)
    return BeamWeights(np.kron(b_pol, butler_azimuth(k, cfg.K)), label=k)


def steered_beam(phi: float, Theta: float, cfg: ArrayConfig, label: int | None = None) -> BeamWeights:
    return BeamWeights(array_response(phi, Theta, cfg) / cfg.K, label=label)


def on_face(phi: float, d_a: int) -> bool:
    return math.cos(phi) * d_a > FACE_TOL


def beam_gain(rel: RelativeGeometry, beam: BeamWeights, d_a: int, cfg: ArrayConfig) -> float:
    """|b^H a|^2 towards ``rel`` for a beam on face ``d_a``; 0 behind the shield."""
    if not on_face(rel.phi, d_a):
        return 0.0
    a = array_response(rel.phi, rel.Theta, cfg)
    return float(abs(np.vdot(beam.w, a)) ** 2)


def dipole_axis(d_a: int, theta_fixed: float) -> np.ndarray:
    """Body-frame dipole axis whose broadside passes through polar angle theta_fixed."""
    return np.array([-d_a * math.cos(theta_fixed), 0.0, math.sin(theta_fixed)])


def _dipole_pattern(cos_psi):
    cos_psi = np.clip(cos_psi, -1.0, 1.0)
    sin_psi = np.sqrt(1.0 - cos_psi * cos_psi)
    with np.errstate(invalid="ignore", divide="ignore"):
        g = DIPOLE_PEAK * (np.cos(0.5 * np.pi * cos_psi) / sin_psi) ** 2
    return np.where(sin_psi > 1e-12, g, 0.0)


def dipole_gain(rel: RelativeGeometry, d_a: int, cfg: ArrayConfig) -> float:
    """Half-wave dipole tilted so its pattern maximum sits at theta_fixed."""
    if not on_face(rel.phi, d_a):
        return 0.0
    look = np.array([rel.x, rel.y, rel.z]) / rel.distance
    return float(_dipole_pattern(look @ dipole_axis(d_a, cfg.theta_fixed)))


def port_gain(rel: RelativeGeometry, ka: int, cfg: ArrayConfig, beam: BeamWeights | None = None) -> float:
    """Gain of port ``ka`` towards ``rel`` for any antenna mode.

    Steering mode needs the steered ``beam``; Butler builds it from ``ka``.
    """
    if ka == 0:
        raise ValueError("port index must be non-zero")
    d_a = 1 if ka > 0 else -1
    if cfg.mode == "isotropic":
        return 1.0 if on_face(rel.phi, d_a) else 0.0
    if cfg.mode == "dipole":
        return dipole_gain(rel, d_a, cfg)
    if beam is None:
        if cfg.mode == "steering":
            raise ValueError("steering mode needs an explicit beam")
        beam = butler_beam(abs(ka), cfg)
    return beam_gain(rel, beam, d_a, cfg)


def total_gain(u_rel: RelativeGeometry, v_rel: RelativeGeometry, ka_u: int, ka_v: int,
               cfg: ArrayConfig, beam_u: BeamWeights | None = None,
               beam_v: BeamWeights | None = None) -> float:
    """Product of the u->v transmit gain and the v->u gain."""
    g_u = port_gain(u_rel, ka_u, cfg, beam_u)
    if g_u == 0.0:
        return 0.0
    return g_u * port_gain(v_rel, ka_v, cfg, beam_v)


def export_pattern(cfg: ArrayConfig, resolution_deg: float = 0.1,
                   steer_phi: float | None = None) -> list[tuple[float, float, int]]:
    """Azimuth sweep at Theta = theta_fixed for every port on both faces.

    Returns ``(phi_deg, gain_dbi, port)`` rows; shielded directions give
    ``-inf``. In steering mode the single beam per face is pointed at
    ``steer_phi`` (mirrored onto the -1 face).
    """
    if resolution_deg <= 0:
        raise ValueError("resolution must be positive")
    n = int(round(360.0 / resolution_deg))
    grid = -180.0 + resolution_deg * np.arange(n + 1)
    phis = np.radians(grid)
    theta = cfg.theta_fixed
    rows = []
    for d_a in (1, -1):
        for k in range(1, cfg.n_ports + 1):
            ka = d_a * k
            beam = None
            if cfg.mode == "steering":
                target = steer_phi if steer_phi is not None else 0.0
                if d_a < 0:
                    target = math.pi - target
                beam = steered_beam(target, theta, cfg, label=ka)
            for deg, phi in zip(grid, phis):
                rel = RelativeGeometry(1.0, float(phi), theta, math.cos(phi) * math.sin(theta),
                                       math.sin(phi) * math.sin(theta), math.cos(theta))
                g = port_gain(rel, ka, cfg, beam)
                rows.append((float(deg), 10.0 * math.log10(g) if g > 0 else -math.inf, ka))
    return rows


# -- vectorised tables ---------------------------------------------------


def dirichlet_sq(x, K: int):
    """|sum_{m<K} exp(-j m x)|^2 = sin^2(K x / 2) / sin^2(x / 2)."""
    x = np.asarray(x, dtype=float)
    s = np.sin(0.5 * x)
    small = np.abs(s) < 1e-9
    with np.errstate(invalid="ignore", divide="ignore"):
        out = (np.sin(0.5 * K * x) / s) ** 2
    return np.where(small, float(K * K), out)


def face_cos(phi: np.ndarray) -> np.ndarray:
    """cos(phi) with the shield-plane band snapped to exactly 0."""
    c = np.cos(phi)
    return np.where(np.abs(c) <= FACE_TOL, 0.0, c)


def face_mask(phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = face_cos(phi)
    return c > 0, c < 0


def port_gain_table(geom: PairwiseGeometry, cfg: ArrayConfig) -> np.ndarray:
    """Gains G[i, w, p] of satellite i's port p towards satellite w.

    Ports are ordered ``+1..+P`` then ``-1..-P`` with P = ``cfg.n_ports``.
    Only meaningful for the isotropic, dipole and Butler modes.
    """
    if cfg.mode == "steering":
        raise ValueError("steering gains depend on the target, not a port table")
    P = cfg.n_ports
    plus, minus = face_mask(geom.phi)
    n = geom.phi.shape[0]
    G = np.zeros((n, n, 2 * P))
    if cfg.mode == "isotropic":
        G[:, :, 0] = plus
        G[:, :, 1] = minus
    elif cfg.mode == "dipole":
        with np.errstate(invalid="ignore", divide="ignore"):
            inv = 1.0 / geom.distance
        inv[np.diag_indices(n)] = 0.0
        for j, d_a in enumerate((1, -1)):
            ax = dipole_axis(d_a, cfg.theta_fixed)
            cos_psi = (ax[0] * geom.x + ax[2] * geom.z) * inv
            G[:, :, j] = _dipole_pattern(cos_psi) * (plus if d_a > 0 else minus)
    else:
        K = cfg.K
        c = cfg.phase_step
        pol = dirichlet_sq(c * (np.cos(geom.Theta) - math.cos(cfg.theta_fixed)), K) / K
        sphi = c * np.sin(geom.phi)
        for k in range(1, K + 1):
            az = dirichlet_sq(sphi - math.pi * (2 * k - 1) / K, K) / K
            g = pol * az
            G[:, :, k - 1] = g * plus
            G[:, :, P + k - 1] = g * minus
    G[np.diag_indices(n)] = 0.0
    return G


def steering_gain(sin_phi, cos_Theta, sin_phi_t, cos_Theta_t, cfg: ArrayConfig):
    """Gain towards (sin_phi, cos_Theta) of a beam steered at (sin_phi_t, cos_Theta_t)."""
    c = cfg.phase_step
    K = cfg.K
    return (dirichlet_sq(c * (np.asarray(sin_phi) - sin_phi_t), K)
            * dirichlet_sq(c * (np.asarray(cos_Theta) - cos_Theta_t), K) / (K * K))
