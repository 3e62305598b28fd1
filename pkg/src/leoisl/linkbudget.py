"""SNR, interference bound, SINR and rate selection for single links.

These functions work satellite by satellite on ``SatelliteState`` lists and
are meant for inspection and cross-checking. The matcher uses the
vectorised tables in :mod:`leoisl.matching` instead.

Satellites are referred to by id (their index in ``states``) and ports by
the signed integer ``k_a``. In steering mode a port's beam is pointed at a
peer; when no beam is given it is steered at the link partner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .antenna import ArrayConfig, BeamWeights, on_face, port_gain, steered_beam
from .config import BOLTZMANN, ConstellationConfig
from .constellation import SatelliteState, fspl, line_of_sight, relative_geometry

if TYPE_CHECKING:
    from .matching import MatchingState


@dataclass(frozen=True)
class LinkBudgetContext:
    tx_power: float
    bandwidth: float
    noise_temp: float
    frequency: float
    kB: float = BOLTZMANN
    sinr_margin: float = 1.0

    def __post_init__(self) -> None:
        if self.noise_power <= 0:
            raise ValueError("noise power must be positive")
        if self.sinr_margin < 1.0:
            raise ValueError("sinr_margin must be >= 1")

    @classmethod
    def from_config(cls, cfg: ConstellationConfig) -> "LinkBudgetContext":
        return cls(cfg.tx_power, cfg.bandwidth, cfg.noise_temp, cfg.frequency,
                   sinr_margin=cfg.sinr_margin)

    @property
    def noise_power(self) -> float:
        return self.kB * self.noise_temp * self.bandwidth


@dataclass(frozen=True)
class RateSelection:
    rate: float  # bit/s
    sinr_t: float
    sinr_tdt: float


def shannon_rate(sinr: float, ctx: LinkBudgetContext) -> float:
    return ctx.bandwidth * math.log2(1.0 + sinr / ctx.sinr_margin)


def path_snr(u: SatelliteState, v: SatelliteState, ctx: LinkBudgetContext) -> float:
    """Pt / (B kB TN L): the SNR per unit of total antenna gain, 0 if blocked."""
    if not line_of_sight(u, v):
        return 0.0
    dist = float(math.dist(u.r, v.r))
    return ctx.tx_power / (ctx.noise_power * fspl(dist, ctx.frequency))


def _beam(states, sat: int, ka: int, peer: int, cfg: ArrayConfig,
          beam: BeamWeights | None) -> BeamWeights | None:
    if beam is not None or cfg.mode != "steering":
        return beam
    rel = relative_geometry(states[sat], states[peer])
    return steered_beam(rel.phi, rel.Theta, cfg, label=ka)


def snr(u: int, ka_u: int, v: int, ka_v: int, states: Sequence[SatelliteState],
        ctx: LinkBudgetContext, cfg: ArrayConfig, beam_u: BeamWeights | None = None,
        beam_v: BeamWeights | None = None, m_u: int = 1, m_v: int = 1) -> float:
    """SNR of u -> v through ports ``ka_u``/``ka_v`` with port indicators m_u, m_v."""
    if u == v:
        raise ValueError("SNR of a satellite with itself")
    if not (m_u and m_v):
        return 0.0
    base = path_snr(states[u], states[v], ctx)
    if base == 0.0:
        return 0.0
    g_u = port_gain(relative_geometry(states[u], states[v]), ka_u, cfg,
                    _beam(states, u, ka_u, v, cfg, beam_u))
    if g_u == 0.0:
        return 0.0
    g_v = port_gain(relative_geometry(states[v], states[u]), ka_v, cfg,
                    _beam(states, v, ka_v, u, cfg, beam_v))
    return base * g_u * g_v


def interference_upper_bound(v: int, ka_v: int, states: Sequence[SatelliteState],
                             ctx: LinkBudgetContext, cfg: ArrayConfig,
                             mstate: "MatchingState | None", tau: int = 0,
                             beam_v: BeamWeights | None = None,
                             exclude: Sequence[int] = ()) -> float:
    """Sum of SNRs at receiver port ``ka_v`` from every active beam not paired with v.

    ``tau`` (0 for t, 1 for t + dt) selects which steered beams of the
    matching apply to ``states``. Satellites in ``exclude`` are skipped.
    """
    if mstate is None:
        return 0.0
    if cfg.mode == "steering" and beam_v is None:
        beam_v = mstate.beam(v, ka_v, tau)
    total = 0.0
    for i in sorted(mstate.ports):
        if i == v or i in exclude or mstate.paired(i, v):
            continue
        for ka_i in sorted(mstate.ports[i]):
            total += snr(i, ka_i, v, ka_v, states, ctx, cfg,
                         beam_u=mstate.beam(i, ka_i, tau), beam_v=beam_v)
    return total


def sinr(u: int, ka_u: int, v: int, ka_v: int, states: Sequence[SatelliteState],
         ctx: LinkBudgetContext, cfg: ArrayConfig, mstate: "MatchingState | None",
         tau: int = 0, beam_u: BeamWeights | None = None,
         beam_v: BeamWeights | None = None) -> float:
    """SNR / (1 + I); the link's own transmitter never counts as interference."""
    if cfg.mode == "steering":
        beam_u = _beam(states, u, ka_u, v, cfg, beam_u)
        beam_v = _beam(states, v, ka_v, u, cfg, beam_v)
    s = snr(u, ka_u, v, ka_v, states, ctx, cfg, beam_u, beam_v)
    if s == 0.0:
        return 0.0
    interference = interference_upper_bound(v, ka_v, states, ctx, cfg, mstate, tau,
                                            beam_v=beam_v, exclude=(u,))
    return s / (1.0 + interference)


def link_rate(u: int, ka_u: int, v: int, ka_v: int,
              states_t: Sequence[SatelliteState], states_tdt: Sequence[SatelliteState],
              ctx: LinkBudgetContext, cfg: ArrayConfig,
              mstate: "MatchingState | None" = None) -> RateSelection:
    """Rate sustainable at both ends of the matching period.

    Steered beams track the partner at each end of the period.
    """
    s0 = sinr(u, ka_u, v, ka_v, states_t, ctx, cfg, mstate, tau=0)
    s1 = sinr(u, ka_u, v, ka_v, states_tdt, ctx, cfg, mstate, tau=1)
    return RateSelection(shannon_rate(min(s0, s1), ctx), s0, s1)


def candidate_ports(u: int, v: int, states_t: Sequence[SatelliteState],
                    cfg: ArrayConfig) -> list[tuple[int, int]]:
    """Port pairs worth evaluating for u-v: those on the faces that see each other at t."""
    rel_uv = relative_geometry(states_t[u], states_t[v])
    rel_vu = relative_geometry(states_t[v], states_t[u])
    faces_u = [d for d in (-1, 1) if on_face(rel_uv.phi, d)]
    faces_v = [d for d in (-1, 1) if on_face(rel_vu.phi, d)]
    n = cfg.n_ports
    return [(du * ku, dv * kv)
            for du in faces_u for dv in faces_v
            for ku in range(1, n + 1) for kv in range(1, n + 1)]


def edge_weight(u: int, v: int, states_t: Sequence[SatelliteState],
                states_tdt: Sequence[SatelliteState], ctx: LinkBudgetContext,
                cfg: ArrayConfig, mstate: "MatchingState | None" = None,
                ) -> tuple[float, tuple[int, int] | None]:
    """Best sum of both directional rates over port pairs, and the ports achieving it.

    Ties go to the lexicographically smallest (k_a_u, k_a_v).
    """
    best, ports = 0.0, None
    for ka_u, ka_v in sorted(candidate_ports(u, v, states_t, cfg)):
        w = (link_rate(u, ka_u, v, ka_v, states_t, states_tdt, ctx, cfg, mstate).rate
             + link_rate(v, ka_v, u, ka_u, states_t, states_tdt, ctx, cfg, mstate).rate)
        if w > best:
            best, ports = w, (ka_u, ka_v)
    return best, ports
