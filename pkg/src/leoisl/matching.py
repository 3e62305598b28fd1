"""Feasible inter-plane edges and greedy sum-rate matching.

The greedy loop picks the heaviest remaining edge, fixes its best port pair,
drops every edge that would reuse one of the two faces just taken, commits
the link and accumulates its interference onto all remaining candidates and
committed links at both ends of the matching period. Rates are read off the
final interference state.

The loop itself runs in :mod:`leoisl.kernels` (compiled when available).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, NamedTuple

import numpy as np

from . import kernels
from .antenna import ArrayConfig, BeamWeights, face_cos, port_gain_table, steered_beam
from .config import ConstellationConfig
from .constellation import Constellation, PairwiseGeometry, fspl, pairwise_geometry
from .linkbudget import LinkBudgetContext


@dataclass(frozen=True)
class CandidateEdge:
    u: int
    v: int
    weight: float  # bit/s
    best_ports: tuple[int, int] | None
    faces: tuple[int, int]


@dataclass(frozen=True)
class MatchedLink:
    u: int
    v: int
    ka_u: int
    ka_v: int
    rate_uv: float  # bit/s, with the final interference bound
    rate_vu: float
    rate_uv_free: float = 0.0  # same ports, interference ignored
    rate_vu_free: float = 0.0

    @property
    def ports(self) -> tuple[int, int]:
        return self.ka_u, self.ka_v

    @property
    def sum_rate(self) -> float:
        return self.rate_uv + self.rate_vu


@dataclass
class MatchingState:
    """Indicator variables plus the interference bound seen by active receivers.

    ``interference[(rx, k_a, tau)]`` is the bound at receiver port ``k_a``
    of ``rx`` at t (tau=0) or t + dt (tau=1).
    """

    planes: np.ndarray
    pairs: set[frozenset] = field(default_factory=set)
    ports: dict[int, set[int]] = field(default_factory=dict)
    links: dict[tuple[int, int], int] = field(default_factory=dict)  # (sat, face) -> peer
    interference: dict[tuple[int, int, int], float] = field(default_factory=dict)
    beams: dict[tuple[int, int, int], BeamWeights] = field(default_factory=dict)
    beam_source: Callable[[int, int, int], BeamWeights] | None = None

    def face(self, u: int, d_a: int) -> int:
        return sum(1 for ka in self.ports.get(u, ()) if (ka > 0) == (d_a > 0))

    def port(self, u: int, ka: int) -> int:
        return int(ka in self.ports.get(u, ()))

    def paired(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.pairs

    def commit(self, u: int, ka_u: int, v: int, ka_v: int) -> None:
        self.pairs.add(frozenset((u, v)))
        self.ports.setdefault(u, set()).add(ka_u)
        self.ports.setdefault(v, set()).add(ka_v)
        self.links[(u, 1 if ka_u > 0 else -1)] = v
        self.links[(v, 1 if ka_v > 0 else -1)] = u

    def beam(self, sat: int, ka: int, tau: int) -> BeamWeights | None:
        key = (sat, ka, tau)
        if key not in self.beams and self.beam_source is not None:
            self.beams[key] = self.beam_source(sat, ka, tau)
        return self.beams.get(key)


class MatchResult(NamedTuple):
    links: list[MatchedLink]
    state: MatchingState
    stats: dict


@dataclass
class Snapshot:
    """Pairwise geometry plus Pt/(N0 L) for one instant (0 where blocked)."""

    t: float
    geom: PairwiseGeometry
    path: np.ndarray

    @property
    def n(self) -> int:
        return self.path.shape[0]


def make_snapshot(constellation: Constellation, t: float, ctx: LinkBudgetContext) -> Snapshot:
    geom = pairwise_geometry(constellation, t)
    loss = fspl(1.0, ctx.frequency) * np.where(geom.los, geom.distance, np.inf) ** 2
    with np.errstate(divide="ignore"):
        path = ctx.tx_power / (ctx.noise_power * loss)
    path[~geom.los] = 0.0
    return Snapshot(t, geom, path)


def plane_pair_allowed(p: int, q: int, cfg: ConstellationConfig) -> bool:
    if p == q:
        return False
    if cfg.all_plane_pairs:
        return True
    lo, hi = min(p, q), max(p, q)
    if hi - lo == 1:
        return True
    return cfg.cross_seam and lo == 0 and hi == cfg.n_planes - 1


def allowed_plane_mask(cfg: ConstellationConfig, planes: np.ndarray) -> np.ndarray:
    P = cfg.n_planes
    table = np.array([[plane_pair_allowed(p, q, cfg) for q in range(P)] for p in range(P)])
    return table[planes[:, None], planes[None, :]]


@dataclass
class CandidateSet:
    """Feasible edges for one matching instance with their rate tables.

    ``faces`` holds the face (+1/-1) each endpoint must use. For the port
    modes ``snr[e, i, j, tau]`` is the SNR for the i-th port of ``u``'s face
    and the j-th of ``v``'s; in steering mode ``snr[e, tau]``.
    """

    cfg: ConstellationConfig
    array: ArrayConfig
    ctx: LinkBudgetContext
    snaps: tuple[Snapshot, Snapshot]
    planes: np.ndarray
    u: np.ndarray
    v: np.ndarray
    face_u: np.ndarray
    face_v: np.ndarray
    snr: np.ndarray
    weight: np.ndarray
    port_u: np.ndarray  # signed best ports
    port_v: np.ndarray
    gains: np.ndarray | None = None  # port modes: (N, N, 2P, 2)

    def __len__(self) -> int:
        return len(self.u)

    def __iter__(self) -> Iterator[CandidateEdge]:
        for e in range(len(self)):
            yield self.edge(e)

    def edge(self, e: int) -> CandidateEdge:
        ports = (int(self.port_u[e]), int(self.port_v[e])) if self.weight[e] > 0 else None
        return CandidateEdge(int(self.u[e]), int(self.v[e]), float(self.weight[e]), ports,
                             (int(self.face_u[e]), int(self.face_v[e])))

    @property
    def n_sats(self) -> int:
        return self.snaps[0].n


def _rate(sinr, ctx: LinkBudgetContext):
    return ctx.bandwidth * np.log2(1.0 + sinr / ctx.sinr_margin)


def _port_order(face: int, P: int) -> np.ndarray:
    """Port indices in ascending signed k_a order."""
    return np.arange(P) if face > 0 else np.arange(P - 1, -1, -1)


def _signed_port(face, idx):
    return face * (idx + 1)


def enumerate_feasible_edges(snap_t: Snapshot, snap_tdt: Snapshot, cfg: ConstellationConfig,
                             planes: np.ndarray, ctx: LinkBudgetContext | None = None,
                             array: ArrayConfig | None = None) -> CandidateSet:
    """Inter-plane pairs in LoS at t and t + dt with a positive best weight."""
    ctx = ctx or LinkBudgetContext.from_config(cfg)
    array = array or ArrayConfig.from_config(cfg)
    g0, g1 = snap_t.geom, snap_tdt.geom
    n = snap_t.n
    ok = allowed_plane_mask(cfg, planes) & g0.los & g1.los
    ok &= np.triu(np.ones((n, n), dtype=bool), 1)
    cos_uv = face_cos(g0.phi)
    ok &= (cos_uv != 0) & (cos_uv.T != 0)
    u, v = np.nonzero(ok)
    fu = np.where(cos_uv[u, v] > 0, 1, -1)
    fv = np.where(cos_uv[v, u] > 0, 1, -1)
    path = np.stack([snap_t.path, snap_tdt.path], axis=-1)

    if array.mode == "steering":
        K4 = float(array.K) ** 4
        cos1 = face_cos(g1.phi)
        valid1 = (cos1[u, v] * fu > 0) & (cos1[v, u] * fv > 0)
        snr = np.stack([path[u, v, 0] * K4, path[u, v, 1] * K4 * valid1], axis=-1)
        weight = 2.0 * _rate(snr.min(axis=1), ctx)
        pu, pv = fu.copy(), fv.copy()
        gains = None
    else:
        P = array.n_ports
        gains = np.stack([port_gain_table(g0, array), port_gain_table(g1, array)], axis=-1)
        off_u = np.where(fu > 0, 0, P)
        off_v = np.where(fv > 0, 0, P)
        idx = np.arange(P)
        gu = gains[u[:, None], v[:, None], off_u[:, None] + idx[None, :]]  # (E, P, 2)
        gv = gains[v[:, None], u[:, None], off_v[:, None] + idx[None, :]]
        snr = path[u, v][:, None, None, :] * gu[:, :, None, :] * gv[:, None, :, :]
        pair_w = 2.0 * _rate(snr.min(axis=-1), ctx)  # (E, P, P)
        # argmax in ascending signed-port order so ties go to the smallest (k_a_u, k_a_v)
        weight = np.zeros(len(u))
        pu = np.zeros(len(u), dtype=np.int64)
        pv = np.zeros(len(u), dtype=np.int64)
        for su in (1, -1):
            for sv in (1, -1):
                sel = (fu == su) & (fv == sv)
                if not sel.any():
                    continue
                ou, ov = _port_order(su, P), _port_order(sv, P)
                sub = pair_w[sel][:, ou][:, :, ov].reshape(sel.sum(), -1)
                flat = sub.argmax(axis=1)
                weight[sel] = sub[np.arange(len(flat)), flat]
                pu[sel] = _signed_port(su, ou[flat // P])
                pv[sel] = _signed_port(sv, ov[flat % P])

    keep = weight > 0
    return CandidateSet(cfg, array, ctx, (snap_t, snap_tdt), planes, u[keep], v[keep],
                        fu[keep], fv[keep], snr[keep], weight[keep], pu[keep], pv[keep], gains)


def _steer_source(cands: CandidateSet, state: MatchingState) -> Callable:
    geoms = (cands.snaps[0].geom, cands.snaps[1].geom)

    def source(sat: int, ka: int, tau: int) -> BeamWeights | None:
        face = 1 if ka > 0 else -1
        peer = state.links.get((sat, face))
        if peer is None:
            return None
        g = geoms[tau]
        return steered_beam(float(g.phi[sat, peer]), float(g.Theta[sat, peer]), cands.array, label=ka)

    return source


def _finish(cands: CandidateSet, raw: dict) -> MatchResult:
    ctx = cands.ctx
    state = MatchingState(planes=cands.planes)
    links = []
    steering = cands.array.mode == "steering"
    P = cands.array.n_ports
    for m, (e, iu, iv) in enumerate(raw["links"]):
        u, v = int(cands.u[e]), int(cands.v[e])
        fu, fv = int(cands.face_u[e]), int(cands.face_v[e])
        if steering:
            ka_u, ka_v = fu, fv
            s = cands.snr[e]
        else:
            ka_u, ka_v = fu * (int(iu) + 1), fv * (int(iv) + 1)
            s = cands.snr[e, iu, iv]
        i_v, i_u = raw["interference"][m, 0], raw["interference"][m, 1]
        r_uv = float(_rate(np.min(s / (1.0 + i_v)), ctx))
        r_vu = float(_rate(np.min(s / (1.0 + i_u)), ctx))
        free = float(_rate(np.min(s), ctx))
        links.append(MatchedLink(u, v, ka_u, ka_v, r_uv, r_vu, free, free))
        state.commit(u, ka_u, v, ka_v)
        for tau in (0, 1):
            state.interference[(v, ka_v, tau)] = float(i_v[tau])
            state.interference[(u, ka_u, tau)] = float(i_u[tau])
    if steering:
        state.beam_source = _steer_source(cands, state)
    stats = dict(raw["stats"])
    stats["edges"] = len(cands)
    stats["ports"] = P
    return MatchResult(links, state, stats)


def greedy_match(cands: CandidateSet, update_weights: bool | None = None,
                 restore_on_guard_fail: bool | None = None,
                 backend: str | None = None) -> MatchResult:
    """Greedy matching with multiple beams (Butler, dipole and isotropic arrays).

    ``update_weights`` refreshes all remaining weights after every commit;
    defaults come from the scenario config. Steering candidate sets are
    routed to :func:`greedy_match_steering`.
    """
    if cands.array.mode == "steering":
        return greedy_match_steering(cands, restore_on_guard_fail=restore_on_guard_fail, backend=backend)
    cfg = cands.cfg
    if update_weights is None:
        update_weights = cfg.update_weights
    if restore_on_guard_fail is None:
        restore_on_guard_fail = cfg.restore_on_guard_fail
    impl = kernels.get_backend(backend)
    P = cands.array.n_ports
    raw = impl.greedy_ports(
        cands.u.astype(np.int64), cands.v.astype(np.int64),
        np.where(cands.face_u > 0, 0, P).astype(np.int64),
        np.where(cands.face_v > 0, 0, P).astype(np.int64),
        np.ascontiguousarray(cands.snr, dtype=np.float64),
        np.ascontiguousarray(np.stack([cands.snaps[0].path, cands.snaps[1].path], axis=-1)),
        np.ascontiguousarray(cands.gains),
        cands.ctx.bandwidth, cands.ctx.sinr_margin, bool(update_weights), bool(restore_on_guard_fail),
    )
    return _finish(cands, raw)


def greedy_match_steering(cands: CandidateSet, restore_on_guard_fail: bool | None = None,
                          backend: str | None = None) -> MatchResult:
    """Greedy matching with one digitally steered beam per face; weights are never refreshed."""
    if cands.array.mode != "steering":
        raise ValueError("greedy_match_steering needs a steering-mode candidate set")
    if restore_on_guard_fail is None:
        restore_on_guard_fail = cands.cfg.restore_on_guard_fail
    impl = kernels.get_backend(backend)
    g0, g1 = cands.snaps[0].geom, cands.snaps[1].geom
    stack = lambda a, b: np.ascontiguousarray(np.stack([a, b], axis=-1))  # noqa: E731
    raw = impl.greedy_steer(
        cands.u.astype(np.int64), cands.v.astype(np.int64),
        cands.face_u.astype(np.int64), cands.face_v.astype(np.int64),
        np.ascontiguousarray(cands.snr, dtype=np.float64),
        stack(cands.snaps[0].path, cands.snaps[1].path),
        stack(np.sin(g0.phi), np.sin(g1.phi)),
        stack(np.cos(g0.Theta), np.cos(g1.Theta)),
        stack(face_cos(g0.phi), face_cos(g1.phi)),
        cands.array.K, cands.array.phase_step,
        cands.ctx.bandwidth, cands.ctx.sinr_margin, bool(restore_on_guard_fail),
    )
    return _finish(cands, raw)


def validate_matching(links: list[MatchedLink], state: MatchingState,
                      n_ports: int | None = None) -> tuple[bool, list[str]]:
    """Check face exclusivity, pair symmetry, inter-plane links and port signs."""
    problems = []
    used: dict[tuple[int, int], int] = {}
    seen_pairs = set()
    for link in links:
        pair = frozenset((link.u, link.v))
        if link.u == link.v:
            problems.append(f"link {link.u}-{link.v}: self link")
        if pair in seen_pairs:
            problems.append(f"link {link.u}-{link.v}: duplicated")
        seen_pairs.add(pair)
        if state.planes[link.u] == state.planes[link.v]:
            problems.append(f"link {link.u}-{link.v}: both satellites in plane {state.planes[link.u]}")
        for sat, ka in ((link.u, link.ka_u), (link.v, link.ka_v)):
            if ka == 0 or (n_ports is not None and abs(ka) > n_ports):
                problems.append(f"satellite {sat}: invalid port {ka}")
                continue
            face = 1 if ka > 0 else -1
            key = (sat, face)
            used[key] = used.get(key, 0) + 1
            if used[key] > 1:
                problems.append(f"satellite {sat}: face {face:+d} carries {used[key]} links")
            if ka not in state.ports.get(sat, ()):
                problems.append(f"satellite {sat}: port {ka} used by a link but not active")
    if seen_pairs != state.pairs:
        problems.append("pair indicators disagree with the link list")
    for sat, ports in state.ports.items():
        for face in (1, -1):
            if state.face(sat, face) > 1:
                problems.append(f"satellite {sat}: face {face:+d} has {state.face(sat, face)} active ports")
        if len(ports) > 2:
            problems.append(f"satellite {sat}: {len(ports)} active ports")
    for (sat, face), peer in state.links.items():
        if state.links.get((peer, _face_of(state, peer, sat))) != sat:
            problems.append(f"satellite {sat}: face {face:+d} link to {peer} is not symmetric")
    return not problems, problems


def _face_of(state: MatchingState, sat: int, peer: int) -> int:
    for (s, face), p in state.links.items():
        if s == sat and p == peer:
            return face
    return 0


LINK_HEADER = ["t", "u", "v", "ka_u", "ka_v", "rate_uv_bps", "rate_vu_bps"]


def write_links_csv(path, rows: list[tuple[float, MatchedLink]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LINK_HEADER)
        for t, link in rows:
            w.writerow([repr(float(t)), link.u, link.v, link.ka_u, link.ka_v,
                        repr(link.rate_uv), repr(link.rate_vu)])


def read_links_csv(path) -> list[tuple[float, MatchedLink]]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append((float(row["t"]), MatchedLink(int(row["u"]), int(row["v"]), int(row["ka_u"]),
                                                     int(row["ka_v"]), float(row["rate_uv_bps"]),
                                                     float(row["rate_vu_bps"]))))
    return out


def sum_rate(links: list[MatchedLink]) -> float:
    return math.fsum(link.sum_rate for link in links)
