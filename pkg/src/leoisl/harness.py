"""Simulation campaigns: placements x consecutive instances per configuration.

Each placement draws fresh per-plane phases from a seed derived from the
master seed and the placement index, then runs instances at t = 0, dt,
2 dt, ... . Placement seeds do not depend on the antenna configuration, so
every configuration (and the cross-seam variant) sees the same orbits.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .config import ConstellationConfig, dump_config
from .constellation import build_constellation
from .linkbudget import LinkBudgetContext
from .matching import (
    MatchedLink,
    enumerate_feasible_edges,
    greedy_match,
    make_snapshot,
    sum_rate,
    write_links_csv,
)

log = logging.getLogger(__name__)

ARRAY_MODES = ("butler", "steering")


def placement_seed(master_seed: int, placement: int) -> int:
    return int(np.random.SeedSequence([master_seed, placement]).generate_state(1)[0])


@dataclass(frozen=True)
class ExperimentConfig:
    base: ConstellationConfig = ConstellationConfig()
    modes: tuple[str, ...] = ("isotropic", "dipole", "butler", "steering")
    Ks: tuple[int, ...] = (2, 4, 8)
    dts: tuple[float, ...] = (10.0, 30.0, 60.0)
    placements: int = 10
    instances_per_placement: int = 100
    seed: int = 0
    interference_free: bool = True  # report the loss against interference-free rates
    cross_seam: bool = False  # also run every config with cross-seam ISLs enabled
                              # (base.cross_seam alone runs only the cross-seam variant)
    keep_links: int = 1  # instances per config whose links are dumped
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self) -> None:
        if self.placements < 1 or self.instances_per_placement < 1:
            raise ValueError("placements and instances must be >= 1")

    def scenarios(self) -> list[ConstellationConfig]:
        """Every (mode, K, dt) configuration in sweep order."""
        out = []
        for mode in self.modes:
            Ks = self.Ks if mode in ARRAY_MODES else (1,)
            for K in Ks:
                for dt in self.dts:
                    out.append(replace(self.base, mode=mode, ports=K if mode in ARRAY_MODES else self.base.ports,
                                       dt=float(dt)))
        return out


def config_key(cfg: ConstellationConfig) -> tuple[str, int, float]:
    return cfg.mode, cfg.effective_ports, float(cfg.dt)


@dataclass
class InstanceResult:
    t: float
    sum_rate: float
    sum_rate_free: float
    links: list[MatchedLink]
    diagnostics: dict


def _instance(cfg, constellation, ctx, snap_t, snap_tdt) -> InstanceResult:
    cands = enumerate_feasible_edges(snap_t, snap_tdt, cfg, constellation.planes, ctx)
    result = greedy_match(cands)
    links = result.links
    free = math.fsum(l.rate_uv_free + l.rate_vu_free for l in links)
    diag = {"edges": len(cands), "links": len(links), **{k: v for k, v in result.stats.items()
                                                         if k != "per_commit"}}
    return InstanceResult(snap_t.t, sum_rate(links), free, links, diag)


def run_instance(cfg: ConstellationConfig, seed: int | None, t: float) -> InstanceResult:
    """One full pass: propagate to t and t + dt, enumerate edges, match, rate."""
    constellation = build_constellation(cfg, seed)
    ctx = LinkBudgetContext.from_config(cfg)
    return _instance(cfg, constellation, ctx, make_snapshot(constellation, t, ctx),
                     make_snapshot(constellation, t + cfg.dt, ctx))


def run_placement(cfg: ConstellationConfig, seed: int | None, instances: int,
                  t0: float = 0.0) -> list[InstanceResult]:
    """Consecutive instances t0, t0 + dt, ...; snapshots are shared between neighbours."""
    constellation = build_constellation(cfg, seed)
    ctx = LinkBudgetContext.from_config(cfg)
    out = []
    snap = make_snapshot(constellation, t0, ctx)
    for i in range(instances):
        nxt = make_snapshot(constellation, t0 + (i + 1) * cfg.dt, ctx)
        out.append(_instance(cfg, constellation, ctx, snap, nxt))
        snap = nxt
    return out


@dataclass
class ConfigSummary:
    mode: str
    K: int
    dt: float
    cross_seam: bool
    sums: np.ndarray  # per instance, bit/s
    sums_free: np.ndarray
    rates: np.ndarray  # per-ISL directional rates
    links: list[tuple[str, float, list[MatchedLink]]] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.sums)

    @property
    def mean_sum_rate(self) -> float:
        return float(np.mean(self.sums)) if self.n else 0.0

    @property
    def interference_loss_pct(self) -> float:
        return kpi_interference_loss(self.sums, self.sums_free)


@dataclass
class KpiReport:
    summaries: dict[tuple, ConfigSummary] = field(default_factory=dict)
    experiment: ExperimentConfig | None = None
    complete: bool = True

    def get(self, mode: str, K: int, dt: float, cross_seam: bool = False) -> ConfigSummary:
        return self.summaries[(mode, K, float(dt), cross_seam)]

    def cross_seam_gain(self, mode: str, K: int, dt: float) -> float:
        """Percent increase of the mean sum rate when cross-seam ISLs are enabled."""
        base = self.get(mode, K, dt, False)
        cs = self.get(mode, K, dt, True)
        return kpi_cross_seam_gain(base.sums, cs.sums)

    def table(self, cross_seam: bool = False) -> list[tuple[str, int, float, float, int]]:
        return [(s.mode, s.K, s.dt, s.mean_sum_rate, s.n)
                for key, s in self.summaries.items() if key[3] == cross_seam]


def kpi_cdf(samples) -> np.ndarray:
    """Empirical CDF as an (n, 2) array of (rate, cumulative fraction)."""
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("need at least one sample")
    return np.column_stack([x, np.arange(1, x.size + 1) / x.size])


def cdf_fraction_below(samples, threshold: float) -> float:
    x = np.asarray(samples, dtype=float)
    return float(np.mean(x < threshold))


def kpi_interference_loss(sums, sums_free) -> float:
    """Mean over instances of 100 (S_free - S) / S_free."""
    s = np.asarray(sums, dtype=float)
    f = np.asarray(sums_free, dtype=float)
    ok = f > 0
    if not ok.any():
        return 0.0
    return float(np.mean(100.0 * (f[ok] - s[ok]) / f[ok]))


def kpi_cross_seam_gain(base_sums, cs_sums) -> float:
    b = float(np.mean(base_sums))
    return 100.0 * (float(np.mean(cs_sums)) - b) / b if b > 0 else 0.0


def _job(args):
    cfg, seed, instances, keep = args
    results = run_placement(cfg, seed, instances)
    sums = np.array([r.sum_rate for r in results])
    free = np.array([r.sum_rate_free for r in results])
    rates = np.array([x for r in results for l in r.links for x in (l.rate_uv, l.rate_vu)])
    kept = [(r.t, r.links) for r in results[:keep]]
    return sums, free, rates, kept


def run_campaign(exp: ExperimentConfig, progress=None) -> KpiReport:
    """Run every configuration (and its cross-seam twin if requested).

    A ``KeyboardInterrupt`` stops the sweep; the configurations finished so
    far are returned with ``complete=False``.
    """
    report = KpiReport(experiment=exp)
    configs = exp.scenarios()
    variants = [False, True] if exp.cross_seam else [exp.base.cross_seam]
    seeds = [placement_seed(exp.seed, p) for p in range(exp.placements)]
    pool = ProcessPoolExecutor(exp.workers) if exp.workers > 1 else None
    try:
        for cfg in configs:
            for cs in variants:
                run_cfg = replace(cfg, cross_seam=cs)
                keep_left = exp.keep_links
                jobs = []
                for p, seed in enumerate(seeds):
                    keep = min(keep_left, exp.instances_per_placement)
                    keep_left -= keep
                    jobs.append((run_cfg, seed, exp.instances_per_placement, keep))
                outs = list(pool.map(_job, jobs)) if pool else [_job(j) for j in jobs]
                mode, K, dt = config_key(run_cfg)
                links = []
                for p, (_, _, _, kept) in enumerate(outs):
                    for i, (t, ls) in enumerate(kept):
                        links.append((f"p{p}_i{i}", t, ls))
                summary = ConfigSummary(
                    mode, K, dt, cs,
                    np.concatenate([o[0] for o in outs]),
                    np.concatenate([o[1] for o in outs]),
                    np.concatenate([o[2] for o in outs]),
                    links,
                )
                report.summaries[(mode, K, dt, cs)] = summary
                log.info("%s K=%d dt=%g cs=%s: mean sum rate %.4f Mbit/s over %d instances",
                         mode, K, dt, cs, summary.mean_sum_rate / 1e6, summary.n)
                if progress:
                    progress(summary)
    except KeyboardInterrupt:
        log.warning("interrupted; keeping %d finished configurations", len(report.summaries))
        report.complete = False
    finally:
        if pool:
            pool.shutdown(cancel_futures=True)
    return report


def _fmt(x: float) -> str:
    return repr(float(x))


def _tag(s: ConfigSummary) -> str:
    cs = "_cs" if s.cross_seam else ""
    return f"{s.mode}_{s.K}_{s.dt:g}{cs}"


def emit_reports(report: KpiReport, output_dir: str | os.PathLike) -> list[Path]:
    """Write the CSV tables, CDF samples, link dumps and a run manifest."""
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []

    def write(name, header, rows):
        path = out / name
        try:
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc}") from exc
        written.append(path)

    base = [s for k, s in report.summaries.items() if not k[3]]
    write("sum_rates.csv", ["mode", "K", "dt_s", "mean_sum_rate_bps", "n"],
          [(s.mode, s.K, f"{s.dt:g}", _fmt(s.mean_sum_rate), s.n) for s in base])
    if report.experiment is None or report.experiment.interference_free:
        write("interference_loss.csv", ["mode", "K", "dt_s", "loss_pct", "n"],
              [(s.mode, s.K, f"{s.dt:g}", _fmt(s.interference_loss_pct), s.n) for s in base])
    cs_rows = []
    for (mode, K, dt, cs), s in report.summaries.items():
        if cs and (mode, K, dt, False) in report.summaries:
            b = report.summaries[(mode, K, dt, False)]
            cs_rows.append((mode, K, f"{dt:g}", _fmt(b.mean_sum_rate), _fmt(s.mean_sum_rate),
                            _fmt(report.cross_seam_gain(mode, K, dt)), s.n))
    write("cross_seam_gain.csv",
          ["mode", "K", "dt_s", "base_mean_bps", "cross_seam_mean_bps", "gain_pct", "n"], cs_rows)
    for s in report.summaries.values():
        if s.rates.size:
            cdf = kpi_cdf(s.rates)
            write(f"cdf_{s.mode}_{s.K}_{s.dt:g}{'_cs' if s.cross_seam else ''}.csv",
                  ["rate_bps", "cdf"], [(_fmt(r), _fmt(c)) for r, c in cdf])
        for label, t, links in s.links:
            path = out / f"links_{_tag(s)}_{label}.csv"
            write_links_csv(path, [(t, l) for l in links])
            written.append(path)
    manifest = {
        "version": __version__,
        "backend": kernels.DEFAULT,
        "complete": report.complete,
        "experiment": _experiment_echo(report.experiment),
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    written.append(path)
    (out / "table_ii.txt").write_text(render_table(report))
    written.append(out / "table_ii.txt")
    return written


def _experiment_echo(exp: ExperimentConfig | None) -> dict | None:
    if exp is None:
        return None
    d = asdict(exp)
    d["base"] = dump_config(exp.base)
    d.pop("output_dir", None)
    d.pop("workers", None)
    return d


def render_table(report: KpiReport) -> str:
    """Mean sum rates in Mbit/s, one row per (mode, K), one column per dt."""
    rows: dict[tuple[str, int], dict[float, float]] = {}
    dts: list[float] = []
    for (mode, K, dt, cs), s in report.summaries.items():
        if cs:
            continue
        rows.setdefault((mode, K), {})[dt] = s.mean_sum_rate / 1e6
        if dt not in dts:
            dts.append(dt)
    head = f"{'configuration':<16}" + "".join(f"{'dt=' + format(dt, 'g'):>14}" for dt in dts)
    lines = [head]
    for (mode, K), vals in rows.items():
        label = mode if mode not in ARRAY_MODES else f"{mode} K={K}"
        lines.append(f"{label:<16}" + "".join(
            f"{vals[dt]:>14.4f}" if dt in vals else f"{'-':>14}" for dt in dts))
    return "\n".join(lines) + "\n"
