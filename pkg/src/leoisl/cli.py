"""Command line entry point: ``leoisl simulate | sweep | pattern | cdf``."""

from __future__ import annotations

import csv
import functools
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import click

from .antenna import ArrayConfig, export_pattern
from .config import TABLE_I, ConfigError, load_config
from .harness import ExperimentConfig, emit_reports, kpi_cdf, render_table, run_campaign


def _guard(fn):
    """Turn config and I/O failures into a one-line diagnostic and exit status 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"error: invalid configuration: {exc}", err=True)
        except OSError as exc:
            click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    return wrapper


def _base(config_path, mode=None, ports=None, dt=None, cross_seam=None):
    cfg = load_config(config_path) if config_path else TABLE_I
    changes = {}
    if mode is not None:
        changes["mode"] = mode
    if ports is not None:
        changes["ports"] = ports
    if dt is not None:
        changes["dt"] = float(dt)
    if cross_seam:
        changes["cross_seam"] = True
    return replace(cfg, **changes)


def _common(fn):
    opts = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False),
                     help="Key-value scenario file; omitted keys keep the reference values."),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default="results",
                     show_default=True, help="Output directory."),
        click.option("--seed", type=int, default=0, show_default=True, help="Master seed."),
        click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True,
                     help="Worker processes (one placement per job)."),
        click.option("--placements", type=click.IntRange(min=1), default=10, show_default=True),
        click.option("--instances", type=click.IntRange(min=1), default=100, show_default=True,
                     help="Consecutive matching instances per placement."),
        click.option("--interference-free/--no-interference-free", default=True, show_default=True,
                     help="Also report the loss against interference-free rates."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _progress(summary):
    click.echo(f"  {summary.mode:<10} K={summary.K} dt={summary.dt:g}"
               f"{' cross-seam' if summary.cross_seam else ''}: "
               f"{summary.mean_sum_rate / 1e6:.4f} Mbit/s", err=True)


@click.group()
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
@click.version_option(package_name="artifact")
def cli(verbose):
    """Inter-plane ISL matching simulations for LEO Walker-star constellations."""
    level = logging.WARNING - 10 * verbose
    logging.basicConfig(level=max(level, logging.DEBUG), format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@_common
@click.option("--mode", type=click.Choice(["isotropic", "dipole", "butler", "steering"]))
@click.option("--ports", type=int, help="Antenna ports K per array.")
@click.option("--dt", type=float, help="Matching period in seconds.")
@click.option("--cross-seam", is_flag=True, help="Allow links between the first and last plane.")
@_guard
def simulate(config_path, out_dir, seed, workers, placements, instances, interference_free,
             mode, ports, dt, cross_seam):
    """Run one configuration and write its reports."""
    base = _base(config_path, mode, ports, dt, cross_seam)
    exp = ExperimentConfig(base=base, modes=(base.mode,), Ks=(base.ports,), dts=(base.dt,),
                           placements=placements, instances_per_placement=instances, seed=seed,
                           interference_free=interference_free, workers=workers, output_dir=out_dir)
    report = run_campaign(exp)
    emit_reports(report, out_dir)
    (summary,) = report.summaries.values()
    click.echo(f"mean sum rate {summary.mean_sum_rate / 1e6:.4f} Mbit/s over {summary.n} instances")
    if interference_free:
        click.echo(f"interference loss {summary.interference_loss_pct:.4f}%")
    if not report.complete:
        sys.exit(130)


@cli.command()
@_common
@click.option("--mode", "modes", multiple=True,
              type=click.Choice(["isotropic", "dipole", "butler", "steering"]),
              help="Antenna modes to sweep (repeatable; default all).")
@click.option("--ports", "ports", multiple=True, type=int, help="K values (repeatable; default 2 4 8).")
@click.option("--dt", "dts", multiple=True, type=float, help="Matching periods (repeatable; default 10 30 60).")
@click.option("--cross-seam", is_flag=True, help="Also run every configuration with cross-seam links.")
@_guard
def sweep(config_path, out_dir, seed, workers, placements, instances, interference_free,
          modes, ports, dts, cross_seam):
    """Full campaign over modes, K and dt; writes the sum-rate table and KPIs."""
    base = _base(config_path)
    exp = ExperimentConfig(base=base, placements=placements, instances_per_placement=instances,
                           seed=seed, interference_free=interference_free, cross_seam=cross_seam,
                           workers=workers, output_dir=out_dir)
    if modes:
        exp = replace(exp, modes=tuple(modes))
    if ports:
        exp = replace(exp, Ks=tuple(ports))
    if dts:
        exp = replace(exp, dts=tuple(dts))
    exp.scenarios()  # fail on a bad K before spending any time
    report = run_campaign(exp, progress=_progress)
    emit_reports(report, out_dir)
    click.echo(render_table(report), nl=False)
    if not report.complete:
        click.echo("interrupted: partial results written", err=True)
        sys.exit(130)


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_file", type=click.Path(dir_okay=False), default="pattern.csv", show_default=True)
@click.option("--mode", type=click.Choice(["isotropic", "dipole", "butler", "steering"]))
@click.option("--ports", type=int)
@click.option("--resolution", type=click.FloatRange(min=0, min_open=True), default=0.1, show_default=True, help="Azimuth step in degrees.")
@click.option("--steer", "steer_deg", type=float, default=0.0, show_default=True,
              help="Steering mode: azimuth the beam points at, degrees.")
@_guard
def pattern(config_path, out_file, mode, ports, resolution, steer_deg):
    """Azimuth gain cut at the fixed polar angle for every port, in dBi."""
    cfg = _base(config_path, mode, ports)
    rows = export_pattern(ArrayConfig.from_config(cfg), resolution, math.radians(steer_deg))
    Path(out_file).parent.mkdir(parents=True, exist_ok=True)
    with open(out_file, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["phi_deg", "gain_dbi", "port"])
        for phi, g, ka in rows:
            w.writerow([f"{phi:.6g}", "-inf" if g == -math.inf else f"{g:.6f}", ka])
    click.echo(f"wrote {len(rows)} rows to {out_file}")


@cli.command()
@_common
@click.option("--mode", type=click.Choice(["isotropic", "dipole", "butler", "steering"]))
@click.option("--ports", type=int)
@click.option("--dt", type=float)
@click.option("--cross-seam", is_flag=True)
@_guard
def cdf(config_path, out_dir, seed, workers, placements, instances, interference_free,
        mode, ports, dt, cross_seam):
    """Empirical CDF of the per-ISL rates of one configuration."""
    base = _base(config_path, mode, ports, dt, cross_seam)
    exp = ExperimentConfig(base=base, modes=(base.mode,), Ks=(base.ports,), dts=(base.dt,),
                           placements=placements, instances_per_placement=instances, seed=seed,
                           interference_free=interference_free, workers=workers, keep_links=0)
    report = run_campaign(exp)
    (summary,) = report.summaries.values()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"cdf_{summary.mode}_{summary.K}_{summary.dt:g}{'_cs' if summary.cross_seam else ''}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rate_bps", "cdf"])
        if summary.rates.size:
            for r, c in kpi_cdf(summary.rates):
                w.writerow([repr(float(r)), repr(float(c))])
    click.echo(f"wrote {summary.rates.size} rates to {path}")


def main(argv=None):
    cli.main(args=argv, prog_name="leoisl")


if __name__ == "__main__":
    main()
