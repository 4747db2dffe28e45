#!/usr/bin/env python3
"""
wfkit CLI
Batch front-end: run wave-front analyses from JSON configurations, check
Gabor pairs and run the invariant self-test
"""

import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, NoReturn

import click
import yaml
from rich import box
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from wfkit import ConfigError, WavefrontError, WavefrontReport, crosscheck
from wfkit import analyze as run_analysis
from wfkit.gabor import build_gabor_system, normalization_residual, reconstruction_error
from wfkit.io import ReportStore, json_safe, report_files
from wfkit.selftest import FAULTS, run_selftest
from wfkit.wavefront import DETECTORS, ESTIMATE

from .config import AnalysisConfig, load_config, resolve_path
from .svg import render_polar

console = Console()

REPORTS_DIR = Path.home() / ".wfkit" / "reports"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INDETERMINATE = 2
EXIT_CONFIG = 64

FRAME_TOLERANCE = 1e-10

VERDICT_STYLES = {"singular": "red", "regular": "green", "indeterminate": "dim"}


def _fail(message: str, code: int = EXIT_FAILED) -> NoReturn:
    console.print(f"[red]Error: {escape(message)}[/red]", soft_wrap=True)
    sys.exit(code)


def _load(config_path: str) -> AnalysisConfig:
    try:
        return load_config(resolve_path(config_path))
    except ConfigError as e:
        _fail(str(e), EXIT_CONFIG)


def _emit(data: Any, format: str) -> bool:
    """Print data as JSON or YAML; False means the caller renders a table"""
    if format == 'json':
        console.print_json(data=json_safe(data))
        return True
    if format == 'yaml':
        console.print(escape(yaml.dump(json_safe(data), default_flow_style=False, sort_keys=False)))
        return True
    return False


def _verdict(classification: str) -> str:
    style = VERDICT_STYLES.get(classification, "white")
    return f"[{style}]{classification}[/{style}]"


@click.group()
@click.option('-v', '--verbose', count=True, help='Log progress (-v info, -vv debug)')
def cli(verbose):
    """wfkit - Wave-front sets of ultradistributions"""
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(verbose, 2)]
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


@cli.command()
@click.argument('config_path')
@click.option('--out', type=click.Path(file_okay=False), help='Output directory (overrides output.dir)')
@click.option('--strict', is_flag=True, help='Exit 1 when the cross-check finds violations')
@click.option('--threads', type=click.IntRange(min=0), help='Worker threads (0: available parallelism)')
@click.option('--save', is_flag=True, help='Also keep the report in the report store')
@click.option('--format', type=click.Choice(['table', 'json', 'yaml']), default='table')
def analyze(config_path, out, strict, threads, save, format):
    """Run every detector on the points of a configuration

    CONFIG_PATH is a JSON file or the name of a bundled configuration
    such as jump1d.json.
    """
    config = _load(config_path)
    params = config.params if threads is None else replace(config.params, threads=threads or None)

    try:
        report = run_analysis(config.atom, config.points, params)
    except WavefrontError as e:
        _fail(f"analysis failed: {e}")
    summary = crosscheck(report)

    out_dir = Path(out).expanduser() if out else config.out_dir
    svg = render_polar(report) if config.svg else None
    try:
        files = report_files(report, out_dir, config.stem, svg)
        if save:
            files["store"] = ReportStore(REPORTS_DIR).save(report, config.stem)
    except (OSError, WavefrontError) as e:
        _fail(f"cannot write outputs: {e}")

    if strict and not summary.passed:
        code = EXIT_FAILED
    elif summary.all_indeterminate:
        code = EXIT_INDETERMINATE
    else:
        code = EXIT_OK

    payload = {
        "name": config.name,
        "atom_id": report.atom_id,
        "cells": len(report.cells),
        "crosscheck": summary.to_dict(),
        "files": {kind: str(path) for kind, path in files.items()},
        "exit_code": code,
    }
    if not _emit(payload, format):
        _print_report(report)
        status = "[green]✓ passed[/green]" if summary.passed else f"[red]✗ {summary.violations} violations[/red]"
        text = f"""
    [cyan]Atom:[/cyan] {escape(report.atom_id)}
    [cyan]Cells:[/cyan] {len(report.cells)}
    [yellow]Indeterminate:[/yellow] {len(summary.indeterminate)}
    [bold]Cross-check:[/bold] {status}
    """
        console.print(Panel(text, title=f"Analysis: {escape(config.name)}",
                            border_style="green" if summary.passed else "red"))
        for kind, path in files.items():
            console.print(f"[green]✓[/green] {kind}: {escape(str(path))}")
    sys.exit(code)


def _print_report(report: WavefrontReport) -> None:
    detectors = [d for d in DETECTORS if report.cells_for(d)]
    rows: Dict[tuple, Dict[str, str]] = {}
    for cell in report.cells:
        rows.setdefault(cell.key, {})[cell.detector] = cell.classification

    table = Table(title=f"Wave-front verdicts ({len(report.points)} points)", box=box.ROUNDED)
    table.add_column("Point", style="cyan")
    table.add_column("Cone", style="blue")
    table.add_column("k")
    table.add_column("q")
    for name in detectors + [ESTIMATE]:
        table.add_column(name)

    for (point, cone_id, k, q), verdicts in rows.items():
        if not any(d in verdicts for d in detectors):
            continue
        table.add_row(
            ", ".join(f"{v:g}" for v in point),
            escape(cone_id),
            f"{k:g}",
            f"{q:g}",
            *[_verdict(verdicts[d]) if d in verdicts else "" for d in detectors + [ESTIMATE]],
        )
    console.print(table)


@cli.command()
@click.argument('config_path')
@click.option('--format', type=click.Choice(['table', 'json', 'yaml']), default='table')
def frames(config_path, format):
    """Build the Gabor pair of a configuration and check exactness at every ε"""
    config = _load(config_path)
    params = config.params.resolved(config.atom.dim)

    rows: List[Dict[str, Any]] = []
    try:
        system = build_gabor_system(params.window, params.pair, 1.0, params.grid)
        for eps in params.eps_list:
            scaled = system.at_scale(eps)
            residual = normalization_residual(scaled)
            error = reconstruction_error(config.atom, scaled, params.grid)
            rows.append({
                "eps": eps,
                "normalization_residual": residual,
                "reconstruction_error": error,
                "passed": residual <= FRAME_TOLERANCE and error <= FRAME_TOLERANCE,
            })
    except WavefrontError as e:
        _fail(f"cannot build Gabor system: {e}")

    ok = all(r["passed"] for r in rows)
    data = {"system": system.to_dict(), "tolerance": FRAME_TOLERANCE, "scales": rows, "passed": ok}
    if not _emit(data, format):
        console.print(Panel(f"[bold cyan]{escape(params.window.window_id)}[/bold cyan]",
                            subtitle=f"a·b = {params.pair.c:.6g}, C = {system.frame_constant:.6g}",
                            border_style="cyan"))
        table = Table(title="Gabor pair exactness", box=box.ROUNDED)
        table.add_column("ε", style="cyan")
        table.add_column("Normalization residual")
        table.add_column("Reconstruction error")
        table.add_column("Status")
        for r in rows:
            table.add_row(
                f"{r['eps']:g}",
                f"{r['normalization_residual']:.3e}",
                f"{r['reconstruction_error']:.3e}",
                "[green]✓[/green]" if r["passed"] else "[red]✗[/red]",
            )
        console.print(table)
    sys.exit(EXIT_OK if ok else EXIT_FAILED)


@cli.command()
@click.option('--check', 'names', multiple=True, help='Run only this check (repeatable)')
@click.option('--format', type=click.Choice(['table', 'json', 'yaml']), default='table')
@click.option('--inject-fault', type=click.Choice(sorted(FAULTS)), hidden=True)
def selftest(names, format, inject_fault):
    """Run the invariant self-test suite"""
    try:
        results = run_selftest(list(names) or None, inject_fault)
    except WavefrontError as e:
        _fail(str(e), EXIT_CONFIG)

    ok = all(r.passed for r in results)
    if not _emit({"passed": ok, "checks": [r.to_dict() for r in results]}, format):
        table = Table(title=f"Self-test ({len(results)} checks)", box=box.ROUNDED)
        table.add_column("Check", style="cyan")
        table.add_column("Value")
        table.add_column("Bound")
        table.add_column("Status")
        table.add_column("Detail", style="dim")
        for r in results:
            table.add_row(
                r.name,
                f"{r.value:.3e}",
                f"{r.bound:.1e}",
                "[green]✓[/green]" if r.passed else "[red]✗[/red]",
                escape(r.detail),
            )
        console.print(table)
        if ok:
            console.print("[green]✓ All checks passed[/green]")
        else:
            failed = ", ".join(r.name for r in results if not r.passed)
            console.print(f"[red]✗ Failed: {failed}[/red]")
    sys.exit(EXIT_OK if ok else EXIT_FAILED)


@cli.group()
def reports():
    """Inspect reports kept with analyze --save"""


@reports.command('list')
@click.option('--format', type=click.Choice(['table', 'json', 'yaml']), default='table')
def list_reports(format):
    """List stored reports"""
    store = ReportStore(REPORTS_DIR)
    names = store.list()
    if _emit(names, format):
        return
    if not names:
        console.print("[yellow]No stored reports[/yellow]")
        return
    for name in names:
        console.print(f"  • {escape(name)}")


@reports.command('show')
@click.argument('name')
@click.option('--format', type=click.Choice(['table', 'json', 'yaml']), default='table')
def show_report(name, format):
    """Show a stored report and its cross-check"""
    try:
        report = ReportStore(REPORTS_DIR).load(name)
    except WavefrontError as e:
        _fail(str(e))
    summary = crosscheck(report)
    if _emit({"report": report.to_dict(), "crosscheck": summary.to_dict()}, format):
        return
    table = Table(title=f"{escape(report.atom_id)} ({len(report.cells)} cells)", box=box.ROUNDED)
    table.add_column("Point", style="cyan")
    table.add_column("Cone", style="blue")
    table.add_column("Detector")
    table.add_column("k")
    table.add_column("Verdict")
    for cell in report.cells:
        table.add_row(", ".join(f"{v:g}" for v in cell.point), escape(cell.cone_id), cell.detector,
                      f"{cell.k:g}", _verdict(cell.classification))
    console.print(table)


@reports.command('delete')
@click.argument('name')
def delete_report(name):
    """Delete a stored report"""
    try:
        removed = ReportStore(REPORTS_DIR).delete(name)
    except WavefrontError as e:
        _fail(str(e))
    if removed:
        console.print(f"[green]✓ Deleted {escape(name)}[/green]")
    else:
        _fail(f"no report named '{name}'")


if __name__ == '__main__':
    cli()
