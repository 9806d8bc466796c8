"""Command-line interface for the fermionic control simulator."""

import functools
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np
import scipy.linalg

from config.settings import (
    DEFAULT_COUPLING,
    DEFAULT_FIDELITY_TOL,
    DEFAULT_LEAKAGE_TOL,
    DEFAULT_REPORT_FORMAT,
    DEFAULT_RESIDUAL_TOL,
    DEFAULT_SEED,
    LOG_FORMAT,
    LOG_LEVEL,
    OUTPUT_DIR,
    REPORT_FORMATS,
)
from exports import Exporter
from hamiltonians import HamiltonianSpec, assemble
from parsers.circuit_parser import CircuitParseError, serialize_circuit
from random_circuits import random_circuit
from schemas import SchemaError, validate_hamiltonian_document
from simulation_runner import COMPILE_ONLY, SIMULATE, VERIFY_DIAGRAMS, RunConfig, run, run_batch

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2


def run_options(func):
    """Options shared by the three run modes."""

    @click.option('--circuit', '-c', 'circuit', type=click.Path(exists=True, dir_okay=False),
                  required=True, help='Circuit description file')
    @click.option('--coupling', '-g', type=float, default=DEFAULT_COUPLING, show_default=True,
                  help='Fixed nearest-neighbor interaction strength g')
    @click.option('--out', '-o', type=click.Path(dir_okay=False), help='Report output path')
    @click.option('--format', '-f', 'report_format', type=click.Choice(REPORT_FORMATS),
                  default=DEFAULT_REPORT_FORMAT, help='Report format')
    @click.option('--tol-fidelity', type=float, default=DEFAULT_FIDELITY_TOL, show_default=True)
    @click.option('--tol-leakage', type=float, default=DEFAULT_LEAKAGE_TOL, show_default=True)
    @click.option('--tol-residual', type=float, default=DEFAULT_RESIDUAL_TOL, show_default=True)
    @click.option('--seed', type=int, default=DEFAULT_SEED, show_default=True,
                  help='Seed for the random probe states')
    @click.option('--include-segments', is_flag=True, help='Embed the full schedule in the report')
    @click.option('--residuals-csv', type=click.Path(dir_okay=False),
                  help='Also write the per-gate diagram residuals as CSV')
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)

    return wrapper


def _execute(mode, circuit, coupling, out, report_format, tol_fidelity, tol_leakage,
             tol_residual, seed, include_segments, residuals_csv):
    try:
        config = RunConfig(
            circuit_path=Path(circuit),
            coupling=coupling,
            mode=mode,
            output_path=Path(out) if out else None,
            fidelity_tol=tol_fidelity,
            leakage_tol=tol_leakage,
            residual_tol=tol_residual,
            seed=seed,
            report_format=report_format,
            include_segments=include_segments,
        )
        report = run(config)
    except CircuitParseError as e:
        click.secho(f"Parse error: {e}", fg='red', err=True)
        sys.exit(EXIT_USAGE)
    except (OSError, ValueError) as e:
        click.secho(f"Error: {e}", fg='red', err=True)
        sys.exit(EXIT_USAGE)

    click.echo(f"Circuit: {report.circuit} ({report.n_qubits} qubits)")
    if report.residuals:
        worst = max(r['residual'] for r in report.residuals)
        click.echo(f"  Largest diagram residual: {worst:.3e}")
    if residuals_csv:
        csv_path = Path(residuals_csv)
        saved = Exporter(str(csv_path.parent)).export_residuals(report.to_dict(), csv_path.name)
        click.echo(f"  Residuals saved to: {saved}")
    if report.schedule:
        click.echo("  Schedule: {segment_count} segments, {pulse_count} pulses, "
                   "duration {total_duration:.6f}".format(**report.schedule))
    if report.fidelity is not None:
        click.echo(f"  Process fidelity: {report.fidelity:.12f}")
        click.echo(f"  Worst state fidelity: {report.state_fidelity:.12f}")
        click.echo(f"  Worst leakage: {report.leakage:.3e}")

    if report.passed:
        click.secho("✓ PASS", fg='green')
        sys.exit(EXIT_PASS)
    for reason in report.failures():
        click.secho(f"  ✗ {reason}", fg='red')
    click.secho("✗ FAIL", fg='red', bold=True)
    sys.exit(EXIT_TOLERANCE)


@click.group()
@click.version_option(version='1.0.0')
@click.option('--verbose', '-v', is_flag=True, help='Debug logging')
def cli(verbose):
    """Fermionic Fock-space simulator and dual-rail encoding verifier."""
    logging.basicConfig(level=logging.DEBUG if verbose else LOG_LEVEL, format=LOG_FORMAT)


@cli.command('verify-diagrams')
@run_options
def verify_diagrams(**options):
    """Check that every gate's Fock-side lift commutes with the encoding."""
    _execute(VERIFY_DIAGRAMS, **options)


@cli.command()
@run_options
def simulate(**options):
    """Compile, execute and compare against the qubit-side circuit."""
    _execute(SIMULATE, **options)


@cli.command('compile-only')
@run_options
def compile_only(**options):
    """Compile the circuit into a field + tunneling schedule."""
    _execute(COMPILE_ONLY, **options)


@cli.command()
@click.argument('input_files', nargs=-1, type=click.Path(exists=True, dir_okay=False), required=True)
@click.option('--mode', '-m', type=click.Choice([VERIFY_DIAGRAMS, SIMULATE, COMPILE_ONLY]),
              default=SIMULATE, show_default=True)
@click.option('--coupling', '-g', type=float, default=DEFAULT_COUPLING, show_default=True)
@click.option('--output-dir', '-o', type=click.Path(file_okay=False), default=str(OUTPUT_DIR),
              help='Output directory for reports and the CSV summary')
@click.option('--format', '-f', 'report_format', type=click.Choice(REPORT_FORMATS),
              default=DEFAULT_REPORT_FORMAT)
@click.option('--tol-fidelity', type=float, default=DEFAULT_FIDELITY_TOL, show_default=True)
def batch(input_files, mode, coupling, output_dir, report_format, tol_fidelity):
    """Run several circuit files and write a CSV summary."""
    try:
        base = RunConfig(coupling=coupling, mode=mode, fidelity_tol=tol_fidelity,
                         report_format=report_format)
    except ValueError as e:
        click.secho(f"Error: {e}", fg='red', err=True)
        sys.exit(EXIT_USAGE)

    click.echo(f"Processing {len(input_files)} files...")
    rows = run_batch(list(input_files), base, output_dir)
    for i, row in enumerate(rows, 1):
        if row.get('error'):
            click.secho(f"[{i}/{len(rows)}] ✗ {row['circuit']}: {row['error']}", fg='red')
        else:
            status = 'pass' if row['pass'] else 'FAIL'
            click.echo(f"[{i}/{len(rows)}] {row['circuit']}: {status}")

    summary = Exporter(output_dir).export_batch_summary(rows, 'batch_summary.csv')
    passed = sum(1 for row in rows if row['pass'])
    click.echo(f"\nPassed: {passed}/{len(rows)}")
    click.echo(f"Summary saved to: {summary}")
    if any(row.get('error') for row in rows):
        sys.exit(EXIT_USAGE)
    sys.exit(EXIT_PASS if passed == len(rows) else EXIT_TOLERANCE)


@cli.command()
@click.argument('hamiltonian_file', type=click.Path(exists=True, dir_okay=False))
@click.option('--count', '-k', type=int, default=8, show_default=True, help='Number of eigenvalues')
def spectrum(hamiltonian_file, count):
    """Print the lowest eigenvalues of a Hamiltonian JSON document."""
    try:
        with open(hamiltonian_file, 'r', encoding='utf-8') as f:
            data = json.load(f)
        validate_hamiltonian_document(data)
        spec = HamiltonianSpec.from_dict(data)
        eigenvalues = scipy.linalg.eigvalsh(assemble(spec).dense())
    except (OSError, ValueError, SchemaError) as e:
        click.secho(f"Error: {e}", fg='red', err=True)
        sys.exit(EXIT_USAGE)

    click.echo(f"J = {spec.J}, dimension {2 ** spec.J}")
    for value in eigenvalues[:count]:
        click.echo(f"  {value: .12f}")
    click.echo(f"Ground energy: {float(np.min(eigenvalues)):.12f}")


@cli.command('random-circuit')
@click.option('--qubits', '-n', type=click.IntRange(1), required=True)
@click.option('--depth', '-d', type=click.IntRange(0), required=True)
@click.option('--seed', type=int, default=DEFAULT_SEED, show_default=True)
@click.option('--out', '-o', type=click.Path(dir_okay=False), help='Write to a file instead of stdout')
def random_circuit_command(qubits, depth, seed, out):
    """Generate a seeded random circuit file."""
    try:
        text = serialize_circuit(random_circuit(qubits, depth, seed))
    except ValueError as e:
        click.secho(f"Error: {e}", fg='red', err=True)
        sys.exit(EXIT_USAGE)
    if out:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(f"# random circuit: n={qubits} depth={depth} seed={seed}\n" + text)
        click.echo(f"✓ Circuit saved: {out}")
    else:
        click.echo(text, nl=False)


if __name__ == '__main__':
    cli()
