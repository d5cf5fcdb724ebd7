"""Command-line interface.

Subcommands: simulate, distances, estimate, mc, verify. Exit codes are a
stable scripting contract: 0 success or pass, 1 check failure, 2 input or
configuration error, 3 numerical failure. All randomness flows from explicit
seed flags or config fields; nothing reads entropy from the environment.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, io
from .codegree import codegree_distance_matrix
from .estimate import bandwidth_diagnostic, estimate
from .exceptions import BandwidthTargetError, InputDataError, SingularSystemError
from .experiments import ExperimentConfig, run_experiment
from .graphon import GraphonSpec, verify_contraction_bound, verify_inversion_bound
from .simulate import RNG_ALGORITHM, OutcomeSpec, draw_sample, ingest_sample

EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_INPUT_ERRORS = (InputDataError, ValueError, OSError, json.JSONDecodeError, KeyError)

_NO_CORRECTION_CAVEAT = (
    "caveat: coefficients are uncorrected point estimates; kernel matching "
    "carries finite-sample bias, so do not read them as centered for inference."
)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_json(path):
    with open(path) as handle:
        return json.load(handle)


@click.group()
@click.version_option(
    version=__version__, message=f"%(prog)s %(version)s (rng: {RNG_ALGORITHM})"
)
def main():
    """Simulate, estimate, and verify codegree-matched network regressions."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
              help="JSON file with 'graphon' and 'outcome' sections.")
@click.option("--n", "n_agents", required=True, type=int, help="Number of agents.")
@click.option("--seed", required=True, type=int, help="Seed for the Philox stream.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--adjacency-format", type=click.Choice(["dense", "edgelist"]), default="dense",
              show_default=True)
@click.option("--emit-truth", is_flag=True,
              help="Also write the hidden types and influence (truth.csv).")
def simulate(config_path, n_agents, seed, out_dir, adjacency_format, emit_truth):
    """Draw a sample and write outcome, adjacency, and optional truth files."""
    try:
        config = _load_json(config_path)
        graphon = GraphonSpec.from_json_dict(config["graphon"])
        outcome = OutcomeSpec.from_json_dict(config["outcome"])
        sample = draw_sample(graphon, outcome, n_agents, seed)
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))

    out = Path(out_dir)
    if adjacency_format == "dense":
        adjacency_job = (out / "adjacency.csv", lambda p: io.write_dense_adjacency(p, sample.adjacency))
    else:
        adjacency_job = (out / "edges.csv", lambda p: io.write_edge_list(p, sample.adjacency))
    jobs = [(out / "outcome.csv", lambda p: io.write_outcome_csv(p, sample.y, sample.x)), adjacency_job]
    if emit_truth:
        jobs.append(
            (out / "truth.csv",
             lambda p: io.write_truth_csv(p, sample.latent_types, sample.social_influence))
        )
    started: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for path, write in jobs:
            started.append(path)  # before writing, so a partial file gets removed too
            write(path)
    except OSError as exc:
        for path in started:
            path.unlink(missing_ok=True)
        _fail(EXIT_INPUT, f"could not write outputs: {exc}")
    for path, _ in jobs:
        click.echo(str(path))


@main.command()
@click.option("--adjacency", "adjacency_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--method", type=click.Choice(["gram", "reference"]), default="gram",
              show_default=True)
@click.option("--n", "n_agents", type=int, default=None,
              help="Agent count; required for edge-list input.")
def distances(adjacency_path, out_path, method, n_agents):
    """Write the dense codegree-distance matrix as CSV."""
    try:
        adjacency = io.read_adjacency(adjacency_path, n=n_agents)
        if method == "reference" and adjacency.shape[0] > 500:
            raise InputDataError(
                "reference method is quartic in n and limited to 500 agents here; use --method gram"
            )
        matrix = codegree_distance_matrix(adjacency, method=method)
        io.write_distance_csv(out_path, matrix)
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))
    click.echo(out_path)


@main.command(name="estimate")
@click.option("--outcome", "outcome_path", required=True, type=click.Path(dir_okay=False))
@click.option("--adjacency", "adjacency_path", required=True, type=click.Path(dir_okay=False))
@click.option("--kernel", type=click.Choice(["boxcar", "smooth_bump"]), default="boxcar",
              show_default=True)
@click.option("--bandwidth", type=float, default=None,
              help="Fixed bandwidth; omit to select automatically.")
@click.option("--auto-bandwidth", is_flag=True,
              help="Force automatic bandwidth selection (the default when --bandwidth is absent).")
@click.option("--gamma-rate", type=float, default=1.0, show_default=True)
@click.option("--target-r", type=float, default=0.05, show_default=True,
              help="Minimum per-agent match rate for automatic selection.")
@click.option("--influence-out", type=click.Path(dir_okay=False), default=None,
              help="Where to write the per-agent influence CSV.")
def estimate_cmd(outcome_path, adjacency_path, kernel, bandwidth, auto_bandwidth,
                 gamma_rate, target_r, influence_out):
    """Estimate coefficients and per-agent influence from files."""
    if bandwidth is not None and auto_bandwidth:
        _fail(EXIT_INPUT, "--bandwidth and --auto-bandwidth are mutually exclusive")
    try:
        sample = ingest_sample(outcome_path, adjacency_path)
        distance_matrix = codegree_distance_matrix(sample.adjacency)
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))
    try:
        result = estimate(
            sample.x,
            sample.y,
            distance_matrix,
            kernel=kernel,
            bandwidth="auto" if bandwidth is None else bandwidth,
            gamma_rate=gamma_rate,
            target_r=target_r,
        )
    except (SingularSystemError, BandwidthTargetError) as exc:
        _fail(EXIT_NUMERICAL, f"{exc} (hint: raise the bandwidth)")
    click.echo(json.dumps(result.to_json_dict(), sort_keys=True))
    if influence_out is not None:
        try:
            io.write_influence_csv(influence_out, result.influence)
        except OSError as exc:
            _fail(EXIT_INPUT, f"could not write influence CSV: {exc}")
    diag = bandwidth_diagnostic(
        distance_matrix, kernel=kernel, bandwidth=result.bandwidth, gamma_rate=gamma_rate
    )
    click.echo(diag.table(), err=True)
    click.echo(_NO_CORRECTION_CAVEAT, err=True)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--threads", type=int, default=None,
              help="Concurrent replications; bounds peak memory at threads x O(n^2). "
                   "Defaults to the machine's core count.")
def mc(config_path, out_dir, threads):
    """Run the Monte Carlo checks of an experiment config."""
    try:
        data = _load_json(config_path)
        if threads is not None:
            data["threads"] = threads
        elif "threads" not in data:
            data["threads"] = os.cpu_count() or 1
        config = ExperimentConfig.from_json_dict(data)
        report = run_experiment(config)
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))

    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "raw.csv", "w", newline="") as handle:
            handle.write("check,n,replication,seed,metric,value\n")
            for check, n, rep, seed, metric, value in report.raw_rows():
                handle.write(f"{check},{n},{rep},{seed},{metric},{value!r}\n")
        with open(out / "aggregates.csv", "w", newline="") as handle:
            handle.write("check,metric,n,successes,failures,median\n")
            for check, metric, n, good, bad, med in report.aggregate_rows():
                handle.write(f"{check},{metric},{n},{good},{bad},{med!r}\n")
        summary = "\n".join(report.summary_lines()) + "\n"
        with open(out / "summary.txt", "w", newline="") as handle:
            handle.write(summary)
    except OSError as exc:
        _fail(EXIT_INPUT, f"could not write outputs: {exc}")
    click.echo(summary, nl=False)
    click.echo(f"runtime: {report.runtime_seconds:.2f}s", err=True)
    if not report.passed:
        sys.exit(EXIT_CHECK_FAILED)


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(dir_okay=False),
              help="Graphon JSON file.")
@click.option("--check", type=click.Choice(["contraction", "inversion"]), required=True)
@click.option("--pairs", type=int, default=1000, show_default=True,
              help="Number of random type pairs.")
@click.option("--grid-size", type=int, default=100, show_default=True,
              help="Side of the dense pair grid.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Where to write the per-pair report CSV.")
def verify(spec_path, check, pairs, grid_size, seed, out_path):
    """Sweep a distance bound over dense and random type pairs."""
    try:
        spec = GraphonSpec.from_json_dict(_load_json(spec_path))
        side = np.linspace(0.0, 1.0, grid_size)
        uu, vv = np.meshgrid(side, side, indexing="ij")
        rng = np.random.default_rng(seed)
        pair_array = np.vstack([
            np.column_stack([uu.ravel(), vv.ravel()]),
            rng.random((pairs, 2)),
        ])
        if check == "contraction":
            report = verify_contraction_bound(spec, pair_array)
        else:
            report = verify_inversion_bound(spec, pair_array)
    except _INPUT_ERRORS as exc:
        _fail(EXIT_INPUT, str(exc))

    if report.certified is False:
        click.echo("warning: regularity constants not certified for this graphon; "
                   "bound not evaluated", err=True)
        sys.exit(0)
    if out_path is not None:
        try:
            io.write_bound_report_csv(out_path, report)
        except OSError as exc:
            _fail(EXIT_INPUT, f"could not write report: {exc}")
    click.echo(f"{check}: {report.n_pairs} pairs, {report.n_violations} violations")
    if report.n_violations:
        for idx in report.violations()[:20]:
            click.echo(
                f"violation pair {idx}: u={report.u[idx]!r} v={report.v[idx]!r} "
                f"delta={report.delta[idx]!r} d={report.d[idx]!r} bound={report.bound[idx]!r}",
                err=True,
            )
        sys.exit(EXIT_CHECK_FAILED)
