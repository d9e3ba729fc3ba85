import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional

import click
import typer
from rich.console import Console
from tabulate import tabulate

from catalog_processing import catalog_entries, entries_by_degree, entry, entry_to_dict, smooth_spec
from complexity_processing import analyze, analyze_blowups
from curve_processing import enumerate_minus_one_candidates, enumerate_root_candidates, negative_curve_set
from data_processing_common import (
    ComplexityError,
    InputError,
    VerificationError,
    format_fraction,
    make_progress,
    report_message,
    setup_logging,
    silenced_stdout,
    track,
)
from decomposition_processing import classify_fiber_decomposition, decompositions_of
from graph_processing import DualGraph, find_min_content_cycle, is_tree, to_dot
from lattice_utils import anticanonical_degree, parse_class
from lc_processing import lc_check, lct_pair, load_boundary
from surface_processing import PointSpec, SurfaceModel, SurfaceSpec, blow_up, dump_spec, load_spec, validate_spec

logger = logging.getLogger(__name__)

DEFAULT_WORKERS = 4
SAMPLE_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'sample_data')

# (-1)-class and root counts for n = 0..8 points
MINUS_ONE_COUNTS = (0, 1, 3, 6, 10, 16, 27, 56, 240)
ROOT_COUNTS = (0, 0, 2, 8, 20, 40, 72, 126, 240)

app = typer.Typer(add_completion=False, no_args_is_help=True,
                  help="sigma and gamma of du Val del Pezzo surfaces, with certificates.")

# silent / log_file of the current invocation
options = {'silent': False, 'log_file': None}


def emit(message: str):
    report_message(message, silent=options['silent'], log_file=options['log_file'])


def emit_json(data):
    emit(json.dumps(data, indent=2, sort_keys=True))


@app.callback()
def main(
    ctx: typer.Context,
    silent: bool = typer.Option(False, "--silent", help="Log everything to the log file instead of the terminal."),
    log_file: Optional[str] = typer.Option(None, "--log-file", help="Append log records (and silent output) here."),
    verbose: bool = typer.Option(False, "--verbose", help="Show debug records."),
):
    if silent and not log_file:
        log_file = 'operation_log.txt'
    setup_logging(silent=silent, log_file=log_file, verbose=verbose)
    options.update(silent=silent, log_file=log_file)
    if silent:
        ctx.with_resource(silenced_stdout(log_file))


# ------------------------------------------------------------------ analyze

def _analyze_file(path: str):
    try:
        return analyze(load_spec(path)), None
    except ComplexityError as e:
        return None, e


def _exit_code(error: Exception) -> int:
    return 2 if isinstance(error, VerificationError) else 1


def _run_batch(directory: str, as_json: bool, workers: int):
    if not os.path.isdir(directory):
        raise InputError(f"Batch directory {directory} does not exist")
    paths = sorted(os.path.join(directory, name) for name in os.listdir(directory) if name.endswith('.json'))
    if not paths:
        raise InputError(f"No .json spec files in {directory}")
    results = {}
    with make_progress(options['silent']) as progress:
        task = progress.add_task("Analyzing surfaces...", total=len(paths))
        with ThreadPoolExecutor(max_workers=workers) as executor:
            futures = {path: executor.submit(_analyze_file, path) for path in paths}
            for path in paths:
                results[path] = futures[path].result()
                progress.advance(task)
    code = 0
    documents = {}
    for path in paths:
        report, error = results[path]
        name = os.path.basename(path)
        if error is not None:
            code = max(code, _exit_code(error))
            documents[name] = {"error": str(error)}
            if not as_json:
                emit(f"== {name} ==\nerror: {error}")
        else:
            documents[name] = report.to_dict()
            if not as_json:
                emit(f"== {name} ==\n{report.render_text()}")
    if as_json:
        emit_json(documents)
    if code:
        raise typer.Exit(code)


@app.command("analyze")
def analyze_command(
    file: Optional[str] = typer.Argument(None, help="Surface spec JSON file."),
    as_json: bool = typer.Option(False, "--json", help="Print the report as JSON."),
    batch: Optional[str] = typer.Option(None, "--batch", help="Analyze every .json spec in a directory."),
    workers: int = typer.Option(DEFAULT_WORKERS, "--workers", min=1, help="Threads for batch mode."),
):
    """Compute sigma and gamma with a verified certificate."""
    if batch:
        _run_batch(batch, as_json, workers)
        return
    if file is None:
        raise InputError("analyze needs a spec FILE or --batch DIR")
    report = analyze(load_spec(file))
    if as_json:
        emit_json(report.to_dict())
    else:
        emit(report.render_text())


# ------------------------------------------------------------------ inspection

@app.command("curves")
def curves_command(file: str = typer.Argument(..., help="Surface spec JSON file.")):
    """List the negative curves D(Y)."""
    spec = load_spec(file)
    dy = negative_curve_set(spec)
    rows = [[c.id, "-1" if c.cls.square() == -1 else "-2", c.cls.pretty(),
             anticanonical_degree(spec.lattice, c.cls)] for c in dy.curves]
    emit(f"degree={spec.degree} singularity={spec.singularity} curves={len(dy)}")
    emit(tabulate(rows, headers=["id", "self-int", "class", "-K.C"]))


@app.command("graph")
def graph_command(
    file: str = typer.Argument(..., help="Surface spec JSON file."),
    dot: bool = typer.Option(False, "--dot", help="Emit Graphviz DOT."),
):
    """Dual graph of D(Y)."""
    spec = load_spec(file)
    g = DualGraph(spec.lattice, negative_curve_set(spec).curves)
    cycle = None if is_tree(g) else find_min_content_cycle(g, spec.degree)
    if dot:
        emit(to_dot(g, cycle, name=(spec.name or "DY").replace('-', '_')))
        return
    rows = [[v, "-1" if g.is_minus_one(v) else "-2",
             ', '.join(f"{w}" if g.multiplicity(v, w) == 1 else f"{w}x{g.multiplicity(v, w)}" for w in g.neighbors(v))]
            for v in g.nodes]
    emit(tabulate(rows, headers=["node", "self-int", "neighbors"]))
    if cycle is None:
        emit("tree=true")
    else:
        emit(f"tree=false min_cycle={','.join(str(v) for v in cycle.nodes)} content={cycle.content}")


@app.command("decompose")
def decompose_command(
    file: str = typer.Argument(..., help="Surface spec JSON file."),
    divisor_class: str = typer.Option(..., "--class", help='Class as raw coordinates "3,-1,-1" or symbolic "2H-E1-E2".'),
):
    """Decompositions of a class over D(Y), classified when the class is a fiber."""
    spec = load_spec(file)
    dy = negative_curve_set(spec)
    L = parse_class(divisor_class, spec.n)
    found = decompositions_of(spec, L, dy)
    is_fiber = L.square() == 0 and anticanonical_degree(spec.lattice, L) == 2
    g = DualGraph(spec.lattice, dy.curves) if is_fiber else None
    rows = []
    for k, dec in enumerate(found, 1):
        terms = ' + '.join(f"{c}*[{i}]" if c > 1 else f"[{i}]" for i, c in dec.terms)
        kind = classify_fiber_decomposition(dec, g).value if is_fiber else "-"
        rows.append([k, terms, kind])
    emit(f"class={L.pretty()} decompositions={len(found)}")
    if rows:
        emit(tabulate(rows, headers=["#", "terms", "fiber type"]))


@app.command("lc-check")
def lc_check_command(
    file: str = typer.Argument(..., help="Surface spec JSON file."),
    boundary: str = typer.Argument(..., help="Boundary JSON file."),
):
    """Is (Y, D) log canonical?"""
    spec = load_spec(file)
    result = lc_check(spec, load_boundary(spec, boundary))
    emit("LC" if result else f"NotLC: {result.witness}")


@app.command("lct")
def lct_command(
    file: str = typer.Argument(..., help="Surface spec JSON file."),
    boundary: str = typer.Argument(..., help="Boundary JSON file."),
):
    """Log canonical threshold of a boundary."""
    spec = load_spec(file)
    emit(format_fraction(lct_pair(spec, load_boundary(spec, boundary))))


# ------------------------------------------------------------------ blow-ups

@app.command("blowup")
def blowup_command(
    file: str = typer.Argument(..., help="Surface spec JSON file."),
    on: Optional[str] = typer.Option(None, "--on", help="Comma-separated (-1)-curve ids through the point; empty for a general point."),
    out: Optional[str] = typer.Option(None, "--out", help="Write the new spec here instead of printing it."),
    all_points: bool = typer.Option(False, "--all", help="Analyze the blow-up at every legal point."),
):
    """Blow up one point, or every legal point with --all."""
    spec = load_spec(file)
    if all_points:
        rows = []
        for point, report in analyze_blowups(spec):
            sigma = format_fraction(report.sigma) if report.is_exact else \
                "[{}, {}]".format(*(format_fraction(x) for x in report.sigma_interval))
            rows.append([','.join(str(i) for i in point.on_curves) or "general", report.singularity,
                         sigma, report.route.value])
        emit(tabulate(rows, headers=["point", "singularity", "sigma", "route"]))
        return
    try:
        ids = tuple(int(part) for part in on.split(',') if part.strip()) if on else ()
    except ValueError:
        raise InputError(f"--on expects comma-separated curve ids, got '{on}'") from None
    blown = blow_up(spec, PointSpec(ids))
    text = dump_spec(blown, out)
    if out:
        emit(f"wrote {out}: degree={blown.degree} singularity={blown.singularity}")
    else:
        emit(text)


# ------------------------------------------------------------------ catalog

@app.command("catalog")
def catalog_command(
    degree: Optional[int] = typer.Option(None, "--degree", help="Only entries of this degree."),
    as_json: bool = typer.Option(False, "--json", help="Dump entries as JSON."),
    spec_name: Optional[str] = typer.Option(None, "--spec", help="Print the spec file of one entry."),
):
    """Tree surfaces with their sigma, gamma and boundary templates."""
    if spec_name:
        emit(dump_spec(entry(spec_name).spec))
        return
    realized = entries_by_degree(degree) if degree is not None else catalog_entries()
    if as_json:
        emit_json([entry_to_dict(r) for r in realized])
        return
    rows = [[r.name, r.degree, r.spec.singularity, r.entry.rho_X, format_fraction(r.sigma),
             format_fraction(r.gamma), r.entry.slave_mode.value, r.entry.formula] for r in realized]
    emit(tabulate(rows, headers=["name", "d", "singularity", "rho_X", "sigma", "gamma", "slave", "boundary"]))


# ------------------------------------------------------------------ selftest

def _check(name: str, expected, got) -> List:
    return [name, str(expected), str(got), "ok" if expected == got else "FAIL"]


def selftest_rows(silent=False) -> List[List]:
    rows = []
    for n in track(range(9), "Counting classes...", silent):
        rows.append(_check(f"(-1)-classes n={n}", MINUS_ONE_COUNTS[n], len(enumerate_minus_one_candidates(n))))
        rows.append(_check(f"roots n={n}", ROOT_COUNTS[n], len(enumerate_root_candidates(n))))
    for d in track(range(1, 10), "Smooth surfaces...", silent):
        report = analyze(smooth_spec(d))
        rows.append(_check(f"smooth d={d} sigma", format_fraction(min(d, 12 - d)), format_fraction(report.sigma)))
        rows.append(_check(f"smooth d={d} gamma", format_fraction(max(0, 2 * (6 - d))), format_fraction(report.gamma)))
    quadric = analyze(validate_spec(SurfaceSpec(degree=8, model=SurfaceModel.P1XP1)))
    rows.append(_check("P1xP1 sigma", "4", format_fraction(quadric.sigma)))
    for realized in track(catalog_entries(), "Catalog rows...", silent):
        report = analyze(realized.spec)
        rows.append(_check(f"{realized.name} gamma", format_fraction(realized.gamma), format_fraction(report.gamma)))
    cubic = load_spec(os.path.join(SAMPLE_DIR, 'cubic.json'))
    tacnode = load_boundary(cubic, os.path.join(SAMPLE_DIR, 'tacnode.json'))
    rows.append(_check("lct tacnode", "3/4", format_fraction(lct_pair(cubic, tacnode))))
    eckardt = load_spec(os.path.join(SAMPLE_DIR, 'eckardt.json'))
    lines = load_boundary(eckardt, os.path.join(SAMPLE_DIR, 'eckardt_lines.json'))
    rows.append(_check("lct triple point", "2/3", format_fraction(lct_pair(eckardt, lines))))
    return rows


@app.command("selftest")
def selftest_command():
    """Re-derive the golden values and report a table."""
    rows = selftest_rows(options['silent'])
    failed = [row for row in rows if row[3] != "ok"]
    emit(tabulate(rows, headers=["check", "expected", "got", "status"]))
    emit(f"{len(rows) - len(failed)}/{len(rows)} checks passed")
    if failed:
        raise typer.Exit(2)


def run(argv: Optional[List[str]] = None) -> int:
    """Run the CLI and map errors to exit codes: 0 ok, 1 input, 2 verification."""
    command = typer.main.get_command(app)
    console = Console(stderr=True)
    try:
        result = command.main(args=argv, prog_name="dp-complexity", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return 1
    except click.Abort:
        return 1
    except VerificationError as e:
        console.print(f"verification failed: {e}", style="red", markup=False, highlight=False)
        return 2
    except InputError as e:
        console.print(f"error: {e}", style="red", markup=False, highlight=False)
        return 1
    return result if isinstance(result, int) else 0


if __name__ == '__main__':
    sys.exit(run())
