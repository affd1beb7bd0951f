"""Command-line front end wiring ingestion, statistics, fitting and export.

Every run writes its declared outputs atomically (temp file + rename) plus
a manifest JSON recording inputs (with checksums), flags and the library
version, so identical invocations on identical inputs are byte-identical
in their data outputs.  Exit codes: 0 success, 1 validation, 2 I/O,
3 non-convergence (outputs are still written with ``converged=false``).
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import datetime as dt
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass

import click
import numpy as np

from . import __version__
from .dcc import DccFit, check_intercept_psd, implied_news_matrix, pairwise_series
from .descriptive import describe
from .estimators import DccGarch, fit_thread_count
from .exceptions import DcclabError, FitError, FormatError
from .garch import GarchFit, fit_garch
from .panels import (
    ReturnPanel,
    align_calendars,
    load_price_csv,
    load_return_csv,
    log_returns,
    panel_to_csv,
)
from .simulate import GENERATOR_NAME, simulate_garch_dcc, spec_from_dict

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_NONCONVERGENCE = 3


@dataclass
class RunConfig:
    """One CLI invocation, fully resolved."""

    command: str
    input: str | None = None
    align_to: str | None = None
    gap_mode: str = "recompute"
    from_prices: bool = False
    date_column: str = "date"
    date_format: str = "%Y-%m-%d"
    drop_incomplete: bool = False
    scale: float = 100.0
    mode: str = "generalized"
    pairs: str = "all"
    spec: str | None = None
    output: str = ""
    variance_output: str | None = None
    metadata_output: str | None = None
    manifest: str | None = None
    delimiter: str = ","
    precision: str = "4"
    tol_f: float = 1e-8
    tol_x: float = 1e-8
    max_iter: int = 5000
    burn_in: int | None = None


def _atomic_write(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dcclab-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt(value: float, precision: str) -> str:
    if precision == "full":
        return repr(float(value))
    return f"{float(value):.4f}"


def _round_doc(obj, precision: str):
    """Round floats for emission; 4 decimals unless precision is 'full'."""
    if isinstance(obj, float):
        return float(f"{obj:.4f}") if precision != "full" else obj
    if isinstance(obj, dict):
        return {k: _round_doc(v, precision) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_doc(v, precision) for v in obj]
    return obj


def _sha256(path: str) -> dict:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        data = handle.read()
    digest.update(data)
    return {"sha256": digest.hexdigest(), "bytes": len(data)}


def _write_manifest(config: RunConfig, outputs: list[str]) -> str:
    inputs = {}
    for path in (config.input, config.align_to, config.spec):
        if path:
            inputs[path] = _sha256(path)
    flags = dataclasses.asdict(config)
    flags.pop("command")
    doc = {
        "command": config.command,
        "version": __version__,
        "inputs": inputs,
        "flags": flags,
        "outputs": sorted(outputs),
        "created_utc": dt.datetime.now(dt.timezone.utc).isoformat(),
    }
    path = config.manifest or config.output + ".manifest.json"
    return _atomic_write(path, json.dumps(doc, indent=2) + "\n")


def _load_input_panel(config: RunConfig) -> ReturnPanel:
    def load_one(path: str) -> ReturnPanel:
        if config.from_prices:
            prices = load_price_csv(
                path,
                date_column=config.date_column,
                date_format=config.date_format,
                drop_incomplete=config.drop_incomplete,
            )
            return log_returns(prices, scale=config.scale)
        return load_return_csv(
            path,
            date_column=config.date_column,
            date_format=config.date_format,
            drop_incomplete=config.drop_incomplete,
        )

    panel = load_one(config.input)
    if config.align_to:
        panel = align_calendars(panel, load_one(config.align_to), gap_mode=config.gap_mode)
    return panel


def _cmd_describe(config: RunConfig):
    panel = _load_input_panel(config)
    stats = [describe(panel.returns[:, i]) for i in range(len(panel.assets))]
    sep = "\t" if config.delimiter == "tsv" else ","
    lines = [sep.join([""] + list(panel.assets))]
    for k, (label, _) in enumerate(stats[0].as_rows()):
        cells = [label]
        for s in stats:
            value = s.as_rows()[k][1]
            cells.append(str(value) if label == "Observations" else _fmt(value, config.precision))
        lines.append(sep.join(cells))
    text = "\n".join(lines) + "\n"
    _atomic_write(config.output, text)
    click.echo(text, nl=False)
    return EXIT_OK, [config.output]


def _fit_garch_columns(panel: ReturnPanel, config: RunConfig):
    """Per-asset fits; non-convergence is captured, hard failures propagate."""

    def fit_one(column: np.ndarray):
        try:
            return fit_garch(
                column, tol_f=config.tol_f, tol_x=config.tol_x, max_iter=config.max_iter
            )
        except FitError as exc:
            if isinstance(exc.best, GarchFit):
                return exc.best
            raise

    columns = [panel.returns[:, i] for i in range(len(panel.assets))]
    workers = fit_thread_count()
    if workers == 1 or len(columns) == 1:
        return [fit_one(col) for col in columns]
    with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fit_one, columns))


def _cmd_fit_garch(config: RunConfig):
    panel = _load_input_panel(config)
    fits = _fit_garch_columns(panel, config)
    doc = {
        asset: {
            "omega": fit.params.omega,
            "a": fit.params.a,
            "b": fit.params.b,
            "loglik": fit.log_likelihood,
            "converged": fit.converged,
            "iterations": fit.iterations,
        }
        for asset, fit in zip(panel.assets, fits)
    }
    outputs = [
        _atomic_write(
            config.output, json.dumps(_round_doc(doc, config.precision), indent=2) + "\n"
        )
    ]
    if config.variance_output:
        h = np.column_stack([fit.variance_path for fit in fits])
        fmt = lambda v: _fmt(v, config.precision)
        outputs.append(
            _atomic_write(
                config.variance_output, panel_to_csv(panel.dates, panel.assets, h, fmt=fmt)
            )
        )
    code = EXIT_OK if all(fit.converged for fit in fits) else EXIT_NONCONVERGENCE
    return code, outputs


def _fit_joint(panel: ReturnPanel, config: RunConfig):
    """Two-step fit returning (DccFit, exit code); keeps best-so-far on failure."""
    model = DccGarch(
        mode=config.mode, tol_f=config.tol_f, tol_x=config.tol_x, max_iter=config.max_iter
    )
    try:
        model.fit(panel.returns)
    except FitError as exc:
        if isinstance(exc.best, DccFit):
            return exc.best, EXIT_NONCONVERGENCE
        raise
    fit = model.correlation_.fit_
    code = EXIT_OK if fit.converged else EXIT_NONCONVERGENCE
    return fit, code


def _cmd_fit_dcc(config: RunConfig):
    panel = _load_input_panel(config)
    fit, code = _fit_joint(panel, config)
    ok, min_eig = check_intercept_psd(fit.params)
    doc = {
        "mode": fit.mode,
        "assets": list(panel.assets),
        "alphas": fit.params.alphas.tolist(),
        "beta": fit.params.beta,
        "loglik": fit.log_likelihood,
        "converged": fit.converged,
        "implied_news": implied_news_matrix(fit.params).tolist(),
        "intercept_min_eigenvalue": min_eig,
    }
    path = _atomic_write(
        config.output, json.dumps(_round_doc(doc, config.precision), indent=2) + "\n"
    )
    return code, [path]


def _parse_pairs(spec: str, assets: list[str]) -> list[tuple[int, int]]:
    if spec == "all":
        n = len(assets)
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    pairs = []
    index = {name: k for k, name in enumerate(assets)}
    for item in spec.split(","):
        left, _, right = item.partition(":")
        left, right = left.strip(), right.strip()
        if left not in index or right not in index or left == right:
            raise DcclabError(f"bad pair {item!r}; known assets: {assets}")
        pairs.append((index[left], index[right]))
    return pairs


def _cmd_correlations(config: RunConfig):
    panel = _load_input_panel(config)
    fit, code = _fit_joint(panel, config)
    path = fit.correlation_path
    pairs = _parse_pairs(config.pairs, list(panel.assets))
    lines = ["date,asset_i,asset_j,rho"]
    for i, j in pairs:
        series = pairwise_series(path, i, j)
        for date, rho in zip(panel.dates, series):
            lines.append(
                f"{date.isoformat()},{panel.assets[i]},{panel.assets[j]},"
                f"{_fmt(rho, config.precision)}"
            )
    out = _atomic_write(config.output, "\n".join(lines) + "\n")
    return code, [out]


def _cmd_simulate(config: RunConfig):
    with open(config.spec, encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{config.spec}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{config.spec}: simulation spec must be a JSON object")
    if config.burn_in is not None:
        doc["burn_in"] = config.burn_in
    spec = spec_from_dict(doc)
    panel = simulate_garch_dcc(spec)
    fmt = lambda v: _fmt(v, config.precision)
    outputs = [
        _atomic_write(
            config.output, panel_to_csv(panel.dates, panel.assets, panel.returns, fmt=fmt)
        )
    ]
    metadata = {
        "seed": spec.seed,
        "generator": GENERATOR_NAME,
        "burn_in": spec.burn_in,
        "n_obs": spec.n_obs,
        "assets": list(spec.assets),
    }
    meta_path = config.metadata_output or config.output + ".metadata.json"
    outputs.append(_atomic_write(meta_path, json.dumps(metadata, indent=2) + "\n"))
    return EXIT_OK, outputs


_COMMANDS = {
    "describe": _cmd_describe,
    "fit-garch": _cmd_fit_garch,
    "fit-dcc": _cmd_fit_dcc,
    "simulate": _cmd_simulate,
    "correlations": _cmd_correlations,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    try:
        code, outputs = _COMMANDS[config.command](config)
    except FitError as exc:
        click.echo(f"error kind=FitError detail={str(exc)!r}", err=True)
        return EXIT_NONCONVERGENCE
    except DcclabError as exc:
        click.echo(f"error kind={type(exc).__name__} detail={str(exc)!r}", err=True)
        return EXIT_VALIDATION
    except OSError as exc:
        click.echo(f"error kind={type(exc).__name__} detail={str(exc)!r}", err=True)
        return EXIT_IO
    _write_manifest(config, outputs)
    return code


def _input_options(fn):
    options = [
        click.option("--input", "input_", required=True, help="Input panel CSV."),
        click.option("--from-prices", is_flag=True, help="Input holds price levels; convert to percent log returns."),
        click.option("--align-to", default=None, help="Second panel CSV; reduce to the joint calendar before running."),
        click.option("--gap-mode", type=click.Choice(["recompute", "filter"]), default="recompute", show_default=True, help="Calendar-gap handling for the primary panel."),
        click.option("--date-column", default="date", show_default=True),
        click.option("--date-format", default="%Y-%m-%d", show_default=True),
        click.option("--drop-incomplete", is_flag=True, help="Drop rows with missing prices instead of failing."),
        click.option("--scale", default=100.0, show_default=True, help="Return scale factor (100 = percent)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _common_options(fn):
    options = [
        click.option("--precision", type=click.Choice(["4", "full"]), default="4", show_default=True, help="Numeric output precision."),
        click.option("--manifest", default=None, help="Manifest path (default: <output>.manifest.json)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _tolerance_options(fn):
    options = [
        click.option("--tol-f", default=1e-8, show_default=True, help="Optimizer function tolerance."),
        click.option("--tol-x", default=1e-8, show_default=True, help="Optimizer point tolerance."),
        click.option("--max-iter", default=5000, show_default=True, help="Optimizer iteration cap."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="dcclab")
def main():
    """Volatility filtering, dynamic correlations, and panel utilities."""


@main.command("describe")
@_input_options
@_common_options
@click.option("--output", default="describe.csv", show_default=True)
@click.option("--delimiter", type=click.Choice(["csv", "tsv"]), default="csv", show_default=True)
def describe_cmd(input_, from_prices, align_to, gap_mode, date_column, date_format,
                 drop_incomplete, scale, precision, manifest, output, delimiter):
    """Per-asset descriptive statistics table."""
    config = RunConfig(
        command="describe", input=input_, from_prices=from_prices, align_to=align_to,
        gap_mode=gap_mode, date_column=date_column, date_format=date_format,
        drop_incomplete=drop_incomplete, scale=scale, precision=precision,
        manifest=manifest, output=output, delimiter=delimiter,
    )
    sys.exit(run(config))


@main.command("fit-garch")
@_input_options
@_common_options
@_tolerance_options
@click.option("--output", default="garch_fit.json", show_default=True)
@click.option("--variance-output", default=None, help="Also write the fitted variance paths as CSV.")
def fit_garch_cmd(input_, from_prices, align_to, gap_mode, date_column, date_format,
                  drop_incomplete, scale, precision, manifest, tol_f, tol_x, max_iter,
                  output, variance_output):
    """Fit one GARCH(1,1) per asset; emit a JSON document per asset."""
    config = RunConfig(
        command="fit-garch", input=input_, from_prices=from_prices, align_to=align_to,
        gap_mode=gap_mode, date_column=date_column, date_format=date_format,
        drop_incomplete=drop_incomplete, scale=scale, precision=precision,
        manifest=manifest, tol_f=tol_f, tol_x=tol_x, max_iter=max_iter,
        output=output, variance_output=variance_output,
    )
    sys.exit(run(config))


@main.command("fit-dcc")
@_input_options
@_common_options
@_tolerance_options
@click.option("--mode", type=click.Choice(["scalar", "generalized"]), default="generalized", show_default=True)
@click.option("--output", default="dcc_fit.json", show_default=True)
def fit_dcc_cmd(input_, from_prices, align_to, gap_mode, date_column, date_format,
                drop_incomplete, scale, precision, manifest, tol_f, tol_x, max_iter,
                mode, output):
    """Two-step correlation fit; emit parameter JSON."""
    config = RunConfig(
        command="fit-dcc", input=input_, from_prices=from_prices, align_to=align_to,
        gap_mode=gap_mode, date_column=date_column, date_format=date_format,
        drop_incomplete=drop_incomplete, scale=scale, precision=precision,
        manifest=manifest, tol_f=tol_f, tol_x=tol_x, max_iter=max_iter,
        mode=mode, output=output,
    )
    sys.exit(run(config))


@main.command("correlations")
@_input_options
@_common_options
@_tolerance_options
@click.option("--mode", type=click.Choice(["scalar", "generalized"]), default="generalized", show_default=True)
@click.option("--pairs", default="all", show_default=True, help='"all" or comma-separated "A:B" pairs.')
@click.option("--output", default="correlations.csv", show_default=True)
def correlations_cmd(input_, from_prices, align_to, gap_mode, date_column, date_format,
                     drop_incomplete, scale, precision, manifest, tol_f, tol_x, max_iter,
                     mode, pairs, output):
    """Fit the model and emit pairwise correlation series as long CSV."""
    config = RunConfig(
        command="correlations", input=input_, from_prices=from_prices, align_to=align_to,
        gap_mode=gap_mode, date_column=date_column, date_format=date_format,
        drop_incomplete=drop_incomplete, scale=scale, precision=precision,
        manifest=manifest, tol_f=tol_f, tol_x=tol_x, max_iter=max_iter,
        mode=mode, pairs=pairs, output=output,
    )
    sys.exit(run(config))


@main.command("simulate")
@_common_options
@click.option("--spec", required=True, help="JSON document describing the data-generating process.")
@click.option("--output", default="simulated_returns.csv", show_default=True)
@click.option("--metadata", "metadata_output", default=None, help="Metadata path (default: <output>.metadata.json).")
@click.option("--burn-in", default=None, type=int, help="Override the spec's burn-in length.")
def simulate_cmd(precision, manifest, spec, output, metadata_output, burn_in):
    """Simulate a return panel from a process spec."""
    config = RunConfig(
        command="simulate", precision=precision, manifest=manifest, spec=spec,
        output=output, metadata_output=metadata_output, burn_in=burn_in,
    )
    sys.exit(run(config))


if __name__ == "__main__":
    main()
