import functools
import logging
import os
import sys

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import click
import sentry_sdk

from . import config
from .analysis.checks import series_findings
from .errors import PubciteError, UndefinedCorrelation
from .indicators import (
    CountMode,
    SeriesAction,
    SeriesPolicy,
    aggregate,
    corpus_summary,
    correlation_items_books,
    discipline_overview,
    series_diagnostic,
)
from .ingest import YearWindow, load_corpus, validate_corpus
from .model import Corpus, Taxonomy
from .normalize import (
    AliasTable,
    audit_variants,
    default_aliases,
    default_aliases_text,
    load_aliases,
)
from .report import (
    ChaptersPerBookMode,
    build_report_set,
    render,
    render_audit,
    render_correlations,
    render_overview,
    render_series,
    render_summary,
    render_summary_json,
)
from .taxonomy import (
    default_taxonomy,
    default_taxonomy_text,
    disciplines_in_field,
    load_taxonomy,
    resolve_discipline,
)
from .utilities import write_output

logger = logging.getLogger("pubcite")


def _configure_logging(verbose: int) -> None:
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(verbose, 2)]
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    logger.handlers[:] = [handler]
    logger.setLevel(level)


def _init_sentry() -> None:
    if SENTRY_DSN := os.environ.get("SENTRY_DSN"):
        sentry_sdk.init(dsn=SENTRY_DSN, traces_sample_rate=0)


class FractionType(click.ParamType):
    name = "ratio"

    def convert(self, value, param, ctx):
        if isinstance(value, Fraction):
            return value
        try:
            return Fraction(str(value).strip())
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a number", param, ctx)


def _fatal_errors(command):
    """Turn library errors into exit status 1 with a one-line message."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except (PubciteError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper


def _stack(*decorators):
    def apply(f):
        for decorator in reversed(decorators):
            f = decorator(f)
        return f

    return apply


_input_options = _stack(
    click.option(
        "--records",
        required=True,
        type=click.Path(dir_okay=False, path_type=Path),
        help="Record file (TSV, UTF-8).",
    ),
    click.option(
        "--taxonomy",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Category to discipline file. Defaults to the embedded one.",
    ),
    click.option(
        "--aliases",
        type=click.Path(dir_okay=False, path_type=Path),
        help="Publisher alias file. Defaults to the embedded one.",
    ),
    click.option("--from-year", type=int, default=2006, show_default=True),
    click.option("--to-year", type=int, default=2011, show_default=True),
    click.option(
        "--workers",
        type=click.IntRange(min=1),
        default=1,
        show_default=True,
        help="Parallel parse chunks and aggregation shards.",
    ),
)

_counting_options = _stack(
    click.option(
        "--count-mode",
        type=click.Choice([mode.value for mode in CountMode]),
        default=CountMode.ALL.value,
        show_default=True,
    ),
    click.option(
        "--series-threshold",
        type=FractionType(),
        default=None,
        help="Maximum chapters per book before a publisher is flagged.",
    ),
    click.option(
        "--series-action",
        type=click.Choice([action.value for action in SeriesAction]),
        default=SeriesAction.FLAG_ONLY.value,
        show_default=True,
    ),
)


def _output_options(formats: Sequence[str], default: str):
    return _stack(
        click.option(
            "--format",
            type=click.Choice(formats),
            default=default,
            show_default=True,
        ),
        click.option(
            "--out",
            type=click.Path(dir_okay=False, path_type=Path),
            default=None,
            help="Output file. Defaults to standard output.",
        ),
    )


@dataclass(frozen=True)
class Inputs:
    corpus: Corpus
    taxonomy: Taxonomy
    aliases: AliasTable
    workers: int


def _load_inputs(
    records: Path,
    taxonomy: Optional[Path],
    aliases: Optional[Path],
    from_year: int,
    to_year: int,
    workers: int,
    **_,
) -> Inputs:
    window = YearWindow(from_year, to_year)
    loaded_taxonomy = load_taxonomy(taxonomy) if taxonomy else default_taxonomy()
    loaded_aliases = load_aliases(aliases) if aliases else default_aliases()
    corpus = load_corpus(records, window, workers=workers)

    for finding in validate_corpus(corpus, loaded_taxonomy):
        finding.log(logger)
    return Inputs(corpus, loaded_taxonomy, loaded_aliases, workers)


def _aggregate(inputs: Inputs, count_mode: str, series_threshold, series_action):
    policy = SeriesPolicy(series_threshold, SeriesAction(series_action))
    if series_threshold is not None and not policy.excludes:
        rows = series_diagnostic(
            inputs.corpus, inputs.aliases, inputs.taxonomy, shards=inputs.workers
        )
        for finding in series_findings(rows, policy.threshold):
            finding.log(logger)

    return aggregate(
        inputs.corpus,
        inputs.aliases,
        inputs.taxonomy,
        mode=CountMode(count_mode),
        series=policy,
        shards=inputs.workers,
    )


def _emit(data: bytes, out: Optional[Path]) -> None:
    write_output(data, out, click.get_binary_stream("stdout"))


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", count=True, help="More logging (repeatable).")
@click.pass_context
def cli(ctx: click.Context, verbose: int):
    """Publisher rankings from book and book chapter citation records."""
    _configure_logging(verbose)
    _init_sentry()

    if path := os.environ.get(config.CONFIG_ENV):
        try:
            settings = config.load_config(path)
            ctx.default_map = config.default_map(settings, cli.commands)
        except PubciteError as exc:
            raise click.ClickException(str(exc)) from exc
        logger.info("Using configuration from %s", path)


@cli.command()
@_input_options
@_counting_options
@click.option(
    "--discipline",
    multiple=True,
    help="Discipline to rank (repeatable). Defaults to all.",
)
@_output_options(["csv", "json", "md"], "csv")
@_fatal_errors
def report(discipline, format, out, **options):
    """Per-discipline publisher ranking tables."""
    inputs = _load_inputs(**options)
    selected = [resolve_discipline(name, inputs.taxonomy) for name in discipline]
    aggregation = _aggregate(
        inputs,
        options["count_mode"],
        options["series_threshold"],
        options["series_action"],
    )
    report_set = build_report_set(aggregation, selected or None)
    _emit(render(report_set, format), out)


@cli.command()
@_input_options
@_counting_options
@click.option("--field", default=None, help="Restrict to one broad field.")
@_output_options(["csv", "json", "md"], "csv")
@_fatal_errors
def overview(field, format, out, **options):
    """One row of indicators per discipline."""
    inputs = _load_inputs(**options)
    aggregation = _aggregate(
        inputs,
        options["count_mode"],
        options["series_threshold"],
        options["series_action"],
    )
    rows = discipline_overview(aggregation)
    if field is not None:
        wanted = set(disciplines_in_field(field, inputs.taxonomy))
        rows = [row for row in rows if row.discipline in wanted]
    _emit(render_overview(rows, format), out)


@cli.command()
@_input_options
@click.option("--field", default=None, help="Select one broad field.")
@click.option(
    "--chapters-per-book-mode",
    type=click.Choice([mode.value for mode in ChaptersPerBookMode]),
    default=ChaptersPerBookMode.FLOOR.value,
    show_default=True,
)
@_output_options(["text", "json"], "text")
@_fatal_errors
def summary(field, chapters_per_book_mode, format, out, **options):
    """Corpus totals, chapters per book and field share."""
    inputs = _load_inputs(**options)
    selected = (
        disciplines_in_field(field, inputs.taxonomy) if field is not None else None
    )
    result = corpus_summary(inputs.corpus, inputs.taxonomy, selected)
    mode = ChaptersPerBookMode(chapters_per_book_mode)

    if format == "json":
        data = render_summary_json(result, mode)
    else:
        data = render_summary(result, mode).encode("utf-8")
    _emit(data, out)


@cli.command()
@_input_options
@click.option(
    "--series-threshold",
    type=FractionType(),
    default=None,
    help="Flag pairs with more chapters per book than this.",
)
@_output_options(["csv", "json", "md"], "csv")
@_fatal_errors
def series(series_threshold, format, out, **options):
    """Chapters per book for every publisher, highest first."""
    threshold = SeriesPolicy(series_threshold).threshold
    inputs = _load_inputs(**options)
    rows = [
        row
        for row in series_diagnostic(
            inputs.corpus, inputs.aliases, inputs.taxonomy, shards=inputs.workers
        )
        if row.chapters > 0
    ]
    _emit(render_series(rows, format, threshold), out)


@cli.command()
@_input_options
@_output_options(["csv", "json", "md"], "md")
@_fatal_errors
def audit(format, out, **options):
    """Raw publisher variants behind each canonical name."""
    inputs = _load_inputs(**options)
    _emit(render_audit(audit_variants(inputs.corpus, inputs.aliases), format), out)


@cli.command()
@_input_options
@_counting_options
@_output_options(["csv", "json", "md"], "csv")
@_fatal_errors
def correlation(format, out, **options):
    """Correlation between total items and books per discipline."""
    inputs = _load_inputs(**options)
    aggregation = _aggregate(
        inputs,
        options["count_mode"],
        options["series_threshold"],
        options["series_action"],
    )

    values = {}
    for discipline, rows in aggregation.items():
        try:
            values[discipline] = (len(rows), correlation_items_books(rows))
        except UndefinedCorrelation:
            values[discipline] = (len(rows), None)
    _emit(render_correlations(values, format), out)


@cli.command("export-defaults")
@click.argument("directory", type=click.Path(file_okay=False, path_type=Path))
@_fatal_errors
def export_defaults(directory: Path):
    """Write the embedded taxonomy and alias files for editing."""
    directory.mkdir(parents=True, exist_ok=True)
    for name, text in (
        ("taxonomy.tsv", default_taxonomy_text()),
        ("aliases.tsv", default_aliases_text()),
    ):
        target = directory / name
        target.write_text(text, encoding="utf-8")
        click.echo(str(target), err=True)


def main():
    cli(prog_name="pubcite")
