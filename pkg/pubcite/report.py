"""
Ordering, rounding and rendering of ranking tables and diagnostics.

Rounding is round-half-up on exact fractions and happens only here. Every
renderer returns UTF-8 bytes with LF line endings, so identical inputs give
byte-identical output.
"""

import csv
import io
import json
import math

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping, Optional, Sequence

import jinja2

from .errors import UnsupportedFormat
from .indicators import Aggregation, SeriesRow
from .model import (
    CorpusSummary,
    DisciplineOverviewRow,
    IndicatorCounts,
    IndicatorRow,
)
from .normalize import AuditReport

RANKING_HEADER = (
    "publisher",
    "total_items",
    "books",
    "chapters",
    "total_citations",
    "avg_cit",
    "non_cit_pct",
)
OVERVIEW_HEADER = ("discipline",) + RANKING_HEADER[1:]
SERIES_HEADER = (
    "discipline",
    "publisher",
    "books",
    "chapters",
    "chapters_per_book",
    "flagged",
)
AUDIT_HEADER = ("kind", "publisher", "variant", "records")
CORRELATION_HEADER = ("discipline", "publishers", "items_books_r")

# Column titles of the published tables, used for Markdown output.
_MARKDOWN_TITLES = {
    "publisher": "Publisher",
    "discipline": "Discipline",
    "total_items": "Total Items",
    "books": "Books",
    "chapters": "Chap",
    "total_citations": "Total Citations",
    "avg_cit": "AvgCit",
    "non_cit_pct": "NonCit",
    "chapters_per_book": "Chap/Book",
    "flagged": "Flagged",
    "kind": "Kind",
    "variant": "Variant",
    "records": "Records",
    "publishers": "Publishers",
    "items_books_r": "r(Items, Books)",
    "near_miss": "Near miss",
    "differing_token": "Differing token",
}
_LEFT_ALIGNED = {
    "publisher",
    "discipline",
    "kind",
    "variant",
    "flagged",
    "near_miss",
    "differing_token",
}


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"
    MARKDOWN = "md"

    @classmethod
    def parse(cls, token: "str | OutputFormat") -> "OutputFormat":
        if isinstance(token, cls):
            return token
        value = str(token).strip().lower()
        if value == "markdown":
            value = "md"
        try:
            return cls(value)
        except ValueError:
            raise UnsupportedFormat(str(token)) from None


class ChaptersPerBookMode(Enum):
    FLOOR = "floor"
    TWO_DECIMALS = "two-decimals"


def _half_up(x: Fraction, scale: int) -> int:
    return math.floor(Fraction(x) * scale + Fraction(1, 2))


def round_avg(x: Fraction) -> str:
    if x < 0:
        raise ValueError("round_avg expects a non-negative value")
    hundredths = _half_up(x, 100)
    return f"{hundredths // 100}.{hundredths % 100:02d}"


def round_pct(x: Fraction) -> str:
    if not 0 <= x <= 1:
        raise ValueError("round_pct expects a value in [0, 1]")
    return f"{_half_up(x, 100)}%"


def rank_discipline(rows: Iterable[IndicatorRow]) -> list[IndicatorRow]:
    return sorted(
        rows, key=lambda row: (-row.total_items, row.publisher.canonical_name)
    )


@dataclass(frozen=True)
class RenderedRow:
    publisher: str
    total_items: int
    books: int
    chapters: int
    total_citations: int
    avg_cit: str
    non_cit: str

    @classmethod
    def of(cls, name: str, row: IndicatorCounts) -> "RenderedRow":
        return cls(
            publisher=name,
            total_items=row.total_items,
            books=row.books,
            chapters=row.chapters,
            total_citations=row.total_citations,
            avg_cit=round_avg(row.avg_cit),
            non_cit=round_pct(row.non_cit),
        )

    def cells(self) -> list[Any]:
        return [
            self.publisher,
            self.total_items,
            self.books,
            self.chapters,
            self.total_citations,
            self.avg_cit,
            self.non_cit,
        ]


@dataclass(frozen=True)
class ReportSet:
    rankings: Mapping[str, tuple[IndicatorRow, ...]]
    overview: Optional[tuple[DisciplineOverviewRow, ...]] = None
    summary: Optional[CorpusSummary] = None
    # False only when exactly one discipline was requested.
    by_discipline: bool = True


def build_report_set(
    aggregation: Aggregation,
    disciplines: Optional[Sequence[str]] = None,
    overview: Optional[Sequence[DisciplineOverviewRow]] = None,
    summary: Optional[CorpusSummary] = None,
) -> ReportSet:
    """
    Select and rank the requested disciplines. Asking for exactly one
    discipline yields a plain table; any other request keeps the discipline
    on every row, even when only one of them has data.
    """
    if disciplines is not None:
        disciplines = list(dict.fromkeys(disciplines))
    chosen = aggregation if disciplines is None else disciplines
    rankings = {
        discipline: tuple(rank_discipline(aggregation[discipline]))
        for discipline in chosen
        if discipline in aggregation
    }
    return ReportSet(
        rankings=rankings,
        overview=tuple(overview) if overview is not None else None,
        summary=summary,
        by_discipline=disciplines is None or len(disciplines) != 1,
    )


# -- output plumbing ---------------------------------------------------------

_templates = jinja2.Environment(
    loader=jinja2.PackageLoader("pubcite", "templates"),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
    autoescape=False,
)
_templates.filters["cell"] = lambda value: str(value).replace("|", "\\|")


@dataclass(frozen=True)
class _Section:
    title: Optional[str]
    header: Sequence[str]
    rows: Sequence[Sequence[Any]]

    @property
    def titles(self) -> list[str]:
        return [_MARKDOWN_TITLES.get(column, column) for column in self.header]

    @property
    def rule(self) -> str:
        return "|" + "".join(
            "---|" if column in _LEFT_ALIGNED else "---:|" for column in self.header
        )


def write_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue().encode("utf-8")


def read_csv(data: bytes) -> tuple[tuple[str, ...], list[list[str]]]:
    """
    Split rendered CSV back into its header and rows of cell strings.

    Usage:

    >>> from pubcite.report import read_csv, write_csv
    >>> write_csv(*read_csv(data)) == data
    True
    """
    header, *rows = csv.reader(io.StringIO(data.decode("utf-8"), newline=""))
    return tuple(header), rows


def _json(document: Any) -> bytes:
    return (json.dumps(document, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def _markdown(sections: Sequence[_Section], lines: Sequence[str] = ()) -> bytes:
    text = _templates.get_template("tables.md.j2").render(
        sections=sections, lines=lines
    )
    return text.encode("utf-8")


def _exact(x: Fraction) -> str:
    return str(Fraction(x))


def _row_document(name_key: str, name: str, row: IndicatorCounts) -> dict[str, Any]:
    rendered = RenderedRow.of(name, row)
    return {
        name_key: name,
        "total_items": row.total_items,
        "books": row.books,
        "chapters": row.chapters,
        "total_citations": row.total_citations,
        "uncited_items": row.uncited_items,
        "avg_cit": rendered.avg_cit,
        "non_cit": rendered.non_cit,
        "avg_cit_exact": _exact(row.avg_cit),
        "non_cit_exact": _exact(row.non_cit),
    }


# -- rankings ------------------------------------------------------------------


def _ranking_cells(row: IndicatorRow) -> list[Any]:
    return RenderedRow.of(row.publisher.canonical_name, row).cells()


def _ranking_document(rank: int, row: IndicatorRow) -> dict[str, Any]:
    return {"rank": rank, **_row_document("publisher", str(row.publisher), row)}


def render(report_set: ReportSet, format: "str | OutputFormat") -> bytes:
    """
    Render the ranking tables of a report set.

    CSV holds the rankings only; a ``discipline`` column is prepended when more
    than one discipline is present. Markdown and JSON also carry the overview
    and summary when the report set has them.
    """
    fmt = OutputFormat.parse(format)
    rankings = report_set.rankings

    match fmt:
        case OutputFormat.CSV:
            if not report_set.by_discipline:
                rows = [_ranking_cells(r) for rs in rankings.values() for r in rs]
                return write_csv(RANKING_HEADER, rows)
            return write_csv(
                ("discipline",) + RANKING_HEADER,
                [[d] + _ranking_cells(r) for d, rs in rankings.items() for r in rs],
            )

        case OutputFormat.JSON:
            document: dict[str, Any] = {
                "disciplines": {
                    discipline: [
                        _ranking_document(rank, row)
                        for rank, row in enumerate(rows, start=1)
                    ]
                    for discipline, rows in rankings.items()
                }
            }
            if report_set.overview is not None:
                document["overview"] = _overview_documents(report_set.overview)
            if report_set.summary is not None:
                document["summary"] = summary_document(report_set.summary)
            return _json(document)

        case _:
            sections = [
                _Section(discipline, RANKING_HEADER, [_ranking_cells(r) for r in rows])
                for discipline, rows in rankings.items()
            ] or [_Section(None, RANKING_HEADER, [])]
            if report_set.overview is not None:
                sections.append(_overview_section(report_set.overview, "Overview"))
            lines = (
                render_summary(report_set.summary).splitlines()
                if report_set.summary is not None
                else ()
            )
            return _markdown(sections, lines)


# -- overview ------------------------------------------------------------------


def _overview_cells(row: DisciplineOverviewRow) -> list[Any]:
    return RenderedRow.of(row.discipline, row).cells()


def _overview_documents(rows: Iterable[DisciplineOverviewRow]) -> list[dict]:
    return [_row_document("discipline", row.discipline, row) for row in rows]


def _overview_section(
    rows: Iterable[DisciplineOverviewRow], title: Optional[str] = None
) -> _Section:
    return _Section(title, OVERVIEW_HEADER, [_overview_cells(row) for row in rows])


def render_overview(
    rows: Sequence[DisciplineOverviewRow], format: "str | OutputFormat"
) -> bytes:
    match OutputFormat.parse(format):
        case OutputFormat.CSV:
            return write_csv(OVERVIEW_HEADER, [_overview_cells(row) for row in rows])
        case OutputFormat.JSON:
            return _json({"overview": _overview_documents(rows)})
        case _:
            return _markdown([_overview_section(rows)])


# -- summary -------------------------------------------------------------------


def _ratio(value: Optional[Fraction], mode: ChaptersPerBookMode) -> Optional[str]:
    if value is None:
        return None
    if mode is ChaptersPerBookMode.FLOOR:
        return str(math.floor(value))
    return round_avg(value)


def summary_document(
    summary: CorpusSummary,
    mode: ChaptersPerBookMode = ChaptersPerBookMode.FLOOR,
) -> dict[str, Any]:
    share = summary.field_share
    return {
        "total_items": summary.total_items,
        "total_books": summary.total_books,
        "total_chapters": summary.total_chapters,
        "chapters_per_book": _ratio(summary.chapters_per_book, mode),
        "selected_items": summary.selected_items,
        "selected_books": summary.selected_books,
        "selected_chapters": summary.selected_chapters,
        "selected_chapters_per_book": _ratio(summary.selected_chapters_per_book, mode),
        "field_share": round_pct(share) if share is not None else None,
    }


def render_summary(
    summary: CorpusSummary,
    chapters_per_book_mode: ChaptersPerBookMode = ChaptersPerBookMode.FLOOR,
) -> str:
    document = summary_document(summary, chapters_per_book_mode)
    return "".join(
        f"{key}: {'n/a' if value is None else value}\n"
        for key, value in document.items()
    )


# -- diagnostics ---------------------------------------------------------------


def _series_cells(row: SeriesRow, threshold: Optional[Fraction]) -> list[Any]:
    return [
        row.discipline,
        row.publisher.canonical_name,
        row.books,
        row.chapters,
        round_avg(row.ratio) if row.ratio is not None else "",
        "yes" if row.flagged(threshold) else "",
    ]


def render_series(
    rows: Sequence[SeriesRow],
    format: "str | OutputFormat",
    threshold: Optional[Fraction] = None,
) -> bytes:
    match OutputFormat.parse(format):
        case OutputFormat.CSV:
            return write_csv(SERIES_HEADER, [_series_cells(r, threshold) for r in rows])
        case OutputFormat.JSON:
            return _json(
                {
                    "series": [
                        {
                            "discipline": row.discipline,
                            "publisher": row.publisher.canonical_name,
                            "books": row.books,
                            "chapters": row.chapters,
                            "chapters_per_book": (
                                round_avg(row.ratio) if row.ratio is not None else None
                            ),
                            "flagged": row.flagged(threshold),
                        }
                        for row in rows
                    ]
                }
            )
        case _:
            return _markdown(
                [
                    _Section(
                        None,
                        SERIES_HEADER,
                        [_series_cells(r, threshold) for r in rows],
                    )
                ]
            )


def render_audit(report: AuditReport, format: "str | OutputFormat") -> bytes:
    variant_rows = [
        ["variant", cluster.publisher.canonical_name, raw, count]
        for cluster in report.clusters
        for raw, count in cluster.variants
    ]
    near_rows = [
        ["near-miss", miss.first.canonical_name, miss.second.canonical_name, ""]
        for miss in report.near_misses
    ]

    match OutputFormat.parse(format):
        case OutputFormat.CSV:
            return write_csv(AUDIT_HEADER, variant_rows + near_rows)
        case OutputFormat.JSON:
            return _json(
                {
                    "clusters": [
                        {
                            "publisher": cluster.publisher.canonical_name,
                            "records": cluster.records,
                            "variants": [
                                {"variant": raw, "records": count}
                                for raw, count in cluster.variants
                            ],
                        }
                        for cluster in report.clusters
                    ],
                    "near_misses": [
                        {
                            "first": miss.first.canonical_name,
                            "second": miss.second.canonical_name,
                            "differing_token": miss.differing_token,
                        }
                        for miss in report.near_misses
                    ],
                }
            )
        case _:
            sections = [
                _Section("Variants", AUDIT_HEADER[1:], [r[1:] for r in variant_rows])
            ]
            if report.near_misses:
                near_header = ("publisher", "near_miss", "differing_token")
                near_cells = [
                    [m.first.canonical_name, m.second.canonical_name, m.differing_token]
                    for m in report.near_misses
                ]
                sections.append(_Section("Near misses", near_header, near_cells))
            return _markdown(sections)


def render_correlations(
    values: Mapping[str, tuple[int, Optional[float]]], format: "str | OutputFormat"
) -> bytes:
    """
    Render ``discipline -> (publisher count, r or None)``.
    """
    rows = [
        [discipline, count, f"{r:.2f}" if r is not None else None]
        for discipline, (count, r) in values.items()
    ]
    match OutputFormat.parse(format):
        case OutputFormat.CSV:
            return write_csv(CORRELATION_HEADER, [[d, n, r or ""] for d, n, r in rows])
        case OutputFormat.JSON:
            return _json(
                {
                    "correlations": [
                        {"discipline": d, "publishers": n, "items_books_r": r}
                        for d, n, r in rows
                    ]
                }
            )
        case _:
            cells = [[d, n, r or "n/a"] for d, n, r in rows]
            return _markdown([_Section(None, CORRELATION_HEADER, cells)])


def render_summary_json(
    summary: CorpusSummary,
    chapters_per_book_mode: ChaptersPerBookMode = ChaptersPerBookMode.FLOOR,
) -> bytes:
    return _json({"summary": summary_document(summary, chapters_per_book_mode)})
