"""
Record file ingestion.

A record file is UTF-8, tab separated, and starts with :data:`RECORD_HEADER`.
Subject categories inside a cell are separated by ``;``; an empty
``parent_book_id`` cell means the record has no parent.
"""

import logging
import re

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

from .analysis.checks import corpus_findings
from .analysis.findings import Finding
from .errors import (
    EmptyAfterNormalization,
    InvalidRecord,
    InvalidWindow,
    MalformedHeader,
    MalformedLine,
)
from .model import BibRecord, Corpus, DocType, Taxonomy
from .normalize import normalize_key
from .utilities import Source, read_text, split_lines

logger = logging.getLogger(__name__)

RECORD_COLUMNS = (
    "record_id",
    "doc_type",
    "raw_publisher",
    "parent_book_id",
    "pub_year",
    "subject_categories",
    "citations",
)
RECORD_HEADER = "\t".join(RECORD_COLUMNS)
CATEGORY_SEPARATOR = ";"

_INTEGER = re.compile(r"-?[0-9]+")


@dataclass(frozen=True)
class YearWindow:
    from_year: int = 2006
    to_year: int = 2011

    def __post_init__(self):
        if self.from_year > self.to_year:
            raise InvalidWindow(self.from_year, self.to_year)

    def __contains__(self, year: int) -> bool:
        return self.from_year <= year <= self.to_year


def _integer(cell: str, line_no: int, column: str) -> int:
    if not _INTEGER.fullmatch(cell):
        raise MalformedLine(line_no, f"{column} is not an integer: {cell!r}")
    return int(cell)


def parse_record_line(line: str, line_no: int) -> BibRecord:
    cells = line.split("\t")
    if len(cells) != len(RECORD_COLUMNS):
        raise MalformedLine(
            line_no, f"expected {len(RECORD_COLUMNS)} columns, found {len(cells)}"
        )
    record_id, doc_type, publisher, parent, year, categories, citations = (
        cell.strip() for cell in cells
    )

    try:
        kind = DocType(doc_type.upper())
    except ValueError:
        raise MalformedLine(line_no, f"bad doc_type {doc_type!r}") from None

    if publisher:
        try:
            normalize_key(publisher)
        except EmptyAfterNormalization as exc:
            raise MalformedLine(line_no, str(exc)) from exc

    try:
        return BibRecord(
            record_id=record_id,
            doc_type=kind,
            raw_publisher=publisher,
            parent_book_id=parent or None,
            pub_year=_integer(year, line_no, "pub_year"),
            categories=frozenset(categories.split(CATEGORY_SEPARATOR)),
            citations=_integer(citations, line_no, "citations"),
        )
    except InvalidRecord as exc:
        raise MalformedLine(line_no, str(exc)) from exc


def _parse_chunk(chunk: list[tuple[int, str]]) -> list[BibRecord]:
    return [parse_record_line(line, line_no) for line_no, line in chunk if line.strip()]


def parse_records(source: Source, workers: int = 1) -> list[BibRecord]:
    """
    Parse every data line of a record file, ignoring blank lines.

    With ``workers > 1`` the lines are parsed in contiguous chunks on a thread
    pool; chunks are re-joined in file order, so the result is the same as a
    sequential parse.
    """
    lines = split_lines(read_text(source))
    if not lines or lines[0].strip() != RECORD_HEADER:
        raise MalformedHeader(lines[0] if lines else "")

    numbered = list(enumerate(lines[1:], start=2))
    if workers <= 1 or len(numbered) < 2 * workers:
        return _parse_chunk(numbered)

    size = -(-len(numbered) // workers)
    chunks = [numbered[i : i + size] for i in range(0, len(numbered), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parsed = list(pool.map(_parse_chunk, chunks))
    return [record for chunk in parsed for record in chunk]


def load_corpus(
    source: Source, window: Optional[YearWindow] = None, workers: int = 1
) -> Corpus:
    window = window or YearWindow()
    records = parse_records(source, workers=workers)

    # Uniqueness covers the whole file, not only the records in the window.
    Corpus.of(records)
    corpus = Corpus.of(r for r in records if r.pub_year in window)

    logger.info(
        "Loaded %d of %d records within %d-%d",
        len(corpus),
        len(records),
        window.from_year,
        window.to_year,
    )
    return corpus


def validate_corpus(corpus: Corpus, taxonomy: Taxonomy) -> list[Finding]:
    return list(corpus_findings(corpus, taxonomy))


def format_record(record: BibRecord) -> str:
    return "\t".join(
        (
            record.record_id,
            record.doc_type.value,
            record.raw_publisher,
            record.parent_book_id or "",
            str(record.pub_year),
            CATEGORY_SEPARATOR.join(sorted(record.categories)),
            str(record.citations),
        )
    )


def dump_corpus(corpus: Corpus) -> str:
    return "".join(line + "\n" for line in [RECORD_HEADER, *map(format_record, corpus)])
