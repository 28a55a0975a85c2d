"""
Production and impact indicators per discipline and publisher.

Every record contributes once to each discipline its categories map to, with
its whole citation count. Counts are summed exactly; ``avg_cit`` and
``non_cit`` are derived as fractions of the summed counts.
"""

import logging

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Optional, Sequence, Tuple

import numpy as np

from .errors import InputError, UndefinedCorrelation
from .model import (
    BibRecord,
    Corpus,
    CorpusSummary,
    DisciplineOverviewRow,
    IndicatorRow,
    PublisherId,
    Taxonomy,
)
from .normalize import AliasTable, canonicalize
from .taxonomy import disciplines_for

logger = logging.getLogger(__name__)

Aggregation = dict[str, list[IndicatorRow]]
_Key = Tuple[str, PublisherId]


class CountMode(Enum):
    ALL = "all"
    BOOKS_ONLY = "books"
    CHAPTERS_ONLY = "chapters"

    def admits(self, record: BibRecord) -> bool:
        match self:
            case CountMode.BOOKS_ONLY:
                return record.is_book
            case CountMode.CHAPTERS_ONLY:
                return not record.is_book
            case _:
                return True


class SeriesAction(Enum):
    FLAG_ONLY = "flag"
    EXCLUDE = "exclude"


@dataclass(frozen=True)
class SeriesPolicy:
    threshold: Optional[Fraction] = None
    action: SeriesAction = SeriesAction.FLAG_ONLY

    def __post_init__(self):
        if self.threshold is not None:
            if self.threshold <= 0:
                raise InputError("series threshold must be positive")
            object.__setattr__(self, "threshold", Fraction(self.threshold))

    @property
    def excludes(self) -> bool:
        return self.action is SeriesAction.EXCLUDE and self.threshold is not None


@dataclass
class _Tally:
    books: int = 0
    chapters: int = 0
    citations: int = 0
    uncited: int = 0

    def add(self, record: BibRecord) -> None:
        if record.is_book:
            self.books += 1
        else:
            self.chapters += 1
        self.citations += record.citations
        if record.citations == 0:
            self.uncited += 1

    def merge(self, other: "_Tally") -> None:
        self.books += other.books
        self.chapters += other.chapters
        self.citations += other.citations
        self.uncited += other.uncited

    def counts(self) -> dict[str, int]:
        return dict(
            total_items=self.books + self.chapters,
            books=self.books,
            chapters=self.chapters,
            total_citations=self.citations,
            uncited_items=self.uncited,
        )


class _Resolver:
    """
    Canonical publishers and discipline sets for every record of a run.

    Everything is resolved in the constructing thread; afterwards the resolver
    is only read, so tally shards can share it.
    """

    def __init__(
        self, aliases: AliasTable, taxonomy: Taxonomy, records: Iterable[BibRecord]
    ):
        publishers: dict[str, PublisherId] = {}
        disciplines: dict[frozenset[str], frozenset[str]] = {}
        for record in records:
            raw, categories = record.raw_publisher, record.categories
            if raw not in publishers:
                publishers[raw] = canonicalize(raw, aliases)
            if categories not in disciplines:
                disciplines[categories] = disciplines_for(categories, taxonomy)
        self._publishers = MappingProxyType(publishers)
        self._disciplines = MappingProxyType(disciplines)

    def assignments(
        self, records: Iterable[BibRecord]
    ) -> Iterator[Tuple[_Key, BibRecord]]:
        for record in records:
            publisher = self._publishers[record.raw_publisher]
            for discipline in self._disciplines[record.categories]:
                yield (discipline, publisher), record


def _tally(
    resolver: _Resolver,
    records: Sequence[BibRecord],
    mode: CountMode,
    excluded: frozenset[_Key],
) -> dict[_Key, _Tally]:
    tallies: dict[_Key, _Tally] = {}
    for key, record in resolver.assignments(records):
        if not mode.admits(record):
            continue
        if not record.is_book and key in excluded:
            continue
        tallies.setdefault(key, _Tally()).add(record)
    return tallies


def _shards(records: Sequence[BibRecord], count: int) -> list[Sequence[BibRecord]]:
    if count <= 1 or len(records) < 2:
        return [records]
    size = -(-len(records) // min(count, len(records)))
    return [records[i : i + size] for i in range(0, len(records), size)]


def _tally_sharded(
    resolver: _Resolver,
    records: Sequence[BibRecord],
    mode: CountMode,
    excluded: frozenset[_Key],
    shards: int,
) -> dict[_Key, _Tally]:
    parts = _shards(records, shards)
    if len(parts) == 1:
        return _tally(resolver, parts[0], mode, excluded)

    with ThreadPoolExecutor(max_workers=len(parts)) as pool:
        partials = list(
            pool.map(lambda part: _tally(resolver, part, mode, excluded), parts)
        )

    merged: dict[_Key, _Tally] = {}
    for partial in partials:
        for key, tally in partial.items():
            merged.setdefault(key, _Tally()).merge(tally)
    return merged


def _by_discipline(tallies: dict[_Key, _Tally], taxonomy: Taxonomy) -> Aggregation:
    aggregation: Aggregation = {}
    for discipline in taxonomy.disciplines:
        rows = [
            IndicatorRow(publisher=publisher, **tally.counts())
            for (d, publisher), tally in tallies.items()
            if d == discipline
        ]
        if rows:
            aggregation[discipline] = sorted(rows, key=lambda row: row.publisher)
    return aggregation


@dataclass(frozen=True)
class SeriesRow:
    discipline: str
    publisher: PublisherId
    books: int
    chapters: int

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.books == 0:
            return None
        return Fraction(self.chapters, self.books)

    def flagged(self, threshold: Optional[Fraction] = None) -> bool:
        if self.ratio is None:
            return self.chapters > 0
        return threshold is not None and self.ratio > threshold


def _series_rows(tallies: dict[_Key, _Tally]) -> list[SeriesRow]:
    rows = [
        SeriesRow(discipline, publisher, tally.books, tally.chapters)
        for (discipline, publisher), tally in tallies.items()
    ]
    # Highest ratio first; pairs without books (undefined ratio) last.
    return sorted(
        rows,
        key=lambda row: (
            row.ratio is None,
            -(row.ratio or 0),
            row.discipline,
            row.publisher,
        ),
    )


def series_diagnostic(
    corpus: Corpus, aliases: AliasTable, taxonomy: Taxonomy, shards: int = 1
) -> list[SeriesRow]:
    resolver = _Resolver(aliases, taxonomy, corpus.records)
    tallies = _tally_sharded(
        resolver, corpus.records, CountMode.ALL, frozenset(), shards
    )
    return _series_rows(tallies)


def _series_exclusions(
    resolver: _Resolver, corpus: Corpus, series: SeriesPolicy, shards: int
) -> frozenset[_Key]:
    if not series.excludes:
        return frozenset()
    tallies = _tally_sharded(
        resolver, corpus.records, CountMode.ALL, frozenset(), shards
    )
    excluded = frozenset(
        (row.discipline, row.publisher)
        for row in _series_rows(tallies)
        if row.ratio is not None and row.ratio > series.threshold
    )
    for discipline, publisher in sorted(excluded):
        logger.info("Excluding chapters of %s in %s", publisher, discipline)
    return excluded


def aggregate(
    corpus: Corpus,
    aliases: AliasTable,
    taxonomy: Taxonomy,
    mode: CountMode = CountMode.ALL,
    series: Optional[SeriesPolicy] = None,
    shards: int = 1,
) -> Aggregation:
    """
    Compute one :class:`IndicatorRow` per discipline and canonical publisher.

    Disciplines come back in taxonomy order with rows sorted by publisher
    name; ranking is left to :func:`pubcite.report.rank_discipline`.
    Publishers with no admitted record in a discipline are omitted.
    """
    series = series or SeriesPolicy()
    resolver = _Resolver(aliases, taxonomy, corpus.records)
    excluded = _series_exclusions(resolver, corpus, series, shards)
    tallies = _tally_sharded(resolver, corpus.records, mode, excluded, shards)
    return _by_discipline(tallies, taxonomy)


def discipline_overview(aggregation: Aggregation) -> list[DisciplineOverviewRow]:
    overview = []
    for discipline, rows in aggregation.items():
        total = _Tally()
        for row in rows:
            total.merge(
                _Tally(
                    books=row.books,
                    chapters=row.chapters,
                    citations=row.total_citations,
                    uncited=row.uncited_items,
                )
            )
        overview.append(DisciplineOverviewRow(discipline=discipline, **total.counts()))
    return overview


def corpus_summary(
    corpus: Corpus,
    taxonomy: Taxonomy,
    selected_disciplines: Optional[Iterable[str]] = None,
) -> CorpusSummary:
    selected = frozenset(
        taxonomy.disciplines if selected_disciplines is None else selected_disciplines
    )
    total, chosen = _Tally(), _Tally()
    for record in corpus:
        total.add(record)
        if disciplines_for(record.categories, taxonomy) & selected:
            chosen.add(record)
    return CorpusSummary(
        total_books=total.books,
        total_chapters=total.chapters,
        selected_books=chosen.books,
        selected_chapters=chosen.chapters,
    )


def correlation_items_books(rows: Sequence[IndicatorRow]) -> float:
    """
    Pearson correlation between ``total_items`` and ``books`` across rows.
    """
    if len(rows) < 2:
        raise UndefinedCorrelation("need at least two rows")

    xs = np.array([row.total_items for row in rows], dtype=float)
    ys = np.array([row.books for row in rows], dtype=float)
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise UndefinedCorrelation("total_items or books is constant across rows")
    return float(np.corrcoef(xs, ys)[0, 1])
