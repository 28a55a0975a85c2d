"""
Domain vocabulary shared by every stage of the pipeline.

All values are immutable once built. Indicators are kept as exact integers
and ``Fraction`` values; rounding only happens in :mod:`pubcite.report`.
"""

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

from .errors import DuplicateRecordId, InputError, InvalidRecord


class DocType(Enum):
    BOOK = "BOOK"
    CHAPTER = "CHAPTER"


@dataclass(frozen=True)
class BibRecord:
    record_id: str
    doc_type: DocType
    raw_publisher: str
    parent_book_id: Optional[str]
    pub_year: int
    categories: frozenset[str]
    citations: int

    def __post_init__(self):
        if not self.record_id:
            raise InvalidRecord("empty record_id")
        if not self.raw_publisher.strip():
            raise InvalidRecord("empty publisher")
        if self.citations < 0:
            raise InvalidRecord(f"negative citations ({self.citations})")

        categories = frozenset(c.strip() for c in self.categories if c.strip())
        if not categories:
            raise InvalidRecord("no subject categories")
        object.__setattr__(self, "categories", categories)

        match self.doc_type:
            case DocType.BOOK if self.parent_book_id:
                raise InvalidRecord("a book cannot have a parent_book_id")
            case DocType.CHAPTER if not self.parent_book_id:
                raise InvalidRecord("a chapter needs a parent_book_id")

    @property
    def is_book(self) -> bool:
        return self.doc_type is DocType.BOOK


@dataclass(frozen=True)
class Corpus:
    """
    A set of records with unique ids. Records are kept sorted by id so that
    equality is set equality and iteration is deterministic.
    """

    records: tuple[BibRecord, ...] = ()

    @classmethod
    def of(cls, records: Iterable[BibRecord]) -> "Corpus":
        ordered = tuple(sorted(records, key=lambda r: r.record_id))
        for previous, current in zip(ordered, ordered[1:]):
            if previous.record_id == current.record_id:
                raise DuplicateRecordId(current.record_id)
        return cls(ordered)

    def __iter__(self) -> Iterator[BibRecord]:
        return iter(self.records)

    def __len__(self) -> int:
        return len(self.records)

    def book_ids(self) -> frozenset[str]:
        return frozenset(r.record_id for r in self.records if r.is_book)


@dataclass(frozen=True, order=True)
class PublisherId:
    canonical_name: str

    def __post_init__(self):
        from .normalize import normalize_key

        if not self.canonical_name:
            raise InputError("empty publisher id")
        if normalize_key(self.canonical_name) != self.canonical_name:
            raise InputError(
                f"publisher id {self.canonical_name!r} is not in normalized form"
            )

    def __str__(self) -> str:
        return self.canonical_name


@dataclass(frozen=True)
class Taxonomy:
    """
    Flat mapping from subject categories to disciplines.

    ``entries`` is keyed by the normalized category (see
    :func:`pubcite.taxonomy.category_key`); ``fields`` optionally groups
    disciplines into broad fields.
    """

    entries: Mapping[str, str]
    disciplines: tuple[str, ...]
    fields: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        object.__setattr__(self, "fields", MappingProxyType(dict(self.fields)))
        known = set(self.disciplines)
        for discipline in self.entries.values():
            if discipline not in known:
                raise InputError(f"discipline {discipline!r} is not declared")


@dataclass(frozen=True)
class IndicatorCounts:
    total_items: int
    books: int
    chapters: int
    total_citations: int
    uncited_items: int

    def __post_init__(self):
        if self.total_items != self.books + self.chapters:
            raise InvalidRecord("total_items must equal books + chapters")
        if self.total_items <= 0:
            raise InvalidRecord("indicator rows need at least one item")
        if not 0 <= self.uncited_items <= self.total_items:
            raise InvalidRecord("uncited_items out of range")
        if self.total_citations < 0:
            raise InvalidRecord("negative total_citations")

    @property
    def avg_cit(self) -> Fraction:
        return Fraction(self.total_citations, self.total_items)

    @property
    def non_cit(self) -> Fraction:
        return Fraction(self.uncited_items, self.total_items)


@dataclass(frozen=True, kw_only=True)
class IndicatorRow(IndicatorCounts):
    publisher: PublisherId


@dataclass(frozen=True, kw_only=True)
class DisciplineOverviewRow(IndicatorCounts):
    discipline: str


@dataclass(frozen=True)
class CorpusSummary:
    total_books: int
    total_chapters: int
    selected_books: int = 0
    selected_chapters: int = 0

    @classmethod
    def from_counts(
        cls,
        total_books: int,
        total_chapters: int,
        selected_books: int = 0,
        selected_chapters: int = 0,
    ) -> "CorpusSummary":
        return cls(total_books, total_chapters, selected_books, selected_chapters)

    @property
    def total_items(self) -> int:
        return self.total_books + self.total_chapters

    @property
    def selected_items(self) -> int:
        return self.selected_books + self.selected_chapters

    @property
    def chapters_per_book(self) -> Optional[Fraction]:
        if self.total_books == 0:
            return None
        return Fraction(self.total_chapters, self.total_books)

    @property
    def selected_chapters_per_book(self) -> Optional[Fraction]:
        if self.selected_books == 0:
            return None
        return Fraction(self.selected_chapters, self.selected_books)

    @property
    def field_share(self) -> Optional[Fraction]:
        if self.total_items == 0:
            return None
        return Fraction(self.selected_items, self.total_items)
