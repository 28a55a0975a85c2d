import collections

from fractions import Fraction
from typing import Any, Generator, Iterable, Optional

from pubcite.analysis.findings import Finding, FindingKind
from pubcite.indicators import SeriesRow
from pubcite.model import Corpus, Taxonomy
from pubcite.taxonomy import lookup


def orphan_chapters(corpus: Corpus) -> Generator[Finding, Any, None]:
    books = corpus.book_ids()
    for record in corpus:
        if not record.is_book and record.parent_book_id not in books:
            yield Finding(
                kind=FindingKind.ORPHAN_CHAPTER,
                subject=record.record_id,
                value=record.parent_book_id,
            )


def unmapped_categories(
    corpus: Corpus, taxonomy: Taxonomy
) -> Generator[Finding, Any, None]:
    missing: collections.Counter = collections.Counter(
        category
        for record in corpus
        for category in record.categories
        if lookup(category, taxonomy) is None
    )
    for category in sorted(missing):
        yield Finding(
            kind=FindingKind.UNMAPPED_CATEGORY,
            subject=category,
            value=str(missing[category]),
        )


def corpus_findings(
    corpus: Corpus, taxonomy: Taxonomy
) -> Generator[Finding, Any, None]:
    yield from orphan_chapters(corpus)
    yield from unmapped_categories(corpus, taxonomy)


def series_findings(
    rows: Iterable[SeriesRow], threshold: Optional[Fraction] = None
) -> Generator[Finding, Any, None]:
    """
    Flag discipline/publisher pairs whose chapter counts look inflated by
    book series: no book record at all, or more chapters per book than
    ``threshold``.
    """
    for row in rows:
        if not row.flagged(threshold):
            continue
        if row.ratio is None:
            detail = f"{row.chapters} chapters but no book records"
        else:
            detail = f"{float(row.ratio):.2f} chapters per book"
        yield Finding(
            kind=FindingKind.SERIES_DISTORTION,
            subject=f"{row.publisher} in {row.discipline}",
            value=detail,
        )
