import collections

from fractions import Fraction

import hypothesis.strategies as st

from hypothesis import HealthCheck, given, settings

import pubcite.indicators
import pubcite.ingest
import pubcite.normalize
import pubcite.report
import pubcite.taxonomy

from pubcite.errors import EmptyAfterNormalization
from pubcite.indicators import CountMode, SeriesAction, SeriesPolicy
from pubcite.model import BibRecord, Corpus, DocType
from pubcite.normalize import AliasTable

TAXONOMY = pubcite.taxonomy.default_taxonomy()
ALIASES = pubcite.normalize.default_aliases()

PUBLISHERS = [
    "Routledge",
    "ROUTLEDGE",
    "Springer-Verlag Berlin",
    "Springer",
    "Chandos Publ.",
    "IOS Press",
    "Nova Science Publishers, Inc",
]
CATEGORIES = [
    "Anthropology",
    "Archaeology",
    "Law",
    "Sociology",
    "Philosophy",
    "Ethics",
    "Poetry",
    "Information Science & Library Science",
    "Unmapped Category",
]

_entries = st.tuples(
    st.sampled_from(PUBLISHERS),
    st.frozensets(st.sampled_from(CATEGORIES), min_size=1, max_size=3),
    st.integers(2006, 2011),
    st.integers(0, 40),
    st.booleans(),
    st.integers(0, 10_000),
)


@st.composite
def corpora(draw, max_size=500):
    entries = draw(st.lists(_entries, min_size=1, max_size=max_size))
    records = []
    book_ids = []
    for i, (publisher, categories, year, citations, chapter, parent) in enumerate(
        entries
    ):
        if chapter and book_ids:
            records.append(
                BibRecord(
                    f"r{i:04d}",
                    DocType.CHAPTER,
                    publisher,
                    book_ids[parent % len(book_ids)],
                    year,
                    categories,
                    citations,
                )
            )
        else:
            book_ids.append(f"r{i:04d}")
            records.append(
                BibRecord(
                    f"r{i:04d}",
                    DocType.BOOK,
                    publisher,
                    None,
                    year,
                    categories,
                    citations,
                )
            )
    return Corpus.of(records)


def _reference(corpus):
    """Per-record loop over every (discipline, publisher) assignment."""
    totals = collections.defaultdict(lambda: [0, 0, 0, 0])
    for record in corpus:
        publisher = pubcite.normalize.canonicalize(record.raw_publisher, ALIASES)
        disciplines = set()
        for category in record.categories:
            discipline = pubcite.taxonomy.lookup(category, TAXONOMY)
            if discipline is not None:
                disciplines.add(discipline)
        for discipline in disciplines:
            counts = totals[discipline, publisher]
            counts[0 if record.is_book else 1] += 1
            counts[2] += record.citations
            counts[3] += record.citations == 0
    return totals


@settings(
    max_examples=1000,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
@given(corpora())
def test_aggregate_matches_reference_loop(corpus):
    aggregation = pubcite.indicators.aggregate(corpus, ALIASES, TAXONOMY)
    expected = _reference(corpus)

    found = {}
    for discipline, rows in aggregation.items():
        for row in rows:
            assert row.total_items == row.books + row.chapters
            found[discipline, row.publisher] = [
                row.books,
                row.chapters,
                row.total_citations,
                row.uncited_items,
            ]
    assert found == dict(expected)


@settings(max_examples=200, deadline=None)
@given(corpora(max_size=120), st.randoms(use_true_random=False), st.integers(1, 6))
def test_rendering_ignores_line_order_and_workers(corpus, rnd, workers):
    lines = [pubcite.ingest.format_record(record) for record in corpus]
    shuffled = list(lines)
    rnd.shuffle(shuffled)

    def rendered(body, workers):
        text = "".join(f"{line}\n" for line in [pubcite.ingest.RECORD_HEADER, *body])
        parsed = pubcite.ingest.load_corpus(text.encode("utf-8"), workers=workers)
        aggregation = pubcite.indicators.aggregate(
            parsed, ALIASES, TAXONOMY, shards=workers
        )
        report_set = pubcite.report.build_report_set(aggregation)
        return [pubcite.report.render(report_set, fmt) for fmt in ("csv", "json", "md")]

    assert rendered(shuffled, workers) == rendered(lines, 1)


_rationals = st.fractions(min_value=0, max_value=1000, max_denominator=10_000)


@settings(max_examples=10_000)
@given(_rationals, _rationals)
def test_round_avg_is_monotonic(a, b):
    low, high = sorted([a, b])
    assert Fraction(pubcite.report.round_avg(low)) <= Fraction(
        pubcite.report.round_avg(high)
    )


@settings(max_examples=10_000)
@given(
    st.fractions(min_value=0, max_value=1, max_denominator=10_000),
    st.fractions(min_value=0, max_value=1, max_denominator=10_000),
)
def test_round_pct_is_monotonic(a, b):
    low, high = sorted([a, b])
    assert int(pubcite.report.round_pct(low)[:-1]) <= int(
        pubcite.report.round_pct(high)[:-1]
    )


@given(_rationals)
def test_round_avg_is_within_half_a_hundredth(x):
    assert abs(Fraction(pubcite.report.round_avg(x)) - x) <= Fraction(1, 200)


@given(st.text(min_size=1, max_size=40))
def test_normalize_key_is_idempotent(raw):
    try:
        key = pubcite.normalize.normalize_key(raw)
    except EmptyAfterNormalization:
        return
    assert pubcite.normalize.normalize_key(key) == key
    assert key == key.strip() and "  " not in key


@settings(max_examples=200, deadline=None)
@given(
    corpora(max_size=80),
    st.lists(st.integers(2004, 2013), min_size=4, max_size=4).map(sorted),
)
def test_narrower_window_never_adds_records(corpus, years):
    wide_from, narrow_from, narrow_to, wide_to = years
    text = "".join(
        f"{line}\n"
        for line in [
            pubcite.ingest.RECORD_HEADER,
            *(pubcite.ingest.format_record(record) for record in corpus),
        ]
    )
    data = text.encode("utf-8")

    def ids(from_year, to_year):
        window = pubcite.ingest.YearWindow(from_year, to_year)
        return {r.record_id for r in pubcite.ingest.load_corpus(data, window)}

    assert ids(narrow_from, narrow_to) <= ids(wide_from, wide_to)


def _counts(aggregation):
    return {
        (discipline, row.publisher): (
            row.total_items,
            row.total_citations,
            row.uncited_items,
        )
        for discipline, rows in aggregation.items()
        for row in rows
    }


_slow = settings(
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)


@_slow
@given(corpora())
def test_books_and_chapters_modes_add_up_to_all(corpus):
    every, books, chapters = (
        _counts(pubcite.indicators.aggregate(corpus, ALIASES, TAXONOMY, mode=mode))
        for mode in (CountMode.ALL, CountMode.BOOKS_ONLY, CountMode.CHAPTERS_ONLY)
    )
    assert set(books) | set(chapters) == set(every)
    for key, expected in every.items():
        b = books.get(key, (0, 0, 0))
        c = chapters.get(key, (0, 0, 0))
        assert tuple(x + y for x, y in zip(b, c)) == expected


@_slow
@given(
    corpora(),
    st.fractions(min_value=Fraction(1, 4), max_value=50, max_denominator=100),
    st.sampled_from(CountMode),
)
def test_series_exclusion_caps_chapters_per_book(corpus, threshold, mode):
    policy = SeriesPolicy(threshold, SeriesAction.EXCLUDE)
    excluded = pubcite.indicators.aggregate(
        corpus, ALIASES, TAXONOMY, mode=mode, series=policy
    )
    every = pubcite.indicators.aggregate(corpus, ALIASES, TAXONOMY)
    full = {
        (discipline, row.publisher): row
        for discipline, rows in every.items()
        for row in rows
    }

    for discipline, rows in excluded.items():
        for row in rows:
            if row.books > 0:
                assert Fraction(row.chapters, row.books) <= threshold
            reference = full[discipline, row.publisher]
            assert row.books <= reference.books
            assert row.chapters <= reference.chapters


@_slow
@given(corpora(), st.sampled_from([None, ["Law"]]))
def test_csv_reads_back_to_the_same_bytes(corpus, disciplines):
    aggregation = pubcite.indicators.aggregate(corpus, ALIASES, TAXONOMY)
    report_set = pubcite.report.build_report_set(aggregation, disciplines)
    rendered = pubcite.report.render(report_set, "csv")
    assert pubcite.report.write_csv(*pubcite.report.read_csv(rendered)) == rendered


_KEYS = sorted({pubcite.normalize.normalize_key(name) for name in PUBLISHERS})


@st.composite
def alias_growth(draw):
    """A valid alias table and a prefix of its entries."""
    keys = draw(st.permutations(_KEYS))
    split = draw(st.integers(1, len(keys) - 1))
    variants, targets = keys[:split], keys[split:]
    pairs = [(variant, draw(st.sampled_from(targets))) for variant in variants]
    cut = draw(st.integers(0, len(pairs)))
    return AliasTable.from_pairs(pairs[:cut]), AliasTable.from_pairs(pairs)


@_slow
@given(corpora(), alias_growth())
def test_more_aliases_never_add_rows(corpus, tables):
    fewer, more = (
        {
            discipline: len(rows)
            for discipline, rows in pubcite.indicators.aggregate(
                corpus, table, TAXONOMY
            ).items()
        }
        for table in tables
    )
    assert set(more) == set(fewer)
    for discipline, count in more.items():
        assert count <= fewer[discipline]


@given(st.one_of(st.sampled_from(PUBLISHERS), st.text(min_size=1, max_size=40)))
def test_canonicalize_is_idempotent(raw):
    try:
        publisher = pubcite.normalize.canonicalize(raw, ALIASES)
    except EmptyAfterNormalization:
        return
    assert pubcite.normalize.canonicalize(str(publisher), ALIASES) == publisher
