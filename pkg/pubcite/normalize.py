"""
Publisher name canonicalization: deterministic key rules plus an explicit
alias table. No fuzzy merging happens here; near-miss detection in
:func:`audit_variants` is advisory only.
"""

import collections
import itertools
import logging

from dataclasses import dataclass
from importlib import resources
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Tuple

from .errors import (
    AliasChain,
    AliasConflict,
    EmptyAfterNormalization,
    InputError,
    MalformedTable,
)
from .model import Corpus, PublisherId
from .utilities import Source, collapse_whitespace, iter_table_rows, read_text

logger = logging.getLogger(__name__)

_STRIPPED = str.maketrans({".": None, ",": None, "'": None, '"': None, "-": " "})


def normalize_key(raw: str) -> str:
    key = collapse_whitespace(raw.translate(_STRIPPED).upper())
    if not key:
        raise EmptyAfterNormalization(raw)
    return key


@dataclass(frozen=True)
class AliasTable:
    entries: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "entries", MappingProxyType(dict(self.entries)))
        for variant, canonical in self.entries.items():
            for name in (variant, canonical):
                if normalize_key(name) != name:
                    raise InputError(f"alias entry {name!r} is not normalized")
            if self.entries.get(canonical, canonical) != canonical:
                raise AliasChain(variant, canonical)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[str, str]]) -> "AliasTable":
        entries: dict[str, str] = {}
        for variant, canonical in pairs:
            key, target = normalize_key(variant), normalize_key(canonical)
            if entries.setdefault(key, target) != target:
                raise AliasConflict(variant)
        return cls(entries)

    def resolve(self, key: str) -> str:
        return self.entries.get(key, key)

    def __len__(self) -> int:
        return len(self.entries)


EMPTY_ALIASES = AliasTable({})


def load_aliases(source: Source) -> AliasTable:
    """
    Load a ``variant<TAB>canonical`` alias file. ``#`` lines are comments.
    """
    pairs = []
    for line_no, cells in iter_table_rows(read_text(source)):
        if len(cells) != 2 or not all(cells):
            raise MalformedTable(line_no, "expected variant<TAB>canonical")
        pairs.append((line_no, cells[0], cells[1]))

    try:
        table = AliasTable.from_pairs((v, c) for _, v, c in pairs)
    except EmptyAfterNormalization as exc:
        line_no = next(n for n, v, c in pairs if exc.raw in (v, c))
        raise MalformedTable(line_no, str(exc)) from exc

    logger.debug("Loaded %d publisher aliases", len(table))
    return table


def default_aliases() -> AliasTable:
    return load_aliases(default_aliases_text().encode("utf-8"))


def default_aliases_text() -> str:
    return resources.files("pubcite").joinpath("data/aliases.tsv").read_text("utf-8")


def canonicalize(raw: str, aliases: AliasTable) -> PublisherId:
    return PublisherId(aliases.resolve(normalize_key(raw)))


@dataclass(frozen=True)
class VariantCluster:
    publisher: PublisherId
    # (raw string, record count), most frequent first
    variants: Tuple[Tuple[str, int], ...]

    @property
    def records(self) -> int:
        return sum(count for _, count in self.variants)


@dataclass(frozen=True)
class NearMiss:
    first: PublisherId
    second: PublisherId
    differing_token: str


@dataclass(frozen=True)
class AuditReport:
    clusters: Tuple[VariantCluster, ...]
    near_misses: Tuple[NearMiss, ...]


def _single_token_difference(a: str, b: str) -> Optional[str]:
    """
    Return the differing token when two keys differ by exactly one token
    (one added, removed or substituted), otherwise ``None``.
    """
    tokens_a, tokens_b = a.split(" "), b.split(" ")
    if len(tokens_a) > len(tokens_b):
        tokens_a, tokens_b = tokens_b, tokens_a

    if len(tokens_b) == len(tokens_a) + 1:
        for i in range(len(tokens_b)):
            if tokens_b[:i] + tokens_b[i + 1 :] == tokens_a:
                return tokens_b[i]
        return None

    if len(tokens_a) == len(tokens_b) > 1:
        diffs = [(x, y) for x, y in zip(tokens_a, tokens_b) if x != y]
        if len(diffs) == 1:
            return "/".join(sorted(diffs[0]))
    return None


def _near_misses(publishers: Iterable[PublisherId]) -> Tuple[NearMiss, ...]:
    # Keys one token apart share a bucket: either the shorter key equals the
    # longer one minus a token, or both lose the same position.
    buckets: dict[Tuple[str, ...], set] = collections.defaultdict(set)
    for publisher in publishers:
        tokens = tuple(publisher.canonical_name.split(" "))
        buckets[tokens].add(publisher)
        for i in range(len(tokens)):
            buckets[tokens[:i] + tokens[i + 1 :]].add(publisher)

    found = {}
    for members in buckets.values():
        for first, second in itertools.combinations(sorted(members), 2):
            if (first, second) in found:
                continue
            token = _single_token_difference(
                first.canonical_name, second.canonical_name
            )
            if token is not None:
                found[first, second] = NearMiss(first, second, token)
    return tuple(found[pair] for pair in sorted(found))


def audit_variants(corpus: Corpus, aliases: AliasTable) -> AuditReport:
    counts: dict[PublisherId, collections.Counter] = collections.defaultdict(
        collections.Counter
    )
    for record in corpus:
        counts[canonicalize(record.raw_publisher, aliases)][record.raw_publisher] += 1

    clusters = tuple(
        VariantCluster(
            publisher=publisher,
            variants=tuple(
                sorted(counts[publisher].items(), key=lambda item: (-item[1], item[0]))
            ),
        )
        for publisher in sorted(counts)
    )
    return AuditReport(clusters=clusters, near_misses=_near_misses(counts))
