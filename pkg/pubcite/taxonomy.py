import logging

from importlib import resources
from typing import Iterable, Optional

from .errors import DuplicateCategory, MalformedTable, UnknownDiscipline, UnknownField
from .model import Taxonomy
from .utilities import Source, collapse_whitespace, iter_table_rows, read_text

logger = logging.getLogger(__name__)


def category_key(category: str) -> str:
    return collapse_whitespace(category).casefold()


def load_taxonomy(source: Source) -> Taxonomy:
    """
    Load a ``category<TAB>discipline[<TAB>field]`` file.

    Disciplines keep the order of their first appearance, which is the order
    overviews are rendered in.
    """
    entries: dict[str, str] = {}
    disciplines: dict[str, None] = {}
    fields: dict[str, str] = {}

    for line_no, cells in iter_table_rows(read_text(source)):
        if len(cells) not in (2, 3) or not all(cells):
            raise MalformedTable(
                line_no, "expected category<TAB>discipline[<TAB>field]"
            )
        category, discipline = cells[0], collapse_whitespace(cells[1])

        key = category_key(category)
        if entries.setdefault(key, discipline) != discipline:
            raise DuplicateCategory(category)
        disciplines.setdefault(discipline)

        if len(cells) == 3:
            broad = collapse_whitespace(cells[2])
            if fields.setdefault(discipline, broad) != broad:
                raise MalformedTable(
                    line_no, f"discipline {discipline!r} assigned to two fields"
                )

    taxonomy = Taxonomy(entries=entries, disciplines=tuple(disciplines), fields=fields)
    logger.debug(
        "Loaded taxonomy: %d categories, %d disciplines",
        len(entries),
        len(taxonomy.disciplines),
    )
    return taxonomy


def default_taxonomy_text() -> str:
    return resources.files("pubcite").joinpath("data/taxonomy.tsv").read_text("utf-8")


def default_taxonomy() -> Taxonomy:
    return load_taxonomy(default_taxonomy_text().encode("utf-8"))


def lookup(category: str, taxonomy: Taxonomy) -> Optional[str]:
    return taxonomy.entries.get(category_key(category))


def disciplines_for(categories: Iterable[str], taxonomy: Taxonomy) -> frozenset[str]:
    return frozenset(
        discipline
        for discipline in (lookup(category, taxonomy) for category in categories)
        if discipline is not None
    )


def resolve_discipline(name: str, taxonomy: Taxonomy) -> str:
    """
    Return the display name of a discipline, matched case-insensitively.
    """
    wanted = category_key(name)
    for discipline in taxonomy.disciplines:
        if category_key(discipline) == wanted:
            return discipline
    raise UnknownDiscipline(name, taxonomy.disciplines)


def disciplines_in_field(name: str, taxonomy: Taxonomy) -> tuple[str, ...]:
    wanted = category_key(name)
    selected = tuple(
        discipline
        for discipline in taxonomy.disciplines
        if category_key(taxonomy.fields.get(discipline, "")) == wanted
    )
    if not selected:
        raise UnknownField(name, sorted(set(taxonomy.fields.values())))
    return selected
