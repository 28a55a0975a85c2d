import logging

from dataclasses import dataclass
from enum import Enum


class FindingKind(Enum):
    ORPHAN_CHAPTER = "orphan-chapter"
    UNMAPPED_CATEGORY = "unmapped-category"
    SERIES_DISTORTION = "series-distortion"


@dataclass(frozen=True)
class Finding:
    """
    A non-fatal diagnostic. Findings are reported on stderr and never change
    the data that gets aggregated.
    """

    kind: FindingKind
    subject: str
    value: str | None = None

    def message(self) -> str:
        match self.kind:
            case FindingKind.ORPHAN_CHAPTER:
                text = f"chapter {self.subject} points to missing book {self.value}"
            case FindingKind.UNMAPPED_CATEGORY:
                text = (
                    f"category {self.subject!r} maps to no discipline "
                    f"({self.value} records)"
                )
            case _:
                text = f"{self.subject}: {self.value}"
        return f"[{self.kind.value}] {text}"

    def log(self, logger: logging.Logger) -> None:
        logger.warning("%s", self.message())
