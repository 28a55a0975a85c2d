from typing import Iterable


class PubciteError(Exception):
    pass


class InputError(PubciteError):
    pass


class MalformedHeader(InputError):
    def __init__(self, found: str):
        self.found = found
        super().__init__(f"Unexpected header line: {found!r}")


class MalformedLine(InputError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Line {line_no}: {reason}")


class InvalidRecord(InputError):
    pass


class DuplicateRecordId(InputError):
    def __init__(self, record_id: str):
        self.record_id = record_id
        super().__init__(f"Duplicate record_id {record_id!r}")


class InvalidWindow(InputError):
    def __init__(self, from_year: int, to_year: int):
        self.from_year = from_year
        self.to_year = to_year
        super().__init__(f"Inverted year window: {from_year} > {to_year}")


class EmptyAfterNormalization(InputError):
    def __init__(self, raw: str):
        self.raw = raw
        super().__init__(f"Publisher name {raw!r} is empty after normalization")


class MalformedTable(InputError):
    def __init__(self, line_no: int, reason: str):
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Line {line_no}: {reason}")


class AliasConflict(InputError):
    def __init__(self, variant: str):
        self.variant = variant
        super().__init__(f"Variant {variant!r} maps to more than one publisher")


class AliasChain(InputError):
    def __init__(self, variant: str, canonical: str):
        self.variant = variant
        self.canonical = canonical
        super().__init__(
            f"Canonical name {canonical!r} (for {variant!r}) is itself "
            "an alias of another publisher"
        )


class DuplicateCategory(InputError):
    def __init__(self, category: str):
        self.category = category
        super().__init__(f"Category {category!r} maps to more than one discipline")


class _UnknownName(InputError):
    label = "name"

    def __init__(self, name: str, valid: Iterable[str]):
        self.name = name
        self.valid = tuple(valid)
        super().__init__(
            f"Unknown {self.label} {name!r}. Valid {self.label}s:\n  "
            + "\n  ".join(self.valid)
        )


class UnknownDiscipline(_UnknownName):
    label = "discipline"


class UnknownField(_UnknownName):
    label = "field"


class ConfigError(InputError):
    pass


class UndefinedCorrelation(PubciteError):
    pass


class UnsupportedFormat(PubciteError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"Unsupported output format {token!r}")
