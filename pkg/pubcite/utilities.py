import io

from pathlib import Path
from typing import IO, Iterator, Tuple, Union

from .errors import InputError

Source = Union[str, Path, bytes, IO[str], IO[bytes]]


def read_text(source: Source) -> str:
    """
    Read a UTF-8 input from a path, raw bytes or an open stream.

    Usage:

    >>> from pubcite.utilities import read_text
    >>> text = read_text("records.tsv")
    """
    if isinstance(source, (str, Path)):
        data = Path(source).read_bytes()
    elif isinstance(source, bytes):
        data = source
    else:
        data = source.read()

    if isinstance(data, bytes):
        # A leading BOM is tolerated; everything else must be strict UTF-8.
        try:
            return data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise InputError(f"Input is not valid UTF-8: {exc}") from exc
    return data


def split_lines(text: str) -> list[str]:
    # Only LF (and CRLF) end a line; other Unicode separators are data.
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    return [line[:-1] if line.endswith("\r") else line for line in lines]


def collapse_whitespace(text: str) -> str:
    return " ".join(text.split())


def iter_table_rows(text: str) -> Iterator[Tuple[int, list[str]]]:
    """
    Yield ``(line_no, cells)`` for every data row of a small TSV table.

    Blank lines and lines starting with ``#`` are skipped.
    """
    for line_no, line in enumerate(split_lines(text), start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        yield line_no, [cell.strip() for cell in line.split("\t")]


def write_output(data: bytes, out: Union[str, Path, None], stream: IO[bytes]) -> None:
    if out is None or str(out) == "-":
        stream.write(data)
        stream.flush()
        return
    with io.open(out, "wb") as f:
        f.write(data)
