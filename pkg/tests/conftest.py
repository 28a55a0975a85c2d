import pytest

import pubcite.ingest
import pubcite.normalize
import pubcite.taxonomy

from . import published_tables


@pytest.fixture(scope="session")
def taxonomy():
    return pubcite.taxonomy.default_taxonomy()


@pytest.fixture(scope="session")
def aliases():
    return pubcite.normalize.default_aliases()


@pytest.fixture(scope="session")
def ils_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("records") / "fix_ils.tsv"
    path.write_text(published_tables.ils_record_file(), encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def full_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("records") / "fix_all.tsv"
    path.write_text(published_tables.full_records(), encoding="utf-8")
    return path


@pytest.fixture
def write_records(tmp_path):
    """Write a record file from data lines (header added)."""

    def write(*lines, name="records.tsv"):
        path = tmp_path / name
        body = "".join(line + "\n" for line in lines)
        path.write_text(pubcite.ingest.RECORD_HEADER + "\n" + body, encoding="utf-8")
        return path

    return write
