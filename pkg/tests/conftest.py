from pathlib import Path

import pytest

from akg import FuzzyContext, TaxonomyDictionary, build_lattice

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "akg" / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def sample_context() -> FuzzyContext:
    return FuzzyContext.load(DATA_DIR / "sample_context.json")


@pytest.fixture(scope="session")
def sample_lattice(sample_context):
    return build_lattice(sample_context)


@pytest.fixture(scope="session")
def taxonomy() -> TaxonomyDictionary:
    return TaxonomyDictionary.load(DATA_DIR / "taxonomy.json")


@pytest.fixture(scope="session")
def table_csv() -> Path:
    return DATA_DIR / "aircraft_tickets.csv"
