"""Shared fixture-loading helpers."""

from pathlib import Path

import pytest

from driftqite import hamio

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURE_DIR / name


def load_fixture(name: str):
    return hamio.load(fixture_path(name))


@pytest.fixture(scope="session")
def h2_doc():
    return load_fixture("h2_0.74.json")


@pytest.fixture(scope="session")
def h4_doc():
    return load_fixture("h4_1.50.json")


@pytest.fixture(scope="session")
def lih_doc():
    return load_fixture("lih_1.60.json")
