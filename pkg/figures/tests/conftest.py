from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def s1_csv() -> Path:
    return DATA / "scenario1.csv"


@pytest.fixture(scope="session")
def s2_csv() -> Path:
    return DATA / "scenario2.csv"
